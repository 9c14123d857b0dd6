// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "walklt/rng.hpp"
#include "walklt/stats.hpp"

using namespace walklt;

namespace {

std::vector<double> exp_draws(double rate, long long n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i) out.push_back(-std::log(rng.next_open()) / rate);
  return out;
}

std::vector<long long> geometric_draws(double p, long long n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<long long> out;
  out.reserve(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i)
    out.push_back(1 + static_cast<long long>(std::floor(std::log(rng.next_open()) /
                                                        std::log1p(-p))));
  return out;
}

}  // namespace

TEST_CASE("special functions against reference values") {
  CHECK(gamma_q(0.5, 0.5) == doctest::Approx(0.31731050786).epsilon(1e-9));
  CHECK(gamma_q(1.0, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(gamma_q(2.5, 0.0) == 1.0);
  CHECK(ks_sf(1.3581) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(ks_sf(1.6276) == doctest::Approx(0.01).epsilon(2e-3));
}

TEST_CASE("geometric fit: degenerate input, synthetic recovery") {
  std::vector<long long> ones(1000, 1);
  CHECK(fit_geometric(ones).p_hat == doctest::Approx(1.0));
  CHECK_THROWS(fit_geometric({}));
  CHECK_THROWS(fit_geometric({0, 1, 2}));

  std::vector<long long> draws = geometric_draws(0.3, 100'000, 101);
  GeometricFit fit = fit_geometric(draws);
  CHECK(std::abs(fit.p_hat - 0.3) < 4 * fit.stderr_);
}

TEST_CASE("self-test calibration: >= 95 of 100 seeded repetitions pass at 1%") {
  int ks_pass = 0, chi_pass = 0, mom_pass = 0;
  for (std::uint64_t rep = 0; rep < 100; ++rep) {
    std::vector<double> e = exp_draws(0.5, 5000, derive_seed(4242, rep));
    TestReport ks = ks_test(
        e, [](double x) { return x <= 0 ? 0.0 : 1.0 - std::exp(-0.5 * x); }, 0.01);
    ks_pass += ks.pass;

    std::vector<long long> g = geometric_draws(0.2, 5000, derive_seed(777, rep));
    std::vector<long long> hist;
    for (const long long v : g) {
      if (static_cast<std::size_t>(v) >= hist.size())
        hist.resize(static_cast<std::size_t>(v) + 1, 0);
      ++hist[static_cast<std::size_t>(v)];
    }
    TestReport chi = chi_square_gof(
        hist, 0,
        [](long long k) {
          return k >= 1 ? 0.2 * std::pow(0.8, static_cast<double>(k - 1)) : 0.0;
        },
        0.01);
    chi_pass += chi.pass;

    std::vector<double> ed(e.begin(), e.end());
    mom_pass += moment_compare(ed, 1, 2.0, 4.0).pass;
  }
  CHECK(ks_pass >= 95);
  CHECK(chi_pass >= 95);
  CHECK(mom_pass >= 95);
}

TEST_CASE("wrong references are rejected (power)") {
  std::vector<double> e = exp_draws(0.5, 100'000, 2020);
  TestReport ks = ks_test(
      e, [](double x) { return x <= 0 ? 0.0 : 1.0 - std::exp(-1.0 * x); }, 0.01);
  CHECK_FALSE(ks.pass);
  CHECK_FALSE(moment_compare(e, 1, 2.5, 4.0).pass);
}

TEST_CASE("empirical laplace transform") {
  std::vector<double> zeros(5000, 0.0);
  auto pts = empirical_laplace(zeros, {0.5, 1.0, 2.0});
  for (const auto& p : pts) CHECK(p.value == doctest::Approx(1.0));

  std::vector<double> e = exp_draws(0.5, 200'000, 3030);
  auto lp = empirical_laplace(e, {1.0});
  CHECK(std::abs(lp[0].value - 1.0 / 3.0) < 4 * lp[0].stderr_);
}

TEST_CASE("moment compare orders and guards") {
  std::vector<double> e = exp_draws(1.0, 200'000, 4040);
  CHECK(moment_compare(e, 2, 2.0, 4.0).pass);         // E X^2 = 2 for Exp(1)
  CHECK(moment_compare(e, 3, 6.0, 4.0, 0.01).pass);   // E X^3 = 6
  CHECK_THROWS(moment_compare(e, 5, 1.0, 4.0));
}

TEST_CASE("tail slope: exact line and domain guards") {
  std::vector<double> xs = {25, 50, 100, 200, 400};
  std::vector<double> ys;
  for (const double x : xs) ys.push_back(1.0 / (2.0 * x));
  SlopeFit fit = tail_slope(xs, ys);
  CHECK(std::abs(fit.slope + 1.0) < 1e-10);
  CHECK_THROWS(tail_slope({1.0, 2.0}, {0.5, -0.5}));
  CHECK_THROWS(tail_slope({1.0}, {0.5}));
}

TEST_CASE("two-sample chi-square separates equal from shifted laws") {
  std::vector<long long> a(40, 0), b(40, 0), c(40, 0);
  Rng rng(5050);
  for (int i = 0; i < 30'000; ++i) {
    ++a[rng.next_u64() % 20];
    ++b[rng.next_u64() % 20];
    ++c[2 + rng.next_u64() % 20];
  }
  CHECK(two_sample_chi_square(a, b, 0.01).pass);
  CHECK_FALSE(two_sample_chi_square(a, c, 0.01).pass);
}

TEST_CASE("dithered rescaling makes lattice geometric data pass a KS test") {
  const double p = 0.01;
  std::vector<long long> g = geometric_draws(p, 100'000, 6060);
  Rng rng(6061);
  std::vector<double> x = dither_rescale(g, 100.0, rng);  // ~ Exp(1) after rescale
  const double rate = 1.0 / (std::accumulate(x.begin(), x.end(), 0.0) / x.size());
  TestReport ks = ks_test(
      x, [rate](double t) { return t <= 0 ? 0.0 : 1.0 - std::exp(-rate * t); }, 0.01);
  CHECK(ks.pass);
}

TEST_CASE("seed derivation: deterministic, collision-free, master-sensitive") {
  CHECK(derive_seed(123, 45) == derive_seed(123, 45));
  CHECK(derive_seed(123, 0) != derive_seed(124, 0));
  std::vector<std::uint64_t> seen;
  seen.reserve(1'000'000);
  for (std::uint64_t i = 0; i < 1'000'000; ++i) seen.push_back(derive_seed(999, i));
  std::sort(seen.begin(), seen.end());
  CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
}
