// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "walklt/increment_law.hpp"
#include "walklt/stats.hpp"

using namespace walklt;

namespace {

IncrementLaw valid(const std::string& name) {
  IncrementLaw law = bundled_law(name);
  REQUIRE(validate(law).valid);
  return law;
}

}  // namespace

TEST_CASE("bundled laws validate with the right periods") {
  IncrementLaw simple = bundled_law("simple");
  auto rep = validate(simple);
  CHECK(rep.valid);
  CHECK(rep.period == 2);

  IncrementLaw lazy = bundled_law("lazy");
  rep = validate(lazy);
  CHECK(rep.valid);
  CHECK(rep.period == 1);
  CHECK(lazy.sigma2 == doctest::Approx(0.5));

  IncrementLaw s4 = bundled_law("sigma4");
  rep = validate(s4);
  CHECK(rep.valid);
  CHECK(rep.period == 1);
  CHECK(s4.sigma2 == doctest::Approx(4.0));
}

TEST_CASE("a biased law is rejected with the offending mean") {
  IncrementLaw law = parse_law("name = biased\nsupport = -1:3/5 1:2/5\n");
  auto rep = validate(law);
  CHECK_FALSE(rep.valid);
  REQUIRE(rep.issues.size() == 1);
  CHECK(rep.issues[0].quantity == doctest::Approx(-0.2));
}

TEST_CASE("law parsing handles both finite and power-tail forms") {
  IncrementLaw fin = parse_law("name = l\nsupport = -2:1/4 0:1/2 2:1/4\n");
  CHECK(validate(fin).valid);
  CHECK(fin.sigma2 == doctest::Approx(2.0));

  IncrementLaw ht = parse_law("alpha = 1.5\nsymmetric = true\n");
  CHECK(validate(ht).valid);
  CHECK(ht.heavy_tail);

  CHECK_THROWS_AS(parse_law("support = -1:1/2 1:1/2\nalpha = 1.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_law("name = empty\n"), ConfigError);
}

TEST_CASE("sampling is a pure function of law and rng state") {
  IncrementLaw law = valid("sigma4");
  IncrementSampler s1(law), s2(law);
  Rng a(987), b(987), c(988);
  bool any_diff = false;
  for (int i = 0; i < 4096; ++i) {
    const long long x = s1.sample(a);
    CHECK(x == s2.sample(b));
    any_diff = any_diff || (x != s1.sample(c));
  }
  CHECK(any_diff);
}

TEST_CASE("simple walk frequencies sit within 4 stderr of 1/2") {
  IncrementLaw law = valid("simple");
  IncrementSampler s(law);
  Rng rng(2024);
  const int n = 1'000'000;
  long long ups = 0;
  for (int i = 0; i < n; ++i) {
    const long long x = s.sample(rng);
    CHECK((x == 1 || x == -1));
    ups += (x == 1);
  }
  const double se = std::sqrt(0.25 / n);
  CHECK(std::abs(static_cast<double>(ups) / n - 0.5) < 4 * se);
}

TEST_CASE("lazy walk empirical mean within 4 stderr of 0") {
  IncrementLaw law = valid("lazy");
  IncrementSampler s(law);
  Rng rng(77);
  const int n = 1'000'000;
  long long sum = 0;
  for (int i = 0; i < n; ++i) sum += s.sample(rng);
  const double se = std::sqrt(law.sigma2 / n);
  CHECK(std::abs(static_cast<double>(sum) / n) < 4 * se);
}

TEST_CASE("power-tail sampler matches the exact tail sums, slope -alpha") {
  IncrementLaw law = valid("powertail15");
  IncrementSampler s(law);
  Rng rng(5150);
  const int n = 1'000'000;
  const std::vector<long long> ks = {10, 30, 100, 300, 1000};
  std::vector<long long> exceed(ks.size(), 0);
  for (int i = 0; i < n; ++i) {
    const long long mag = std::llabs(s.sample(rng));
    for (std::size_t j = 0; j < ks.size(); ++j) exceed[j] += (mag > ks[j]);
  }
  std::vector<double> kd, freq;
  for (std::size_t j = 0; j < ks.size(); ++j) {
    const double p_exact = s.tail_prob(ks[j]);
    const double p_emp = static_cast<double>(exceed[j]) / n;
    const double se = std::sqrt(p_exact * (1 - p_exact) / n);
    CHECK(std::abs(p_emp - p_exact) < 4 * se);
    kd.push_back(static_cast<double>(ks[j]));
    freq.push_back(p_emp);
  }
  SlopeFit fit = tail_slope(kd, freq);
  CHECK(std::abs(fit.slope - (-1.5)) < 0.1);
}

TEST_CASE("norming closed forms and inverses") {
  IncrementLaw simple = valid("simple");
  CHECK(norming(simple, 100) == doctest::Approx(10.0));
  CHECK(inverse_norming(simple, 10) == doctest::Approx(100.0));

  IncrementLaw s4 = valid("sigma4");
  for (double N : {8.0, 40.0, 640.0})
    CHECK(inverse_norming(s4, N) == doctest::Approx(N * N / 4.0));

  IncrementLaw ht = valid("powertail15");
  const double base = inverse_norming(ht, 100.0) / std::pow(100.0, 1.5);
  for (double N : {1e2, 1e3, 1e4}) {
    const double r = inverse_norming(ht, N) / std::pow(N, 1.5);
    CHECK(std::abs(r / base - 1.0) < 1e-9);
  }

  for (const auto& name : bundled_law_names()) {
    IncrementLaw law = valid(name);
    double prev = 0;
    for (double N : {4.0, 16.0, 64.0, 256.0}) {
      CHECK(norming(law, inverse_norming(law, N)) == doctest::Approx(N).epsilon(1e-6));
      CHECK(inverse_norming(law, N) > prev);
      prev = inverse_norming(law, N);
    }
  }
}

TEST_CASE("zeta and tail sums agree with reference values") {
  CHECK(zeta(2.0) == doctest::Approx(std::numbers::pi * std::numbers::pi / 6).epsilon(1e-12));
  for (double s : {2.2, 2.5, 2.8}) {
    double partial = 0;
    for (int j = 1; j <= 50; ++j) partial += std::pow(j, -s);
    CHECK(power_tail_sum(50, s) == doctest::Approx(zeta(s) - partial).epsilon(1e-12));
  }
}
