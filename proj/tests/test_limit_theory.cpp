// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "walklt/ladder.hpp"
#include "walklt/limit_theory.hpp"

using namespace walklt;

namespace {

const AFunction a20 = [](double u, double v) { return a_20_closed(u, v); };

}  // namespace

TEST_CASE("closed form basics") {
  CHECK(a_20_closed(1, 1) == 2.0);
  CHECK(a_20_closed(0.25, 0.75) == 0.5);
  CHECK(a_20_closed(0.0, 3.0) == 0.0);
  CHECK_THROWS_AS(a_20_closed(-1, 1), DomainError);
}

TEST_CASE("quadrature reproduces the closed form") {
  CHECK(std::abs(a_20_quadrature(1, 1, 1e-8) - 2.0) < 1e-6);
  CHECK(std::abs(a_20_quadrature(0.5, 1.5, 1e-8) - 1.0) < 1e-6);
  CHECK(std::abs(a_20_quadrature(2, 2, 1e-8) - 4.0) < 1e-6);
  for (int i = 1; i <= 6; ++i)
    for (int j = 1; j <= 6; ++j) {
      const double u = i / 3.0, v = j / 3.0;
      CHECK(std::abs(a_20_quadrature(u, v, 1e-8) - a_20_closed(u, v)) < 1e-6);
    }
}

TEST_CASE("generic quadrature over the exact gaussian psi table") {
  PsiTable psi = PsiTable::exact_gaussian(8.0, 1601);
  CHECK(std::abs(a_generic_quadrature(1, 1, psi, 2.0, 1e-6) - 2.0) < 1e-4);
  CHECK(std::abs(a_generic_quadrature(0.5, 1.0, psi, 2.0, 1e-6) - 1.0) < 1e-4);
  // homogeneity of the alpha=2 limit: doubling both arguments doubles the value
  const double one = a_generic_quadrature(0.4, 0.7, psi, 2.0, 1e-6);
  const double two = a_generic_quadrature(0.8, 1.4, psi, 2.0, 1e-6);
  CHECK(std::abs(two - 2.0 * one) < 5e-4);

  PsiTable zero({0.0, 10.0}, {0.0, 10.0}, {{0.0, 0.0}, {0.0, 0.0}});
  CHECK(a_generic_quadrature(1, 1, zero, 2.0, 1e-6) == doctest::Approx(0.0));
}

TEST_CASE("psi table csv loading and range policy") {
  const std::string csv =
      "a,b,psi\n0,0,0\n0,1,0\n1,0,0\n1,1,0.5\n0,2,0\n1,2,0.25\n2,0,0\n2,1,0.25\n2,2,0.9\n";
  PsiTable t = PsiTable::from_csv(csv);
  CHECK(t(1.0, 1.0) == doctest::Approx(0.5));
  CHECK(t(0.5, 1.0) == doctest::Approx(0.25));
  CHECK_THROWS_AS(t(3.0, 1.0), DomainError);  // edge has not decayed
}

TEST_CASE("kac permutation sums") {
  CHECK(kac_moment_value(1.0, {1.0}, a20) == doctest::Approx(2.0));
  CHECK(kac_moment_value(1.0, {1.0, 1.0}, a20) == doctest::Approx(8.0));
  CHECK(kac_moment_value(1.0, {0.5, 1.0}, a20) == doctest::Approx(3.0));
  for (std::size_t m = 1; m <= 5; ++m) {
    std::vector<double> ones(m, 1.0);
    double factorial = 1;
    for (std::size_t k = 2; k <= m; ++k) factorial *= static_cast<double>(k);
    CHECK(kac_moment_value(1.0, ones, a20) ==
          doctest::Approx(factorial * std::pow(2.0, static_cast<double>(m))));
  }
  CHECK(kac_moment_value(1.0, {0.0, 1.0}, a20) == doctest::Approx(0.0));
  CHECK_THROWS_AS(kac_moment_value(1.0, std::vector<double>(9, 1.0), a20), DomainError);
}

TEST_CASE("kac from zero carries the renewal prefactor") {
  IncrementLaw law = bundled_law("simple");
  REQUIRE(validate(law).valid);
  RenewalTable hp = renewal_table(exact_ladder_pmf(law, LadderKind::StrictAscending), 300,
                                  CumConvention::LessEqual);
  const long long N = 100;
  CHECK(kac_from_zero({1.0}, a20, hp, law, N) == doctest::Approx(1.0));
  CHECK(kac_from_zero({0.5}, a20, hp, law, N) == doctest::Approx(1.0));
  CHECK(kac_from_zero({1.0, 1.0}, a20, hp, law, N) ==
        doctest::Approx(4.0 * static_cast<double>(N)));
}

TEST_CASE("exponential limit survival function and rate resolution") {
  CHECK(exponential_limit_sf(0.0, 0.5) == 1.0);
  CHECK(exponential_limit_sf(2.0, 0.5) == doctest::Approx(std::exp(-1.0)));
  IncrementLaw simple = bundled_law("simple");
  REQUIRE(validate(simple).valid);
  CHECK(conditional_exponential_rate(simple) == doctest::Approx(0.5));
  IncrementLaw s4 = bundled_law("sigma4");
  REQUIRE(validate(s4).valid);
  CHECK(conditional_exponential_rate(s4) == doctest::Approx(2.0));
  CHECK(LimitModel::gaussian(1.0).c_const == doctest::Approx(0.5));
}

TEST_CASE("field marginal laplace transform: values and limits") {
  CHECK(field_marginal_laplace(1.0, 1.0) == doctest::Approx(std::exp(-1.0 / 3.0)));
  CHECK(field_marginal_laplace(1.0, 0.0) == doctest::Approx(1.0));
  CHECK(field_marginal_laplace(1.0, 1e9) == doctest::Approx(std::exp(-0.5)).epsilon(1e-6));
}

TEST_CASE("marginal oracle equals the Poisson-exponential composition") {
  // number of excursions reaching the level is Poisson(x0/(2u)); each adds an
  // Exp(mean 2u) mass: E e^{-lam S} = exp(-rate (1 - (1+2u lam)^-1))
  for (const double u : {0.5, 1.0, 2.0})
    for (const double lam : {0.1, 0.5, 1.0, 3.0}) {
      const double rate = 1.0 / (2.0 * u);
      double series = 0, weight = std::exp(-rate), term = 1.0;
      for (int k = 0; k < 80; ++k) {
        series += weight * term;
        weight *= rate / (k + 1);
        term /= (1.0 + 2.0 * u * lam);
      }
      CHECK(field_marginal_laplace(u, lam) == doctest::Approx(series).epsilon(1e-12));
    }
}

TEST_CASE("laplace transform is completely monotone on a grid") {
  // complete monotonicity: sum_j (-1)^j C(k,j) f(x + jh) >= 0 for every order
  const double h = 0.05;
  for (int order = 1; order <= 4; ++order) {
    for (double lam = 0.1; lam < 3.0; lam += 0.17) {
      double diff = 0;
      for (int j = 0; j <= order; ++j) {
        double binom = 1;
        for (int t = 0; t < j; ++t) binom *= static_cast<double>(order - t) / (t + 1);
        diff += (j % 2 == 0 ? 1.0 : -1.0) * binom * field_marginal_laplace(1.0, lam + j * h);
      }
      CHECK(diff >= -1e-12);
    }
  }
}
