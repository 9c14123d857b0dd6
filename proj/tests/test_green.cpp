// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "walklt/green.hpp"
#include "walklt/ladder.hpp"

using namespace walklt;

namespace {

IncrementLaw valid(const std::string& name) {
  IncrementLaw law = bundled_law(name);
  REQUIRE(validate(law).valid);
  return law;
}

}  // namespace

TEST_CASE("simple-walk Green values match the gambler's-ruin closed form") {
  IncrementLaw law = valid("simple");
  CHECK(green_sum(law, 1, 3, 1e-8).value == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(green_sum(law, 3, 1, 1e-8).value == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(green_sum(law, 2, 2, 1e-8).value == doctest::Approx(3.0).epsilon(1e-10));
  // G(x,y) = 2 min(x,y) - [x == y] over a grid
  GreenSolver solver(law, 256);
  for (long long x = 1; x <= 30; ++x)
    for (long long y = 1; y <= 30; ++y) {
      const double expect = 2.0 * std::min(x, y) - (x == y ? 1.0 : 0.0);
      CHECK(solver.visits(x, y, false) == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("green symmetry and monotonicity") {
  for (const char* name : {"simple", "sigma4"}) {
    IncrementLaw law = valid(name);
    GreenSolver solver(law, 200);
    for (long long x = 1; x <= 20; ++x)
      for (long long y = x + 1; y <= 20; ++y)
        CHECK(solver.visits(x, y, false) ==
              doctest::Approx(solver.visits(y, x, false)).epsilon(1e-9));
    for (long long y = 10; y <= 12; ++y) {
      double prev = -1;
      for (long long x = 1; x <= y; ++x) {
        const double g = solver.visits(x, y, false);
        CHECK(g >= prev - 1e-12);
        prev = g;
      }
    }
  }
}

TEST_CASE("scaled green: exact simple-walk values and lazy-walk convergence") {
  IncrementLaw law = valid("simple");
  CHECK(scaled_green(law, 1.0, 1.0, 200) == doctest::Approx(1.995).epsilon(1e-10));
  CHECK(scaled_green(law, 0.25, 0.75, 200) == doctest::Approx(0.5).epsilon(1e-10));

  IncrementLaw lazy = valid("lazy");
  double prev_gap = 1e9;
  for (long long N : {100, 200, 400}) {
    const double gap = std::abs(scaled_green(lazy, 0.5, 0.5, N) - 1.0);
    CHECK(gap < prev_gap + 1e-12);
    prev_gap = gap;
  }
  CHECK(prev_gap < 4.0 / 400.0);
}

TEST_CASE("hitting probabilities: ruin values and the escape identity") {
  IncrementLaw law = valid("simple");
  for (long long N : {10, 50, 200}) {
    GreenSolver solver(law, 4 * N);
    for (long long x : {1LL, N / 2, N})
      CHECK(solver.hitting_prob(x, N) ==
            doctest::Approx(static_cast<double>(x) / N).epsilon(1e-10));
    CHECK(solver.hitting_prob(0, N) == doctest::Approx(0.5 / N).epsilon(1e-10));
    // escape probability 1/G0(N,N) matches the limit rate c * N / c^-1(N)
    const double p_escape = 1.0 / solver.visits(N, N, true);
    CHECK(p_escape == doctest::Approx(0.5 / N).epsilon(1e-10));
    CHECK(p_escape ==
          doctest::Approx(0.5 * N / inverse_norming(law, static_cast<double>(N)))
              .epsilon(1e-10));
  }
}

TEST_CASE("duality: the killed-walk sum from 0 reproduces h+") {
  for (const char* name : {"simple", "lazy", "sigma4"}) {
    IncrementLaw law = valid(name);
    RenewalTable hp = renewal_table(exact_ladder_pmf(law, LadderKind::StrictAscending), 60,
                                    CumConvention::LessEqual);
    GreenSolver solver(law, 400);
    for (long long l = 1; l <= 50; ++l)
      CHECK(std::abs(solver.visits(0, l, false) - hp.h[static_cast<std::size_t>(l)]) < 1e-8);
  }
}

TEST_CASE("descending-ladder identity: E_x L(tau-, l) equals U(x, l)") {
  for (const char* name : {"simple", "lazy", "sigma4"}) {
    IncrementLaw law = valid(name);
    LadderPair pair = exact_ladder_pair(law);
    RenewalTable hp = renewal_table(pair.ascending, 60, CumConvention::LessEqual);
    GreenSolver solver(law, 400);
    for (long long x = 0; x <= 3; ++x)
      for (long long l = std::max(x, 1LL); l <= 50; ++l)
        CHECK(std::abs(solver.visits(x, l, true) - compute_U(x, l, hp, pair.descending)) <
              1e-8);
  }
}

TEST_CASE("strip evolution conserves mass and lower-bounds the green sum") {
  IncrementLaw law = valid("sigma4");
  StripDp dp(law, 5, 40);
  for (int n = 0; n < 4000; ++n) {
    dp.step();
    CHECK(dp.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
  }
  GreenSolver solver(law, 40);
  // absorbing top undercounts: a strict lower bound, with deficit at most
  // overflow mass times the worst-case revisit count G0(y,y)
  for (long long y : {2LL, 5LL, 9LL}) {
    const double full = solver.visits(5, y, false);
    CHECK(dp.partial_green(y) <= full + 1e-12);
    CHECK(full - dp.partial_green(y) <=
          dp.overflow_mass() * solver.visits(y, y, true) + dp.surviving_mass() + 1e-9);
  }
}

TEST_CASE("green error handling") {
  IncrementLaw law = valid("simple");
  CHECK_THROWS_AS(green_sum(law, -1, 3, 1e-8), DomainError);
  CHECK_THROWS_AS(green_sum(law, 1, 0, 1e-8), DomainError);
  CHECK_THROWS_AS(green_sum(law, 1, 3, 1e-16), DomainError);  // unreachable tolerance
  IncrementLaw ht = valid("powertail15");
  CHECK_THROWS_AS(green_sum(ht, 1, 3, 1e-8), DomainError);
}
