// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "walklt/increment_law.hpp"
#include "walklt/ladder.hpp"
#include "walklt/stats.hpp"

using namespace walklt;

namespace {

IncrementLaw valid(const std::string& name) {
  IncrementLaw law = bundled_law(name);
  REQUIRE(validate(law).valid);
  return law;
}

// Finite-horizon absorbing DP for the first-passage height: a strict lower
// bound on each pmf entry plus the unresolved mass, bracketing the exact law
// independently of the factorization route.
struct DpBracket {
  std::vector<double> lower;
  double unresolved = 0.0;
};

DpBracket ladder_dp_bracket(const IncrementLaw& law, LadderKind kind, int depth,
                            int horizon) {
  const long long lo = law.min_step(), hi = law.max_step();
  const bool asc = kind == LadderKind::StrictAscending;
  // alive positions: x in {-depth..0} (ascending) or {1..depth} plus the
  // start at 0 (weak descending); state index = |x|
  std::vector<double> state(static_cast<std::size_t>(depth + 1), 0.0);
  state[0] = 1.0;
  const long long reach = asc ? hi : -lo;
  DpBracket out;
  out.lower.assign(static_cast<std::size_t>(reach + 1), 0.0);
  for (int n = 0; n < horizon; ++n) {
    std::vector<double> next(state.size(), 0.0);
    for (std::size_t s = 0; s < state.size(); ++s) {
      const double m = state[s];
      if (m == 0.0) continue;
      if (!asc && s == 0 && n > 0) continue;  // descending: 0 only alive at time 0
      const long long x = asc ? -static_cast<long long>(s) : static_cast<long long>(s);
      for (const auto& atom : law.support) {
        const long long pos = x + atom.value;
        const double p = atom.prob.to_double();
        const bool absorbed = asc ? pos >= 1 : pos <= 0;
        if (absorbed) {
          out.lower[static_cast<std::size_t>(asc ? pos : -pos)] += m * p;
        } else if (std::llabs(pos) <= depth) {
          next[static_cast<std::size_t>(std::llabs(pos))] += m * p;
        } else {
          out.unresolved += m * p;  // escaped the tracked strip
        }
      }
    }
    state = std::move(next);
  }
  out.unresolved += std::accumulate(state.begin(), state.end(), 0.0);
  return out;
}

}  // namespace

TEST_CASE("simple walk ladder laws: chi+ is a point mass, chi- is fair on {0,1}") {
  IncrementLaw law = valid("simple");
  LadderLaw up = exact_ladder_pmf(law, LadderKind::StrictAscending);
  REQUIRE(up.pmf.size() == 2);
  CHECK(up.pmf[1] == doctest::Approx(1.0).epsilon(1e-12));

  LadderLaw down = exact_ladder_pmf(law, LadderKind::WeakDescending);
  REQUIRE(down.pmf.size() == 2);
  CHECK(down.pmf[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(down.pmf[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("lazy walk ascends by exactly one") {
  IncrementLaw law = valid("lazy");
  LadderLaw up = exact_ladder_pmf(law, LadderKind::StrictAscending);
  CHECK(up.pmf[1] == doctest::Approx(1.0).epsilon(1e-12));
  LadderLaw down = exact_ladder_pmf(law, LadderKind::WeakDescending);
  CHECK(down.pmf[0] == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(down.pmf[1] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("heavy tails are rejected, as is an unvalidated law") {
  IncrementLaw ht = valid("powertail15");
  CHECK_THROWS_AS(exact_ladder_pmf(ht, LadderKind::StrictAscending), DomainError);
  IncrementLaw raw = bundled_law("simple");
  CHECK_THROWS_AS(exact_ladder_pmf(raw, LadderKind::StrictAscending), ConfigError);
}

TEST_CASE("ladder laws for the wide law satisfy the fluctuation identities") {
  IncrementLaw law = valid("sigma4");
  LadderPair pair = exact_ladder_pair(law);
  CHECK(pair.factorization_residual < 1e-12);
  CHECK(std::accumulate(pair.ascending.pmf.begin(), pair.ascending.pmf.end(), 0.0) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::accumulate(pair.descending.pmf.begin(), pair.descending.pmf.end(), 0.0) ==
        doctest::Approx(1.0).epsilon(1e-12));
  // E chi+ * E chi- = sigma^2 / 2 for mean-zero finite-variance walks
  CHECK(pair.ascending.mean() * pair.descending.mean() ==
        doctest::Approx(law.sigma2 / 2.0).epsilon(1e-10));
}

TEST_CASE("absorbing-DP brackets contain the factorized ladder laws") {
  for (const char* name : {"lazy", "sigma4"}) {
    IncrementLaw law = valid(name);
    for (LadderKind kind : {LadderKind::StrictAscending, LadderKind::WeakDescending}) {
      LadderLaw exact = exact_ladder_pmf(law, kind);
      DpBracket br = ladder_dp_bracket(law, kind, 400, 30'000);
      REQUIRE(br.unresolved < 0.05);
      for (std::size_t k = kind == LadderKind::StrictAscending ? 1 : 0;
           k < exact.pmf.size(); ++k) {
        const double lo = k < br.lower.size() ? br.lower[k] : 0.0;
        CHECK(exact.pmf[k] >= lo - 1e-12);
        CHECK(exact.pmf[k] <= lo + br.unresolved + 1e-12);
      }
    }
  }
}

TEST_CASE("weak-descending bracket puts the zero atom where first-step analysis says") {
  IncrementLaw law = valid("simple");
  DpBracket br = ladder_dp_bracket(law, LadderKind::WeakDescending, 400, 30'000);
  CHECK(std::abs(br.lower[1] - 0.5) < 1e-6);  // first step down, exactly resolved
}

TEST_CASE("renewal tables: simple-walk closed forms") {
  IncrementLaw law = valid("simple");
  LadderPair pair = exact_ladder_pair(law);

  RenewalTable hp = renewal_table(pair.ascending, 80, CumConvention::LessEqual);
  for (std::size_t x = 0; x <= 80; ++x) CHECK(hp.h[x] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(hp.H[5] == doctest::Approx(6.0));

  RenewalTable hm = renewal_table(pair.descending, 80, CumConvention::LessEqual);
  for (std::size_t x = 0; x <= 80; ++x) CHECK(hm.h[x] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(hm.truncation_error < 1e-10);

  RenewalTable strict = renewal_table(pair.descending, 10, CumConvention::Less);
  CHECK(strict.H[0] == doctest::Approx(0.0));
  CHECK(strict.H[1] == doctest::Approx(hm.h[0]));
}

TEST_CASE("strong renewal limit: h+ flattens to 1/E[chi+]") {
  for (const char* name : {"lazy", "sigma4"}) {
    IncrementLaw law = valid(name);
    LadderLaw up = exact_ladder_pmf(law, LadderKind::StrictAscending);
    RenewalTable hp = renewal_table(up, 300, CumConvention::LessEqual);
    const double limit = 1.0 / up.mean();
    for (std::size_t x = 250; x <= 300; ++x)
      CHECK(hp.h[x] == doctest::Approx(limit).epsilon(1e-8));
  }
}

TEST_CASE("renewal edge cases") {
  LadderLaw zero_only;
  zero_only.kind = LadderKind::WeakDescending;
  zero_only.pmf = {1.0};
  CHECK_THROWS_AS(renewal_table(zero_only, 5, CumConvention::LessEqual), DomainError);

  LadderLaw with_atom;
  with_atom.kind = LadderKind::WeakDescending;
  with_atom.pmf = {0.6, 0.4};
  RenewalTable t = renewal_table(with_atom, 0, CumConvention::LessEqual);
  CHECK(t.h[0] == doctest::Approx(1.0 / 0.4).epsilon(1e-10));
}

TEST_CASE("U(x,N): closed values and domain errors") {
  IncrementLaw law = valid("simple");
  LadderPair pair = exact_ladder_pair(law);
  RenewalTable hp = renewal_table(pair.ascending, 600, CumConvention::LessEqual);

  for (long long N : {1LL, 7LL, 50LL, 500LL}) {
    CHECK(compute_U(0, N, hp, pair.descending) == doctest::Approx(hp.h[N]));
    if (N >= 1)
      CHECK(compute_U(1, N, hp, pair.descending) == doctest::Approx(2.0).epsilon(1e-10));
    if (N >= 2)
      CHECK(compute_U(2, N, hp, pair.descending) == doctest::Approx(4.0).epsilon(1e-10));
  }
  CHECK_THROWS_AS(compute_U(10, 5, hp, pair.descending), DomainError);
}

TEST_CASE("sampled ladder heights match the exact laws") {
  Rng rng(31337);
  IncrementLaw simple = valid("simple");
  LadderSampleResult asc = sample_ladder_heights(simple, LadderKind::StrictAscending, 20'000,
                                                 rng, 10'000'000);
  // P(tau+ > cap) ~ sqrt(2/pi/cap): a few capped samples are expected and reported
  CHECK(asc.capped < 40);
  CHECK(std::all_of(asc.heights.begin(), asc.heights.end(),
                    [](long long h) { return h == 1; }));

  LadderSampleResult desc = sample_ladder_heights(simple, LadderKind::WeakDescending,
                                                  100'000, rng, 10'000'000);
  const double zero_freq =
      static_cast<double>(std::count(desc.heights.begin(), desc.heights.end(), 0LL)) /
      static_cast<double>(desc.heights.size());
  CHECK(std::abs(zero_freq - 0.5) < 4 * std::sqrt(0.25 / 1e5));

  IncrementLaw lazy = valid("lazy");
  LadderLaw exact = exact_ladder_pmf(lazy, LadderKind::WeakDescending);
  LadderSampleResult lz =
      sample_ladder_heights(lazy, LadderKind::WeakDescending, 100'000, rng, 10'000'000);
  std::vector<long long> hist(exact.pmf.size(), 0);
  for (const long long h : lz.heights) ++hist[static_cast<std::size_t>(h)];
  TestReport gof = chi_square_gof(
      hist, 0,
      [&exact](long long k) {
        return k >= 0 && static_cast<std::size_t>(k) < exact.pmf.size()
                   ? exact.pmf[static_cast<std::size_t>(k)]
                   : 0.0;
      },
      0.01);
  CHECK(gof.pass);
}

TEST_CASE("re-entry tables are stochastic and trivial for skip-free descents") {
  for (const char* name : {"simple", "lazy"}) {
    ReentryTable t = make_reentry_table(valid(name));
    REQUIRE(t.max_excess() == 1);
    REQUIRE(t.offset_pmf[0].size() == 1);
    CHECK(t.offset_pmf[0][0] == doctest::Approx(1.0));
  }
  ReentryTable t4 = make_reentry_table(valid("sigma4"));
  CHECK(t4.max_excess() == 3);
  for (const auto& row : t4.offset_pmf)
    CHECK(std::accumulate(row.begin(), row.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("renewal table csv schema") {
  IncrementLaw law = valid("simple");
  RenewalTable hp = renewal_table(exact_ladder_pmf(law, LadderKind::StrictAscending), 3,
                                  CumConvention::LessEqual);
  const std::string csv = renewal_table_csv(hp);
  CHECK(csv.rfind("x,h,H,convention,truncation_error\n", 0) == 0);
  CHECK(csv.find(",le,") != std::string::npos);
}
