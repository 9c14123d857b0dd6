// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "walklt/increment_law.hpp"
#include "walklt/rng.hpp"

namespace walklt {

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class LadderKind { StrictAscending, WeakDescending };

// First-passage height distribution: chi+ (walk value at the first strict
// ascent above 0) or chi- (minus the walk value at the first weak descent
// to <= 0). pmf is indexed by height; strict-ascending supports {1..max_step},
// weak-descending {0..-min_step}.
struct LadderLaw {
  LadderKind kind = LadderKind::StrictAscending;
  std::vector<double> pmf;
  double zero_atom() const { return pmf.empty() ? 0.0 : pmf[0]; }
  double mean() const;
};

enum class CumConvention { LessEqual, Less };

// Renewal mass function h(x) = sum over k>=0 of pmf^(*k)(x) and its
// cumulative H under the requested convention. The k=0 term is a unit mass
// at 0.
struct RenewalTable {
  std::vector<double> h;
  std::vector<double> H;
  CumConvention convention = CumConvention::LessEqual;
  double truncation_error = 0.0;
};

// Both ladder laws at once, from the Wiener-Hopf factorization
//   1 - E z^X = (1 - E z^{chi+}) (1 - E z^{-chi-})
// solved exactly for finite-support laws by factoring the characteristic
// polynomial z^L (1 - phi(z)): the mean-zero double root at z=1 is deflated
// analytically, the remaining roots are split by modulus.
struct LadderPair {
  LadderLaw ascending;
  LadderLaw descending;
  double factorization_residual = 0.0;  // max |(1-a)(1-b)-(1-phi)| on a grid
};

LadderPair exact_ladder_pair(const IncrementLaw& law);
LadderLaw exact_ladder_pmf(const IncrementLaw& law, LadderKind kind);

RenewalTable renewal_table(const LadderLaw& chi, long long x_max, CumConvention convention);

// U(x,N) of the killed-walk first-moment identity:
//   U(x,N) = h+(N-x) + sum_{k>=1} E[ h+(N-x+S_k); S_k < x ],  S_k = chi-_1+..+chi-_k
// evaluated by exact convolution of chi- restricted to {0..x-1}.
double compute_U(long long x, long long N, const RenewalTable& h_plus,
                 const LadderLaw& chi_minus);

struct LadderSampleResult {
  std::vector<long long> heights;
  std::vector<long long> epochs;
  long long capped = 0;
};

LadderSampleResult sample_ladder_heights(const IncrementLaw& law, LadderKind kind,
                                         long long count, Rng& rng,
                                         long long cap = 100'000'000);

// Law of the first position <= C-1 after the walk finds itself at C-1+d:
// offset_pmf[d-1][r] is the probability of re-entering at C-1-r. Exact via
// the strict-descending ladder renewal process; the basis of the
// law-preserving ceiling used by the simulators and the Green solver.
struct ReentryTable {
  std::vector<std::vector<double>> offset_pmf;
  int max_excess() const { return static_cast<int>(offset_pmf.size()); }
};

ReentryTable make_reentry_table(const IncrementLaw& law);

std::string renewal_table_csv(const RenewalTable& table);

}  // namespace walklt
