// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <vector>

#include "walklt/increment_law.hpp"
#include "walklt/ladder.hpp"

namespace walklt {

struct GreenResult {
  double value = 0.0;
  double error_bound = 0.0;
  long long y_max = 0;
};

// Expected visits of the walk killed at <= 0, solved exactly on the strip
// {1..y_max} as the banded M-matrix system (I - P) g = e_y. Mass that jumps
// above the strip is folded back through the exact re-entry law (strict
// descending ladder overshoot), so y_max only has to exceed the queried
// sites; no truncation bias is left behind.
class GreenSolver {
 public:
  GreenSolver(const IncrementLaw& law, long long y_max);

  // sum over n>=1 of P_x(S_n = y, tau- > n); include_time_zero adds the n=0
  // indicator (x == y), turning the value into E_x L(tau-, y)
  double visits(long long x, long long y, bool include_time_zero = false) const;

  // exact P_x(walk hits `level` before tau-), x >= 0; time 0 counts
  double hitting_prob(long long x, long long level) const;

  long long y_max() const { return y_max_; }
  double closure_residual() const { return closure_residual_; }

 private:
  IncrementLaw law_;
  long long y_max_ = 0;
  long long kl_ = 0, ku_ = 0;
  std::vector<double> band_;  // row-major banded LU factors
  double closure_residual_ = 0.0;
  mutable std::vector<double> work_;

  double& at(long long i, long long j);
  void solve_column(std::vector<double>& rhs) const;
  mutable std::vector<std::vector<double>> cache_;  // per-target column cache
  mutable std::vector<long long> cache_keys_;
  const std::vector<double>& column(long long y) const;
};

GreenResult green_sum(const IncrementLaw& law, long long x, long long y, double tolerance,
                      long long y_max = 0, bool include_time_zero = false);

double scaled_green(const IncrementLaw& law, double u, double v, long long N);

double hitting_prob(const IncrementLaw& law, long long x, long long level);

// Time-stepped substochastic evolution on {1..y_max} with explicit absorbed
// and overflow accounting; diagnostic twin of the direct solver (mass
// conservation, finite-horizon lower bounds).
class StripDp {
 public:
  StripDp(const IncrementLaw& law, long long start, long long y_max);
  void step();
  double surviving_mass() const;
  double absorbed_mass() const { return absorbed_; }
  double overflow_mass() const { return overflow_; }
  double total_mass() const;
  // accumulated sum over n>=1 so far of P(S_n = y, alive); a lower bound on
  // the half-line Green sum
  double partial_green(long long y) const;

 private:
  IncrementLaw law_;
  std::vector<double> state_;
  std::vector<double> green_acc_;
  double absorbed_ = 0.0;
  double overflow_ = 0.0;
};

}  // namespace walklt
