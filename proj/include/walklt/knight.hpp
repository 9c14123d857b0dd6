// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "walklt/rng.hpp"
#include "walklt/stats.hpp"

namespace walklt {

// Transition kernel of the up-crossing chain of the reflected simple walk:
//   p(i,j) = C(i+j-1, j) 2^-(i+j)  for i >= 1,  p(0,0) = 1.
// Equals the j-step law of a critical Galton-Watson process with geometric
// offspring P(k) = 2^-(k+1).
double knight_kernel(long long i, long long j);

// full row p(i, 0..j_max) by a mode-anchored recurrence (no underflow)
std::vector<double> knight_kernel_row(long long i, long long j_max);

struct QTrajectory {
  std::vector<long long> states;  // Q_0 = m .. Q_n
  bool truncated = false;
};

// Branching realization: one step from state i sums i geometric(1/2) offspring.
QTrajectory simulate_q(long long m, long long n_max, Rng& rng,
                       long long explosion_bound = 1'000'000'000);

struct QPmf {
  std::vector<double> pmf;  // state j -> probability
  double dropped_mass = 0.0;
};

// n-step distribution from state m by truncated kernel powers; throws when
// the dropped mass cannot be kept under 1e-10 at the given cap.
QPmf exact_q_pmf(long long m, long long n, long long support_cap = 1024);

// law of Q_n + Q_{n-1} through the exact joint (pmf at n-1, one kernel step)
QPmf consecutive_sum_pmf(long long m, long long n, long long support_cap = 1024);

struct IdentityCheckResult {
  TestReport gof;          // chi-square of sampled L_W(T_{m+1}, n) vs exact law
  TestReport mean;         // empirical mean vs 2m
  long long samples = 0;
};

// Verifies L_W(T_{m+1}, n) =d Q_n + Q_{n-1} for the simple walk: reflected
// local times are simulated directly, the right side is computed exactly.
IdentityCheckResult identity_check(long long m, long long n, long long samples,
                                   std::uint64_t seed);

// extinction-probability oracle: iterate f(s) = 1/(2-s) from s = 0
double gw_extinction_prob(long long generations);

}  // namespace walklt
