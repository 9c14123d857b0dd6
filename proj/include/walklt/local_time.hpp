// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "walklt/increment_law.hpp"
#include "walklt/ladder.hpp"
#include "walklt/rng.hpp"

namespace walklt {

struct LocalTimeFieldSample {
  long long start = 0;
  std::vector<long long> levels;
  std::vector<long long> counts;
  long long excursion_length = 0;
  bool capped = false;
};

struct SimOptions {
  long long cap = 100'000'000;  // per-excursion step cap
  // When > 0: positions >= ceiling are folded back through the exact strict
  // descending ladder re-entry law. Preserves the joint law of all visit
  // counts below the ceiling, so it must exceed every tracked level (and the
  // start); finite-support laws only.
  long long ceiling = 0;
};

// Immutable sampling engine for one (law, options) pair; shareable across
// worker threads, each with its own Rng.
class WalkEngine {
 public:
  WalkEngine(const IncrementLaw& law, SimOptions opts);

  const IncrementLaw& law() const { return law_; }
  const SimOptions& options() const { return opts_; }

  // Walk from `start` until the first position <= 0 (or the cap); counts
  // visits to each level including time 0.
  LocalTimeFieldSample run_killed(long long start, const std::vector<long long>& levels,
                                  Rng& rng) const;

  // Reflected walk W <- (W + X)^+ from 0 through `regenerations` returns to
  // 0; counts visits from step 1 onward.
  LocalTimeFieldSample run_reflected(long long regenerations,
                                     const std::vector<long long>& levels, Rng& rng) const;

 private:
  IncrementLaw law_;
  SimOptions opts_;
  bool simple_ = false;  // +-1 law: bit-stream fast path
  IncrementSampler sampler_;
  ReentryTable reentry_;
  std::vector<std::vector<double>> reentry_cdf_;

  long long collapse(long long pos, Rng& rng) const;
  void check_levels(long long start, const std::vector<long long>& levels) const;
};

LocalTimeFieldSample simulate_killed(const IncrementLaw& law, long long start,
                                     const std::vector<long long>& levels,
                                     const SimOptions& opts, Rng& rng);

LocalTimeFieldSample simulate_reflected_direct(const IncrementLaw& law, long long M,
                                               const std::vector<long long>& levels,
                                               const SimOptions& opts, Rng& rng);

// Sum of M independent killed-from-0 excursion fields; equal in law to the
// direct reflected field.
LocalTimeFieldSample simulate_reflected_iid(const IncrementLaw& law, long long M,
                                            const std::vector<long long>& levels,
                                            const SimOptions& opts, Rng& rng);

struct RescaledField {
  long long N = 0;
  std::vector<double> u_list;
  long long M = 0;
  std::vector<double> values;
  bool capped = false;
};

// One sample of the rescaled reflected field l(u) = N/c^-1(N) * L_W(T_M, uN).
RescaledField rescaled_field(const IncrementLaw& law, long long N,
                             const std::vector<double>& u_list, long long M,
                             const SimOptions& opts, Rng& rng);

// M(N) ~ c^-1(N) / (N h+(N)); exactly N for the simple walk.
long long default_regeneration_count(const IncrementLaw& law, long long N);

}  // namespace walklt
