// SPDX-License-Identifier: Apache-2.0
#include "walklt/local_time.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace walklt {

namespace {

bool is_simple_walk(const IncrementLaw& law) {
  if (law.heavy_tail || law.support.size() != 2) return false;
  long long lo = law.min_step(), hi = law.max_step();
  return lo == -1 && hi == 1 && law.pmf(-1) == 0.5 && law.pmf(1) == 0.5;
}

}  // namespace

WalkEngine::WalkEngine(const IncrementLaw& law, SimOptions opts)
    : law_(law), opts_(opts), sampler_(law) {
  if (!law.validated) throw ConfigError("walk engine requires a validated law");
  simple_ = is_simple_walk(law);
  if (opts_.ceiling > 0) {
    if (law.heavy_tail)
      throw ConfigError("ceiling collapse needs a finite support (no exact re-entry law)");
    if (opts_.ceiling < -law.min_step() + 1)
      throw ConfigError("ceiling too low for the law's downward range");
    reentry_ = make_reentry_table(law);
    reentry_cdf_.resize(reentry_.offset_pmf.size());
    for (std::size_t d = 0; d < reentry_.offset_pmf.size(); ++d) {
      double acc = 0;
      for (const double p : reentry_.offset_pmf[d]) {
        acc += p;
        reentry_cdf_[d].push_back(acc);
      }
    }
  }
}

long long WalkEngine::collapse(long long pos, Rng& rng) const {
  const long long d = pos - opts_.ceiling + 1;
  const auto& cdf = reentry_cdf_[static_cast<std::size_t>(d - 1)];
  const double u = rng.next_double();
  std::size_t r = 0;
  while (r + 1 < cdf.size() && u > cdf[r]) ++r;
  return opts_.ceiling - 1 - static_cast<long long>(r);
}

void WalkEngine::check_levels(long long start, const std::vector<long long>& levels) const {
  if (levels.empty()) throw ConfigError("levels must be nonempty");
  if (levels.size() > 32) throw ConfigError("level sets are limited to 32 entries");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] < 1) throw ConfigError("levels must be positive");
    if (i > 0 && levels[i] <= levels[i - 1]) throw ConfigError("levels must be sorted, unique");
    if (opts_.ceiling > 0 && levels[i] >= opts_.ceiling)
      throw ConfigError("ceiling must exceed every tracked level");
  }
  if (opts_.ceiling > 0 && start >= opts_.ceiling)
    throw ConfigError("ceiling must exceed the start point");
}

LocalTimeFieldSample WalkEngine::run_killed(long long start,
                                            const std::vector<long long>& levels,
                                            Rng& rng) const {
  check_levels(start, levels);
  if (start < 0) throw ConfigError("start must be >= 0");
  LocalTimeFieldSample out;
  out.start = start;
  out.levels = levels;
  out.counts.assign(levels.size(), 0);
  for (std::size_t i = 0; i < levels.size(); ++i)
    if (levels[i] == start) ++out.counts[i];  // time 0

  long long pos = start, steps = 0;
  const long long cap = opts_.cap;
  const std::size_t nlev = levels.size();
  const long long* lv = levels.data();
  long long* cnt = out.counts.data();
  const long long top =
      opts_.ceiling > 0 ? opts_.ceiling - 1 : std::numeric_limits<long long>::max();

  if (simple_ && nlev == 1) {
    // hot path of the killed-excursion experiments; branch-free direction
    // and ceiling handling, one rng word per 64 steps
    const long long level = lv[0];
    long long c0 = cnt[0];
    bool alive = true;
    while (alive && steps < cap) {
      std::uint64_t w = rng.next_u64();
      const int batch = static_cast<int>(std::min<long long>(64, cap - steps));
      for (int b = 0; b < batch; ++b) {
        ++steps;
        pos += 2 * static_cast<long long>(w & 1u) - 1;
        w >>= 1;
        pos = pos > top ? top : pos;
        c0 += (pos == level);
        if (pos <= 0) {
          alive = false;
          break;
        }
      }
    }
    cnt[0] = c0;
  } else if (simple_) {
    bool alive = true;
    while (alive && steps < cap) {
      std::uint64_t w = rng.next_u64();
      const int batch = static_cast<int>(std::min<long long>(64, cap - steps));
      for (int b = 0; b < batch; ++b) {
        ++steps;
        pos += 2 * static_cast<long long>(w & 1u) - 1;
        w >>= 1;
        pos = pos > top ? top : pos;
        for (std::size_t i = 0; i < nlev; ++i) cnt[i] += (pos == lv[i]);
        if (pos <= 0) {
          alive = false;
          break;
        }
      }
    }
  } else {
    while (steps < cap) {
      ++steps;
      pos += sampler_.sample(rng);
      if (opts_.ceiling > 0 && pos >= opts_.ceiling) pos = collapse(pos, rng);
      if (pos <= 0) break;
      for (std::size_t i = 0; i < nlev; ++i) cnt[i] += (pos == lv[i]);
    }
  }
  out.excursion_length = steps;
  out.capped = (steps >= cap && pos > 0);
  return out;
}

LocalTimeFieldSample WalkEngine::run_reflected(long long regenerations,
                                               const std::vector<long long>& levels,
                                               Rng& rng) const {
  check_levels(0, levels);
  if (regenerations < 1) throw ConfigError("need at least one regeneration");
  LocalTimeFieldSample out;
  out.start = 0;
  out.levels = levels;
  out.counts.assign(levels.size(), 0);

  long long pos = 0, steps = 0, regen = 0;
  const long long cap = opts_.cap;
  const std::size_t nlev = levels.size();
  const long long* lv = levels.data();
  long long* cnt = out.counts.data();
  const long long top =
      opts_.ceiling > 0 ? opts_.ceiling - 1 : std::numeric_limits<long long>::max();

  if (simple_) {
    bool running = true;
    while (running && steps < cap) {
      std::uint64_t w = rng.next_u64();
      const int batch = static_cast<int>(std::min<long long>(64, cap - steps));
      for (int b = 0; b < batch; ++b) {
        ++steps;
        pos += 2 * static_cast<long long>(w & 1u) - 1;
        w >>= 1;
        pos = pos > top ? top : pos;
        pos = pos < 0 ? 0 : pos;
        for (std::size_t i = 0; i < nlev; ++i) cnt[i] += (pos == lv[i]);
        if (pos == 0 && ++regen == regenerations) {
          running = false;
          break;
        }
      }
    }
  } else {
    while (steps < cap) {
      ++steps;
      pos += sampler_.sample(rng);
      if (pos <= 0) {
        pos = 0;
        if (++regen == regenerations) break;
        continue;
      }
      if (opts_.ceiling > 0 && pos >= opts_.ceiling) pos = collapse(pos, rng);
      for (std::size_t i = 0; i < nlev; ++i) cnt[i] += (pos == lv[i]);
    }
  }
  out.excursion_length = steps;
  out.capped = (regen < regenerations);
  return out;
}

LocalTimeFieldSample simulate_killed(const IncrementLaw& law, long long start,
                                     const std::vector<long long>& levels,
                                     const SimOptions& opts, Rng& rng) {
  return WalkEngine(law, opts).run_killed(start, levels, rng);
}

LocalTimeFieldSample simulate_reflected_direct(const IncrementLaw& law, long long M,
                                               const std::vector<long long>& levels,
                                               const SimOptions& opts, Rng& rng) {
  return WalkEngine(law, opts).run_reflected(M, levels, rng);
}

LocalTimeFieldSample simulate_reflected_iid(const IncrementLaw& law, long long M,
                                            const std::vector<long long>& levels,
                                            const SimOptions& opts, Rng& rng) {
  WalkEngine engine(law, opts);
  LocalTimeFieldSample out;
  out.start = 0;
  out.levels = levels;
  out.counts.assign(levels.size(), 0);
  for (long long k = 0; k < M; ++k) {
    LocalTimeFieldSample one = engine.run_killed(0, levels, rng);
    for (std::size_t i = 0; i < levels.size(); ++i) out.counts[i] += one.counts[i];
    out.excursion_length += one.excursion_length;
    out.capped = out.capped || one.capped;
  }
  return out;
}

RescaledField rescaled_field(const IncrementLaw& law, long long N,
                             const std::vector<double>& u_list, long long M,
                             const SimOptions& opts, Rng& rng) {
  std::vector<long long> levels;
  for (const double u : u_list) {
    const auto lvl = static_cast<long long>(std::floor(u * static_cast<double>(N)));
    if (lvl < 1) throw ConfigError("rescaled_field needs floor(uN) >= 1");
    levels.push_back(lvl);
  }
  std::vector<long long> sorted = levels;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  LocalTimeFieldSample field = simulate_reflected_direct(law, M, sorted, opts, rng);
  const double scale =
      static_cast<double>(N) / inverse_norming(law, static_cast<double>(N));
  RescaledField out;
  out.N = N;
  out.u_list = u_list;
  out.M = M;
  out.capped = field.capped;
  for (const long long lvl : levels) {
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), lvl);
    const auto idx = static_cast<std::size_t>(it - sorted.begin());
    out.values.push_back(scale * static_cast<double>(field.counts[idx]));
  }
  return out;
}

long long default_regeneration_count(const IncrementLaw& law, long long N) {
  const double cinv = inverse_norming(law, static_cast<double>(N));
  double hplus_at_N = 1.0;
  if (!law.heavy_tail) {
    LadderLaw chi = exact_ladder_pmf(law, LadderKind::StrictAscending);
    RenewalTable table = renewal_table(chi, N, CumConvention::LessEqual);
    hplus_at_N = table.h[static_cast<std::size_t>(N)];
  } else {
    throw ConfigError("no bundled regeneration rule for heavy tails");
  }
  return std::llround(cinv / (static_cast<double>(N) * hplus_at_N));
}

}  // namespace walklt
