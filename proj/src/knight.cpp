// SPDX-License-Identifier: Apache-2.0
#include "walklt/knight.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "walklt/local_time.hpp"

namespace walklt {

double knight_kernel(long long i, long long j) {
  if (i < 0 || j < 0) throw std::invalid_argument("knight_kernel needs i,j >= 0");
  if (i == 0) return j == 0 ? 1.0 : 0.0;
  const double li = static_cast<double>(i), lj = static_cast<double>(j);
  return std::exp(std::lgamma(li + lj) - std::lgamma(lj + 1.0) - std::lgamma(li) -
                  (li + lj) * std::log(2.0));
}

std::vector<double> knight_kernel_row(long long i, long long j_max) {
  std::vector<double> row(static_cast<std::size_t>(j_max + 1), 0.0);
  if (i == 0) {
    row[0] = 1.0;
    return row;
  }
  // anchor at the mode (~ i) and recurse both ways:
  //   p(i,j+1)/p(i,j) = (i+j) / (2(j+1))
  const long long anchor = std::min<long long>(std::max<long long>(i - 1, 0), j_max);
  row[static_cast<std::size_t>(anchor)] = knight_kernel(i, anchor);
  for (long long j = anchor; j < j_max; ++j)
    row[static_cast<std::size_t>(j + 1)] = row[static_cast<std::size_t>(j)] *
                                           static_cast<double>(i + j) /
                                           (2.0 * static_cast<double>(j + 1));
  for (long long j = anchor; j > 0; --j)
    row[static_cast<std::size_t>(j - 1)] = row[static_cast<std::size_t>(j)] * 2.0 *
                                           static_cast<double>(j) /
                                           static_cast<double>(i + j - 1);
  return row;
}

QTrajectory simulate_q(long long m, long long n_max, Rng& rng, long long explosion_bound) {
  QTrajectory traj;
  traj.states.reserve(static_cast<std::size_t>(n_max + 1));
  long long q = m;
  traj.states.push_back(q);
  for (long long n = 0; n < n_max; ++n) {
    long long next = 0;
    for (long long k = 0; k < q; ++k) next += rng.next_geometric_half();
    q = next;
    traj.states.push_back(q);
    if (q > explosion_bound) {
      traj.truncated = true;
      break;
    }
  }
  return traj;
}

QPmf exact_q_pmf(long long m, long long n, long long support_cap) {
  if (m < 0 || n < 0) throw std::invalid_argument("exact_q_pmf needs m,n >= 0");
  if (m > support_cap) throw std::invalid_argument("support cap below the start state");
  QPmf out;
  out.pmf.assign(static_cast<std::size_t>(support_cap + 1), 0.0);
  out.pmf[static_cast<std::size_t>(m)] = 1.0;
  for (long long step = 0; step < n; ++step) {
    std::vector<double> next(out.pmf.size(), 0.0);
    for (long long i = 0; i <= support_cap; ++i) {
      const double mass = out.pmf[static_cast<std::size_t>(i)];
      if (mass == 0.0) continue;
      if (i == 0) {
        next[0] += mass;
        continue;
      }
      const std::vector<double> row = knight_kernel_row(i, support_cap);
      double row_mass = 0.0;
      for (long long j = 0; j <= support_cap; ++j) {
        next[static_cast<std::size_t>(j)] += mass * row[static_cast<std::size_t>(j)];
        row_mass += row[static_cast<std::size_t>(j)];
      }
      out.dropped_mass += mass * std::max(1.0 - row_mass, 0.0);
    }
    out.pmf = std::move(next);
  }
  if (out.dropped_mass > 1e-10)
    throw std::runtime_error("exact_q_pmf: dropped mass " + std::to_string(out.dropped_mass) +
                             " exceeds 1e-10; raise support_cap");
  return out;
}

QPmf consecutive_sum_pmf(long long m, long long n, long long support_cap) {
  if (n < 1) throw std::invalid_argument("consecutive_sum_pmf needs n >= 1");
  QPmf prev = exact_q_pmf(m, n - 1, support_cap);
  QPmf out;
  out.dropped_mass = prev.dropped_mass;
  out.pmf.assign(2 * static_cast<std::size_t>(support_cap) + 1, 0.0);
  for (long long i = 0; i <= support_cap; ++i) {
    const double mass = prev.pmf[static_cast<std::size_t>(i)];
    if (mass == 0.0) continue;
    if (i == 0) {
      out.pmf[0] += mass;
      continue;
    }
    const std::vector<double> row = knight_kernel_row(i, support_cap);
    for (long long j = 0; j <= support_cap; ++j)
      out.pmf[static_cast<std::size_t>(i + j)] += mass * row[static_cast<std::size_t>(j)];
  }
  return out;
}

IdentityCheckResult identity_check(long long m, long long n, long long samples,
                                   std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("identity undefined at n = 0");
  IncrementLaw law = bundled_law("simple");
  validate(law);
  SimOptions opts;
  opts.ceiling = std::max<long long>(64, 8 * (n + m));
  WalkEngine engine(law, opts);

  // The chain counts up-crossings of the absolute-value reflection, whose
  // zeros always step up: L_W over m regenerations is the sum of m killed
  // excursions launched from 1 (the arrival at 1 counts).
  Rng rng(derive_seed(seed, 0));
  const std::vector<long long> level{n};
  std::vector<long long> hist;
  long double sum = 0, sumsq = 0;
  for (long long s = 0; s < samples; ++s) {
    long long c = 0;
    for (long long j = 0; j < m; ++j) c += engine.run_killed(1, level, rng).counts[0];
    if (static_cast<std::size_t>(c) >= hist.size())
      hist.resize(static_cast<std::size_t>(c) + 1, 0);
    ++hist[static_cast<std::size_t>(c)];
    sum += static_cast<long double>(c);
    sumsq += static_cast<long double>(c) * static_cast<long double>(c);
  }

  QPmf exact = consecutive_sum_pmf(m, n);
  IdentityCheckResult res;
  res.samples = samples;
  res.gof = chi_square_gof(
      hist, 0,
      [&exact](long long v) {
        return v >= 0 && static_cast<std::size_t>(v) < exact.pmf.size()
                   ? exact.pmf[static_cast<std::size_t>(v)]
                   : 0.0;
      },
      0.01);
  res.gof.name = "knight-identity-gof";
  res.gof.seed = seed;

  const double nm = static_cast<double>(samples);
  const double mean = static_cast<double>(sum) / nm;
  const double var = static_cast<double>(sumsq) / nm - mean * mean;
  const double se = std::sqrt(std::max(var, 0.0) / nm);
  res.mean.name = "knight-identity-mean";
  res.mean.kind = "moment";
  res.mean.statistic = mean;
  res.mean.reference = 2.0 * static_cast<double>(m);
  res.mean.sigma_distance = se > 0 ? std::abs(mean - res.mean.reference) / se : 0.0;
  res.mean.pass = res.mean.sigma_distance <= 4.0;
  res.mean.n = samples;
  res.mean.seed = seed;
  return res;
}

double gw_extinction_prob(long long generations) {
  double s = 0.0;
  for (long long i = 0; i < generations; ++i) s = 1.0 / (2.0 - s);
  return s;
}

}  // namespace walklt
