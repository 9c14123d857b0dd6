// SPDX-License-Identifier: Apache-2.0
#include "walklt/green.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace walklt {

double& GreenSolver::at(long long i, long long j) {
  // band row i, columns [i-kl, i+ku]
  return band_[static_cast<std::size_t>(i * (kl_ + ku_ + 1) + (j - i + kl_))];
}

GreenSolver::GreenSolver(const IncrementLaw& law, long long y_max) : law_(law), y_max_(y_max) {
  if (law.heavy_tail) throw DomainError("green solver needs a finite-support law");
  if (!law.validated) throw ConfigError("green solver requires a validated law");
  const long long L = -law.min_step();
  const long long R = law.max_step();
  if (y_max_ < L + R + 2) y_max_ = L + R + 2;
  const long long n = y_max_;
  kl_ = ku_ = L + R;

  ReentryTable reentry = make_reentry_table(law);
  closure_residual_ = exact_ladder_pair(law).factorization_residual;

  band_.assign(static_cast<std::size_t>(n * (kl_ + ku_ + 1)), 0.0);
  // A = I - P on states 1..y_max (index i = state-1)
  for (long long i = 0; i < n; ++i) at(i, i) = 1.0;
  for (long long i = 0; i < n; ++i) {
    const long long z = i + 1;
    for (const auto& atom : law_.support) {
      const double p = atom.prob.to_double();
      const long long t = z + atom.value;
      if (t <= 0) continue;  // killed
      if (t <= y_max_) {
        at(i, t - 1) -= p;
      } else {
        const auto& row = reentry.offset_pmf[static_cast<std::size_t>(t - y_max_ - 1)];
        for (std::size_t r = 0; r < row.size(); ++r) {
          const long long back = y_max_ - static_cast<long long>(r);
          at(i, back - 1) -= p * row[r];
        }
      }
    }
  }

  // banded LU without pivoting; valid since A is a nonsingular M-matrix
  for (long long i = 0; i < n; ++i) {
    const double piv = at(i, i);
    if (!(std::abs(piv) > 1e-14)) throw DomainError("green system pivot breakdown");
    for (long long r = i + 1; r <= std::min(i + kl_, n - 1); ++r) {
      const double f = at(r, i) / piv;
      at(r, i) = f;
      if (f == 0.0) continue;
      for (long long c = i + 1; c <= std::min(i + ku_, n - 1); ++c) at(r, c) -= f * at(i, c);
    }
  }
}

void GreenSolver::solve_column(std::vector<double>& rhs) const {
  const long long n = y_max_;
  auto entry = [&](long long i, long long j) {
    return band_[static_cast<std::size_t>(i * (kl_ + ku_ + 1) + (j - i + kl_))];
  };
  for (long long i = 0; i < n; ++i) {
    const double yi = rhs[static_cast<std::size_t>(i)];
    if (yi == 0.0) continue;
    for (long long r = i + 1; r <= std::min(i + kl_, n - 1); ++r)
      rhs[static_cast<std::size_t>(r)] -= entry(r, i) * yi;
  }
  for (long long i = n - 1; i >= 0; --i) {
    double v = rhs[static_cast<std::size_t>(i)];
    for (long long c = i + 1; c <= std::min(i + ku_, n - 1); ++c)
      v -= entry(i, c) * rhs[static_cast<std::size_t>(c)];
    rhs[static_cast<std::size_t>(i)] = v / entry(i, i);
  }
}

const std::vector<double>& GreenSolver::column(long long y) const {
  for (std::size_t k = 0; k < cache_keys_.size(); ++k)
    if (cache_keys_[k] == y) return cache_[k];
  std::vector<double> rhs(static_cast<std::size_t>(y_max_), 0.0);
  rhs[static_cast<std::size_t>(y - 1)] = 1.0;
  solve_column(rhs);
  cache_keys_.push_back(y);
  cache_.push_back(std::move(rhs));
  return cache_.back();
}

double GreenSolver::visits(long long x, long long y, bool include_time_zero) const {
  if (y < 1 || y > y_max_) throw DomainError("green target outside strip");
  const auto& g = column(y);  // g[z-1] = E_z L(tau-, y) counting time 0
  double value;
  if (x >= 1) {
    if (x > y_max_) throw DomainError("green start outside strip");
    value = g[static_cast<std::size_t>(x - 1)];
  } else if (x == 0) {
    // first step opens the n>=1 sum; time 0 sits at 0 != y either way
    value = 0.0;
    for (const auto& atom : law_.support) {
      const long long t = atom.value;
      if (t >= 1) value += atom.prob.to_double() * g[static_cast<std::size_t>(t - 1)];
    }
    return value;
  } else {
    throw DomainError("green start must be >= 0");
  }
  if (!include_time_zero && x == y) value -= 1.0;
  return value;
}

double GreenSolver::hitting_prob(long long x, long long level) const {
  if (level < 1 || level > y_max_) throw DomainError("level outside strip");
  const auto& g = column(level);
  const double g_self = g[static_cast<std::size_t>(level - 1)];
  if (x >= 1) {
    if (x > y_max_) throw DomainError("start outside strip");
    return g[static_cast<std::size_t>(x - 1)] / g_self;
  }
  if (x != 0) throw DomainError("start must be >= 0");
  double p = 0.0;
  for (const auto& atom : law_.support) {
    const long long t = atom.value;
    if (t >= 1) p += atom.prob.to_double() * g[static_cast<std::size_t>(t - 1)] / g_self;
  }
  return p;
}

GreenResult green_sum(const IncrementLaw& law, long long x, long long y, double tolerance,
                      long long y_max, bool include_time_zero) {
  if (x < 0 || y < 1) throw DomainError("green_sum needs x >= 0, y >= 1");
  if (y_max == 0) y_max = 8 * std::max(x, y);
  GreenSolver solver(law, y_max);
  GreenResult res;
  res.value = solver.visits(x, y, include_time_zero);
  res.y_max = solver.y_max();
  res.error_bound = 1e-12 * static_cast<double>(solver.y_max()) +
                    10.0 * solver.closure_residual() * std::max(res.value, 1.0);
  if (res.error_bound > tolerance)
    throw DomainError("green_sum cannot certify the requested tolerance");
  return res;
}

double scaled_green(const IncrementLaw& law, double u, double v, long long N) {
  const auto x = static_cast<long long>(std::floor(u * static_cast<double>(N)));
  const auto y = static_cast<long long>(std::floor(v * static_cast<double>(N)));
  if (x < 1 || y < 1) throw DomainError("scaled_green needs floor(uN), floor(vN) >= 1");
  GreenResult g = green_sum(law, x, y, 1e-8);
  return static_cast<double>(N) / inverse_norming(law, static_cast<double>(N)) * g.value;
}

double hitting_prob(const IncrementLaw& law, long long x, long long level) {
  GreenSolver solver(law, 8 * std::max(x, level));
  return solver.hitting_prob(x, level);
}

StripDp::StripDp(const IncrementLaw& law, long long start, long long y_max) : law_(law) {
  if (law.heavy_tail) throw DomainError("strip DP needs finite support");
  if (start < 1 || start > y_max) throw DomainError("start outside strip");
  state_.assign(static_cast<std::size_t>(y_max + 1), 0.0);  // index by state, 0 unused
  green_acc_.assign(state_.size(), 0.0);
  state_[static_cast<std::size_t>(start)] = 1.0;
}

void StripDp::step() {
  const long long y_max = static_cast<long long>(state_.size()) - 1;
  std::vector<double> next(state_.size(), 0.0);
  for (long long z = 1; z <= y_max; ++z) {
    const double m = state_[static_cast<std::size_t>(z)];
    if (m == 0.0) continue;
    for (const auto& atom : law_.support) {
      const long long t = z + atom.value;
      const double flow = m * atom.prob.to_double();
      if (t <= 0)
        absorbed_ += flow;
      else if (t > y_max)
        overflow_ += flow;
      else
        next[static_cast<std::size_t>(t)] += flow;
    }
  }
  state_ = std::move(next);
  for (std::size_t z = 1; z < state_.size(); ++z) green_acc_[z] += state_[z];
}

double StripDp::surviving_mass() const {
  return std::accumulate(state_.begin(), state_.end(), 0.0);
}

double StripDp::total_mass() const { return surviving_mass() + absorbed_ + overflow_; }

double StripDp::partial_green(long long y) const {
  return green_acc_[static_cast<std::size_t>(y)];
}

}  // namespace walklt
