// SPDX-License-Identifier: Apache-2.0
#include "walklt/ladder.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numeric>

namespace walklt {

double LadderLaw::mean() const {
  double m = 0;
  for (std::size_t k = 0; k < pmf.size(); ++k) m += static_cast<double>(k) * pmf[k];
  return m;
}

namespace {

using cplx = std::complex<double>;

cplx poly_eval(const std::vector<cplx>& c, cplx z) {
  cplx acc = 0;
  for (std::size_t i = c.size(); i-- > 0;) acc = acc * z + c[i];
  return acc;
}

// synthetic division by (z - root); returns remainder
double deflate_linear(std::vector<double>& c, double root) {
  double carry = 0;
  for (std::size_t i = c.size(); i-- > 0;) {
    const double tmp = c[i] + carry * root;
    c[i] = carry;
    carry = tmp;
  }
  c.pop_back();
  return carry;
}

// Durand-Kerner; fine for the tiny degrees that finite supports produce.
std::vector<cplx> all_roots(std::vector<double> coeffs) {
  while (!coeffs.empty() && std::abs(coeffs.back()) < 1e-300) coeffs.pop_back();
  const int deg = static_cast<int>(coeffs.size()) - 1;
  std::vector<cplx> c(coeffs.begin(), coeffs.end());
  for (auto& x : c) x /= coeffs.back();
  std::vector<cplx> r(static_cast<std::size_t>(deg));
  cplx seed(0.4, 0.9);
  cplx w = 1;
  for (auto& root : r) {
    w *= seed;
    root = w;
  }
  for (int iter = 0; iter < 600; ++iter) {
    double worst = 0;
    for (int i = 0; i < deg; ++i) {
      cplx denom = 1;
      for (int j = 0; j < deg; ++j)
        if (j != i) denom *= (r[i] - r[j]);
      const cplx delta = poly_eval(c, r[i]) / denom;
      r[i] -= delta;
      worst = std::max(worst, std::abs(delta));
    }
    if (worst < 1e-15) break;
  }
  return r;
}

std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

// quotient of a/b (exact division expected; remainder returned for checking)
std::vector<double> poly_div(std::vector<double> a, const std::vector<double>& b,
                             double* remainder_norm) {
  const int da = static_cast<int>(a.size()) - 1;
  const int db = static_cast<int>(b.size()) - 1;
  std::vector<double> q(static_cast<std::size_t>(da - db + 1), 0.0);
  for (int k = da - db; k >= 0; --k) {
    const double f = a[static_cast<std::size_t>(k + db)] / b.back();
    q[static_cast<std::size_t>(k)] = f;
    for (int j = 0; j <= db; ++j) a[static_cast<std::size_t>(k + j)] -= f * b[static_cast<std::size_t>(j)];
  }
  double rn = 0;
  for (const double x : a) rn = std::max(rn, std::abs(x));
  if (remainder_norm) *remainder_norm = rn;
  return q;
}

}  // namespace

LadderPair exact_ladder_pair(const IncrementLaw& law) {
  if (law.heavy_tail) throw DomainError("exact ladder laws need a finite support");
  if (!law.validated) throw ConfigError("exact_ladder_pair requires a validated law");
  const long long L = -law.min_step();
  const long long R = law.max_step();
  if (L < 1 || R < 1) throw DomainError("law must step both ways");

  // Pi(z) = z^L (1 - phi(z));  coefficient of z^(L+j) gets -p_j
  std::vector<double> pi(static_cast<std::size_t>(L + R + 1), 0.0);
  pi[static_cast<std::size_t>(L)] = 1.0;
  for (const auto& a : law.support)
    pi[static_cast<std::size_t>(L + a.value)] -= a.prob.to_double();

  // mean zero: double root at z=1
  std::vector<double> q = pi;
  const double rem1 = deflate_linear(q, 1.0);
  const double rem2 = deflate_linear(q, 1.0);
  if (std::abs(rem1) > 1e-10 || std::abs(rem2) > 1e-10)
    throw DomainError("characteristic polynomial lacks the mean-zero double root at 1");

  std::vector<cplx> outside;  // |z| > 1: ascending factor
  int inside_count = 0;
  if (q.size() > 1) {
    for (const cplx& r : all_roots(q)) {
      const double m = std::abs(r);
      if (m > 1.0 + 1e-8)
        outside.push_back(r);
      else if (m < 1.0 - 1e-8)
        ++inside_count;
      else
        throw DomainError("unimodular root in the ladder factorization (periodic law?)");
    }
  }
  if (static_cast<long long>(outside.size()) != R - 1 || inside_count != L - 1)
    throw DomainError("ladder factorization root split mismatch");

  // 1 - a(z) = (1-z) prod (1 - z/r_i); constant term 1 by construction
  std::vector<cplx> f{1.0};
  for (const cplx& r : outside) {
    std::vector<cplx> lin{1.0, -1.0 / r};
    std::vector<cplx> out(f.size() + 1, 0.0);
    for (std::size_t i = 0; i < f.size(); ++i)
      for (std::size_t j = 0; j < 2; ++j) out[i + j] += f[i] * lin[j];
    f = std::move(out);
  }
  std::vector<double> one_minus_a = poly_mul(
      [&] {
        std::vector<double> re(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) {
          if (std::abs(f[i].imag()) > 1e-9)
            throw DomainError("ascending factor has a complex coefficient");
          re[i] = f[i].real();
        }
        return re;
      }(),
      {1.0, -1.0});

  LadderPair pair;
  pair.ascending.kind = LadderKind::StrictAscending;
  pair.ascending.pmf.assign(static_cast<std::size_t>(R + 1), 0.0);
  for (long long k = 1; k <= R; ++k)
    pair.ascending.pmf[static_cast<std::size_t>(k)] =
        -one_minus_a[static_cast<std::size_t>(k)];

  // B(z) = z^L (1 - b(1/z)) = Pi(z) / (1 - a(z))
  double remnorm = 0;
  std::vector<double> B = poly_div(pi, one_minus_a, &remnorm);
  if (remnorm > 1e-10) throw DomainError("ladder factorization division not exact");
  pair.descending.kind = LadderKind::WeakDescending;
  pair.descending.pmf.assign(static_cast<std::size_t>(L + 1), 0.0);
  pair.descending.pmf[0] = 1.0 - B[static_cast<std::size_t>(L)];
  for (long long k = 1; k <= L; ++k)
    pair.descending.pmf[static_cast<std::size_t>(k)] = -B[static_cast<std::size_t>(L - k)];

  for (auto* lad : {&pair.ascending, &pair.descending}) {
    double total = 0;
    for (double& p : lad->pmf) {
      if (p < 0) {
        if (p < -1e-9) throw DomainError("negative ladder probability");
        p = 0;
      }
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw DomainError("ladder pmf does not sum to 1");
    for (double& p : lad->pmf) p /= total;
  }

  // residual of (1-a)(1-b(1/z)) vs 1-phi(z) on a circle grid
  double resid = 0;
  for (int t = 1; t <= 16; ++t) {
    const cplx z = 0.7 * std::exp(cplx(0, 2.0 * M_PI * t / 17.0));
    cplx phi = 0, az = 0, bz = 0;
    for (const auto& atom : law.support)
      phi += atom.prob.to_double() * std::pow(z, static_cast<double>(atom.value));
    for (std::size_t k = 0; k < pair.ascending.pmf.size(); ++k)
      az += pair.ascending.pmf[k] * std::pow(z, static_cast<double>(k));
    for (std::size_t k = 0; k < pair.descending.pmf.size(); ++k)
      bz += pair.descending.pmf[k] * std::pow(z, -static_cast<double>(k));
    resid = std::max(resid, std::abs((1.0 - az) * (1.0 - bz) - (1.0 - phi)));
  }
  pair.factorization_residual = resid;
  return pair;
}

LadderLaw exact_ladder_pmf(const IncrementLaw& law, LadderKind kind) {
  LadderPair pair = exact_ladder_pair(law);
  return kind == LadderKind::StrictAscending ? pair.ascending : pair.descending;
}

RenewalTable renewal_table(const LadderLaw& chi, long long x_max, CumConvention convention) {
  if (chi.zero_atom() >= 1.0 - 1e-15) throw DomainError("renewal of a unit zero atom diverges");
  if (x_max < 0) throw DomainError("x_max must be >= 0");
  const auto size = static_cast<std::size_t>(x_max + 1);
  RenewalTable table;
  table.convention = convention;
  table.h.assign(size, 0.0);
  table.h[0] = 1.0;  // k = 0 term

  std::vector<double> cur(size, 0.0);
  cur[0] = 1.0;
  double mass = 1.0, prev_mass = 1.0;
  // direct resummation; P(chi_1+..+chi_k <= x_max) dies off geometrically
  while (mass > 1e-13) {
    std::vector<double> next(size, 0.0);
    for (std::size_t s = 0; s < size; ++s) {
      if (cur[s] == 0.0) continue;
      for (std::size_t k = 0; k < chi.pmf.size() && s + k < size; ++k)
        next[s + k] += cur[s] * chi.pmf[k];
    }
    cur = std::move(next);
    prev_mass = mass;
    mass = std::accumulate(cur.begin(), cur.end(), 0.0);
    if (mass == 0.0) break;
    for (std::size_t s = 0; s < size; ++s) table.h[s] += cur[s];
  }
  const double ratio = prev_mass > 0 ? std::min(mass / prev_mass, 0.999999) : 0.0;
  table.truncation_error = mass > 0 ? mass * ratio / (1.0 - ratio) : 0.0;

  table.H.assign(size, 0.0);
  double acc = 0;
  for (std::size_t x = 0; x < size; ++x) {
    if (convention == CumConvention::LessEqual) {
      acc += table.h[x];
      table.H[x] = acc;
    } else {
      table.H[x] = acc;
      acc += table.h[x];
    }
  }
  return table;
}

double compute_U(long long x, long long N, const RenewalTable& h_plus,
                 const LadderLaw& chi_minus) {
  if (x < 0 || x > N) throw DomainError("compute_U needs 0 <= x <= N");
  if (static_cast<long long>(h_plus.h.size()) <= N) throw DomainError("h+ table too short");
  double total = h_plus.h[static_cast<std::size_t>(N - x)];
  if (x == 0) return total;

  const auto width = static_cast<std::size_t>(x);  // states 0..x-1
  std::vector<double> v(width, 0.0);
  v[0] = 1.0;  // k = 0; first convolution below produces the k = 1 term
  double mass = 1.0;
  while (mass > 1e-12) {
    std::vector<double> next(width, 0.0);
    for (std::size_t s = 0; s < width; ++s) {
      if (v[s] == 0.0) continue;
      for (std::size_t k = 0; k < chi_minus.pmf.size() && s + k < width; ++k)
        next[s + k] += v[s] * chi_minus.pmf[k];
    }
    v = std::move(next);
    mass = std::accumulate(v.begin(), v.end(), 0.0);
    for (std::size_t s = 0; s < width; ++s)
      total += v[s] * h_plus.h[static_cast<std::size_t>(N - x) + s];
  }
  return total;
}

LadderSampleResult sample_ladder_heights(const IncrementLaw& law, LadderKind kind,
                                         long long count, Rng& rng, long long cap) {
  IncrementSampler sampler(law);
  LadderSampleResult out;
  out.heights.reserve(static_cast<std::size_t>(count));
  for (long long i = 0; i < count; ++i) {
    long long pos = 0, steps = 0;
    bool done = false;
    while (steps < cap) {
      pos += sampler.sample(rng);
      ++steps;
      if (kind == LadderKind::StrictAscending ? pos >= 1 : pos <= 0) {
        done = true;
        break;
      }
    }
    if (!done) {
      ++out.capped;
      continue;
    }
    out.heights.push_back(kind == LadderKind::StrictAscending ? pos : -pos);
    out.epochs.push_back(steps);
  }
  return out;
}

ReentryTable make_reentry_table(const IncrementLaw& law) {
  IncrementLaw mirrored = law;
  mirrored.name = law.name + "_mirror";
  for (auto& a : mirrored.support) a.value = -a.value;
  mirrored.validated = law.validated;
  // strict descending ladder of the law = strict ascending ladder of -X
  LadderLaw strict_desc = exact_ladder_pmf(mirrored, LadderKind::StrictAscending);
  const long long L = -law.min_step();
  const long long R = law.max_step();

  RenewalTable hs = renewal_table(strict_desc, std::max<long long>(R, 1), CumConvention::LessEqual);
  ReentryTable table;
  table.offset_pmf.resize(static_cast<std::size_t>(R));
  for (long long d = 1; d <= R; ++d) {
    auto& row = table.offset_pmf[static_cast<std::size_t>(d - 1)];
    row.assign(static_cast<std::size_t>(L), 0.0);
    for (long long y = 0; y < d; ++y)
      for (long long r = 0; r + d - y < static_cast<long long>(strict_desc.pmf.size()); ++r)
        row[static_cast<std::size_t>(r)] +=
            hs.h[static_cast<std::size_t>(y)] *
            strict_desc.pmf[static_cast<std::size_t>(d - y + r)];
    const double total = std::accumulate(row.begin(), row.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-9) throw DomainError("re-entry row does not sum to 1");
    for (double& p : row) p /= total;
  }
  return table;
}

std::string renewal_table_csv(const RenewalTable& table) {
  std::string out = "x,h,H,convention,truncation_error\n";
  char buf[160];
  const char* conv = table.convention == CumConvention::LessEqual ? "le" : "lt";
  for (std::size_t x = 0; x < table.h.size(); ++x) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%s,%.3g\n", x, table.h[x], table.H[x],
                  conv, table.truncation_error);
    out += buf;
  }
  return out;
}

}  // namespace walklt
