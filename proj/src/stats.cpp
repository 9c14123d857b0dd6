// SPDX-License-Identifier: Apache-2.0
#include "walklt/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace walklt {

namespace {

double gamma_p_series(double a, double x) {
  double ap = a, sum = 1.0 / a, del = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_contfrac(double a, double x) {
  const double eps = 1e-15, fpmin = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / fpmin, d = 1.0 / b, h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < fpmin) d = fpmin;
    c = b + an / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_q(double a, double x) {
  if (x < 0 || a <= 0) throw std::invalid_argument("gamma_q needs x>=0, a>0");
  if (x == 0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_contfrac(a, x);
}

double ks_sf(double lambda) {
  if (lambda <= 0) return 1.0;
  double sum = 0.0, sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    if (term < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

GeometricFit fit_geometric(const std::vector<long long>& samples) {
  if (samples.empty()) throw std::invalid_argument("fit_geometric: empty input");
  long double sum = 0;
  for (const long long s : samples) {
    if (s < 1) throw std::invalid_argument("fit_geometric: samples must be >= 1");
    sum += static_cast<long double>(s);
  }
  const double mean = static_cast<double>(sum) / static_cast<double>(samples.size());
  GeometricFit fit;
  fit.p_hat = 1.0 / mean;
  fit.stderr_ =
      fit.p_hat * std::sqrt((1.0 - fit.p_hat) / static_cast<double>(samples.size()));
  return fit;
}

TestReport chi_square_gof(const std::vector<long long>& histogram, long long offset,
                          const std::function<double(long long)>& pmf, double level,
                          int fitted_params) {
  const double n = static_cast<double>(
      std::accumulate(histogram.begin(), histogram.end(), 0LL));
  if (n < 25) throw std::invalid_argument("chi_square_gof: too few samples to bin");

  std::vector<double> obs_bins, exp_bins;
  double obs_acc = 0, exp_acc = 0, exp_used = 0;
  for (std::size_t i = 0; i < histogram.size(); ++i) {
    obs_acc += static_cast<double>(histogram[i]);
    const double e = n * pmf(offset + static_cast<long long>(i));
    exp_acc += e;
    exp_used += e;
    if (exp_acc >= 5.0) {
      obs_bins.push_back(obs_acc);
      exp_bins.push_back(exp_acc);
      obs_acc = exp_acc = 0;
    }
  }
  // tail beyond the histogram plus any unfinished bin
  const double tail_exp = std::max(n - exp_used, 0.0) + exp_acc;
  if (!exp_bins.empty() && (tail_exp >= 5.0)) {
    obs_bins.push_back(obs_acc);
    exp_bins.push_back(tail_exp);
  } else if (!exp_bins.empty()) {
    obs_bins.back() += obs_acc;
    exp_bins.back() += tail_exp;
  }
  if (exp_bins.size() < 2) throw std::invalid_argument("chi_square_gof: degenerate binning");

  double stat = 0;
  for (std::size_t b = 0; b < exp_bins.size(); ++b) {
    const double d = obs_bins[b] - exp_bins[b];
    stat += d * d / exp_bins[b];
  }
  const double df = static_cast<double>(exp_bins.size()) - 1.0 - fitted_params;
  TestReport rep;
  rep.kind = "chi2";
  rep.statistic = stat;
  rep.reference = df;
  rep.p_value = gamma_q(df / 2.0, stat / 2.0);
  rep.pass = rep.p_value > level;
  rep.n = static_cast<long long>(n);
  return rep;
}

TestReport ks_test(std::vector<double> samples, const std::function<double(double)>& cdf,
                   double level) {
  if (samples.empty()) throw std::invalid_argument("ks_test: empty input");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::max(f - static_cast<double>(i) / n,
                             static_cast<double>(i + 1) / n - f));
  }
  const double lam = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  TestReport rep;
  rep.kind = "ks";
  rep.statistic = d;
  rep.p_value = ks_sf(lam);
  rep.pass = rep.p_value > level;
  rep.n = static_cast<long long>(samples.size());
  return rep;
}

TestReport two_sample_chi_square(const std::vector<long long>& hist_a,
                                 const std::vector<long long>& hist_b, double level) {
  const std::size_t size = std::max(hist_a.size(), hist_b.size());
  auto value = [](const std::vector<long long>& h, std::size_t i) {
    return i < h.size() ? static_cast<double>(h[i]) : 0.0;
  };
  const double na = static_cast<double>(std::accumulate(hist_a.begin(), hist_a.end(), 0LL));
  const double nb = static_cast<double>(std::accumulate(hist_b.begin(), hist_b.end(), 0LL));
  if (na < 25 || nb < 25) throw std::invalid_argument("two_sample_chi_square: too few samples");

  // merge adjacent cells until both scaled expectations clear 5
  std::vector<double> as, bs;
  double aa = 0, bb = 0;
  for (std::size_t i = 0; i < size; ++i) {
    aa += value(hist_a, i);
    bb += value(hist_b, i);
    const double pooled = aa + bb;
    if (na * pooled / (na + nb) >= 5.0 && nb * pooled / (na + nb) >= 5.0) {
      as.push_back(aa);
      bs.push_back(bb);
      aa = bb = 0;
    }
  }
  if (aa + bb > 0 && !as.empty()) {
    as.back() += aa;
    bs.back() += bb;
  }
  if (as.size() < 2) throw std::invalid_argument("two_sample_chi_square: degenerate binning");

  double stat = 0;
  for (std::size_t i = 0; i < as.size(); ++i) {
    const double pooled = as[i] + bs[i];
    const double ea = na * pooled / (na + nb);
    const double eb = nb * pooled / (na + nb);
    stat += (as[i] - ea) * (as[i] - ea) / ea + (bs[i] - eb) * (bs[i] - eb) / eb;
  }
  const double df = static_cast<double>(as.size()) - 1.0;
  TestReport rep;
  rep.kind = "chi2-two-sample";
  rep.statistic = stat;
  rep.reference = df;
  rep.p_value = gamma_q(df / 2.0, stat / 2.0);
  rep.pass = rep.p_value > level;
  rep.n = static_cast<long long>(na + nb);
  return rep;
}

std::vector<LaplacePoint> empirical_laplace(const std::vector<double>& samples,
                                            const std::vector<double>& lambda_grid) {
  std::vector<LaplacePoint> out;
  out.reserve(lambda_grid.size());
  for (const double lam : lambda_grid) {
    double sum = 0, sumsq = 0;
    for (const double x : samples) {
      if (x < 0) throw std::invalid_argument("empirical_laplace: negative sample");
      const double e = std::exp(-lam * x);
      sum += e;
      sumsq += e * e;
    }
    const double n = static_cast<double>(samples.size());
    LaplacePoint p;
    p.lambda = lam;
    p.value = sum / n;
    p.stderr_ = std::sqrt(std::max(sumsq / n - p.value * p.value, 0.0) / n);
    out.push_back(p);
  }
  return out;
}

TestReport moment_compare(const std::vector<double>& samples, int order, double prediction,
                          double tol_sigmas, double extra_band_frac) {
  if (order < 1 || order > 4)
    throw std::invalid_argument("moment_compare: order must be in 1..4");
  double sum = 0, sumsq = 0;
  for (const double x : samples) {
    double p = x;
    for (int k = 1; k < order; ++k) p *= x;
    sum += p;
    sumsq += p * p;
  }
  const double n = static_cast<double>(samples.size());
  const double mean = sum / n;
  const double se = std::sqrt(std::max(sumsq / n - mean * mean, 0.0) / n);
  TestReport rep;
  rep.kind = "moment";
  rep.statistic = mean;
  rep.reference = prediction;
  rep.sigma_distance = se > 0 ? std::abs(mean - prediction) / se : 0.0;
  rep.pass = std::abs(mean - prediction) <=
             tol_sigmas * se + extra_band_frac * std::abs(prediction);
  rep.n = static_cast<long long>(samples.size());
  return rep;
}

SlopeFit tail_slope(const std::vector<double>& x_grid, const std::vector<double>& y_values) {
  if (x_grid.size() != y_values.size() || x_grid.size() < 2)
    throw std::invalid_argument("tail_slope: need matching grids, >= 2 points");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    if (x_grid[i] <= 0 || y_values[i] <= 0)
      throw std::invalid_argument("tail_slope: nonpositive input");
    lx.push_back(std::log(x_grid[i]));
    ly.push_back(std::log(y_values[i]));
  }
  const double n = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0, sxy = 0, sse = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - fit.intercept - fit.slope * lx[i];
    sse += r * r;
  }
  fit.stderr_ = lx.size() > 2 ? std::sqrt(sse / (n - 2.0) / sxx) : 0.0;
  return fit;
}

std::vector<double> dither_rescale(const std::vector<long long>& counts, double scale,
                                   Rng& rng) {
  std::vector<double> out;
  out.reserve(counts.size());
  for (const long long c : counts)
    out.push_back((static_cast<double>(c) - rng.next_double()) / scale);
  return out;
}

}  // namespace walklt
