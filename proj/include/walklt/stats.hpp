// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "walklt/rng.hpp"

namespace walklt {

struct TestReport {
  std::string name;
  std::string kind;  // ks | chi2 | chi2-two-sample | moment | slope | laplace
  double statistic = 0.0;
  double reference = 0.0;
  double p_value = -1.0;        // -1 when the verdict is sigma-based
  double sigma_distance = -1.0; // -1 when the verdict is p-based
  bool pass = false;
  long long n = 0;
  std::uint64_t seed = 0;
};

struct GeometricFit {
  double p_hat = 0.0;
  double stderr_ = 0.0;
};

// MLE for a geometric law on {1,2,...}: p_hat = 1/mean, delta-method stderr.
GeometricFit fit_geometric(const std::vector<long long>& samples);

// One-sample chi-square against a pmf over {offset, offset+1, ...}; bins are
// merged left-to-right until each expected count reaches 5, the remaining
// tail mass forms the last bin.
TestReport chi_square_gof(const std::vector<long long>& histogram, long long offset,
                          const std::function<double(long long)>& pmf, double level,
                          int fitted_params = 0);

// Kolmogorov-Smirnov against a continuous cdf, asymptotic p-value.
TestReport ks_test(std::vector<double> samples, const std::function<double(double)>& cdf,
                   double level);

TestReport two_sample_chi_square(const std::vector<long long>& hist_a,
                                 const std::vector<long long>& hist_b, double level);

struct LaplacePoint {
  double lambda = 0.0;
  double value = 0.0;
  double stderr_ = 0.0;
};

std::vector<LaplacePoint> empirical_laplace(const std::vector<double>& samples,
                                            const std::vector<double>& lambda_grid);

// Compares the empirical m-th moment with a prediction; passes when the
// distance is within tol_sigmas MC standard errors plus an optional
// finite-size band (fraction of the prediction).
TestReport moment_compare(const std::vector<double>& samples, int order, double prediction,
                          double tol_sigmas, double extra_band_frac = 0.0);

struct SlopeFit {
  double slope = 0.0;
  double stderr_ = 0.0;
  double intercept = 0.0;
};

// least-squares slope in log-log coordinates
SlopeFit tail_slope(const std::vector<double>& x_grid, const std::vector<double>& y_values);

// Lattice samples made continuous for KS: (value - U)/scale with U ~ U(0,1);
// linearly interpolates the discrete cdf, otherwise atom-sized jumps alias
// against the KS critical value.
std::vector<double> dither_rescale(const std::vector<long long>& counts, double scale,
                                   Rng& rng);

// regularized upper incomplete gamma Q(a,x); chi-square tail probabilities
double gamma_q(double a, double x);
// survival function of the Kolmogorov statistic
double ks_sf(double lambda);

}  // namespace walklt
