// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "walklt/increment_law.hpp"
#include "walklt/ladder.hpp"

namespace walklt {

// 0-potential density of the killed limit process, alpha = 2 closed form.
double a_20_closed(double u, double v);

// The same quantity by adaptive quadrature of
//   (2*pi)^(-1/2) * integral_0^inf x^(-1/2) exp(-(u-v)^2/(2x)) (1 - exp(-2uv/x)) dx
// split at x = 1 with the y = 1/x change of variables on the tail.
double a_20_quadrature(double u, double v, double tolerance);

// Tabulated psi_{alpha,beta}(a,b) = g(b-a) * phi(a,b) on a rectangular grid
// with bilinear interpolation. When the 1-d density g is supplied, arguments
// beyond the grid extend through psi ~ g(b-a) * phi(edge) (the positivity
// factor saturates away from the boundary); without it, only decayed regions
// may be exceeded.
class PsiTable {
 public:
  PsiTable(std::vector<double> a_axis, std::vector<double> b_axis,
           std::vector<std::vector<double>> values);

  static PsiTable from_csv(const std::string& csv);           // columns a,b,psi
  static PsiTable exact_gaussian(double max_arg, int points);  // alpha = 2 reference

  void set_density(std::vector<double> z_axis, std::vector<double> g_values);

  double operator()(double a, double b) const;
  double max_a() const { return a_axis_.back(); }
  double max_b() const { return b_axis_.back(); }

 private:
  std::vector<double> a_axis_, b_axis_;
  std::vector<std::vector<double>> values_;
  std::vector<double> g_axis_, g_values_;
  bool has_density_ = false;

  double interp_inside(double a, double b) const;
  double density(double z) const;
};

// integral_0^inf x^(-1/alpha) psi(u x^(-1/alpha), v x^(-1/alpha)) dx
double a_generic_quadrature(double u, double v, const PsiTable& psi, double alpha,
                            double tolerance);

using AFunction = std::function<double(double, double)>;

// Kac permutation sum for the m-th mixed moment started at u0*N:
//   sum_sigma a(u0,u_s1) prod a(u_si, u_si+1)
double kac_moment_value(double u0, const std::vector<double>& u_list, const AFunction& a);

// From-zero variant carrying the renewal prefactor:
//   (c^-1(N)/N)^(m-1) sum_sigma h+(floor(u_s1 N)) prod a(u_si, u_si+1)
double kac_from_zero(const std::vector<double>& u_list, const AFunction& a,
                     const RenewalTable& h_plus, const IncrementLaw& law, long long N);

double exponential_limit_sf(double x, double rate);

// limit rate of L(tau-,N)/N | L>0 for finite-variance laws: sigma^2/2
double conditional_exponential_rate(const IncrementLaw& law);

// Laplace transform of the limit field marginal at level u: a compound
// Poisson with jump rate x0/(2u) and Exp(mean 2u) jumps.
double field_marginal_laplace(double u, double lambda, double x0 = 1.0);

struct LimitModel {
  double alpha = 2.0;
  double beta = 0.0;
  AFunction a;
  double c_const = 0.0;  // 1 / a(1,1)
  double sigma2 = 0.0;

  static LimitModel gaussian(double sigma2);
};

}  // namespace walklt
