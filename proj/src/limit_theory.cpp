// SPDX-License-Identifier: Apache-2.0
#include "walklt/limit_theory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace walklt {

namespace {

double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                            double fa, double fm, double fb, double whole, double tol,
                            int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) < 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace

double a_20_closed(double u, double v) {
  if (u < 0 || v < 0) throw DomainError("a_20_closed needs u,v >= 0");
  return 2.0 * std::min(u, v);
}

double a_20_quadrature(double u, double v, double tolerance) {
  if (u <= 0 || v <= 0) throw DomainError("a_20_quadrature needs u,v > 0");
  const double d2 = (u - v) * (u - v);
  const double s2 = (u + v) * (u + v);
  // x in (0,1], evened out by x = s^2
  auto head = [&](double s) {
    if (s == 0.0) return 0.0;
    const double inv = 1.0 / (s * s);
    return 2.0 * std::exp(-0.5 * d2 * inv) * (-std::expm1(-2.0 * u * v * inv));
  };
  // tail via y = 1/x, then y = t^2:
  //   2 * integral_0^1 t^-2 (exp(-t^2 d2/2) - exp(-t^2 s2/2)) dt
  auto tail = [&](double t) {
    if (t == 0.0) return 2.0 * u * v;  // limit ((s2-d2)/2 = 2uv)
    const double t2 = t * t;
    return 2.0 * std::exp(-0.5 * d2 * t2) * (-std::expm1(-0.5 * (s2 - d2) * t2)) / t2;
  };
  const double tol = tolerance / 4.0;
  const double integral = adaptive_simpson(head, 0.0, 1.0, tol) +
                          adaptive_simpson(tail, 0.0, 1.0, tol);
  return integral / std::sqrt(2.0 * std::numbers::pi);
}

PsiTable::PsiTable(std::vector<double> a_axis, std::vector<double> b_axis,
                   std::vector<std::vector<double>> values)
    : a_axis_(std::move(a_axis)), b_axis_(std::move(b_axis)), values_(std::move(values)) {
  if (a_axis_.size() < 2 || b_axis_.size() < 2 || values_.size() != a_axis_.size())
    throw DomainError("psi table needs a full rectangular grid");
  for (const auto& row : values_)
    if (row.size() != b_axis_.size()) throw DomainError("psi table row length mismatch");
}

PsiTable PsiTable::from_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::vector<double> as, bs, psis;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.find("a") != std::string::npos && line.find("psi") != std::string::npos)
        continue;
    }
    std::istringstream row(line);
    std::string tok;
    double vals[3];
    for (int i = 0; i < 3; ++i) {
      if (!std::getline(row, tok, ',')) throw DomainError("psi csv needs a,b,psi columns");
      vals[i] = std::stod(tok);
    }
    as.push_back(vals[0]);
    bs.push_back(vals[1]);
    psis.push_back(vals[2]);
  }
  std::vector<double> a_axis(as), b_axis(bs);
  std::sort(a_axis.begin(), a_axis.end());
  a_axis.erase(std::unique(a_axis.begin(), a_axis.end()), a_axis.end());
  std::sort(b_axis.begin(), b_axis.end());
  b_axis.erase(std::unique(b_axis.begin(), b_axis.end()), b_axis.end());
  std::vector<std::vector<double>> grid(a_axis.size(),
                                        std::vector<double>(b_axis.size(), 0.0));
  for (std::size_t i = 0; i < as.size(); ++i) {
    const auto ia = static_cast<std::size_t>(
        std::lower_bound(a_axis.begin(), a_axis.end(), as[i]) - a_axis.begin());
    const auto ib = static_cast<std::size_t>(
        std::lower_bound(b_axis.begin(), b_axis.end(), bs[i]) - b_axis.begin());
    grid[ia][ib] = psis[i];
  }
  return PsiTable(std::move(a_axis), std::move(b_axis), std::move(grid));
}

PsiTable PsiTable::exact_gaussian(double max_arg, int points) {
  std::vector<double> axis(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i)
    axis[static_cast<std::size_t>(i)] = max_arg * static_cast<double>(i) / (points - 1);
  std::vector<std::vector<double>> grid(axis.size(), std::vector<double>(axis.size()));
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  for (std::size_t i = 0; i < axis.size(); ++i)
    for (std::size_t j = 0; j < axis.size(); ++j) {
      const double a = axis[i], b = axis[j];
      grid[i][j] = norm * std::exp(-0.5 * (b - a) * (b - a)) * (-std::expm1(-2.0 * a * b));
    }
  PsiTable table(axis, axis, std::move(grid));
  std::vector<double> zs, gs;
  for (int i = -points; i <= points; ++i) {
    const double z = max_arg * static_cast<double>(i) / (points - 1);
    zs.push_back(z);
    gs.push_back(norm * std::exp(-0.5 * z * z));
  }
  table.set_density(std::move(zs), std::move(gs));
  return table;
}

void PsiTable::set_density(std::vector<double> z_axis, std::vector<double> g_values) {
  if (z_axis.size() != g_values.size() || z_axis.size() < 2)
    throw DomainError("density table needs matching axes");
  if (std::abs(g_values.front()) > 1e-10 || std::abs(g_values.back()) > 1e-10)
    throw DomainError("density table must decay at its ends");
  g_axis_ = std::move(z_axis);
  g_values_ = std::move(g_values);
  has_density_ = true;
}

double PsiTable::density(double z) const {
  if (z <= g_axis_.front() || z >= g_axis_.back()) return 0.0;
  const auto it = std::upper_bound(g_axis_.begin(), g_axis_.end(), z);
  const auto i = static_cast<std::size_t>(it - g_axis_.begin()) - 1;
  const double t = (z - g_axis_[i]) / (g_axis_[i + 1] - g_axis_[i]);
  return (1 - t) * g_values_[i] + t * g_values_[i + 1];
}

double PsiTable::operator()(double a, double b) const {
  auto locate = [](const std::vector<double>& axis, double x) {
    auto it = std::upper_bound(axis.begin(), axis.end(), x);
    if (it == axis.begin()) return std::size_t{0};
    const auto idx = static_cast<std::size_t>(it - axis.begin());
    return std::min(idx - 1, axis.size() - 2);
  };
  if (a < a_axis_.front() || b < b_axis_.front())
    throw DomainError("psi table argument below grid");
  if (a > a_axis_.back() || b > b_axis_.back()) {
    if (has_density_) {
      // psi = g(b-a) * phi(a,b) with phi saturating away from the boundary:
      // reuse the positivity factor at the clamped edge point, where it is a
      // lower envelope of its off-grid continuation
      const double ac = std::min(a, a_axis_.back());
      const double bc = std::min(b, b_axis_.back());
      const double g_edge = density(bc - ac);
      if (g_edge <= 1e-300) return 0.0;
      const double phi_edge = std::clamp(interp_inside(ac, bc) / g_edge, 0.0, 1.0);
      return density(b - a) * phi_edge;
    }
    // without a density: admissible only where the table has decayed
    const bool a_out = a > a_axis_.back();
    const bool b_out = b > b_axis_.back();
    const std::size_t ia = a_out ? a_axis_.size() - 1 : locate(a_axis_, a);
    const std::size_t ib = b_out ? b_axis_.size() - 1 : locate(b_axis_, b);
    if (std::abs(values_[ia][ib]) > 1e-8)
      throw DomainError("psi table range insufficient: needs a<=" + std::to_string(a) +
                        ", b<=" + std::to_string(b));
    return 0.0;
  }
  return interp_inside(a, b);
}

double PsiTable::interp_inside(double a, double b) const {
  auto locate = [](const std::vector<double>& axis, double x) {
    auto it = std::upper_bound(axis.begin(), axis.end(), x);
    if (it == axis.begin()) return std::size_t{0};
    const auto idx = static_cast<std::size_t>(it - axis.begin());
    return std::min(idx - 1, axis.size() - 2);
  };
  const std::size_t ia = locate(a_axis_, a);
  const std::size_t ib = locate(b_axis_, b);
  const double ta = (a - a_axis_[ia]) / (a_axis_[ia + 1] - a_axis_[ia]);
  const double tb = (b - b_axis_[ib]) / (b_axis_[ib + 1] - b_axis_[ib]);
  return (1 - ta) * (1 - tb) * values_[ia][ib] + ta * (1 - tb) * values_[ia + 1][ib] +
         (1 - ta) * tb * values_[ia][ib + 1] + ta * tb * values_[ia + 1][ib + 1];
}

double a_generic_quadrature(double u, double v, const PsiTable& psi, double alpha,
                            double tolerance) {
  if (u <= 0 || v <= 0) throw DomainError("a_generic_quadrature needs u,v > 0");
  if (alpha <= 1.0 || alpha > 2.0) throw DomainError("alpha must lie in (1,2]");
  const double inv_alpha = 1.0 / alpha;
  // head x in (0,1], x = s^2
  auto head = [&](double s) {
    if (s == 0.0) return 0.0;
    const double x = s * s;
    const double scale = std::pow(x, -inv_alpha);
    return 2.0 * s * scale * psi(u * scale, v * scale);
  };
  // tail x in [1,inf), y = 1/x then y = t^2:
  //   2 * integral_0^1 t^(2/alpha - 3) psi(u t^(2/alpha), v t^(2/alpha)) dt
  auto tail = [&](double t) {
    t = std::max(t, 1e-9);  // t -> 0 limit through the interpolated table
    const double y = t * t;
    const double scale = std::pow(y, inv_alpha);
    return 2.0 * std::pow(y, inv_alpha - 2.0) * t * psi(u * scale, v * scale);
  };
  const double tol = tolerance / 4.0;
  return adaptive_simpson(head, 0.0, 1.0, tol) + adaptive_simpson(tail, 0.0, 1.0, tol);
}

double kac_moment_value(double u0, const std::vector<double>& u_list, const AFunction& a) {
  const std::size_t m = u_list.size();
  if (m < 1) throw DomainError("kac_moment_value needs m >= 1");
  if (m > 8) throw DomainError("kac_moment_value supports m <= 8 (factorial blowup)");
  std::vector<std::size_t> perm(m);
  for (std::size_t i = 0; i < m; ++i) perm[i] = i;
  double total = 0.0;
  do {
    double term = a(u0, u_list[perm[0]]);
    for (std::size_t i = 0; i + 1 < m; ++i) term *= a(u_list[perm[i]], u_list[perm[i + 1]]);
    total += term;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total;
}

double kac_from_zero(const std::vector<double>& u_list, const AFunction& a,
                     const RenewalTable& h_plus, const IncrementLaw& law, long long N) {
  const std::size_t m = u_list.size();
  if (m < 1) throw DomainError("kac_from_zero needs m >= 1");
  if (m > 8) throw DomainError("kac_from_zero supports m <= 8");
  std::vector<std::size_t> perm(m);
  for (std::size_t i = 0; i < m; ++i) perm[i] = i;
  double total = 0.0;
  do {
    const auto first =
        static_cast<std::size_t>(std::floor(u_list[perm[0]] * static_cast<double>(N)));
    if (first >= h_plus.h.size()) throw DomainError("h+ table too short for kac_from_zero");
    double term = h_plus.h[first];
    for (std::size_t i = 0; i + 1 < m; ++i) term *= a(u_list[perm[i]], u_list[perm[i + 1]]);
    total += term;
  } while (std::next_permutation(perm.begin(), perm.end()));
  const double ratio = inverse_norming(law, static_cast<double>(N)) / static_cast<double>(N);
  return std::pow(ratio, static_cast<double>(m - 1)) * total;
}

double exponential_limit_sf(double x, double rate) {
  if (x < 0 || rate <= 0) throw DomainError("exponential_limit_sf needs x>=0, rate>0");
  return std::exp(-x * rate);
}

double conditional_exponential_rate(const IncrementLaw& law) {
  if (!law.finite_variance())
    throw DomainError("closed-form conditional rate needs finite variance");
  return law.sigma2 / 2.0;
}

double field_marginal_laplace(double u, double lambda, double x0) {
  if (u <= 0 || lambda < 0) throw DomainError("field_marginal_laplace needs u>0, lambda>=0");
  return std::exp(-lambda * x0 / (1.0 + 2.0 * u * lambda));
}

LimitModel LimitModel::gaussian(double sigma2) {
  LimitModel m;
  m.alpha = 2.0;
  m.beta = 0.0;
  m.a = [](double u, double v) { return a_20_closed(u, v); };
  m.c_const = 1.0 / m.a(1.0, 1.0);
  m.sigma2 = sigma2;
  return m;
}

}  // namespace walklt
