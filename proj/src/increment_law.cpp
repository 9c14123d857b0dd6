// SPDX-License-Identifier: Apache-2.0
#include "walklt/increment_law.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace walklt {

namespace {

long long gcd_ll(long long a, long long b) {
  a = std::llabs(a);
  b = std::llabs(b);
  while (b) {
    long long t = a % b;
    a = b;
    b = t;
  }
  return a;
}

}  // namespace

Rational::Rational(long long n, long long d) : num(n), den(d) {
  if (den == 0) throw ConfigError("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  long long g = gcd_ll(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
}

Rational Rational::operator+(const Rational& o) const {
  return Rational(num * o.den + o.num * den, den * o.den);
}

Rational Rational::operator*(const Rational& o) const {
  return Rational(num * o.num, den * o.den);
}

long long IncrementLaw::min_step() const {
  if (heavy_tail) throw ConfigError("min_step: unbounded support");
  long long m = support.front().value;
  for (const auto& a : support) m = std::min(m, a.value);
  return m;
}

long long IncrementLaw::max_step() const {
  if (heavy_tail) throw ConfigError("max_step: unbounded support");
  long long m = support.front().value;
  for (const auto& a : support) m = std::max(m, a.value);
  return m;
}

double IncrementLaw::pmf(long long v) const {
  for (const auto& a : support)
    if (a.value == v) return a.prob.to_double();
  return 0.0;
}

double zeta(double s) { return 1.0 + power_tail_sum(1, s); }

double power_tail_sum(long long k, double s) {
  // sum over j > k of j^-s; direct up to 16, Euler-Maclaurin from there
  double acc = 0.0;
  long long j = k + 1;
  for (; j <= 16; ++j) acc += std::pow(static_cast<double>(j), -s);
  const double a = static_cast<double>(std::max(j, k + 1));
  // sum_{j>=a} j^-s
  const double as = std::pow(a, -s);
  double em = a * as / (s - 1.0) + 0.5 * as + s * as / a / 12.0 -
              s * (s + 1.0) * (s + 2.0) * as / (a * a * a) / 720.0 +
              s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * as /
                  (a * a * a * a * a) / 30240.0;
  return acc + em;
}

namespace {

IncrementLaw make_finite(std::string name, std::vector<SupportAtom> atoms) {
  IncrementLaw law;
  law.name = std::move(name);
  law.support = std::move(atoms);
  law.heavy_tail = false;
  law.alpha = 2.0;
  law.beta = 0.0;
  double s2 = 0.0;
  for (const auto& a : law.support)
    s2 += static_cast<double>(a.value) * static_cast<double>(a.value) * a.prob.to_double();
  law.sigma2 = s2;
  law.calibration = "c(n)=sigma*sqrt(n), closed form";
  return law;
}

IncrementLaw make_powertail(std::string name, double alpha) {
  IncrementLaw law;
  law.name = std::move(name);
  law.heavy_tail = true;
  law.alpha = alpha;
  law.beta = 0.0;
  law.sigma2 = std::numeric_limits<double>::infinity();
  law.period = 1;
  law.tail_zeta = zeta(alpha + 1.0);
  // normalized so that n * P(|X| > c(n)) -> 1
  law.norming_const = 1.0 / (alpha * law.tail_zeta);
  law.calibration = "C = 1/(alpha*zeta(alpha+1)); n*P(|X|>c(n)) -> 1";
  return law;
}

}  // namespace

IncrementLaw bundled_law(const std::string& name) {
  if (name == "simple")
    return make_finite("simple", {{-1, Rational(1, 2)}, {1, Rational(1, 2)}});
  if (name == "lazy")
    return make_finite("lazy",
                       {{-1, Rational(1, 4)}, {0, Rational(1, 2)}, {1, Rational(1, 4)}});
  if (name == "sigma4")
    return make_finite("sigma4", {{-3, Rational(1, 5)},
                                  {-1, Rational(1, 5)},
                                  {0, Rational(1, 5)},
                                  {1, Rational(1, 5)},
                                  {3, Rational(1, 5)}});
  if (name == "powertail12") return make_powertail("powertail12", 1.2);
  if (name == "powertail15") return make_powertail("powertail15", 1.5);
  if (name == "powertail18") return make_powertail("powertail18", 1.8);
  throw ConfigError("unknown law: " + name);
}

std::vector<std::string> bundled_law_names() {
  return {"simple", "lazy", "sigma4", "powertail12", "powertail15", "powertail18"};
}

namespace {

Rational parse_rational(const std::string& tok) {
  auto slash = tok.find('/');
  if (slash == std::string::npos) {
    // allow plain integers only; decimal probabilities would break exactness
    return Rational(std::stoll(tok), 1);
  }
  return Rational(std::stoll(tok.substr(0, slash)), std::stoll(tok.substr(slash + 1)));
}

}  // namespace

IncrementLaw parse_law(const std::string& text) {
  std::string name = "custom";
  std::vector<SupportAtom> atoms;
  std::optional<double> alpha;
  bool symmetric = true;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    auto trim = [](std::string& s) {
      s.erase(0, s.find_first_not_of(" \t\r"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
    };
    trim(key);
    trim(val);
    if (key == "name") {
      name = val;
    } else if (key == "support") {
      std::istringstream pairs(val);
      std::string tok;
      while (pairs >> tok) {
        auto colon = tok.find(':');
        if (colon == std::string::npos) throw ConfigError("support pair needs value:prob");
        SupportAtom a;
        a.value = std::stoll(tok.substr(0, colon));
        a.prob = parse_rational(tok.substr(colon + 1));
        atoms.push_back(a);
      }
    } else if (key == "alpha") {
      alpha = std::stod(val);
    } else if (key == "symmetric") {
      symmetric = (val == "true" || val == "1" || val == "yes");
    }
  }
  if (!atoms.empty()) {
    if (alpha) throw ConfigError("law cannot have both support and alpha");
    return make_finite(name, std::move(atoms));
  }
  if (!alpha) throw ConfigError("law needs either support or alpha");
  if (!symmetric) throw ConfigError("asymmetric power tails have no bundled oracle");
  IncrementLaw law = make_powertail(name, *alpha);
  return law;
}

ValidationReport validate(IncrementLaw& law) {
  ValidationReport rep;
  const bool alpha_ok = (law.alpha > 1.0 && law.alpha < 2.0 && std::abs(law.beta) <= 1.0) ||
                        (law.alpha == 2.0 && law.beta == 0.0);
  if (!alpha_ok)
    rep.issues.push_back({"(alpha,beta) outside admissible set", law.alpha});

  if (!law.heavy_tail) {
    if (law.support.empty()) {
      rep.issues.push_back({"empty support", 0});
      return rep;
    }
    Rational total(0, 1), mean(0, 1);
    for (const auto& a : law.support) {
      if (a.prob.num < 0) rep.issues.push_back({"negative probability", a.prob.to_double()});
      total = total + a.prob;
      mean = mean + a.prob * Rational(a.value, 1);
    }
    if (!(total == Rational(1, 1)))
      rep.issues.push_back({"probabilities do not sum to 1", total.to_double()});
    if (!(mean == Rational(0, 1)))
      rep.issues.push_back({"mean is not 0", mean.to_double()});
    long long span = 0;
    const long long base = law.support.front().value;
    for (const auto& a : law.support)
      if (a.prob.num > 0) span = gcd_ll(span, a.value - base);
    rep.period = span == 0 ? 1 : static_cast<int>(span);
  } else {
    if (!(law.alpha > 1.0 && law.alpha < 2.0))
      rep.issues.push_back({"power-tail exponent must lie in (1,2)", law.alpha});
    rep.period = 1;
    if (rep.issues.empty()) {
      // empirical mean check on 1e6 draws, 4 standard errors
      IncrementLaw probe = law;
      probe.validated = true;  // sampler requires it
      IncrementSampler s(probe);
      Rng rng(0x9b1a5u);
      const int n = 1'000'000;
      double sum = 0, sumsq = 0;
      for (int i = 0; i < n; ++i) {
        const double x = static_cast<double>(s.sample(rng));
        sum += x;
        sumsq += x * x;
      }
      const double m = sum / n;
      const double sd = std::sqrt(std::max(sumsq / n - m * m, 1e-30));
      if (std::abs(m) > 4.0 * sd / std::sqrt(static_cast<double>(n)))
        rep.issues.push_back({"empirical mean beyond 4 stderr of 0", m});
    }
  }
  rep.valid = rep.issues.empty();
  if (rep.valid) {
    law.period = rep.period;
    law.validated = true;
  }
  return rep;
}

double norming(const IncrementLaw& law, double n) {
  if (law.finite_variance()) return std::sqrt(law.sigma2 * n);
  return std::pow(law.norming_const * n, 1.0 / law.alpha);
}

double inverse_norming(const IncrementLaw& law, double N) {
  if (law.finite_variance()) return N * N / law.sigma2;
  return std::pow(N, law.alpha) / law.norming_const;
}

namespace {

// Walker/Vose alias construction over given weights (already normalized).
void build_alias(const std::vector<double>& w, std::vector<double>& accept,
                 std::vector<std::uint32_t>& alias) {
  const std::size_t n = w.size();
  accept.assign(n, 0.0);
  alias.assign(n, 0);
  std::vector<double> scaled(n);
  for (std::size_t i = 0; i < n; ++i) scaled[i] = w[i] * static_cast<double>(n);
  std::vector<std::uint32_t> small, large;
  for (std::size_t i = 0; i < n; ++i)
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
  while (!small.empty() && !large.empty()) {
    const auto s = small.back();
    const auto l = large.back();
    small.pop_back();
    accept[s] = scaled[s];
    alias[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (auto i : large) accept[i] = 1.0;
  for (auto i : small) accept[i] = 1.0;
}

}  // namespace

IncrementSampler::IncrementSampler(const IncrementLaw& law) : law_(law) {
  if (!law.validated) throw ConfigError("sampler requires a validated law");
  if (!law_.heavy_tail) {
    std::vector<double> w;
    for (const auto& a : law_.support) {
      values_.push_back(a.value);
      w.push_back(a.prob.to_double());
    }
    build_alias(w, accept_, alias_);
    table_size_ = static_cast<long long>(values_.size());
    table_mass_ = 1.0;
  } else {
    // alias over 2^16 outcomes: i < 65535 is magnitude i+1, the last outcome
    // is the analytic tail (magnitude >= 65536)
    const long long table = 1 << 16;
    const double s = law_.alpha + 1.0;
    const double z = law_.tail_zeta;
    std::vector<double> w(static_cast<std::size_t>(table));
    for (long long m = 1; m < table; ++m)
      w[static_cast<std::size_t>(m - 1)] = std::pow(static_cast<double>(m), -s) / z;
    w.back() = power_tail_sum(table - 1, s) / z;
    table_mass_ = 1.0 - w.back();
    build_alias(w, accept_, alias_);
    table_size_ = table;
  }
}

long long IncrementSampler::sample_tail_magnitude(Rng& rng) const {
  // conditional on magnitude >= table_size_: find smallest m with
  // T(m) < v * T(table-1), T(m) = sum_{j>m} j^-s
  const double s = law_.alpha + 1.0;
  const double t0 = power_tail_sum(table_size_ - 1, s);
  const double v = rng.next_open();
  const double target = v * t0;
  long long lo = table_size_ - 1, hi = 1LL << 40;  // P(beyond) astronomically small
  while (lo + 1 < hi) {
    const long long mid = lo + (hi - lo) / 2;
    if (power_tail_sum(mid, s) < target)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

long long IncrementSampler::sample(Rng& rng) const {
  if (!law_.heavy_tail) {
    const std::uint64_t r = rng.next_u64();
    const auto i = static_cast<std::size_t>(
        (static_cast<unsigned __int128>(r) * static_cast<std::uint64_t>(table_size_)) >> 64);
    const double u = rng.next_double();
    return (u < accept_[i]) ? values_[i] : values_[alias_[i]];
  }
  const std::uint64_t r = rng.next_u64();
  const std::size_t i = static_cast<std::size_t>(r & 0xFFFFu);
  const double u = rng.next_double();
  const std::size_t k = (u < accept_[i]) ? i : alias_[i];
  const long long mag =
      k + 1 < static_cast<std::size_t>(table_size_) ? static_cast<long long>(k) + 1
                                                    : sample_tail_magnitude(rng);
  return (r >> 63) ? mag : -mag;
}

double IncrementSampler::tail_prob(long long k) const {
  if (!law_.heavy_tail) throw ConfigError("tail_prob is a power-tail oracle");
  if (k < 1) return 1.0;
  return power_tail_sum(k, law_.alpha + 1.0) / law_.tail_zeta;
}

long long sample_increment(const IncrementSampler& sampler, Rng& rng) {
  return sampler.sample(rng);
}

}  // namespace walklt
