// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "walklt/rng.hpp"

namespace walklt {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Exact rational used for pmf validation of finite-support laws.
struct Rational {
  long long num = 0;
  long long den = 1;

  Rational() = default;
  Rational(long long n, long long d);
  Rational operator+(const Rational& o) const;
  Rational operator*(const Rational& o) const;
  bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
};

struct SupportAtom {
  long long value = 0;
  Rational prob;
};

// A mean-zero integer increment law: either a finite support table or a
// symmetric power tail p(+-k) ~ k^-(alpha+1).
struct IncrementLaw {
  std::string name;
  std::vector<SupportAtom> support;  // empty for power-tail laws
  bool heavy_tail = false;
  double alpha = 2.0;  // stability index, in (1,2]
  double beta = 0.0;
  double sigma2 = 0.0;       // variance; infinity for heavy tails
  int period = 1;            // lattice span of the support
  double tail_zeta = 0.0;    // zeta(alpha+1), set for heavy tails
  double norming_const = 0;  // C with c(n) = (C n)^(1/alpha)
  std::string calibration;
  bool validated = false;

  bool finite_variance() const { return !heavy_tail; }
  long long min_step() const;
  long long max_step() const;
  // pmf as doubles; finite laws only
  double pmf(long long v) const;
};

struct ValidationIssue {
  std::string what;
  double quantity = 0;
};

struct ValidationReport {
  bool valid = false;
  int period = 1;
  std::vector<ValidationIssue> issues;
};

// Bundled laws: "simple", "lazy", "sigma4", "powertail12", "powertail15",
// "powertail18".
IncrementLaw bundled_law(const std::string& name);
std::vector<std::string> bundled_law_names();

// Parse a plain-text key=value block:
//   name = mylaw
//   support = -1:1/2 1:1/2        (value:probability pairs, rational probs)
// or
//   alpha = 1.5
//   symmetric = true
IncrementLaw parse_law(const std::string& text);

// Checks the law invariants (exact rational sum/mean for finite supports,
// empirical 4-stderr mean check for parametric tails) and records the
// lattice period. Marks the law validated on success.
ValidationReport validate(IncrementLaw& law);

// Norming sequence c(n) (regularly varying, index 1/alpha) and its inverse.
double norming(const IncrementLaw& law, double n);
double inverse_norming(const IncrementLaw& law, double N);

// zeta(s) and the tail sum over j > k of j^-s, Euler-Maclaurin beyond j=16.
double zeta(double s);
double power_tail_sum(long long k, double s);

// Draws increments for a validated law. Immutable after construction and
// shareable across threads; callers own their Rng streams.
class IncrementSampler {
 public:
  explicit IncrementSampler(const IncrementLaw& law);

  long long sample(Rng& rng) const;
  const IncrementLaw& law() const { return law_; }

  // exact P(|X| > k) for power-tail laws (tail oracle used by tests)
  double tail_prob(long long k) const;

 private:
  IncrementLaw law_;
  // alias table over support atoms (finite) or magnitudes 1..table_size (tail)
  std::vector<double> accept_;
  std::vector<std::uint32_t> alias_;
  std::vector<long long> values_;
  double table_mass_ = 1.0;  // heavy tail: pmf mass covered by the table
  long long table_size_ = 0;

  long long sample_tail_magnitude(Rng& rng) const;
};

long long sample_increment(const IncrementSampler& sampler, Rng& rng);

}  // namespace walklt
