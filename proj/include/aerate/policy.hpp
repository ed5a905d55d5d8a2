#pragma once

#include <cstddef>
#include <string>

#include "aerate/regressors.hpp"

namespace aerate {

/// A decaying weight w_t = min(1, t^exponent), or identically zero.
///
/// Used for the policy mixing weight gamma_t and the estimator mixing weight
/// zeta_t. Parsed from "inv_sqrt_t", "inv_t", "t_pow(<e>)" (e may be written
/// as a ratio such as -1/1.5) or "zero".
class ScheduleRule {
 public:
  static ScheduleRule power(double exponent) { return ScheduleRule(false, exponent); }
  static ScheduleRule zero() { return ScheduleRule(true, 0.0); }
  static ScheduleRule parse(const std::string& text);

  double operator()(std::size_t t) const;

  bool is_zero() const { return zero_; }
  double exponent() const { return exponent_; }
  std::string to_string() const;

  friend bool operator==(const ScheduleRule&, const ScheduleRule&) = default;

 private:
  ScheduleRule(bool zero, double exponent) : zero_(zero), exponent_(exponent) {}
  bool zero_;
  double exponent_;
};

enum class PolicySource { Warmup, Adaptive, Fixed, Oracle };

struct PolicySnapshot {
  double pi1 = 0.5;
  double gamma = 1.0;
  PolicySource source = PolicySource::Warmup;
};

// sqrt(e1) / (sqrt(e1) + sqrt(e0)): minimizes the IPW variance.
double optimal_pi_ipw(double e1, double e0);
// sqrt(v1) / (sqrt(v1) + sqrt(v0)): minimizes the AIPW variance.
double optimal_pi_aipw(double v1, double v0);

// e1/q + e0/(1-q), the per-x variance that optimal_pi_ipw minimizes.
double variance_objective(double q, double e1, double e0);

/// gamma_t/2 + (1 - gamma_t) * optimal_pi_aipw(nu1, nu0).
PolicySnapshot adaptive_pi(std::size_t t, const FvPrediction& fv, const ScheduleRule& gamma_rule);

}  // namespace aerate
