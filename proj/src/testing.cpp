#include "aerate/testing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "aerate/errors.hpp"

namespace aerate {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile level must lie in (0,1)");
  // Acklam's rational approximation (relative error ~1e-9) ...
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x = 0.0;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // ... refined by one Newton step against the CDF.
  const double density = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  if (density > 0.0) x -= (normal_cdf(x) - p) / density;
  return x;
}

TestMode parse_test_mode(const std::string& name) {
  if (name == "fixed") return TestMode::Fixed;
  if (name == "bf" || name == "bonferroni") return TestMode::Bonferroni;
  if (name == "lil") return TestMode::Lil;
  throw ConfigError("unknown test mode '" + name + "'");
}

std::string to_string(TestMode mode) {
  switch (mode) {
    case TestMode::Fixed:
      return "fixed";
    case TestMode::Bonferroni:
      return "bf";
    case TestMode::Lil:
      return "lil";
  }
  return "?";
}

void TestConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
  if (!(lil_constant > 0.0)) throw ConfigError("lil_constant must be positive");
  for (std::size_t i = 0; i < looks.size(); ++i) {
    if (looks[i] == 0) throw ConfigError("looks must be positive rounds");
    if (i > 0 && looks[i] <= looks[i - 1]) throw ConfigError("looks must be strictly increasing");
  }
}

TestDecision z_test(double theta_hat, double mu, double sigma_hat_sq, std::size_t t,
                    double alpha) {
  if (t < 2) throw InsufficientDataError("z-test needs at least two rounds");
  if (!(sigma_hat_sq >= 0.0)) throw DomainError("variance estimate must be non-negative");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0,1)");
  TestDecision d;
  const double diff = theta_hat - mu;
  if (sigma_hat_sq == 0.0) {
    d.rejected = diff != 0.0;
    d.statistic = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
    d.boundary_or_pvalue = d.rejected ? 0.0 : 1.0;
  } else {
    const double root_t = std::sqrt(static_cast<double>(t));
    d.statistic = root_t * diff / std::sqrt(sigma_hat_sq);
    d.rejected = std::abs(root_t * diff) > std::sqrt(sigma_hat_sq) * normal_quantile(1.0 - alpha / 2.0);
    d.boundary_or_pvalue = std::erfc(std::abs(d.statistic) / std::numbers::sqrt2);
  }
  if (d.rejected) d.at_round = t;
  return d;
}

bool bonferroni_step(std::size_t look, std::size_t total_looks, double p_value, double alpha) {
  if (look < 1 || look > total_looks) throw DomainError("look index must lie in 1..m");
  return p_value < alpha / static_cast<double>(total_looks);
}

std::optional<double> lil_boundary(double alpha, double sum_z_sq, double constant) {
  if (!(sum_z_sq > std::numbers::e)) return std::nullopt;
  const double inner = std::log(std::log(sum_z_sq) / alpha);
  return constant * (std::log(1.0 / alpha) + std::sqrt(2.0 * sum_z_sq * inner));
}

bool lil_step(std::size_t t, double sum_h, double mu, std::optional<double> boundary) {
  if (!boundary) return false;
  return std::abs(sum_h - static_cast<double>(t) * mu) > *boundary;
}

ConcentrationConstants concentration_constants(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0,1)");
  constexpr double e_minus_2 = std::numbers::e - 2.0;
  ConcentrationConstants k;
  k.c0 = 3.0 * e_minus_2 + 2.0 * std::sqrt(173.0 / (2.0 * e_minus_2)) * std::log(4.0 / delta);
  k.c1 = 6.0 * e_minus_2;
  return k;
}

double theorem4_bound_from_sum(double delta, double sum_z_sq, double c, double c4,
                               double c3_abs) {
  const auto k = concentration_constants(delta);
  if (!(c > 0.0)) throw DomainError("increment bound C must be positive");
  constexpr double e2 = std::numbers::e * std::numbers::e;
  const double v = c3_abs * (e2 * e2 / (4.0 * c * c) * sum_z_sq + 2.0 * k.c0 * c4 / e2);
  // loglog V is only defined for V > 1; below e it is clamped to zero.
  const double loglog = v > std::numbers::e ? std::log(std::log(v)) : 0.0;
  const double radicand = std::max(0.0, 2.0 * k.c1 * v * (loglog + std::log(4.0 / delta)));
  return 2.0 * c / e2 * (k.c0 + std::sqrt(radicand));
}

double theorem4_bound(double delta, std::span<const double> z_history, double c, double c4,
                      double c3_abs) {
  double s = 0.0;
  for (double z : z_history) s += z * z;
  return theorem4_bound_from_sum(delta, s, c, c4, c3_abs);
}

std::uint64_t min_sample_size(double delta_effect, double alpha, double beta, double sigma_sq) {
  if (!(delta_effect > 0.0)) throw DomainError("effect size must be positive");
  if (!(alpha > 0.0 && alpha < 1.0) || !(beta > 0.0 && beta < 1.0)) {
    throw DomainError("alpha and beta must lie in (0,1)");
  }
  if (!(sigma_sq > 0.0)) throw DomainError("variance must be positive");
  const double gap = normal_quantile(1.0 - alpha / 2.0) - normal_quantile(beta);
  return static_cast<std::uint64_t>(std::ceil(sigma_sq / (delta_effect * delta_effect) * gap * gap));
}

SequentialMonitor::SequentialMonitor(TestConfig config, std::size_t horizon)
    : config_(std::move(config)), horizon_(horizon) {
  config_.validate();
}

void SequentialMonitor::observe(std::size_t t, double statistic_sum, double sum_z_sq,
                                double sigma_hat_sq) {
  last_boundary_ = lil_boundary(config_.alpha, sum_z_sq, config_.lil_constant);
  if (!lil_stop_ && lil_step(t, statistic_sum, config_.mu, last_boundary_)) lil_stop_ = t;

  while (next_look_ < config_.looks.size() && config_.looks[next_look_] < t) ++next_look_;
  if (next_look_ < config_.looks.size() && config_.looks[next_look_] == t && t >= 2) {
    const double theta = statistic_sum / static_cast<double>(t);
    const auto d = z_test(theta, config_.mu, sigma_hat_sq, t, config_.alpha);
    const bool reject =
        bonferroni_step(next_look_ + 1, config_.looks.size(), d.boundary_or_pvalue, config_.alpha);
    look_decisions_.push_back(reject);
    if (reject && !bf_stop_) bf_stop_ = t;
    ++next_look_;
  }
}

bool SequentialMonitor::mode_rejected() const {
  switch (config_.mode) {
    case TestMode::Lil:
      return lil_rejected();
    case TestMode::Bonferroni:
      return bf_rejected();
    case TestMode::Fixed:
      return false;
  }
  return false;
}

}  // namespace aerate
