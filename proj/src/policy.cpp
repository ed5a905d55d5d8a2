#include "aerate/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "aerate/errors.hpp"

namespace aerate {
namespace {

double parse_number(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("bad number '" + text + "' in schedule rule");
  }
  if (used != text.size()) throw ConfigError("bad number '" + text + "' in schedule rule");
  return v;
}

// Accepts "-0.5", "-1/1.5", "0".
double parse_ratio(std::string text) {
  std::erase(text, ' ');
  const auto slash = text.find('/');
  if (slash == std::string::npos) return parse_number(text);
  const double num = parse_number(text.substr(0, slash));
  const double den = parse_number(text.substr(slash + 1));
  if (den == 0.0) throw ConfigError("zero denominator in schedule rule");
  return num / den;
}

void check_nonnegative(double a, double b) {
  if (!(a >= 0.0) || !(b >= 0.0)) throw DomainError("moments must be non-negative");
  if (a + b <= 0.0) throw DegenerateInputError("both arms have zero moment");
}

}  // namespace

ScheduleRule ScheduleRule::parse(const std::string& raw) {
  std::string text = raw;
  std::erase(text, ' ');
  if (text == "inv_sqrt_t") return power(-0.5);
  if (text == "inv_t") return power(-1.0);
  if (text == "zero" || text == "none") return zero();
  if (text == "one") return power(0.0);
  const std::string prefix = "t_pow(";
  if (text.rfind(prefix, 0) == 0 && text.back() == ')') {
    return power(parse_ratio(text.substr(prefix.size(), text.size() - prefix.size() - 1)));
  }
  throw ConfigError("unknown schedule rule '" + raw + "'");
}

double ScheduleRule::operator()(std::size_t t) const {
  if (zero_) return 0.0;
  if (t == 0) return 1.0;
  return std::min(1.0, std::pow(static_cast<double>(t), exponent_));
}

std::string ScheduleRule::to_string() const {
  if (zero_) return "zero";
  if (exponent_ == -0.5) return "inv_sqrt_t";
  if (exponent_ == -1.0) return "inv_t";
  char buf[64];
  std::snprintf(buf, sizeof buf, "t_pow(%.6g)", exponent_);
  return buf;
}

double optimal_pi_ipw(double e1, double e0) {
  check_nonnegative(e1, e0);
  const double r1 = std::sqrt(e1);
  return r1 / (r1 + std::sqrt(e0));
}

double optimal_pi_aipw(double v1, double v0) {
  check_nonnegative(v1, v0);
  const double r1 = std::sqrt(v1);
  return r1 / (r1 + std::sqrt(v0));
}

double variance_objective(double q, double e1, double e0) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("assignment probability must lie in (0,1)");
  return e1 / q + e0 / (1.0 - q);
}

PolicySnapshot adaptive_pi(std::size_t t, const FvPrediction& fv, const ScheduleRule& gamma_rule) {
  PolicySnapshot snap;
  snap.gamma = gamma_rule(t);
  snap.source = PolicySource::Adaptive;
  snap.pi1 = snap.gamma * 0.5 + (1.0 - snap.gamma) * optimal_pi_aipw(fv.nu1, fv.nu0);
  return snap;
}

}  // namespace aerate
