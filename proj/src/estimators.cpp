#include "aerate/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "aerate/errors.hpp"

namespace aerate {
namespace {

void check_probability(const Observation& obs) {
  if (!(obs.pi_used > 0.0 && obs.pi_used < 1.0)) {
    throw DomainError("pi_used must lie in (0,1), got " + std::to_string(obs.pi_used));
  }
  if (obs.a != 0 && obs.a != 1) throw DomainError("action must be 0 or 1");
}

}  // namespace

EstimatorKind parse_estimator_kind(const std::string& name) {
  if (name == "a2ipw") return EstimatorKind::A2ipw;
  if (name == "adaipw" || name == "ipw") return EstimatorKind::AdaIpw;
  if (name == "ma2ipw") return EstimatorKind::Ma2ipw;
  if (name == "dm") return EstimatorKind::Dm;
  throw ConfigError("unknown estimator '" + name + "'");
}

std::string to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::A2ipw:
      return "a2ipw";
    case EstimatorKind::AdaIpw:
      return "adaipw";
    case EstimatorKind::Ma2ipw:
      return "ma2ipw";
    case EstimatorKind::Dm:
      return "dm";
  }
  return "?";
}

double a2ipw_increment(const Observation& obs, double f1, double f0) {
  check_probability(obs);
  const double ipw_part = obs.a == 1 ? (obs.y - f1) / obs.pi_used
                                     : -(obs.y - f0) / (1.0 - obs.pi_used);
  return ipw_part + f1 - f0;
}

double adaipw_increment(const Observation& obs) {
  check_probability(obs);
  return obs.a == 1 ? obs.y / obs.pi_used : -obs.y / (1.0 - obs.pi_used);
}

double opt_oracle_increment(const Observation& obs, const DatasetSpec& spec) {
  return a2ipw_increment(obs, true_f(spec, 1, obs.x), true_f(spec, 0, obs.x));
}

void IncrementStream::push(double v) {
  ++n_;
  sum_ += v;
  const double delta = v - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (v - mean_);
  const double z = v - null_mu_;
  sum_z_sq_ += z * z;
}

double IncrementStream::variance() const {
  if (n_ == 0) return 0.0;
  return std::max(0.0, m2_ / static_cast<double>(n_));
}

double Estimates::get(EstimatorKind kind) const {
  switch (kind) {
    case EstimatorKind::A2ipw:
      return a2ipw;
    case EstimatorKind::AdaIpw:
      return adaipw;
    case EstimatorKind::Ma2ipw:
      return ma2ipw;
    case EstimatorKind::Dm:
      return dm;
  }
  return a2ipw;
}

EstimatorState::EstimatorState(double null_mu, ScheduleRule zeta_rule)
    : zeta_rule_(zeta_rule), a2ipw_(null_mu), adaipw_(null_mu), dm_(null_mu) {}

void EstimatorState::update(const Observation& obs, const FvPrediction& pre) {
  if (pre.history_size >= obs.t) {
    throw InvariantError("regression snapshot from " + std::to_string(pre.history_size) +
                         " observations applied to round " + std::to_string(obs.t));
  }
  update(obs, pre.f1, pre.f0);
}

void EstimatorState::update(const Observation& obs, double f1, double f0) {
  const double h = a2ipw_increment(obs, f1, f0);
  const double g = adaipw_increment(obs);
  a2ipw_.push(h);
  adaipw_.push(g);
  ++t_;
}

void EstimatorState::absorb_dm(double term) { dm_.push(term); }

Estimates EstimatorState::estimates() const {
  if (t_ == 0) throw InsufficientDataError("no rounds absorbed yet");
  const double n = static_cast<double>(t_);
  Estimates e;
  e.a2ipw = a2ipw_.sum() / n;
  e.adaipw = adaipw_.sum() / n;
  const double zeta = zeta_rule_(t_);
  e.ma2ipw = zeta * e.adaipw + (1.0 - zeta) * e.a2ipw;
  e.dm = dm_.sum() / n;
  return e;
}

double EstimatorState::sigma_hat_sq() const { return sigma_hat_sq(EstimatorKind::A2ipw); }

const IncrementStream& EstimatorState::stream_for(EstimatorKind kind) const {
  switch (kind) {
    case EstimatorKind::AdaIpw:
      return adaipw_;
    case EstimatorKind::Dm:
      return dm_;
    case EstimatorKind::A2ipw:
    case EstimatorKind::Ma2ipw:
      return a2ipw_;
  }
  return a2ipw_;
}

double EstimatorState::sigma_hat_sq(EstimatorKind kind) const {
  if (t_ < 2) throw InsufficientDataError("variance needs at least two rounds");
  return stream_for(kind).variance();
}

}  // namespace aerate
