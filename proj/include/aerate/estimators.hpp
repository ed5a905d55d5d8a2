#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "aerate/dgp.hpp"
#include "aerate/policy.hpp"
#include "aerate/regressors.hpp"

namespace aerate {

/// One round's record. Only the realized outcome of the assigned action is
/// kept; the counterfactual never enters the estimator.
struct Observation {
  std::size_t t = 0;
  std::vector<double> x;
  int a = 0;
  double y = 0.0;
  // Probability with which action 1 was assigned this round.
  double pi_used = 0.5;
  // The uniform draw compared against pi_used.
  double xi = 0.0;
};

enum class EstimatorKind { A2ipw, AdaIpw, Ma2ipw, Dm };

EstimatorKind parse_estimator_kind(const std::string& name);
std::string to_string(EstimatorKind kind);

double a2ipw_increment(const Observation& obs, double f1, double f0);
double adaipw_increment(const Observation& obs);

// A2IPW increment with the true regression function and the recorded
// probability; the engine records pi_used = pi^AIPW under the oracle design.
double opt_oracle_increment(const Observation& obs, const DatasetSpec& spec);

/// Running sum, mean and centred second moment of one increment stream,
/// plus the sum of squares around a fixed null value.
class IncrementStream {
 public:
  explicit IncrementStream(double null_mu = 0.0) : null_mu_(null_mu) {}

  void push(double v);

  std::size_t count() const { return n_; }
  double sum() const { return sum_; }
  double mean() const { return mean_; }
  // (1/n) sum (v_i - mean)^2
  double variance() const;
  // sum (v_i - null_mu)^2, nondecreasing in n
  double sum_z_sq() const { return sum_z_sq_; }
  double null_mu() const { return null_mu_; }

 private:
  double null_mu_;
  std::size_t n_ = 0;
  double sum_ = 0.0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  double sum_z_sq_ = 0.0;
};

struct Estimates {
  double a2ipw = 0.0;
  double adaipw = 0.0;
  double ma2ipw = 0.0;
  double dm = 0.0;

  double get(EstimatorKind kind) const;
};

/// Online state for all adaptive estimators of one trial.
class EstimatorState {
 public:
  explicit EstimatorState(double null_mu = 0.0, ScheduleRule zeta_rule = ScheduleRule::power(-1.0 / 1.5));

  /// Absorbs round obs.t. The predictions must come from the history before
  /// this round: pre.history_size < obs.t is enforced.
  void update(const Observation& obs, const FvPrediction& pre);
  void update(const Observation& obs, double f1, double f0);

  /// Direct-method term f_t(1,x_t) - f_t(0,x_t) from the post-round fit.
  void absorb_dm(double term);

  std::size_t t() const { return t_; }
  const ScheduleRule& zeta_rule() const { return zeta_rule_; }

  Estimates estimates() const;
  double zeta() const { return zeta_rule_(t_); }

  // Empirical variance of the A2IPW increments.
  double sigma_hat_sq() const;
  // Empirical variance of the stream an estimator's test is built on.
  double sigma_hat_sq(EstimatorKind kind) const;

  const IncrementStream& a2ipw_stream() const { return a2ipw_; }
  const IncrementStream& adaipw_stream() const { return adaipw_; }
  const IncrementStream& dm_stream() const { return dm_; }
  const IncrementStream& stream_for(EstimatorKind kind) const;

 private:
  ScheduleRule zeta_rule_;
  std::size_t t_ = 0;
  IncrementStream a2ipw_;
  IncrementStream adaipw_;
  IncrementStream dm_;
};

}  // namespace aerate
