#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "aerate/dgp.hpp"
#include "aerate/estimators.hpp"
#include "aerate/policy.hpp"
#include "aerate/random.hpp"
#include "aerate/regressors.hpp"
#include "aerate/testing.hpp"

namespace aerate {

enum class DesignKind { Aerate, Rct, Hahn, Opt, Fixed };

/// Treatment-assignment design. Textual forms: "aerate", "rct", "opt",
/// "hahn(50)", "fixed(0.7)".
struct Design {
  DesignKind kind = DesignKind::Aerate;
  std::size_t hahn_n0 = 50;
  double fixed_pi = 0.5;
  // Hahn only: keep refitting f-hat in the second stage instead of freezing it.
  bool hahn_refit_f = false;

  static Design parse(const std::string& text);
  std::string to_string() const;
};

struct TrialConfig {
  std::size_t horizon = 300;
  // AERATE assigns with probability 1/2 for rounds t <= rho.
  std::size_t rho = 10;
  Design design;
  // Estimator driving the sequential tests.
  EstimatorKind estimator = EstimatorKind::A2ipw;
  RegressorOptions regressor;
  ScheduleRule gamma_rule = ScheduleRule::power(-0.5);
  ScheduleRule zeta_rule = ScheduleRule::power(-1.0 / 1.5);
  TestConfig test;
  bool stop_on_reject = false;
  std::uint64_t seed = 0;

  void validate() const;
};

struct RoundRecord {
  std::size_t t = 0;
  int a = 0;
  double pi1 = 0.5;
  double y = 0.0;
  PolicySource source = PolicySource::Warmup;
  Estimates estimates;
  // Variance estimate of the configured estimator's increments; NaN for t < 2.
  double sigma_hat_sq = 0.0;
  // LIL boundary, NaN while inactive.
  double boundary = 0.0;
};

struct TrialResult {
  std::size_t horizon = 0;
  double theta0 = 0.0;
  std::vector<RoundRecord> trajectory;
  Estimates final_estimates;
  double final_sigma_hat_sq = 0.0;
  // First rejection round, or the horizon when never rejected.
  std::size_t stopping_time_lil = 0;
  std::size_t stopping_time_bf = 0;
  bool lil_rejected = false;
  bool bf_rejected = false;
  std::vector<bool> rejected_at_looks;
  // max over rounds of 1 / min(pi_t, 1 - pi_t)
  double max_inverse_propensity = 0.0;
  // Hahn designs: number of observations the frozen first-stage fit used.
  std::size_t freeze_round = 0;
};

struct Assignment {
  int action = 0;
  double xi = 0.0;
};

// A = 1 iff xi <= pi1.
int assign_action(double pi1, double xi);
Assignment assignment_draw(double pi1, Rng& rng);

TrialResult run_trial(const TrialConfig& cfg, const DatasetSpec& spec, TrialStreams& streams);
TrialResult run_trial(const TrialConfig& cfg, const DatasetSpec& spec);

// Two-stage baseline; cfg.design must be a Hahn design.
TrialResult run_hahn(const TrialConfig& cfg, const DatasetSpec& spec, TrialStreams& streams);

}  // namespace aerate
