#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace aerate {

// Standard normal CDF via erfc.
double normal_cdf(double x);
// Inverse standard normal CDF; absolute error well below 1e-8 on (0,1).
double normal_quantile(double p);

enum class TestMode { Fixed, Bonferroni, Lil };

TestMode parse_test_mode(const std::string& name);
std::string to_string(TestMode mode);

struct TestConfig {
  double alpha = 0.05;
  double mu = 0.0;
  TestMode mode = TestMode::Fixed;
  // Rounds at which the Bonferroni-corrected z-test is applied.
  std::vector<std::size_t> looks{150, 250, 350, 450};
  double lil_constant = 1.1;

  void validate() const;
};

struct TestDecision {
  bool rejected = false;
  std::optional<std::size_t> at_round;
  double statistic = 0.0;
  // p-value for z-tests, boundary value for the LIL test.
  double boundary_or_pvalue = 0.0;
};

/// Two-sided z-test of theta = mu after t rounds:
/// reject iff |sqrt(t) (theta_hat - mu)| > sqrt(sigma_hat_sq) z_{1-alpha/2}.
TestDecision z_test(double theta_hat, double mu, double sigma_hat_sq, std::size_t t, double alpha);

// Fixed-m Bonferroni: at look k of m, reject iff p < alpha / m.
bool bonferroni_step(std::size_t look, std::size_t total_looks, double p_value, double alpha);

/// Anytime boundary c (log(1/alpha) + sqrt(2 S log(log(S) / alpha))) where S
/// is the running sum of squared centred increments. Inactive (nullopt) while
/// S <= e.
std::optional<double> lil_boundary(double alpha, double sum_z_sq, double constant = 1.1);

// Reject iff |sum_h - t mu| > boundary, strictly.
bool lil_step(std::size_t t, double sum_h, double mu, std::optional<double> boundary);

struct ConcentrationConstants {
  double c0 = 0.0;
  double c1 = 0.0;
};

ConcentrationConstants concentration_constants(double delta);

/// Right-hand side of the A2IPW martingale concentration bound, given the
/// increment bound C, the bound C4 on the fluctuation of the squared
/// increments and the absolute constant of the variance proxy.
double theorem4_bound(double delta, std::span<const double> z_history, double c, double c4,
                      double c3_abs = 1.0);
double theorem4_bound_from_sum(double delta, double sum_z_sq, double c, double c4,
                               double c3_abs = 1.0);

/// Smallest n with power 1 - beta against effect size delta_effect:
/// ceil(sigma_sq / delta^2 (z_{1-alpha/2} - z_beta)^2).
std::uint64_t min_sample_size(double delta_effect, double alpha, double beta, double sigma_sq);

/// Tracks the LIL and Bonferroni sequential tests along one trajectory.
/// Stopping times are censored at the horizon passed to the constructor.
class SequentialMonitor {
 public:
  SequentialMonitor(TestConfig config, std::size_t horizon);

  // Feeds round t: the running statistic sum (t * theta_hat), the running
  // sum of squared centred increments and the current variance estimate.
  void observe(std::size_t t, double statistic_sum, double sum_z_sq, double sigma_hat_sq);

  std::size_t lil_stopping_time() const { return lil_stop_.value_or(horizon_); }
  std::size_t bf_stopping_time() const { return bf_stop_.value_or(horizon_); }
  bool lil_rejected() const { return lil_stop_.has_value(); }
  bool bf_rejected() const { return bf_stop_.has_value(); }
  const std::vector<bool>& look_decisions() const { return look_decisions_; }
  std::optional<double> last_boundary() const { return last_boundary_; }

  // True once the configured mode has rejected.
  bool mode_rejected() const;

 private:
  TestConfig config_;
  std::size_t horizon_;
  std::size_t next_look_ = 0;
  std::optional<std::size_t> lil_stop_;
  std::optional<std::size_t> bf_stop_;
  std::vector<bool> look_decisions_;
  std::optional<double> last_boundary_;
};

}  // namespace aerate
