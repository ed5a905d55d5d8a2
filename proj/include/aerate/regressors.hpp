#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace aerate {

enum class RegressorMethod { Knn, NadarayaWatson };

enum class Moment { First, Second };

RegressorMethod parse_regressor_method(const std::string& name);
std::string to_string(RegressorMethod method);

struct RegressorOptions {
  RegressorMethod method = RegressorMethod::NadarayaWatson;
  // Lower bound applied to the conditional-variance estimate.
  double nu_floor = 0.01;
  // Fixed clipping bound C3; when unset, 10 * max(|y| seen so far, 1).
  std::optional<double> clip_c3;
  std::optional<double> bandwidth_override;
  std::optional<std::size_t> k_override;
};

/// Samples observed for one arm, in arrival order.
class ArmStore {
 public:
  explicit ArmStore(std::size_t dim) : dim_(dim), mean_(dim, 0.0), m2_(dim, 0.0) {}

  void push(std::span<const double> x, double y);

  std::size_t size() const { return ys_.size(); }
  bool empty() const { return ys_.empty(); }
  std::size_t dim() const { return dim_; }
  std::span<const double> x(std::size_t i) const { return {xs_.data() + i * dim_, dim_}; }
  double y(std::size_t i) const { return ys_[i]; }
  const std::vector<double>& ys() const { return ys_; }

  // Mean over coordinates of the per-coordinate sample standard deviation.
  double mean_coordinate_sd() const;

 private:
  std::size_t dim_;
  std::vector<double> xs_;
  std::vector<double> ys_;
  // Welford accumulators per coordinate.
  std::vector<double> mean_;
  std::vector<double> m2_;
};

/// First and second conditional moments predicted for one arm.
struct MomentPair {
  double first = 0.0;
  double second = 0.0;
};

/// Predictions for both arms at one covariate, taken from a fixed history.
/// history_size is the number of observations the regressor had absorbed
/// when the prediction was made; the engine uses it to prove the snapshot
/// predates the round it is applied to.
struct FvPrediction {
  double f1 = 0.0;
  double f0 = 0.0;
  double nu1 = 0.0;
  double nu0 = 0.0;
  std::size_t history_size = 0;
};

/// Per-arm nonparametric regression of E[Y(k)|x] and E[Y(k)^2|x].
class RegressorState {
 public:
  RegressorState(std::size_t dim, RegressorOptions options = {});

  void observe(std::span<const double> x, int arm, double y);

  std::size_t count(int arm) const { return arm_(arm).size(); }
  std::size_t size() const { return stores_[0].size() + stores_[1].size(); }
  std::size_t dim() const { return dim_; }
  const RegressorOptions& options() const { return options_; }
  const ArmStore& store(int arm) const { return arm_(arm); }

  double clip_bound() const;

  // Number of neighbours used by KNN for an arm with n samples.
  std::size_t neighbours(std::size_t n) const;
  // Gaussian-kernel bandwidth for the given arm's current store.
  double bandwidth(int arm) const;

  double knn_predict(int arm, std::span<const double> x, Moment moment) const;
  double nw_predict(int arm, std::span<const double> x, Moment moment) const;
  // Dispatches on the configured method.
  double predict(int arm, std::span<const double> x, Moment moment) const;
  MomentPair predict_moments(int arm, std::span<const double> x) const;

  // Throws ColdArmError when either arm is empty.
  FvPrediction predict_fv(std::span<const double> x) const;

 private:
  const ArmStore& arm_(int arm) const;
  MomentPair knn_moments(const ArmStore& s, std::span<const double> x) const;
  MomentPair nw_moments(const ArmStore& s, int arm, std::span<const double> x) const;
  MomentPair clip(MomentPair m) const;

  std::size_t dim_;
  RegressorOptions options_;
  ArmStore stores_[2];
  double max_abs_y_ = 0.0;
};

// Floored conditional variance from the two moments.
double floored_variance(double second, double first, double nu_floor);

}  // namespace aerate
