#include "aerate/regressors.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "aerate/errors.hpp"

namespace aerate {
namespace {

constexpr double kMinBandwidthScale = 1e-6;
constexpr double kMinWeightSum = 1e-12;

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double diff = a[j] - b[j];
    d += diff * diff;
  }
  return d;
}

MomentPair plain_mean(const ArmStore& s) {
  MomentPair m;
  for (double y : s.ys()) {
    m.first += y;
    m.second += y * y;
  }
  const double n = static_cast<double>(s.size());
  m.first /= n;
  m.second /= n;
  return m;
}

}  // namespace

RegressorMethod parse_regressor_method(const std::string& name) {
  if (name == "knn" || name == "k-nn") return RegressorMethod::Knn;
  if (name == "nw") return RegressorMethod::NadarayaWatson;
  throw ConfigError("unknown regressor '" + name + "' (expected knn or nw)");
}

std::string to_string(RegressorMethod method) {
  return method == RegressorMethod::Knn ? "knn" : "nw";
}

void ArmStore::push(std::span<const double> x, double y) {
  xs_.insert(xs_.end(), x.begin(), x.end());
  ys_.push_back(y);
  const double n = static_cast<double>(ys_.size());
  for (std::size_t j = 0; j < dim_; ++j) {
    const double delta = x[j] - mean_[j];
    mean_[j] += delta / n;
    m2_[j] += delta * (x[j] - mean_[j]);
  }
}

double ArmStore::mean_coordinate_sd() const {
  if (size() < 2 || dim_ == 0) return 0.0;
  double total = 0.0;
  for (std::size_t j = 0; j < dim_; ++j) {
    total += std::sqrt(m2_[j] / static_cast<double>(size() - 1));
  }
  return total / static_cast<double>(dim_);
}

double floored_variance(double second, double first, double nu_floor) {
  return std::max(nu_floor, second - first * first);
}

RegressorState::RegressorState(std::size_t dim, RegressorOptions options)
    : dim_(dim), options_(std::move(options)), stores_{ArmStore(dim), ArmStore(dim)} {
  if (!(options_.nu_floor > 0.0)) throw ConfigError("nu_floor must be positive");
  if (options_.clip_c3 && !(*options_.clip_c3 > 0.0)) throw ConfigError("clip_c3 must be positive");
}

const ArmStore& RegressorState::arm_(int arm) const {
  if (arm != 0 && arm != 1) throw DomainError("arm must be 0 or 1");
  return stores_[arm];
}

void RegressorState::observe(std::span<const double> x, int arm, double y) {
  if (x.size() != dim_) {
    throw ShapeError("observation has dimension " + std::to_string(x.size()) + ", expected " +
                     std::to_string(dim_));
  }
  if (arm != 0 && arm != 1) throw DomainError("arm must be 0 or 1");
  stores_[arm].push(x, y);
  max_abs_y_ = std::max(max_abs_y_, std::abs(y));
}

double RegressorState::clip_bound() const {
  if (options_.clip_c3) return *options_.clip_c3;
  return 10.0 * std::max(max_abs_y_, 1.0);
}

std::size_t RegressorState::neighbours(std::size_t n) const {
  std::size_t k = options_.k_override
                      ? *options_.k_override
                      : static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
  return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(n, 1));
}

double RegressorState::bandwidth(int arm) const {
  if (options_.bandwidth_override) return *options_.bandwidth_override;
  const auto& s = arm_(arm);
  const double scale = std::max(s.mean_coordinate_sd(), kMinBandwidthScale);
  const double n = static_cast<double>(std::max<std::size_t>(s.size(), 1));
  return scale * std::pow(n, -1.0 / (static_cast<double>(dim_) + 4.0));
}

MomentPair RegressorState::clip(MomentPair m) const {
  const double c3 = clip_bound();
  m.first = std::clamp(m.first, -c3, c3);
  m.second = std::clamp(m.second, 0.0, c3 * c3);
  return m;
}

MomentPair RegressorState::knn_moments(const ArmStore& s, std::span<const double> x) const {
  const std::size_t n = s.size();
  const std::size_t k = neighbours(n);
  // (squared distance, arrival index): lexicographic order breaks distance
  // ties by earlier arrival.
  std::vector<std::pair<double, std::size_t>> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = {squared_distance(x, s.x(i)), i};
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end());
  MomentPair m;
  for (std::size_t r = 0; r < k; ++r) {
    const double y = s.y(order[r].second);
    m.first += y;
    m.second += y * y;
  }
  m.first /= static_cast<double>(k);
  m.second /= static_cast<double>(k);
  return m;
}

MomentPair RegressorState::nw_moments(const ArmStore& s, int arm,
                                      std::span<const double> x) const {
  const double h = bandwidth(arm);
  const double inv_two_h2 = 1.0 / (2.0 * h * h);
  double wsum = 0.0;
  MomentPair m;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double w = std::exp(-squared_distance(x, s.x(i)) * inv_two_h2);
    const double y = s.y(i);
    wsum += w;
    m.first += w * y;
    m.second += w * y * y;
  }
  if (wsum < kMinWeightSum) return plain_mean(s);
  m.first /= wsum;
  m.second /= wsum;
  return m;
}

MomentPair RegressorState::predict_moments(int arm, std::span<const double> x) const {
  const auto& s = arm_(arm);
  if (s.empty()) throw ColdArmError(arm);
  if (x.size() != dim_) throw ShapeError("query has wrong dimension");
  return clip(options_.method == RegressorMethod::Knn ? knn_moments(s, x)
                                                      : nw_moments(s, arm, x));
}

double RegressorState::knn_predict(int arm, std::span<const double> x, Moment moment) const {
  const auto& s = arm_(arm);
  if (s.empty()) throw ColdArmError(arm);
  if (x.size() != dim_) throw ShapeError("query has wrong dimension");
  const auto m = clip(knn_moments(s, x));
  return moment == Moment::First ? m.first : m.second;
}

double RegressorState::nw_predict(int arm, std::span<const double> x, Moment moment) const {
  const auto& s = arm_(arm);
  if (s.empty()) throw ColdArmError(arm);
  if (x.size() != dim_) throw ShapeError("query has wrong dimension");
  const auto m = clip(nw_moments(s, arm, x));
  return moment == Moment::First ? m.first : m.second;
}

double RegressorState::predict(int arm, std::span<const double> x, Moment moment) const {
  const auto m = predict_moments(arm, x);
  return moment == Moment::First ? m.first : m.second;
}

FvPrediction RegressorState::predict_fv(std::span<const double> x) const {
  const auto m1 = predict_moments(1, x);
  const auto m0 = predict_moments(0, x);
  FvPrediction fv;
  fv.f1 = m1.first;
  fv.f0 = m0.first;
  fv.nu1 = floored_variance(m1.second, m1.first, options_.nu_floor);
  fv.nu0 = floored_variance(m0.second, m0.first, options_.nu_floor);
  fv.history_size = size();
  return fv;
}

}  // namespace aerate
