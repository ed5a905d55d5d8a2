#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "aerate/dgp.hpp"
#include "aerate/engine.hpp"

namespace aerate {

/// Which data-generating process a bench draws from.
struct DatasetChoice {
  // "synthetic1".."synthetic4", "surfaceA", "surfaceB".
  std::string name = "synthetic1";
  // Covariate CSV for the response surfaces; synthetic stand-in when empty
  // and synthetic_ihdp is set.
  std::filesystem::path covariates;
  bool covariates_header = false;
  bool synthetic_ihdp = false;
  std::uint64_t covariate_seed = 2024;
  bool standardize = true;
};

/// Builds per-trial datasets. Synthetic specs are shared; response surfaces
/// redraw their coefficients from the trial's coefficient stream.
class DatasetFactory {
 public:
  explicit DatasetFactory(const DatasetChoice& choice);
  DatasetSpec make(Rng& coefficient_rng) const;
  bool is_surface() const { return surface_.has_value(); }

 private:
  std::optional<DatasetSpec> synthetic_;
  std::optional<SurfaceKind> surface_;
  CovariateMatrix covariates_;
  SurfaceOptions options_;
};

/// One row of a results table: a design, the estimator reported and the
/// regressor, plus optional per-cell overrides used by sensitivity sweeps.
struct CellSpec {
  std::string name;
  Design design;
  EstimatorKind estimator = EstimatorKind::A2ipw;
  RegressorMethod regressor = RegressorMethod::NadarayaWatson;
  std::optional<ScheduleRule> gamma_rule;
  std::optional<ScheduleRule> zeta_rule;
  std::optional<std::size_t> rho;

  /// "design[:estimator[:regressor]]", e.g. "aerate:a2ipw:nw", "rct:adaipw",
  /// "hahn(50):a2ipw:knn", "opt". The aliases "opt" and "rct" as estimators
  /// select the matching design.
  static CellSpec parse(const std::string& text);
  std::string label() const;
};

struct BenchConfig {
  DatasetChoice dataset;
  std::size_t reps = 200;
  std::vector<CellSpec> cells;
  std::vector<std::size_t> horizons{150, 300};
  // Trials run to t_cap; sequential stopping times are censored there.
  std::size_t t_cap = 500;
  std::uint64_t base_seed = 1;
  std::size_t workers = 1;
  // Template for per-cell trial settings (rho, schedules, regressor
  // options, tests). Horizon, design, estimator and seed are overwritten.
  TrialConfig trial;
  // When set, one CSV of per-trial outputs is written per cell.
  std::optional<std::filesystem::path> trials_dir;

  void validate() const;
};

struct CellRow {
  std::string cell;
  std::size_t horizon = 0;
  double mse = 0.0;
  // Standard deviation of the squared errors across trials.
  double std = 0.0;
  double rejection_rate = 0.0;
  double lil_stop = 0.0;
  double bf_stop = 0.0;

  friend bool operator==(const CellRow&, const CellRow&) = default;
};

struct AggregateReport {
  std::vector<CellRow> rows;
  std::vector<std::string> failures;

  bool ok() const { return failures.empty(); }
};

/// Per-trial outputs of one cell, kept for auditing.
struct TrialSummary {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  double theta0 = 0.0;
  std::vector<double> estimates;  // one per horizon
  std::vector<bool> rejected;     // z-test per horizon
  std::size_t lil_stop = 0;
  std::size_t bf_stop = 0;
};

struct CellResult {
  std::vector<TrialSummary> trials;
  std::optional<std::string> failure;
};

// Runs reps trials of one cell; trial i uses seed base_seed + i.
CellResult run_cell(const BenchConfig& cfg, const CellSpec& cell);

// Folds trial summaries into report rows, in trial-index order.
std::vector<CellRow> aggregate_cell(const BenchConfig& cfg, const CellSpec& cell,
                                    const std::vector<TrialSummary>& trials);

AggregateReport run_bench(const BenchConfig& cfg);

std::string render_csv(const AggregateReport& report);
// Aligned text table: one line per cell, MSE/STD/Testing per horizon then
// the LIL and BF mean stopping times.
std::string render_table(const AggregateReport& report);
AggregateReport parse_report_csv(const std::string& text);
void emit_report(const AggregateReport& report, const std::filesystem::path& path);

std::string render_trials_csv(const BenchConfig& cfg, const std::vector<TrialSummary>& trials);
std::vector<TrialSummary> parse_trials_csv(const std::string& text);

struct SweepGrid {
  std::vector<ScheduleRule> gamma_rules;
  std::vector<ScheduleRule> zeta_rules;
  std::vector<std::size_t> rhos;
};

/// Runs every base cell at every grid point with the same seeds; cells are
/// labelled "<cell>|gamma=..|zeta=..|rho=..".
AggregateReport sensitivity_sweep(const BenchConfig& base, const SweepGrid& grid);

}  // namespace aerate
