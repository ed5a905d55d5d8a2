#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "aerate/random.hpp"

namespace aerate {

/// Dense row-major covariate matrix with a per-column binary flag.
struct CovariateMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  std::vector<bool> binary_mask;

  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * cols, cols};
  }
  double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }

  // Recomputes binary_mask from the data: a column is binary iff every
  // value is exactly 0 or 1.
  void infer_binary_mask();
};

inline constexpr std::size_t kIhdpColumns = 25;
inline constexpr std::size_t kIhdpRows = 747;
inline constexpr std::size_t kIhdpContinuous = 6;
inline constexpr std::size_t kSyntheticDim = 5;

enum class DatasetKind { Synthetic, SurfaceA, SurfaceB };

/// A data-generating process. Immutable after construction and safe to share
/// across threads; the covariate pool of the response surfaces is shared.
struct DatasetSpec {
  DatasetKind kind = DatasetKind::Synthetic;
  int synthetic_id = 0;
  std::size_t dim = kSyntheticDim;
  double mu1 = 0.0;
  double mu0 = 0.0;
  double std1 = 1.0;
  double std0 = 1.0;
  std::vector<double> beta;
  double offset_q = 0.0;
  double offset_w = 0.5;
  std::shared_ptr<const CovariateMatrix> covariates;
  double ate = 0.0;

  std::string name() const;
};

struct RoundDraw {
  std::vector<double> x;
  double y0 = 0.0;
  double y1 = 0.0;
};

DatasetSpec make_synthetic(int id);

// Selects a dataset by its config name ("synthetic1".."synthetic4").
// Surfaces need covariates and a coefficient stream; use make_surface.
DatasetSpec make_synthetic(const std::string& name);

/// Both potential outcomes at covariate x given the two standardized noise
/// draws. The synthetic noise is scaled by std_k; surface noise is unit.
RoundDraw potential_outcomes(const DatasetSpec& spec, std::span<const double> x,
                             double noise0, double noise1);

/// Draws one round. Covariates (or the surface row index) come from
/// covariate_rng; both noise terms always come from noise_rng, two draws per
/// round, so the stream stays aligned across designs.
RoundDraw sample_round(const DatasetSpec& spec, Rng& covariate_rng, Rng& noise_rng);
RoundDraw sample_round(const DatasetSpec& spec, Rng& rng);

double true_ate(const DatasetSpec& spec);
double true_f(const DatasetSpec& spec, int arm, std::span<const double> x);
double true_var(const DatasetSpec& spec, int arm, std::span<const double> x);

enum class SurfaceKind { A, B };

struct SurfaceOptions {
  // Standardize the continuous (non-binary) columns to zero mean and unit
  // sample variance before building the surface.
  bool standardize = true;
};

DatasetSpec make_surface(SurfaceKind kind, const CovariateMatrix& covariates, Rng& rng,
                         SurfaceOptions options = {});

// Same as above with the coefficient vector supplied by the caller.
DatasetSpec make_surface_with_beta(SurfaceKind kind, const CovariateMatrix& covariates,
                                   std::vector<double> beta, SurfaceOptions options = {});

struct CsvOptions {
  bool has_header = false;
  std::size_t expected_cols = kIhdpColumns;
};

CovariateMatrix load_covariates(const std::filesystem::path& path, CsvOptions options = {});
CovariateMatrix parse_covariates(const std::string& text, CsvOptions options = {});

/// Schema-compatible stand-in for the IHDP covariates: 6 standard-normal
/// columns followed by 19 Bernoulli(0.5) columns.
CovariateMatrix synthetic_ihdp_covariates(std::uint64_t seed, std::size_t rows = kIhdpRows);

void standardize_continuous(CovariateMatrix& m);

}  // namespace aerate
