#include "aerate/dgp.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "aerate/errors.hpp"

namespace aerate {
namespace {

TEST(Synthetic, Parameterization) {
  const auto d1 = make_synthetic(1);
  EXPECT_EQ(d1.mu1, 0.8);
  EXPECT_EQ(d1.mu0, 0.3);
  EXPECT_EQ(d1.std1, 0.8);
  EXPECT_EQ(d1.std0, 0.3);
  EXPECT_DOUBLE_EQ(true_ate(d1), 0.5);

  const auto d2 = make_synthetic(2);
  EXPECT_EQ(d2.mu1, 0.5);
  EXPECT_EQ(d2.mu0, 0.5);
  EXPECT_EQ(d2.std1, 0.8);
  EXPECT_EQ(d2.std0, 0.3);
  EXPECT_EQ(true_ate(d2), 0.0);

  const auto d3 = make_synthetic(3);
  EXPECT_EQ(d3.std1, 0.6);
  EXPECT_EQ(d3.std0, 0.4);
  EXPECT_DOUBLE_EQ(true_ate(d3), 0.5);

  const auto d4 = make_synthetic(4);
  EXPECT_EQ(d4.std1, 0.6);
  EXPECT_EQ(d4.std0, 0.4);
  EXPECT_EQ(true_ate(d4), 0.0);
  EXPECT_EQ(d4.dim, 5u);
}

TEST(Synthetic, InvalidIdIsConfigError) {
  EXPECT_THROW(make_synthetic(0), ConfigError);
  EXPECT_THROW(make_synthetic(5), ConfigError);
  EXPECT_THROW(make_synthetic("synthetic9"), ConfigError);
  EXPECT_THROW(make_synthetic("surfaceA"), ConfigError);
  EXPECT_EQ(make_synthetic("synthetic3").synthetic_id, 3);
}

TEST(Synthetic, ZeroCovariateAndNoiseLeaveArmMeans) {
  const auto spec = make_synthetic(1);
  const std::vector<double> x(5, 0.0);
  const auto draw = potential_outcomes(spec, x, 0.0, 0.0);
  EXPECT_DOUBLE_EQ(draw.y0, 0.3);
  EXPECT_DOUBLE_EQ(draw.y1, 0.8);
}

TEST(Synthetic, SameSeedSameDraw) {
  const auto spec = make_synthetic(1);
  Rng a(99), b(99);
  for (int i = 0; i < 20; ++i) {
    const auto da = sample_round(spec, a);
    const auto db = sample_round(spec, b);
    EXPECT_EQ(da.x, db.x);
    EXPECT_EQ(da.y0, db.y0);
    EXPECT_EQ(da.y1, db.y1);
  }
}

TEST(Synthetic, MonteCarloAteMatchesTruth) {
  const auto spec = make_synthetic(1);
  Rng rng(2024);
  constexpr int n = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto d = sample_round(spec, rng);
    const double diff = d.y1 - d.y0;
    sum += diff;
    sum_sq += diff * diff;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum_sq / n - mean * mean) / n);
  EXPECT_NEAR(mean, 0.5, 3.0 * se);
}

TEST(Synthetic, OracleFunctions) {
  const auto d1 = make_synthetic(1);
  const std::vector<double> ones(5, 1.0);
  EXPECT_DOUBLE_EQ(true_f(d1, 1, ones), 5.8);
  EXPECT_DOUBLE_EQ(true_var(d1, 0, ones), 0.09);
  EXPECT_DOUBLE_EQ(true_var(d1, 1, ones), 0.64);
  EXPECT_THROW(true_f(d1, 1, std::vector<double>(3, 0.0)), ShapeError);
}

TEST(Synthetic, VarianceFloorProperty) {
  Rng rng(5);
  for (int id = 1; id <= 4; ++id) {
    const auto spec = make_synthetic(id);
    const double lo = std::min(spec.std0, spec.std1);
    for (int i = 0; i < 50; ++i) {
      const auto x = sample_round(spec, rng).x;
      EXPECT_GT(true_var(spec, 1, x) + true_var(spec, 0, x), 0.0);
      EXPECT_GE(true_var(spec, 1, x), lo * lo);
      EXPECT_GE(true_var(spec, 0, x), lo * lo);
    }
  }
}

TEST(Synthetic, ConditionalMeanAtFixedCovariate) {
  const auto spec = make_synthetic(3);
  const std::vector<double> x{0.3, -1.2, 0.5, 2.0, -0.1};
  Rng rng(11);
  constexpr int n = 100000;
  double s0 = 0.0, s1 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double e0 = standard_normal(rng);
    const double e1 = standard_normal(rng);
    const auto d = potential_outcomes(spec, x, e0, e1);
    s0 += d.y0;
    s1 += d.y1;
  }
  EXPECT_NEAR(s0 / n, true_f(spec, 0, x), 4.0 * spec.std0 / std::sqrt(double(n)));
  EXPECT_NEAR(s1 / n, true_f(spec, 1, x), 4.0 * spec.std1 / std::sqrt(double(n)));
}

TEST(Surface, AHasAteFourForAnyBeta) {
  const auto cov = synthetic_ihdp_covariates(3);
  Rng rng(1);
  for (int rep = 0; rep < 5; ++rep) {
    const auto spec = make_surface(SurfaceKind::A, cov, rng);
    EXPECT_EQ(true_ate(spec), 4.0);
    for (double b : spec.beta) {
      EXPECT_TRUE(b == 0.0 || b == 1.0 || b == 2.0 || b == 3.0 || b == 4.0);
    }
  }
}

TEST(Surface, AZeroBetaGivesZeroAndFour) {
  const auto cov = synthetic_ihdp_covariates(3);
  const auto spec = make_surface_with_beta(SurfaceKind::A, cov, std::vector<double>(25, 0.0));
  const auto x = spec.covariates->row(17);
  EXPECT_EQ(true_f(spec, 0, x), 0.0);
  EXPECT_EQ(true_f(spec, 1, x), 4.0);
}

TEST(Surface, ASampleAteOverRowsIsFour) {
  const auto cov = synthetic_ihdp_covariates(8);
  Rng beta_rng(4), rng(6);
  const auto spec = make_surface(SurfaceKind::A, cov, beta_rng);
  constexpr int n = 50000;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto d = sample_round(spec, rng);
    s += d.y1 - d.y0;
  }
  // y1 - y0 = 4 + (e1 - e0) with unit noises.
  EXPECT_NEAR(s / n, 4.0, 4.0 * std::sqrt(2.0 / n));
}

TEST(Surface, BOffsetNormalizesAteToFour) {
  const auto cov = synthetic_ihdp_covariates(21);
  Rng beta_rng(9);
  const auto spec = make_surface(SurfaceKind::B, cov, beta_rng);
  // Recompute the mean treated-minus-control effect over the pool directly.
  const auto& pool = *spec.covariates;
  double gap = 0.0;
  for (std::size_t i = 0; i < pool.rows; ++i) {
    const auto x = pool.row(i);
    double lin = 0.0, shifted = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      lin += x[j] * spec.beta[j];
      shifted += (x[j] + 0.5) * spec.beta[j];
    }
    gap += (lin - spec.offset_q) - std::exp(shifted);
  }
  EXPECT_NEAR(gap / static_cast<double>(pool.rows), 4.0, 1e-9);
  EXPECT_EQ(true_ate(spec), 4.0);
  for (double b : spec.beta) {
    EXPECT_TRUE(b == 0.0 || b == 0.1 || b == 0.2 || b == 0.3 || b == 0.4);
  }
}

TEST(Surface, WrongColumnCountIsShapeError) {
  CovariateMatrix m;
  m.rows = 2;
  m.cols = 5;
  m.values.assign(10, 0.0);
  m.infer_binary_mask();
  Rng rng(1);
  EXPECT_THROW(make_surface(SurfaceKind::A, m, rng), ShapeError);
}

TEST(Surface, StandardizeOnlyTouchesContinuousColumns) {
  auto cov = synthetic_ihdp_covariates(2);
  for (std::size_t i = 0; i < cov.rows; ++i) cov.values[i * cov.cols] = 10.0 + 3.0 * cov.at(i, 0);
  const auto before = cov;
  standardize_continuous(cov);
  double mean = 0.0;
  for (std::size_t i = 0; i < cov.rows; ++i) mean += cov.at(i, 0);
  EXPECT_NEAR(mean / cov.rows, 0.0, 1e-12);
  for (std::size_t i = 0; i < cov.rows; ++i) EXPECT_EQ(cov.at(i, 24), before.at(i, 24));
}

std::string csv_rows(std::size_t rows, std::size_t cols) {
  std::string s;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      if (j) s += ",";
      s += j < 6 ? std::to_string(0.25 * double(i % 7) - 0.5) : std::to_string((i + j) % 2);
    }
    s += "\n";
  }
  return s;
}

TEST(Covariates, WellFormedFileLoads) {
  const auto path = std::filesystem::temp_directory_path() / "aerate_cov_747.csv";
  {
    std::ofstream out(path);
    out << csv_rows(747, 25);
  }
  const auto m = load_covariates(path);
  EXPECT_EQ(m.rows, 747u);
  EXPECT_EQ(m.cols, 25u);
  for (std::size_t j = 0; j < 25; ++j) EXPECT_EQ(m.binary_mask[j], j >= 6) << j;
  std::filesystem::remove(path);
}

TEST(Covariates, HeaderFlag) {
  std::string header;
  for (int j = 0; j < 25; ++j) header += (j ? ",c" : "c") + std::to_string(j);
  const auto m = parse_covariates(header + "\n" + csv_rows(3, 25), {.has_header = true});
  EXPECT_EQ(m.rows, 3u);
  EXPECT_THROW(parse_covariates(header + "\n" + csv_rows(3, 25)), ParseError);
}

TEST(Covariates, NonNumericCellNamesLine) {
  std::string text = csv_rows(4, 25);
  const auto third = text.find('\n', text.find('\n') + 1) + 1;
  text.replace(third, 1, "x");
  try {
    parse_covariates(text);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(Covariates, WrongColumnCountIsShapeError) {
  EXPECT_THROW(parse_covariates(csv_rows(2, 24)), ShapeError);
}

TEST(Covariates, MissingFileIsIoError) {
  EXPECT_THROW(load_covariates("/nonexistent/aerate.csv"), IoError);
}

TEST(Covariates, SyntheticFallbackIsDeterministic) {
  const auto a = synthetic_ihdp_covariates(42);
  const auto b = synthetic_ihdp_covariates(42);
  const auto c = synthetic_ihdp_covariates(43);
  EXPECT_EQ(a.rows, 747u);
  EXPECT_EQ(a.cols, 25u);
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, c.values);
  auto inferred = a;
  inferred.infer_binary_mask();
  EXPECT_EQ(inferred.binary_mask, a.binary_mask);
  EXPECT_EQ(std::count(a.binary_mask.begin(), a.binary_mask.end(), true), 19);
}

}  // namespace
}  // namespace aerate
