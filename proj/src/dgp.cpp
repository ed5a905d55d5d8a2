#include "aerate/dgp.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "aerate/errors.hpp"

namespace aerate {
namespace {

double dot(std::span<const double> x, const std::vector<double>& beta) {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += x[j] * beta[j];
  return s;
}

// exp((x + W) . beta) for surface B's control arm.
double surface_b_control_mean(std::span<const double> x, const std::vector<double>& beta,
                              double w) {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += (x[j] + w) * beta[j];
  return std::exp(s);
}

std::vector<double> draw_beta(SurfaceKind kind, std::size_t dim, Rng& rng) {
  // Values and weights of the response-surface coefficient draws.
  static const std::vector<double> kValuesA{0.0, 1.0, 2.0, 3.0, 4.0};
  static const std::vector<double> kWeightsA{0.5, 0.2, 0.15, 0.1, 0.05};
  static const std::vector<double> kValuesB{0.0, 0.1, 0.2, 0.3, 0.4};
  static const std::vector<double> kWeightsB{0.6, 0.1, 0.1, 0.1, 0.1};
  const auto& values = kind == SurfaceKind::A ? kValuesA : kValuesB;
  const auto& weights = kind == SurfaceKind::A ? kWeightsA : kWeightsB;
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  std::vector<double> beta(dim);
  for (auto& b : beta) b = values[pick(rng)];
  return beta;
}

}  // namespace

void CovariateMatrix::infer_binary_mask() {
  binary_mask.assign(cols, true);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double v = at(i, j);
      if (v != 0.0 && v != 1.0) binary_mask[j] = false;
    }
  }
}

std::string DatasetSpec::name() const {
  switch (kind) {
    case DatasetKind::Synthetic:
      return "synthetic" + std::to_string(synthetic_id);
    case DatasetKind::SurfaceA:
      return "surfaceA";
    case DatasetKind::SurfaceB:
      return "surfaceB";
  }
  return "unknown";
}

DatasetSpec make_synthetic(int id) {
  DatasetSpec spec;
  spec.kind = DatasetKind::Synthetic;
  spec.synthetic_id = id;
  spec.dim = kSyntheticDim;
  switch (id) {
    case 1:
      spec.mu1 = 0.8, spec.mu0 = 0.3, spec.std1 = 0.8, spec.std0 = 0.3;
      break;
    case 2:
      spec.mu1 = 0.5, spec.mu0 = 0.5, spec.std1 = 0.8, spec.std0 = 0.3;
      break;
    case 3:
      spec.mu1 = 0.8, spec.mu0 = 0.3, spec.std1 = 0.6, spec.std0 = 0.4;
      break;
    case 4:
      spec.mu1 = 0.5, spec.mu0 = 0.5, spec.std1 = 0.6, spec.std0 = 0.4;
      break;
    default:
      throw ConfigError("synthetic dataset id must be 1..4, got " + std::to_string(id));
  }
  spec.ate = spec.mu1 - spec.mu0;
  return spec;
}

DatasetSpec make_synthetic(const std::string& name) {
  const std::string prefix = "synthetic";
  if (name.size() == prefix.size() + 1 && name.compare(0, prefix.size(), prefix) == 0) {
    return make_synthetic(name.back() - '0');
  }
  throw ConfigError("unknown synthetic dataset '" + name + "'");
}

RoundDraw potential_outcomes(const DatasetSpec& spec, std::span<const double> x, double noise0,
                             double noise1) {
  RoundDraw draw;
  draw.x.assign(x.begin(), x.end());
  const double mean0 = true_f(spec, 0, x);
  const double mean1 = true_f(spec, 1, x);
  if (spec.kind == DatasetKind::Synthetic) {
    draw.y0 = mean0 + spec.std0 * noise0;
    draw.y1 = mean1 + spec.std1 * noise1;
  } else {
    draw.y0 = mean0 + noise0;
    draw.y1 = mean1 + noise1;
  }
  return draw;
}

RoundDraw sample_round(const DatasetSpec& spec, Rng& covariate_rng, Rng& noise_rng) {
  std::vector<double> x;
  if (spec.kind == DatasetKind::Synthetic) {
    x.resize(spec.dim);
    for (auto& v : x) v = standard_normal(covariate_rng);
  } else {
    const auto& cov = *spec.covariates;
    std::uniform_int_distribution<std::size_t> pick(0, cov.rows - 1);
    const auto r = cov.row(pick(covariate_rng));
    x.assign(r.begin(), r.end());
  }
  const double e0 = standard_normal(noise_rng);
  const double e1 = standard_normal(noise_rng);
  return potential_outcomes(spec, x, e0, e1);
}

RoundDraw sample_round(const DatasetSpec& spec, Rng& rng) { return sample_round(spec, rng, rng); }

double true_ate(const DatasetSpec& spec) { return spec.ate; }

double true_f(const DatasetSpec& spec, int arm, std::span<const double> x) {
  if (x.size() != spec.dim) {
    throw ShapeError("covariate has dimension " + std::to_string(x.size()) + ", expected " +
                     std::to_string(spec.dim));
  }
  switch (spec.kind) {
    case DatasetKind::Synthetic: {
      const double s = std::accumulate(x.begin(), x.end(), 0.0);
      return (arm == 1 ? spec.mu1 : spec.mu0) + s;
    }
    case DatasetKind::SurfaceA:
      return dot(x, spec.beta) + (arm == 1 ? 4.0 : 0.0);
    case DatasetKind::SurfaceB:
      return arm == 1 ? dot(x, spec.beta) - spec.offset_q
                      : surface_b_control_mean(x, spec.beta, spec.offset_w);
  }
  return 0.0;
}

double true_var(const DatasetSpec& spec, int arm, std::span<const double> /*x*/) {
  if (spec.kind == DatasetKind::Synthetic) {
    const double s = arm == 1 ? spec.std1 : spec.std0;
    return s * s;
  }
  return 1.0;
}

void standardize_continuous(CovariateMatrix& m) {
  if (m.rows < 2) return;
  for (std::size_t j = 0; j < m.cols; ++j) {
    if (m.binary_mask[j]) continue;
    double mean = 0.0;
    for (std::size_t i = 0; i < m.rows; ++i) mean += m.at(i, j);
    mean /= static_cast<double>(m.rows);
    double ss = 0.0;
    for (std::size_t i = 0; i < m.rows; ++i) ss += (m.at(i, j) - mean) * (m.at(i, j) - mean);
    const double sd = std::sqrt(ss / static_cast<double>(m.rows - 1));
    const double scale = sd > 0.0 ? 1.0 / sd : 1.0;
    for (std::size_t i = 0; i < m.rows; ++i) {
      m.values[i * m.cols + j] = (m.at(i, j) - mean) * scale;
    }
  }
}

DatasetSpec make_surface_with_beta(SurfaceKind kind, const CovariateMatrix& covariates,
                                   std::vector<double> beta, SurfaceOptions options) {
  if (covariates.cols != kIhdpColumns) {
    throw ShapeError("response surfaces need " + std::to_string(kIhdpColumns) +
                     " covariate columns, got " + std::to_string(covariates.cols));
  }
  if (beta.size() != covariates.cols) {
    throw ShapeError("coefficient vector length does not match covariate columns");
  }
  if (covariates.rows == 0) throw ShapeError("covariate matrix is empty");

  auto pool = std::make_shared<CovariateMatrix>(covariates);
  if (pool->binary_mask.size() != pool->cols) pool->infer_binary_mask();
  if (options.standardize) standardize_continuous(*pool);

  DatasetSpec spec;
  spec.kind = kind == SurfaceKind::A ? DatasetKind::SurfaceA : DatasetKind::SurfaceB;
  spec.dim = pool->cols;
  spec.beta = std::move(beta);
  spec.ate = 4.0;
  if (kind == SurfaceKind::B) {
    // Choose q so that the mean of y1 - y0 over the pool is exactly 4.
    double gap = 0.0;
    for (std::size_t i = 0; i < pool->rows; ++i) {
      const auto x = pool->row(i);
      gap += dot(x, spec.beta) - surface_b_control_mean(x, spec.beta, spec.offset_w);
    }
    spec.offset_q = gap / static_cast<double>(pool->rows) - 4.0;
  }
  spec.covariates = std::move(pool);
  return spec;
}

DatasetSpec make_surface(SurfaceKind kind, const CovariateMatrix& covariates, Rng& rng,
                         SurfaceOptions options) {
  if (covariates.cols != kIhdpColumns) {
    throw ShapeError("response surfaces need " + std::to_string(kIhdpColumns) +
                     " covariate columns, got " + std::to_string(covariates.cols));
  }
  return make_surface_with_beta(kind, covariates, draw_beta(kind, covariates.cols, rng), options);
}

CovariateMatrix parse_covariates(const std::string& text, CsvOptions options) {
  CovariateMatrix m;
  m.cols = options.expected_cols;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool header_pending = options.has_header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    std::size_t count = 0;
    std::size_t start = 0;
    while (true) {
      const std::size_t end = line.find(',', start);
      std::string_view cell(line.data() + start,
                            (end == std::string::npos ? line.size() : end) - start);
      while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
      while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t')) cell.remove_suffix(1);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw ParseError("non-numeric cell '" + std::string(cell) + "' in column " +
                             std::to_string(count + 1),
                         line_no);
      }
      m.values.push_back(v);
      ++count;
      if (end == std::string::npos) break;
      start = end + 1;
    }
    if (count != options.expected_cols) {
      throw ShapeError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(options.expected_cols) + " columns, got " +
                       std::to_string(count));
    }
    ++m.rows;
  }
  m.infer_binary_mask();
  return m;
}

CovariateMatrix load_covariates(const std::filesystem::path& path, CsvOptions options) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open covariate file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_covariates(buf.str(), options);
}

CovariateMatrix synthetic_ihdp_covariates(std::uint64_t seed, std::size_t rows) {
  CovariateMatrix m;
  m.rows = rows;
  m.cols = kIhdpColumns;
  m.values.resize(rows * m.cols);
  Rng rng(substream_seed(seed, 17));
  std::bernoulli_distribution coin(0.5);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) {
      m.values[i * m.cols + j] =
          j < kIhdpContinuous ? standard_normal(rng) : (coin(rng) ? 1.0 : 0.0);
    }
  }
  m.binary_mask.assign(m.cols, false);
  for (std::size_t j = kIhdpContinuous; j < m.cols; ++j) m.binary_mask[j] = true;
  return m;
}

}  // namespace aerate
