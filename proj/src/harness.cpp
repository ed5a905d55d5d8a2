#include "aerate/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include "aerate/errors.hpp"

namespace aerate {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Fixed decimal rendering for reports: 6 significant digits.
std::string fmt6(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto end = line.find(sep, start);
    out.push_back(line.substr(start, end == std::string::npos ? std::string::npos : end - start));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

double to_double(const std::string& s, std::size_t line) {
  if (s == "nan") return kNaN;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("bad number '" + s + "'", line);
  }
  return v;
}

std::uint64_t to_uint(const std::string& s, std::size_t line) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("bad integer '" + s + "'", line);
  }
  return v;
}

std::vector<std::string> nonblank_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

const std::string kReportHeader = "cell,horizon,mse,std,reject_pct,lil_stop,bf_stop";

TrialConfig cell_trial_config(const BenchConfig& cfg, const CellSpec& cell) {
  TrialConfig tc = cfg.trial;
  tc.horizon = cfg.t_cap;
  tc.design = cell.design;
  tc.estimator = cell.estimator;
  tc.regressor.method = cell.regressor;
  if (cell.gamma_rule) tc.gamma_rule = *cell.gamma_rule;
  if (cell.zeta_rule) tc.zeta_rule = *cell.zeta_rule;
  if (cell.rho) tc.rho = *cell.rho;
  tc.stop_on_reject = false;
  return tc;
}

}  // namespace

DatasetFactory::DatasetFactory(const DatasetChoice& choice) {
  options_.standardize = choice.standardize;
  if (choice.name == "surfaceA" || choice.name == "surfaceB") {
    surface_ = choice.name == "surfaceA" ? SurfaceKind::A : SurfaceKind::B;
    if (!choice.covariates.empty()) {
      covariates_ = load_covariates(choice.covariates, {choice.covariates_header, kIhdpColumns});
    } else if (choice.synthetic_ihdp) {
      covariates_ = synthetic_ihdp_covariates(choice.covariate_seed);
    } else {
      throw ConfigError("response surfaces need a covariate file or synthetic_ihdp = true");
    }
  } else {
    synthetic_ = make_synthetic(choice.name);
  }
}

DatasetSpec DatasetFactory::make(Rng& coefficient_rng) const {
  if (synthetic_) return *synthetic_;
  return make_surface(*surface_, covariates_, coefficient_rng, options_);
}

CellSpec CellSpec::parse(const std::string& raw) {
  std::string text = raw;
  std::erase(text, ' ');
  const auto parts = split(text, ':');
  if (parts.empty() || parts.size() > 3 || parts[0].empty()) {
    throw ConfigError("bad cell '" + raw + "' (expected design[:estimator[:regressor]])");
  }
  CellSpec cell;
  if (parts[0] == "opt" || parts[0] == "rct") {
    cell.design = Design::parse(parts[0]);
    cell.estimator = parts[0] == "opt" ? EstimatorKind::A2ipw : EstimatorKind::AdaIpw;
  } else {
    cell.design = Design::parse(parts[0]);
  }
  if (parts.size() >= 2 && !parts[1].empty()) {
    if (parts[1] == "opt") {
      cell.design.kind = DesignKind::Opt;
      cell.estimator = EstimatorKind::A2ipw;
    } else if (parts[1] == "rct") {
      cell.design.kind = DesignKind::Rct;
      cell.estimator = EstimatorKind::AdaIpw;
    } else {
      cell.estimator = parse_estimator_kind(parts[1]);
    }
  }
  if (parts.size() == 3) cell.regressor = parse_regressor_method(parts[2]);
  cell.name = cell.label();
  return cell;
}

std::string CellSpec::label() const {
  std::string s = design.to_string() + ":" + to_string(estimator);
  if (design.kind != DesignKind::Opt) s += ":" + to_string(regressor);
  if (gamma_rule) s += "|gamma=" + gamma_rule->to_string();
  if (zeta_rule) s += "|zeta=" + zeta_rule->to_string();
  if (rho) s += "|rho=" + std::to_string(*rho);
  return s;
}

void BenchConfig::validate() const {
  if (reps < 1) throw ConfigError("reps must be at least 1");
  if (workers < 1) throw ConfigError("workers must be at least 1");
  if (cells.empty()) throw ConfigError("bench needs at least one cell");
  if (horizons.empty()) throw ConfigError("bench needs at least one report horizon");
  for (auto h : horizons) {
    if (h < 2 || h > t_cap) throw ConfigError("report horizons must lie in [2, t_cap]");
  }
  for (const auto& cell : cells) {
    if (cell.name.find(',') != std::string::npos) {
      throw ConfigError("cell names may not contain commas: " + cell.name);
    }
    cell_trial_config(*this, cell).validate();
  }
}

CellResult run_cell(const BenchConfig& cfg, const CellSpec& cell) {
  const TrialConfig base = cell_trial_config(cfg, cell);
  const DatasetFactory factory(cfg.dataset);

  std::vector<TrialSummary> trials(cfg.reps);
  std::vector<std::string> errors(cfg.reps);
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    for (std::size_t i = next.fetch_add(1); i < cfg.reps; i = next.fetch_add(1)) {
      try {
        TrialConfig tc = base;
        tc.seed = cfg.base_seed + i;
        TrialStreams streams(tc.seed);
        const DatasetSpec spec = factory.make(streams.coefficients);
        const TrialResult r = run_trial(tc, spec, streams);
        TrialSummary& s = trials[i];
        s.trial = i;
        s.seed = tc.seed;
        s.theta0 = r.theta0;
        for (auto h : cfg.horizons) {
          const RoundRecord& rec = r.trajectory.at(h - 1);
          const double est = rec.estimates.get(tc.estimator);
          s.estimates.push_back(est);
          s.rejected.push_back(z_test(est, tc.test.mu, rec.sigma_hat_sq, h, tc.test.alpha).rejected);
        }
        s.lil_stop = r.stopping_time_lil;
        s.bf_stop = r.stopping_time_bf;
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };

  const std::size_t n_workers = std::min(cfg.workers, cfg.reps);
  if (n_workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(work);
  }

  CellResult out;
  for (std::size_t i = 0; i < cfg.reps; ++i) {
    if (!errors[i].empty()) {
      out.failure = cell.name + ": trial " + std::to_string(i) + " (seed " +
                    std::to_string(cfg.base_seed + i) + "): " + errors[i];
      return out;
    }
  }
  out.trials = std::move(trials);
  return out;
}

std::vector<CellRow> aggregate_cell(const BenchConfig& cfg, const CellSpec& cell,
                                    const std::vector<TrialSummary>& trials) {
  std::vector<CellRow> rows;
  const double n = static_cast<double>(trials.size());
  double lil = 0.0;
  double bf = 0.0;
  for (const auto& s : trials) {
    lil += static_cast<double>(s.lil_stop);
    bf += static_cast<double>(s.bf_stop);
  }
  for (std::size_t k = 0; k < cfg.horizons.size(); ++k) {
    CellRow row;
    row.cell = cell.name;
    row.horizon = cfg.horizons[k];
    double sum_se = 0.0;
    double rejections = 0.0;
    for (const auto& s : trials) {
      const double err = s.estimates[k] - s.theta0;
      sum_se += err * err;
      rejections += s.rejected[k] ? 1.0 : 0.0;
    }
    row.mse = sum_se / n;
    double ss = 0.0;
    for (const auto& s : trials) {
      const double err = s.estimates[k] - s.theta0;
      ss += (err * err - row.mse) * (err * err - row.mse);
    }
    row.std = std::sqrt(ss / n);
    row.rejection_rate = rejections / n;
    row.lil_stop = lil / n;
    row.bf_stop = bf / n;
    rows.push_back(row);
  }
  return rows;
}

AggregateReport run_bench(const BenchConfig& cfg) {
  cfg.validate();
  if (cfg.trials_dir) std::filesystem::create_directories(*cfg.trials_dir);
  AggregateReport report;
  for (std::size_t c = 0; c < cfg.cells.size(); ++c) {
    const CellSpec& cell = cfg.cells[c];
    const CellResult result = run_cell(cfg, cell);
    if (result.failure) {
      report.failures.push_back(*result.failure);
      for (auto h : cfg.horizons) report.rows.push_back({cell.name, h, kNaN, kNaN, kNaN, kNaN, kNaN});
      continue;
    }
    if (cfg.trials_dir) {
      write_file(*cfg.trials_dir / ("cell" + std::to_string(c) + ".csv"),
                 "# " + cell.name + "\n" + render_trials_csv(cfg, result.trials));
    }
    for (auto& row : aggregate_cell(cfg, cell, result.trials)) report.rows.push_back(row);
  }
  return report;
}

std::string render_csv(const AggregateReport& report) {
  std::string out = kReportHeader + "\n";
  for (const auto& r : report.rows) {
    out += r.cell + "," + std::to_string(r.horizon) + "," + fmt6(r.mse) + "," + fmt6(r.std) + "," +
           fmt6(r.rejection_rate * 100.0) + "," + fmt6(r.lil_stop) + "," + fmt6(r.bf_stop) + "\n";
  }
  return out;
}

AggregateReport parse_report_csv(const std::string& text) {
  AggregateReport report;
  const auto lines = nonblank_lines(text);
  bool header_seen = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& line = lines[i];
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kReportHeader) throw ParseError("unexpected report header", i + 1);
      header_seen = true;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 7) throw ParseError("expected 7 fields", i + 1);
    CellRow r;
    r.cell = f[0];
    r.horizon = static_cast<std::size_t>(to_uint(f[1], i + 1));
    r.mse = to_double(f[2], i + 1);
    r.std = to_double(f[3], i + 1);
    r.rejection_rate = to_double(f[4], i + 1) / 100.0;
    r.lil_stop = to_double(f[5], i + 1);
    r.bf_stop = to_double(f[6], i + 1);
    report.rows.push_back(r);
  }
  if (!header_seen) throw ParseError("empty report", 1);
  return report;
}

void emit_report(const AggregateReport& report, const std::filesystem::path& path) {
  write_file(path, render_csv(report));
}

std::string render_table(const AggregateReport& report) {
  // Preserve first-seen order of cells and horizons.
  std::vector<std::string> cells;
  std::vector<std::size_t> horizons;
  std::map<std::pair<std::string, std::size_t>, const CellRow*> index;
  for (const auto& r : report.rows) {
    if (std::find(cells.begin(), cells.end(), r.cell) == cells.end()) cells.push_back(r.cell);
    if (std::find(horizons.begin(), horizons.end(), r.horizon) == horizons.end()) {
      horizons.push_back(r.horizon);
    }
    index[{r.cell, r.horizon}] = &r;
  }
  std::size_t name_width = 4;
  for (const auto& c : cells) name_width = std::max(name_width, c.size());

  std::ostringstream out;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-*s", static_cast<int>(name_width), "cell");
  out << buf;
  for (auto h : horizons) {
    std::snprintf(buf, sizeof buf, " | T=%-5zu %8s %8s %8s", h, "MSE", "STD", "Testing");
    out << buf;
  }
  std::snprintf(buf, sizeof buf, " | %7s %7s\n", "LIL", "BF");
  out << buf;
  for (const auto& c : cells) {
    std::snprintf(buf, sizeof buf, "%-*s", static_cast<int>(name_width), c.c_str());
    out << buf;
    const CellRow* any = nullptr;
    for (auto h : horizons) {
      const auto it = index.find({c, h});
      if (it == index.end()) {
        std::snprintf(buf, sizeof buf, " | %7s %8s %8s %8s", "", "-", "-", "-");
      } else {
        any = it->second;
        std::snprintf(buf, sizeof buf, " | %7s %8.3f %8.3f %7.1f%%", "", any->mse, any->std,
                      any->rejection_rate * 100.0);
      }
      out << buf;
    }
    if (any) {
      std::snprintf(buf, sizeof buf, " | %7.1f %7.1f\n", any->lil_stop, any->bf_stop);
    } else {
      std::snprintf(buf, sizeof buf, " | %7s %7s\n", "-", "-");
    }
    out << buf;
  }
  return out.str();
}

std::string render_trials_csv(const BenchConfig& cfg, const std::vector<TrialSummary>& trials) {
  std::string out = "trial,seed,theta0";
  for (auto h : cfg.horizons) out += ",est_" + std::to_string(h);
  for (auto h : cfg.horizons) out += ",reject_" + std::to_string(h);
  out += ",lil_stop,bf_stop\n";
  for (const auto& s : trials) {
    out += std::to_string(s.trial) + "," + std::to_string(s.seed) + "," + fmt17(s.theta0);
    for (double e : s.estimates) out += "," + fmt17(e);
    for (bool r : s.rejected) out += r ? ",1" : ",0";
    out += "," + std::to_string(s.lil_stop) + "," + std::to_string(s.bf_stop) + "\n";
  }
  return out;
}

std::vector<TrialSummary> parse_trials_csv(const std::string& text) {
  std::vector<TrialSummary> trials;
  const auto lines = nonblank_lines(text);
  std::size_t n_horizons = 0;
  bool header_seen = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& line = lines[i];
    if (line.empty() || line[0] == '#') continue;
    const auto f = split(line, ',');
    if (!header_seen) {
      if (f.size() < 5 || (f.size() - 5) % 2 != 0) throw ParseError("bad trials header", i + 1);
      n_horizons = (f.size() - 5) / 2;
      header_seen = true;
      continue;
    }
    if (f.size() != 5 + 2 * n_horizons) throw ParseError("wrong field count", i + 1);
    TrialSummary s;
    s.trial = static_cast<std::size_t>(to_uint(f[0], i + 1));
    s.seed = to_uint(f[1], i + 1);
    s.theta0 = to_double(f[2], i + 1);
    for (std::size_t k = 0; k < n_horizons; ++k) s.estimates.push_back(to_double(f[3 + k], i + 1));
    for (std::size_t k = 0; k < n_horizons; ++k) s.rejected.push_back(f[3 + n_horizons + k] == "1");
    s.lil_stop = static_cast<std::size_t>(to_uint(f[3 + 2 * n_horizons], i + 1));
    s.bf_stop = static_cast<std::size_t>(to_uint(f[4 + 2 * n_horizons], i + 1));
    trials.push_back(std::move(s));
  }
  return trials;
}

AggregateReport sensitivity_sweep(const BenchConfig& base, const SweepGrid& grid) {
  if (grid.gamma_rules.empty() && grid.zeta_rules.empty() && grid.rhos.empty()) {
    throw ConfigError("sensitivity grid is empty");
  }
  // An empty axis means "keep the base setting".
  const std::vector<std::optional<ScheduleRule>> gammas =
      grid.gamma_rules.empty() ? std::vector<std::optional<ScheduleRule>>{std::nullopt}
                               : std::vector<std::optional<ScheduleRule>>(grid.gamma_rules.begin(),
                                                                          grid.gamma_rules.end());
  const std::vector<std::optional<ScheduleRule>> zetas =
      grid.zeta_rules.empty() ? std::vector<std::optional<ScheduleRule>>{std::nullopt}
                              : std::vector<std::optional<ScheduleRule>>(grid.zeta_rules.begin(),
                                                                         grid.zeta_rules.end());
  const std::vector<std::optional<std::size_t>> rhos =
      grid.rhos.empty() ? std::vector<std::optional<std::size_t>>{std::nullopt}
                        : std::vector<std::optional<std::size_t>>(grid.rhos.begin(), grid.rhos.end());

  BenchConfig cfg = base;
  cfg.cells.clear();
  for (const auto& g : gammas) {
    for (const auto& z : zetas) {
      for (const auto& r : rhos) {
        for (CellSpec cell : base.cells) {
          cell.gamma_rule = g;
          cell.zeta_rule = z;
          cell.rho = r;
          cell.name = cell.label();
          cfg.cells.push_back(std::move(cell));
        }
      }
    }
  }
  return run_bench(cfg);
}

}  // namespace aerate
