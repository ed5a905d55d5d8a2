// Command-line front end: single trials, Monte Carlo benches, table
// rendering and sensitivity sweeps.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "aerate/config.hpp"
#include "aerate/errors.hpp"
#include "aerate/harness.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitFailedCells = 3;

struct CommonOptions {
  std::string config;
  std::string covariates;
  bool synthetic_ihdp = false;
};

void apply_dataset_flags(const CommonOptions& o, aerate::DatasetChoice& d) {
  if (!o.covariates.empty()) d.covariates = o.covariates;
  if (o.synthetic_ihdp) d.synthetic_ihdp = true;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw aerate::IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

const char* source_name(aerate::PolicySource s) {
  switch (s) {
    case aerate::PolicySource::Warmup:
      return "warmup";
    case aerate::PolicySource::Adaptive:
      return "adaptive";
    case aerate::PolicySource::Fixed:
      return "fixed";
    case aerate::PolicySource::Oracle:
      return "oracle";
  }
  return "?";
}

int cmd_run(const CommonOptions& o, std::optional<std::uint64_t> seed) {
  auto rc = aerate::load_run_config(o.config);
  apply_dataset_flags(o, rc.dataset);
  if (seed) rc.trial.seed = *seed;
  aerate::TrialStreams streams(rc.trial.seed);
  const aerate::DatasetFactory factory(rc.dataset);
  const auto spec = factory.make(streams.coefficients);
  const auto result = aerate::run_trial(rc.trial, spec, streams);

  std::printf("t,a,pi1,y,source,a2ipw,adaipw,ma2ipw,dm,sigma_hat_sq,lil_boundary\n");
  for (const auto& r : result.trajectory) {
    std::printf("%zu,%d,%.6g,%.6g,%s,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g\n", r.t, r.a, r.pi1, r.y,
                source_name(r.source), r.estimates.a2ipw, r.estimates.adaipw, r.estimates.ma2ipw,
                r.estimates.dm, r.sigma_hat_sq, r.boundary);
  }
  std::fprintf(stderr, "dataset=%s design=%s theta0=%.6g final_%s=%.6g lil_stop=%zu bf_stop=%zu\n",
               spec.name().c_str(), rc.trial.design.to_string().c_str(), result.theta0,
               aerate::to_string(rc.trial.estimator).c_str(),
               result.final_estimates.get(rc.trial.estimator), result.stopping_time_lil,
               result.stopping_time_bf);
  return 0;
}

int finish_bench(const aerate::AggregateReport& report, const std::string& out) {
  if (!out.empty()) aerate::emit_report(report, out);
  std::cout << aerate::render_table(report);
  for (const auto& f : report.failures) std::cerr << "failed cell: " << f << "\n";
  return report.ok() ? 0 : kExitFailedCells;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive experimental design for ATE estimation: simulator and bench runner"};
  app.require_subcommand(1);

  CommonOptions common;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> reps;
  std::optional<std::size_t> workers;
  std::string out;
  std::string trials_dir;
  std::string report_path;
  std::string grid_path;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "INI config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--covariates", common.covariates, "covariate CSV for response surfaces");
    sub->add_flag("--synthetic-ihdp", common.synthetic_ihdp,
                  "generate IHDP-shaped covariates when no CSV is given");
  };

  auto* run = app.add_subcommand("run", "run a single trial and print its trajectory");
  add_common(run);
  run->add_option("--seed", seed, "trial seed");

  auto* bench = app.add_subcommand("bench", "Monte Carlo replications over the configured cells");
  add_common(bench);
  bench->add_option("--out", out, "report CSV path");
  bench->add_option("--reps", reps, "replications per cell");
  bench->add_option("--workers", workers, "worker threads");
  bench->add_option("--seed", seed, "base seed");
  bench->add_option("--trials-dir", trials_dir, "directory for per-trial CSVs");

  auto* table = app.add_subcommand("table", "render a report CSV as a text table");
  table->add_option("--report", report_path, "report CSV")->required()->check(CLI::ExistingFile);

  auto* sweep = app.add_subcommand("sweep", "sensitivity sweep over gamma, zeta and rho");
  add_common(sweep);
  sweep->add_option("--grid", grid_path, "grid file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", out, "report CSV path");
  sweep->add_option("--reps", reps, "replications per cell");
  sweep->add_option("--workers", workers, "worker threads");
  sweep->add_option("--seed", seed, "base seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (run->parsed()) return cmd_run(common, seed);

    if (table->parsed()) {
      std::cout << aerate::render_table(aerate::parse_report_csv(read_file(report_path)));
      return 0;
    }

    auto cfg = aerate::load_bench_config(common.config);
    apply_dataset_flags(common, cfg.dataset);
    if (reps) cfg.reps = *reps;
    if (workers) cfg.workers = *workers;
    if (seed) cfg.base_seed = *seed;
    if (!trials_dir.empty()) cfg.trials_dir = trials_dir;

    if (bench->parsed()) return finish_bench(aerate::run_bench(cfg), out);
    return finish_bench(aerate::sensitivity_sweep(cfg, aerate::load_grid(grid_path)), out);
  } catch (const aerate::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const aerate::ShapeError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const aerate::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
