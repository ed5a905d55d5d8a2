#include "aerate/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <set>
#include <sstream>

#include "aerate/errors.hpp"

namespace aerate {
namespace {

namespace pt = boost::property_tree;

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

std::string unquote(std::string s) {
  s = trim(std::move(s));
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

// Drops trailing "; comment" / "# comment" outside quotes.
std::string strip_comment(const std::string& line) {
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == ';' || c == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

pt::ptree read_tree(const std::string& text) {
  std::ostringstream cleaned;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) cleaned << strip_comment(line) << '\n';
  pt::ptree tree;
  std::istringstream src(cleaned.str());
  try {
    pt::ini_parser::read_ini(src, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return tree;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

class Section {
 public:
  Section(const pt::ptree& tree, const std::string& name, std::set<std::string> allowed)
      : name_(name) {
    if (auto child = tree.get_child_optional(name)) {
      node_ = *child;
      for (const auto& [key, _] : node_) {
        if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in [" + name + "]");
      }
    }
  }

  std::optional<std::string> str(const std::string& key) const {
    if (auto v = node_.get_optional<std::string>(key)) return unquote(*v);
    return std::nullopt;
  }

  template <typename T>
  std::optional<T> num(const std::string& key) const {
    const auto s = str(key);
    if (!s) return std::nullopt;
    std::istringstream in(*s);
    T v{};
    in >> v;
    if (in.fail() || !in.eof()) {
      throw ConfigError("bad value '" + *s + "' for " + name_ + "." + key);
    }
    return v;
  }

  std::optional<bool> flag(const std::string& key) const {
    const auto s = str(key);
    if (!s) return std::nullopt;
    if (*s == "true" || *s == "1" || *s == "yes" || *s == "on") return true;
    if (*s == "false" || *s == "0" || *s == "no" || *s == "off") return false;
    throw ConfigError("bad boolean '" + *s + "' for " + name_ + "." + key);
  }

  std::optional<std::vector<std::string>> list(const std::string& key) const {
    const auto s = str(key);
    if (!s) return std::nullopt;
    return parse_list(*s);
  }

 private:
  std::string name_;
  pt::ptree node_;
};

std::size_t to_size(const std::string& s) {
  std::istringstream in(s);
  std::size_t v = 0;
  in >> v;
  if (in.fail() || !in.eof()) throw ConfigError("bad integer '" + s + "'");
  return v;
}

DatasetChoice read_dataset(const pt::ptree& tree) {
  const Section s(tree, "dataset",
                  {"dataset", "covariates", "covariates_header", "synthetic_ihdp",
                   "covariate_seed", "standardize"});
  DatasetChoice d;
  if (auto v = s.str("dataset")) d.name = *v;
  if (auto v = s.str("covariates")) d.covariates = *v;
  if (auto v = s.flag("covariates_header")) d.covariates_header = *v;
  if (auto v = s.flag("synthetic_ihdp")) d.synthetic_ihdp = *v;
  if (auto v = s.num<std::uint64_t>("covariate_seed")) d.covariate_seed = *v;
  if (auto v = s.flag("standardize")) d.standardize = *v;
  static const std::set<std::string> known{"synthetic1", "synthetic2", "synthetic3",
                                           "synthetic4", "surfaceA",   "surfaceB"};
  if (!known.count(d.name)) throw ConfigError("unknown dataset '" + d.name + "'");
  return d;
}

TrialConfig read_trial(const pt::ptree& tree) {
  TrialConfig tc;
  const Section trial(tree, "trial",
                      {"T", "rho", "design", "seed", "stop_on_reject", "hahn_refit_f"});
  if (auto v = trial.num<std::size_t>("T")) tc.horizon = *v;
  if (auto v = trial.num<std::size_t>("rho")) tc.rho = *v;
  if (auto v = trial.str("design")) tc.design = Design::parse(*v);
  if (auto v = trial.num<std::uint64_t>("seed")) tc.seed = *v;
  if (auto v = trial.flag("stop_on_reject")) tc.stop_on_reject = *v;
  if (auto v = trial.flag("hahn_refit_f")) tc.design.hahn_refit_f = *v;

  const Section policy(tree, "policy", {"gamma_rule", "fixed_pi"});
  if (auto v = policy.str("gamma_rule")) tc.gamma_rule = ScheduleRule::parse(*v);
  if (auto v = policy.num<double>("fixed_pi")) {
    if (!(*v > 0.0 && *v < 1.0)) throw ConfigError("fixed_pi must lie in (0,1)");
    tc.design.kind = DesignKind::Fixed;
    tc.design.fixed_pi = *v;
  }

  const Section est(tree, "estimator", {"estimator", "zeta_rule"});
  if (auto v = est.str("estimator")) {
    if (*v == "opt") {
      tc.design.kind = DesignKind::Opt;
      tc.estimator = EstimatorKind::A2ipw;
    } else if (*v == "rct") {
      tc.design.kind = DesignKind::Rct;
      tc.estimator = EstimatorKind::AdaIpw;
    } else {
      tc.estimator = parse_estimator_kind(*v);
    }
  }
  if (auto v = est.str("zeta_rule")) tc.zeta_rule = ScheduleRule::parse(*v);

  const Section reg(tree, "regressor",
                    {"regressor", "nu_floor", "clip_c3", "bandwidth_override", "k_override"});
  if (auto v = reg.str("regressor")) tc.regressor.method = parse_regressor_method(*v);
  if (auto v = reg.num<double>("nu_floor")) tc.regressor.nu_floor = *v;
  if (auto v = reg.num<double>("clip_c3")) tc.regressor.clip_c3 = *v;
  if (auto v = reg.num<double>("bandwidth_override")) tc.regressor.bandwidth_override = *v;
  if (auto v = reg.num<std::size_t>("k_override")) tc.regressor.k_override = *v;
  if (!(tc.regressor.nu_floor > 0.0)) throw ConfigError("nu_floor must be positive");

  const Section test(tree, "test", {"test", "alpha", "mu", "looks", "lil_constant"});
  if (auto v = test.str("test")) tc.test.mode = parse_test_mode(*v);
  if (auto v = test.num<double>("alpha")) tc.test.alpha = *v;
  if (auto v = test.num<double>("mu")) tc.test.mu = *v;
  if (auto v = test.list("looks")) {
    tc.test.looks.clear();
    for (const auto& s : *v) tc.test.looks.push_back(to_size(s));
  }
  if (auto v = test.num<double>("lil_constant")) tc.test.lil_constant = *v;
  tc.test.validate();
  return tc;
}

}  // namespace

std::vector<std::string> parse_list(const std::string& raw) {
  std::string value = trim(raw);
  if (value.size() >= 2 && value.front() == '[' && value.back() == ']') {
    value = value.substr(1, value.size() - 2);
  }
  std::vector<std::string> out;
  // Split on commas outside parentheses and quotes.
  std::string cur;
  int depth = 0;
  char quote = 0;
  for (char c : value) {
    if (quote) {
      if (c == quote) quote = 0;
      cur += c;
    } else if (c == '"' || c == '\'') {
      quote = c;
      cur += c;
    } else if (c == '(') {
      ++depth;
      cur += c;
    } else if (c == ')') {
      --depth;
      cur += c;
    } else if (c == ',' && depth == 0) {
      out.push_back(unquote(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty()) out.push_back(unquote(cur));
  for (const auto& item : out) {
    if (item.empty()) throw ConfigError("empty list item in '" + raw + "'");
  }
  return out;
}

RunConfig parse_run_config(const std::string& text) {
  const auto tree = read_tree(text);
  for (const auto& [name, _] : tree) {
    static const std::set<std::string> sections{"dataset", "trial",     "policy", "estimator",
                                                "regressor", "test", "bench"};
    if (!sections.count(name)) throw ConfigError("unknown section [" + name + "]");
  }
  RunConfig rc;
  rc.dataset = read_dataset(tree);
  rc.trial = read_trial(tree);
  rc.trial.validate();
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(read_text(path));
}

BenchConfig parse_bench_config(const std::string& text) {
  const auto tree = read_tree(text);
  for (const auto& [name, _] : tree) {
    static const std::set<std::string> sections{"dataset", "trial",     "policy", "estimator",
                                                "regressor", "test", "bench"};
    if (!sections.count(name)) throw ConfigError("unknown section [" + name + "]");
  }
  BenchConfig cfg;
  cfg.dataset = read_dataset(tree);
  cfg.trial = read_trial(tree);

  const Section bench(tree, "bench",
                      {"reps", "horizons", "t_cap", "base_seed", "workers", "cells", "trials_dir"});
  if (auto v = bench.num<std::size_t>("reps")) cfg.reps = *v;
  if (auto v = bench.list("horizons")) {
    cfg.horizons.clear();
    for (const auto& s : *v) cfg.horizons.push_back(to_size(s));
  }
  if (auto v = bench.num<std::size_t>("t_cap")) cfg.t_cap = *v;
  if (auto v = bench.num<std::uint64_t>("base_seed")) cfg.base_seed = *v;
  if (auto v = bench.num<std::size_t>("workers")) cfg.workers = *v;
  if (auto v = bench.str("trials_dir")) cfg.trials_dir = *v;
  if (auto v = bench.list("cells")) {
    for (const auto& s : *v) cfg.cells.push_back(CellSpec::parse(s));
  } else {
    // Without an explicit cell list, bench the trial section's own setting.
    CellSpec cell;
    cell.design = cfg.trial.design;
    cell.estimator = cfg.trial.estimator;
    cell.regressor = cfg.trial.regressor.method;
    cell.name = cell.label();
    cfg.cells.push_back(cell);
  }
  cfg.validate();
  return cfg;
}

BenchConfig load_bench_config(const std::filesystem::path& path) {
  return parse_bench_config(read_text(path));
}

SweepGrid parse_grid(const std::string& text) {
  const auto tree = read_tree(text);
  for (const auto& [name, _] : tree) {
    if (name != "grid") throw ConfigError("unknown section [" + name + "] in grid file");
  }
  const Section g(tree, "grid", {"gamma_rule", "zeta_rule", "rho"});
  SweepGrid grid;
  if (auto v = g.list("gamma_rule")) {
    for (const auto& s : *v) grid.gamma_rules.push_back(ScheduleRule::parse(s));
  }
  if (auto v = g.list("zeta_rule")) {
    for (const auto& s : *v) grid.zeta_rules.push_back(ScheduleRule::parse(s));
  }
  if (auto v = g.list("rho")) {
    for (const auto& s : *v) grid.rhos.push_back(to_size(s));
  }
  if (grid.gamma_rules.empty() && grid.zeta_rules.empty() && grid.rhos.empty()) {
    throw ConfigError("grid file defines no axes");
  }
  return grid;
}

SweepGrid load_grid(const std::filesystem::path& path) { return parse_grid(read_text(path)); }

}  // namespace aerate
