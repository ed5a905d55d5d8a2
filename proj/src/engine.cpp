#include "aerate/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>

#include "aerate/errors.hpp"

namespace aerate {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string parenthesized(const std::string& text, const std::string& head) {
  if (text.size() < head.size() + 2 || text.compare(0, head.size() + 1, head + "(") != 0 ||
      text.back() != ')') {
    return {};
  }
  return text.substr(head.size() + 1, text.size() - head.size() - 2);
}

// Pre-round predictions. During the first two rounds an arm may still be
// empty; its prediction is then taken as zero, which reduces the increment
// to plain IPW for that arm.
FvPrediction warm_predictions(const RegressorState& reg, std::span<const double> x, std::size_t t) {
  if (reg.count(0) > 0 && reg.count(1) > 0) return reg.predict_fv(x);
  if (t > 2) throw InvariantError("cold arm after round 2");
  FvPrediction fv;
  const double floor = reg.options().nu_floor;
  fv.nu1 = fv.nu0 = floor;
  if (reg.count(1) > 0) {
    const auto m = reg.predict_moments(1, x);
    fv.f1 = m.first;
    fv.nu1 = floored_variance(m.second, m.first, floor);
  }
  if (reg.count(0) > 0) {
    const auto m = reg.predict_moments(0, x);
    fv.f0 = m.first;
    fv.nu0 = floored_variance(m.second, m.first, floor);
  }
  fv.history_size = reg.size();
  return fv;
}

double post_round_dm(const RegressorState& reg, std::span<const double> x) {
  const double f1 = reg.count(1) > 0 ? reg.predict(1, x, Moment::First) : 0.0;
  const double f0 = reg.count(0) > 0 ? reg.predict(0, x, Moment::First) : 0.0;
  return f1 - f0;
}

}  // namespace

Design Design::parse(const std::string& raw) {
  std::string text = raw;
  std::erase(text, ' ');
  Design d;
  if (text == "aerate") {
    d.kind = DesignKind::Aerate;
  } else if (text == "rct") {
    d.kind = DesignKind::Rct;
  } else if (text == "opt") {
    d.kind = DesignKind::Opt;
  } else if (auto n0 = parenthesized(text, "hahn"); !n0.empty()) {
    d.kind = DesignKind::Hahn;
    try {
      d.hahn_n0 = std::stoul(n0);
    } catch (const std::exception&) {
      throw ConfigError("bad hahn first-stage size in '" + raw + "'");
    }
  } else if (text.rfind("hahn", 0) == 0 && text.size() > 4 &&
             std::all_of(text.begin() + 4, text.end(), ::isdigit)) {
    d.kind = DesignKind::Hahn;
    d.hahn_n0 = std::stoul(text.substr(4));
  } else if (auto pi = parenthesized(text, "fixed"); !pi.empty()) {
    d.kind = DesignKind::Fixed;
    try {
      d.fixed_pi = std::stod(pi);
    } catch (const std::exception&) {
      throw ConfigError("bad fixed probability in '" + raw + "'");
    }
    if (!(d.fixed_pi > 0.0 && d.fixed_pi < 1.0)) {
      throw ConfigError("fixed probability must lie in (0,1)");
    }
  } else {
    throw ConfigError("unknown design '" + raw + "'");
  }
  return d;
}

std::string Design::to_string() const {
  switch (kind) {
    case DesignKind::Aerate:
      return "aerate";
    case DesignKind::Rct:
      return "rct";
    case DesignKind::Opt:
      return "opt";
    case DesignKind::Hahn:
      return "hahn(" + std::to_string(hahn_n0) + ")";
    case DesignKind::Fixed: {
      char buf[48];
      std::snprintf(buf, sizeof buf, "fixed(%.6g)", fixed_pi);
      return buf;
    }
  }
  return "?";
}

void TrialConfig::validate() const {
  if (horizon < 2) throw ConfigError("horizon T must be at least 2");
  if (design.kind == DesignKind::Aerate && (rho < 2 || rho > horizon)) {
    throw ConfigError("rho must satisfy 2 <= rho <= T");
  }
  if (design.kind == DesignKind::Hahn) {
    if (design.hahn_n0 < 2) throw ConfigError("hahn first stage needs at least 2 rounds");
    if (design.hahn_n0 > horizon) throw ConfigError("hahn first stage longer than the horizon");
  }
  test.validate();
}

int assign_action(double pi1, double xi) { return xi <= pi1 ? 1 : 0; }

Assignment assignment_draw(double pi1, Rng& rng) {
  Assignment a;
  a.xi = uniform01(rng);
  a.action = assign_action(pi1, a.xi);
  return a;
}

TrialResult run_trial(const TrialConfig& cfg, const DatasetSpec& spec, TrialStreams& streams) {
  cfg.validate();
  const Design& design = cfg.design;
  const bool oracle = design.kind == DesignKind::Opt;

  RegressorState reg(spec.dim, cfg.regressor);
  std::optional<RegressorState> frozen;
  EstimatorState est(cfg.test.mu, cfg.zeta_rule);
  SequentialMonitor monitor(cfg.test, cfg.horizon);

  TrialResult result;
  result.horizon = cfg.horizon;
  result.theta0 = true_ate(spec);
  result.trajectory.reserve(cfg.horizon);

  for (std::size_t t = 1; t <= cfg.horizon; ++t) {
    const RoundDraw draw = sample_round(spec, streams.covariates, streams.noise);
    // One uniform per round for every design keeps the assignment stream
    // aligned across designs.
    const double xi = uniform01(streams.assignment);
    const std::span<const double> x(draw.x);

    FvPrediction pre;
    PolicySnapshot policy;
    std::optional<int> forced;

    if (oracle) {
      pre.f1 = true_f(spec, 1, x);
      pre.f0 = true_f(spec, 0, x);
      pre.nu1 = true_var(spec, 1, x);
      pre.nu0 = true_var(spec, 0, x);
      pre.history_size = t - 1;
      policy = {optimal_pi_aipw(pre.nu1, pre.nu0), 0.0, PolicySource::Oracle};
    } else {
      pre = warm_predictions(reg, x, t);
      if (t <= 2) {
        forced = static_cast<int>(t) - 1;
        policy = {0.5, 1.0, PolicySource::Warmup};
      } else {
        switch (design.kind) {
          case DesignKind::Rct:
            policy = {0.5, 1.0, PolicySource::Fixed};
            break;
          case DesignKind::Fixed:
            policy = {design.fixed_pi, 0.0, PolicySource::Fixed};
            break;
          case DesignKind::Aerate:
            policy = t <= cfg.rho ? PolicySnapshot{0.5, 1.0, PolicySource::Warmup}
                                 : adaptive_pi(t, pre, cfg.gamma_rule);
            break;
          case DesignKind::Hahn:
            if (t <= design.hahn_n0) {
              policy = {0.5, 1.0, PolicySource::Warmup};
            } else {
              if (!frozen) {
                frozen.emplace(reg);
                result.freeze_round = t - 1;
              }
              const FvPrediction fz = frozen->predict_fv(x);
              policy = adaptive_pi(t, fz, ScheduleRule::zero());
              policy.source = PolicySource::Fixed;
              if (!design.hahn_refit_f) pre = fz;
            }
            break;
          case DesignKind::Opt:
            break;
        }
      }
    }

    if (!(policy.pi1 > 0.0 && policy.pi1 < 1.0)) {
      throw InvariantError("assignment probability left (0,1) at round " + std::to_string(t));
    }

    Observation obs;
    obs.t = t;
    obs.x = draw.x;
    obs.pi_used = policy.pi1;
    obs.xi = xi;
    obs.a = forced ? *forced : assign_action(policy.pi1, xi);
    obs.y = obs.a == 1 ? draw.y1 : draw.y0;
    if (!std::isfinite(obs.y)) {
      throw DomainError("non-finite outcome at round " + std::to_string(t));
    }

    est.update(obs, pre);
    if (oracle) {
      est.absorb_dm(pre.f1 - pre.f0);
    } else {
      reg.observe(x, obs.a, obs.y);
      est.absorb_dm(post_round_dm(reg, x));
    }

    result.max_inverse_propensity = std::max(
        result.max_inverse_propensity, 1.0 / std::min(policy.pi1, 1.0 - policy.pi1));

    const Estimates e = est.estimates();
    const auto& stream = est.stream_for(cfg.estimator);
    const double sigma_sq = t >= 2 ? est.sigma_hat_sq(cfg.estimator) : kNaN;
    monitor.observe(t, static_cast<double>(t) * e.get(cfg.estimator), stream.sum_z_sq(),
                    t >= 2 ? sigma_sq : 0.0);

    RoundRecord rec;
    rec.t = t;
    rec.a = obs.a;
    rec.pi1 = policy.pi1;
    rec.y = obs.y;
    rec.source = policy.source;
    rec.estimates = e;
    rec.sigma_hat_sq = sigma_sq;
    rec.boundary = monitor.last_boundary().value_or(kNaN);
    result.trajectory.push_back(rec);

    if (cfg.stop_on_reject && monitor.mode_rejected()) break;
  }

  result.final_estimates = result.trajectory.back().estimates;
  result.final_sigma_hat_sq = result.trajectory.back().sigma_hat_sq;
  result.stopping_time_lil = monitor.lil_stopping_time();
  result.stopping_time_bf = monitor.bf_stopping_time();
  result.lil_rejected = monitor.lil_rejected();
  result.bf_rejected = monitor.bf_rejected();
  result.rejected_at_looks = monitor.look_decisions();
  return result;
}

TrialResult run_trial(const TrialConfig& cfg, const DatasetSpec& spec) {
  TrialStreams streams(cfg.seed);
  return run_trial(cfg, spec, streams);
}

TrialResult run_hahn(const TrialConfig& cfg, const DatasetSpec& spec, TrialStreams& streams) {
  if (cfg.design.kind != DesignKind::Hahn) throw ConfigError("run_hahn needs a hahn design");
  return run_trial(cfg, spec, streams);
}

}  // namespace aerate
