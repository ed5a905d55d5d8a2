#include "aerate/engine.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "aerate/errors.hpp"

namespace aerate {
namespace {

TrialConfig config(const std::string& design, std::size_t horizon, std::uint64_t seed) {
  TrialConfig cfg;
  cfg.design = Design::parse(design);
  cfg.horizon = horizon;
  cfg.seed = seed;
  return cfg;
}

void expect_same_path(const TrialResult& a, const TrialResult& b) {
  ASSERT_EQ(a.trajectory.size(), b.trajectory.size());
  for (std::size_t i = 0; i < a.trajectory.size(); ++i) {
    const auto& x = a.trajectory[i];
    const auto& y = b.trajectory[i];
    ASSERT_EQ(x.a, y.a) << i;
    ASSERT_EQ(x.pi1, y.pi1) << i;
    ASSERT_EQ(x.y, y.y) << i;
    ASSERT_EQ(x.estimates.a2ipw, y.estimates.a2ipw) << i;
    ASSERT_EQ(x.estimates.adaipw, y.estimates.adaipw) << i;
    ASSERT_EQ(x.estimates.dm, y.estimates.dm) << i;
  }
}

TEST(Engine, TwoRoundsAreForced) {
  for (const char* d : {"aerate", "rct", "hahn(2)"}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      auto cfg = config(d, 2, seed);
      cfg.rho = 2;
      const auto r = run_trial(cfg, make_synthetic(1));
      ASSERT_EQ(r.trajectory.size(), 2u);
      EXPECT_EQ(r.trajectory[0].a, 0);
      EXPECT_EQ(r.trajectory[1].a, 1);
    }
  }
}

TEST(Engine, FullWarmupEqualsRct) {
  const auto spec = make_synthetic(3);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto aer = config("aerate", 120, seed);
    aer.rho = 120;
    expect_same_path(run_trial(aer, spec), run_trial(config("rct", 120, seed), spec));
  }
}

TEST(Engine, HahnWithoutSecondStageEqualsRct) {
  const auto spec = make_synthetic(1);
  for (std::uint64_t seed : {4u, 5u}) {
    const auto hahn = run_trial(config("hahn(100)", 100, seed), spec);
    expect_same_path(hahn, run_trial(config("rct", 100, seed), spec));
    EXPECT_EQ(hahn.freeze_round, 0u);
  }
}

TEST(Engine, SameSeedSameResult) {
  const auto spec = make_synthetic(1);
  for (const char* d : {"aerate", "opt", "hahn(30)", "fixed(0.7)"}) {
    const auto cfg = config(d, 150, 77);
    const auto a = run_trial(cfg, spec);
    const auto b = run_trial(cfg, spec);
    expect_same_path(a, b);
    EXPECT_EQ(a.stopping_time_lil, b.stopping_time_lil);
    EXPECT_EQ(a.rejected_at_looks, b.rejected_at_looks);
    EXPECT_EQ(a.max_inverse_propensity, b.max_inverse_propensity);
  }
}

TEST(Engine, CovariatesAndNoiseCoupledAcrossDesigns) {
  // Realized outcomes differ only through the chosen arm.
  const auto spec = make_synthetic(1);
  const auto a = run_trial(config("aerate", 80, 9), spec);
  const auto b = run_trial(config("rct", 80, 9), spec);
  TrialStreams streams(9);
  for (std::size_t t = 0; t < 80; ++t) {
    const auto d = sample_round(spec, streams.covariates, streams.noise);
    EXPECT_EQ(a.trajectory[t].y, a.trajectory[t].a ? d.y1 : d.y0);
    EXPECT_EQ(b.trajectory[t].y, b.trajectory[t].a ? d.y1 : d.y0);
  }
}

TEST(Engine, HahnFreezesFirstStagePolicy) {
  const auto spec = make_synthetic(1);
  auto cfg = config("hahn(40)", 120, 13);
  const auto r = run_trial(cfg, spec);
  EXPECT_EQ(r.freeze_round, 40u);

  // Replay the covariate stream and refit on the first-stage records only.
  TrialStreams streams(13);
  RegressorState first(spec.dim, cfg.regressor);
  for (std::size_t t = 1; t <= 120; ++t) {
    const auto d = sample_round(spec, streams.covariates, streams.noise);
    const auto& rec = r.trajectory[t - 1];
    if (t <= 40) {
      EXPECT_EQ(rec.pi1, 0.5);
      first.observe(d.x, rec.a, rec.y);
    } else {
      const auto fv = first.predict_fv(d.x);
      EXPECT_DOUBLE_EQ(rec.pi1, optimal_pi_aipw(fv.nu1, fv.nu0)) << t;
      EXPECT_EQ(rec.source, PolicySource::Fixed);
    }
  }
}

TEST(Engine, WarmupThenAdaptive) {
  const auto r = run_trial(config("aerate", 60, 3), make_synthetic(1));
  for (const auto& rec : r.trajectory) {
    if (rec.t <= 10) {
      EXPECT_EQ(rec.pi1, 0.5);
      EXPECT_EQ(rec.source, PolicySource::Warmup);
    } else {
      EXPECT_EQ(rec.source, PolicySource::Adaptive);
    }
  }
}

TEST(Engine, OracleUsesTrueVariances) {
  const auto r = run_trial(config("opt", 50, 2), make_synthetic(1));
  for (const auto& rec : r.trajectory) {
    EXPECT_NEAR(rec.pi1, 0.8 / 1.1, 1e-15);
    EXPECT_EQ(rec.source, PolicySource::Oracle);
  }
}

TEST(Engine, InversePropensityBound) {
  const auto spec = make_synthetic(1);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (auto rule : {ScheduleRule::power(-0.5), ScheduleRule::power(-1.0 / 1.5)}) {
      auto cfg = config("aerate", 300, seed);
      cfg.gamma_rule = rule;
      const auto r = run_trial(cfg, spec);
      EXPECT_LE(r.max_inverse_propensity, 2.0 / rule(300) * (1 + 1e-12));
      for (const auto& rec : r.trajectory) {
        const double g = rule(rec.t);
        ASSERT_GE(rec.pi1, g / 2 - 1e-15);
        ASSERT_LE(rec.pi1, 1 - g / 2 + 1e-15);
      }
    }
  }
}

TEST(Engine, RctMatchesStaticIpw) {
  const auto r = run_trial(config("rct", 200, 21), make_synthetic(1));
  double sum = 0.0;
  for (const auto& rec : r.trajectory) {
    sum += rec.a ? rec.y / 0.5 : -rec.y / 0.5;
    ASSERT_NEAR(rec.estimates.adaipw, sum / double(rec.t), 1e-12);
  }
}

TEST(Engine, TrajectoryShapeAndCensoring) {
  const auto spec = make_synthetic(2);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto r = run_trial(config("aerate", 300, seed), spec);
    EXPECT_EQ(r.trajectory.size(), 300u);
    EXPECT_LE(r.stopping_time_lil, 300u);
    EXPECT_LE(r.stopping_time_bf, 300u);
    if (!r.lil_rejected) EXPECT_EQ(r.stopping_time_lil, 300u);
    if (r.stopping_time_lil < 300u) EXPECT_TRUE(r.lil_rejected);
    EXPECT_EQ(r.rejected_at_looks.size(), 2u);
    EXPECT_TRUE(std::isnan(r.trajectory[0].sigma_hat_sq));
  }
}

TEST(Engine, StopOnRejectTruncates) {
  auto cfg = config("aerate", 2000, 1);
  cfg.test.mode = TestMode::Lil;
  cfg.stop_on_reject = true;
  const auto r = run_trial(cfg, make_synthetic(1));
  ASSERT_TRUE(r.lil_rejected);
  EXPECT_EQ(r.trajectory.size(), r.stopping_time_lil);
}

TEST(Engine, UnbiasedAcrossTrials) {
  const auto spec = make_synthetic(1);
  constexpr int reps = 100;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < reps; ++i) {
    const auto r = run_trial(config("aerate", 150, 1000 + i), spec);
    const double err = r.final_estimates.a2ipw - r.theta0;
    s += err;
    s2 += err * err;
  }
  const double mean = s / reps;
  const double se = std::sqrt((s2 / reps - mean * mean) / reps);
  EXPECT_LT(std::abs(mean), 4.0 * se);
}

TEST(Engine, KnnRegressorRuns) {
  auto cfg = config("aerate", 150, 4);
  cfg.regressor.method = RegressorMethod::Knn;
  const auto r = run_trial(cfg, make_synthetic(1));
  EXPECT_TRUE(std::isfinite(r.final_estimates.a2ipw));
}

TEST(Assignment, Draws) {
  EXPECT_EQ(assign_action(1.0 - 1e-9, 0.5), 1);
  EXPECT_EQ(assign_action(0.3, 0.3), 1);
  EXPECT_EQ(assign_action(0.3, 0.30001), 0);
  Rng rng(8);
  constexpr int n = 100000;
  int ones = 0;
  for (int i = 0; i < n; ++i) ones += assignment_draw(0.5, rng).action;
  EXPECT_NEAR(ones / double(n), 0.5, 4.0 * std::sqrt(0.25 / n));
}

TEST(Config, Validation) {
  auto cfg = config("aerate", 1, 0);
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = config("aerate", 100, 0);
  cfg.rho = 1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.rho = 101;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_THROW(config("hahn(101)", 100, 0).validate(), ConfigError);
  EXPECT_NO_THROW(config("hahn(100)", 100, 0).validate());
  EXPECT_THROW(run_trial(config("hahn(101)", 100, 0), make_synthetic(1)), ConfigError);
  TrialStreams streams(0);
  EXPECT_THROW(run_hahn(config("rct", 100, 0), make_synthetic(1), streams), ConfigError);
}

TEST(Design, Parsing) {
  EXPECT_EQ(Design::parse("hahn(50)").hahn_n0, 50u);
  EXPECT_EQ(Design::parse("hahn100").hahn_n0, 100u);
  EXPECT_EQ(Design::parse("fixed(0.7)").fixed_pi, 0.7);
  EXPECT_EQ(Design::parse("fixed(0.7)").to_string(), "fixed(0.7)");
  EXPECT_THROW(Design::parse("fixed(1.2)"), ConfigError);
  EXPECT_THROW(Design::parse("thompson"), ConfigError);
}

}  // namespace
}  // namespace aerate
