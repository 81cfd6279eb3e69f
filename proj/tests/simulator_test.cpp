#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fusioncost/fusion_core.hpp"
#include "fusioncost/simulator.hpp"

namespace fusioncost {
namespace {

SimulationConfig base_config(PerturbationKind kind, std::vector<double> theta, std::uint64_t seed = 42) {
  SimulationConfig cfg;
  cfg.kind = kind;
  cfg.weights = optimal_weights(FidelityVector(theta)).weights;
  cfg.theta = std::move(theta);
  cfg.trials = 1'000'000;
  cfg.seed = seed;
  return cfg;
}

constexpr PerturbationKind kAllKinds[] = {PerturbationKind::Gaussian, PerturbationKind::Uniform,
                                          PerturbationKind::Rademacher};

TEST(RunFusionTrials, TwoEqualUnits) {
  const auto r = run_fusion_trials(base_config(PerturbationKind::Gaussian, {1.0, 1.0}));
  EXPECT_LE(std::abs(r.empirical_mse - 0.5), 3.0 * r.mse_std_err);
  EXPECT_DOUBLE_EQ(r.analytic_mse, 0.5);
  EXPECT_EQ(r.seed, 42u);
}

TEST(RunFusionTrials, VanishingNoise) {
  for (auto kind : kAllKinds) {
    auto cfg = base_config(kind, {1e12});
    cfg.trials = 10'000;
    EXPECT_LT(run_fusion_trials(cfg).empirical_mse, 1e-9);
  }
}

TEST(RunFusionTrials, OptimalBeatsNaiveWeights) {
  auto opt = base_config(PerturbationKind::Gaussian, {1.0, 3.0});
  auto naive = opt;
  naive.weights = {0.5, 0.5};
  const auto a = run_fusion_trials(opt);
  const auto b = run_fusion_trials(naive);
  EXPECT_LE(std::abs(a.empirical_mse - 0.25), 3.0 * a.mse_std_err);
  // 0.25 / 1 + 0.25 / 3
  EXPECT_DOUBLE_EQ(b.analytic_mse, 1.0 / 3.0);
  EXPECT_LE(std::abs(b.empirical_mse - 1.0 / 3.0), 3.0 * b.mse_std_err);
  EXPECT_LT(a.empirical_mse, b.empirical_mse);
}

TEST(RunFusionTrials, OptimalWeightsBeatAlternatives) {
  const std::vector<double> theta = {0.5, 2.0, 4.0};
  const auto opt = run_fusion_trials(base_config(PerturbationKind::Uniform, theta, 5));
  for (const std::vector<double>& w : {std::vector{1.0 / 3, 1.0 / 3, 1.0 / 3}, std::vector{0.0, 0.5, 0.5},
                                       std::vector{0.1, 0.2, 0.7}, std::vector{0.0, 0.0, 1.0}}) {
    auto cfg = base_config(PerturbationKind::Uniform, theta, 5);
    cfg.weights = w;
    const auto alt = run_fusion_trials(cfg);
    EXPECT_LE(opt.empirical_mse, alt.empirical_mse + 3.0 * std::hypot(opt.mse_std_err, alt.mse_std_err));
  }
}

TEST(RunFusionTrials, BiasedWeightsExposeSecondMoment) {
  auto cfg = base_config(PerturbationKind::Gaussian, {2.0, 2.0}, 9);
  cfg.weights = {0.4, 0.4};
  cfg.y_value = 3.0;
  const auto r = run_fusion_trials(cfg);
  EXPECT_NEAR(r.analytic_mse, 0.04 * 9.0 + 0.16, 1e-14);
  EXPECT_LE(std::abs(r.empirical_mse - r.analytic_mse), 3.0 * r.mse_std_err);
}

TEST(RunFusionTrials, Errors) {
  auto cfg = base_config(PerturbationKind::Gaussian, {1.0});
  cfg.trials = 0;
  EXPECT_THROW(run_fusion_trials(cfg), DomainError);
  cfg = base_config(PerturbationKind::Gaussian, {1.0, 2.0});
  cfg.weights = {1.0};
  EXPECT_THROW(run_fusion_trials(cfg), InvalidSpec);
  cfg = base_config(PerturbationKind::Gaussian, {1.0});
  cfg.epsilons = {0.0};
  EXPECT_THROW(run_fusion_trials(cfg), DomainError);
  EXPECT_THROW(estimate_tail(base_config(PerturbationKind::Gaussian, {1.0}), {}), DomainError);
}

TEST(RunFusionTrials, DeterministicAcrossThreadCounts) {
  auto cfg = base_config(PerturbationKind::Gaussian, {0.3, 1.7, 2.2});
  cfg.trials = 200'003;
  cfg.epsilons = {0.1, 0.5};
  const auto a = run_fusion_trials(cfg, 1);
  const auto b = run_fusion_trials(cfg, 7);
  const auto c = run_fusion_trials(cfg, 7);
  for (const auto* r : {&b, &c}) {
    EXPECT_EQ(a.empirical_mse, r->empirical_mse);
    EXPECT_EQ(a.mse_std_err, r->mse_std_err);
    for (std::size_t i = 0; i < a.tail_estimates.size(); ++i) {
      EXPECT_EQ(a.tail_estimates[i].empirical_prob, r->tail_estimates[i].empirical_prob);
    }
  }
  cfg.seed += 1;
  EXPECT_NE(run_fusion_trials(cfg).empirical_mse, a.empirical_mse);
}

TEST(EstimateTail, RademacherRespectsSubGaussianBound) {
  const auto cfg = base_config(PerturbationKind::Rademacher, {1.0, 1.0, 1.0, 1.0});
  const std::vector<double> eps = {1.0};
  const auto t = estimate_tail(cfg, eps);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_NEAR(t[0].subgaussian_bound, 2.0 * std::exp(-2.0), 1e-15);
  EXPECT_LE(t[0].empirical_prob, t[0].subgaussian_bound + 3.0 * t[0].binomial_std_err);
  EXPECT_NEAR(t[0].chebyshev_bound, 0.25, 1e-15);
}

TEST(EstimateTail, HugeEpsilonNeverExceeded) {
  for (auto kind : kAllKinds) {
    auto cfg = base_config(kind, {1.0});
    cfg.trials = 100'000;
    const std::vector<double> eps = {1e6};
    EXPECT_EQ(estimate_tail(cfg, eps)[0].empirical_prob, 0.0);
  }
}

TEST(EstimateTail, TinyEpsilonBoundsAreVacuous) {
  auto cfg = base_config(PerturbationKind::Gaussian, {1.0});
  cfg.trials = 100'000;
  const std::vector<double> eps = {1e-9};
  const auto t = estimate_tail(cfg, eps)[0];
  EXPECT_GT(t.empirical_prob, 0.999);
  EXPECT_GE(t.chebyshev_bound, 1.0);
  EXPECT_GE(t.subgaussian_bound, 1.0);
}

TEST(EstimateTail, ChebyshevHoldsForAllKinds) {
  for (auto kind : kAllKinds) {
    const auto cfg = base_config(kind, {0.5, 1.5});
    const std::vector<double> eps = {0.25, 0.5, 1.0, 1.5, 2.0, 3.0};
    for (const auto& t : estimate_tail(cfg, eps)) {
      EXPECT_DOUBLE_EQ(t.chebyshev_bound, std::min(1.0, 1.0 / (t.epsilon * t.epsilon * 2.0)));
      EXPECT_LE(t.empirical_prob, t.chebyshev_bound + 3.0 * t.binomial_std_err) << to_string(kind);
    }
  }
}

TEST(Perturbations, ZeroMeanAndUnitScaledVariance) {
  constexpr std::uint64_t kTrials = 1'000'000;
  for (auto kind : kAllKinds) {
    for (double theta : {0.25, 1.0, 40.0}) {
      double s = 0.0, s2 = 0.0;
      for (std::uint64_t t = 0; t < kTrials; ++t) {
        const double u = draw_perturbation(kind, theta, 123, t, 2);
        s += u;
        s2 += u * u;
      }
      const double mean = s / kTrials;
      const double var = s2 / kTrials - mean * mean;
      EXPECT_LE(std::abs(mean), 4.0 / std::sqrt(kTrials * theta)) << to_string(kind) << " theta=" << theta;
      EXPECT_NEAR(var, 1.0 / theta, 0.01 / theta) << to_string(kind) << " theta=" << theta;
    }
  }
}

TEST(Perturbations, UnitsAreUncorrelated) {
  constexpr std::uint64_t kTrials = 500'000;
  double cross = 0.0;
  for (std::uint64_t t = 0; t < kTrials; ++t) {
    cross += draw_perturbation(PerturbationKind::Gaussian, 1.0, 9, t, 0) *
             draw_perturbation(PerturbationKind::Gaussian, 1.0, 9, t, 1);
  }
  EXPECT_LE(std::abs(cross / kTrials), 5.0 / std::sqrt(kTrials));
}

}  // namespace
}  // namespace fusioncost
