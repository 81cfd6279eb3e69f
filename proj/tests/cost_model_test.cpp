#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "fusioncost/cost_model.hpp"
#include "test_support.hpp"

namespace fusioncost {
namespace {

std::vector<CostSpec> closed_forms() {
  return {
      CostSpec(7.0, Exponential{1.0, 1.0}), CostSpec(0.5, Exponential{2.5, 0.3}), CostSpec(1.0, Power{1.0, 2.0}),
      CostSpec(0.0, Power{0.7, 0.5}),       CostSpec(2.0, Power{3.0, 1.0}),       CostSpec(1.0, Linear{2.0}),
      CostSpec(0.0, LogConcave{1.0, 1.0}),  CostSpec(4.0, LogConcave{0.2, 7.0}),
  };
}

CostSpec convex_table() {
  return CostSpec(1.0, Tabulated{{{0.0, 0.0}, {1.0, 1.0}, {2.0, 3.0}, {4.0, 9.0}, {8.0, 25.0}}});
}

TEST(EvalCost, ExponentialApproachesBaselineAtZero) {
  const CostSpec spec(7.0, Exponential{1.0, 1.0});
  EXPECT_NEAR(eval_cost(spec, 1e-12), 7.0, 1e-9);
}

TEST(EvalCost, ExponentialAtTen) {
  // 7 + (e^10 - 1), evaluated at 40 digits with mpmath.
  const CostSpec spec(7.0, Exponential{1.0, 1.0});
  EXPECT_NEAR(eval_cost(spec, 10.0), 22032.465794806716517, 1e-12 * 22032.47);
}

TEST(EvalCost, Linear) { EXPECT_DOUBLE_EQ(eval_cost(CostSpec(1.0, Linear{2.0}), 3.0), 7.0); }

TEST(EvalCost, RejectsNonPositiveFidelity) {
  const CostSpec spec(7.0, Exponential{1.0, 1.0});
  EXPECT_THROW(eval_cost(spec, 0.0), DomainError);
  EXPECT_THROW(eval_cost(spec, -1.0), DomainError);
  EXPECT_THROW(eval_cost(spec, std::nan("")), DomainError);
}

TEST(EvalCost, TabulatedInterpolatesAndRefusesToExtrapolate) {
  const CostSpec spec = convex_table();
  EXPECT_DOUBLE_EQ(eval_cost(spec, 1.5), 1.0 + 2.0);
  EXPECT_DOUBLE_EQ(eval_cost(spec, 8.0), 26.0);
  EXPECT_THROW(eval_cost(spec, 8.0001), ExtrapolationError);
}

TEST(Derivative, ClosedFormExamples) {
  EXPECT_NEAR(eval_incremental_deriv(CostSpec(0.0, Exponential{1.0, 1.0}), 1.0, 1), std::numbers::e, 1e-15);
  EXPECT_EQ(eval_incremental_deriv(CostSpec(0.0, Linear{5.0}), 0.3, 2), 0.0);
  EXPECT_EQ(eval_incremental_deriv(CostSpec(0.0, Linear{5.0}), 123.0, 2), 0.0);
  EXPECT_DOUBLE_EQ(eval_incremental_deriv(CostSpec(0.0, Power{1.0, 2.0}), 3.0, 1), 6.0);
}

TEST(Derivative, ErrorPaths) {
  const CostSpec spec(0.0, Exponential{1.0, 1.0});
  EXPECT_THROW(eval_incremental_deriv(spec, 1.0, 0), DomainError);
  EXPECT_THROW(eval_incremental_deriv(spec, 1.0, 3), DomainError);
  EXPECT_THROW(eval_incremental_deriv(spec, 0.0, 1), DomainError);
  EXPECT_THROW(eval_incremental_deriv(convex_table(), 1.5, 2), UnsupportedRegime);
}

TEST(Derivative, TabulatedCentralDifference) {
  const CostSpec spec = convex_table();
  EXPECT_NEAR(eval_incremental_deriv(spec, 1.5, 1), 2.0, 1e-9);
  EXPECT_NEAR(eval_incremental_deriv(spec, 5.0, 1), 4.0, 1e-9);
  EXPECT_NEAR(eval_incremental_deriv(spec, 1e-9, 1), 1.0, 1e-9);
  EXPECT_THROW(eval_incremental_deriv(spec, 9.0, 1), ExtrapolationError);
}

TEST(FusionCost, Examples) {
  const FusionCostSpec lmo(LinearMinusOne{1.0});
  EXPECT_EQ(eval_fusion_cost(lmo, 1.0), 0.0);
  EXPECT_EQ(eval_fusion_deriv(lmo, 1.0, 1), 1.0);
  EXPECT_EQ(eval_fusion_deriv(lmo, 7.3, 2), 0.0);

  const FusionCostSpec poly(Polynomial{{0.0, 2.0}});
  EXPECT_DOUBLE_EQ(eval_fusion_cost(poly, 3.0), 8.0);
  EXPECT_DOUBLE_EQ(eval_fusion_deriv(poly, 3.0, 1), 8.0);
  EXPECT_DOUBLE_EQ(eval_fusion_deriv(poly, 3.0, 2), 4.0);
  EXPECT_DOUBLE_EQ(eval_fusion_deriv(poly, 1.0, 2), 4.0);

  const FusionCostSpec affine(Affine{0.5, 2.0});
  EXPECT_DOUBLE_EQ(eval_fusion_cost(affine, 4.0), 8.5);
  EXPECT_DOUBLE_EQ(eval_fusion_deriv(affine, 4.0, 1), 2.0);
}

TEST(FusionCost, RejectsCountBelowOne) {
  const FusionCostSpec lmo(LinearMinusOne{1.0});
  EXPECT_THROW(eval_fusion_cost(lmo, 0.999), DomainError);
  EXPECT_THROW(eval_fusion_deriv(lmo, 0.0, 1), DomainError);
  EXPECT_THROW(eval_fusion_deriv(lmo, 2.0, 5), DomainError);
}

TEST(FusionCost, IncreasingOnIntegers) {
  testing::Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    const FusionCostSpec f = rng.fusion();
    for (int n = 1; n < 40; ++n) EXPECT_GE(eval_fusion_cost(f, n + 1), eval_fusion_cost(f, n));
  }
}

TEST(SpecValidation, RejectsBadParameters) {
  EXPECT_THROW(CostSpec(-1.0, Linear{1.0}), InvalidSpec);
  EXPECT_THROW(CostSpec(0.0, Exponential{-1.0, 1.0}), InvalidSpec);
  EXPECT_THROW(CostSpec(0.0, Exponential{1.0, 0.0}), InvalidSpec);
  EXPECT_THROW(CostSpec(0.0, Power{1.0, 0.0}), InvalidSpec);
  EXPECT_THROW(CostSpec(0.0, LogConcave{1.0, -2.0}), InvalidSpec);
  EXPECT_THROW(CostSpec(0.0, Tabulated{{{0.1, 0.0}, {1.0, 1.0}}}), InvalidSpec);
  EXPECT_THROW(CostSpec(0.0, Tabulated{{{0.0, 0.0}, {1.0, 1.0}, {1.0, 2.0}}}), InvalidSpec);
  EXPECT_THROW(CostSpec(0.0, Tabulated{{{0.0, 0.0}, {1.0, 1.0}, {2.0, 1.0}}}), InvalidSpec);
  EXPECT_THROW(CostSpec(0.0, Tabulated{{{0.0, 0.0}}}), InvalidSpec);
  EXPECT_THROW(FusionCostSpec(LinearMinusOne{-0.1}), InvalidSpec);
  EXPECT_THROW(FusionCostSpec(Polynomial{{0.0, 0.0}}), InvalidSpec);
  EXPECT_THROW(FusionCostSpec(Polynomial{{}}), InvalidSpec);
  EXPECT_THROW(FusionCostSpec(Affine{0.0, 0.0}), InvalidSpec);
}

TEST(Curvature, Examples) {
  EXPECT_EQ(classify_curvature(CostSpec(0.0, Exponential{1.0, 1.0}), 0.01, 10.0), Curvature::Convex);
  EXPECT_EQ(classify_curvature(CostSpec(0.0, LogConcave{1.0, 1.0}), 0.01, 10.0), Curvature::Concave);
  EXPECT_EQ(classify_curvature(CostSpec(0.0, Power{3.0, 1.0}), 0.01, 10.0), Curvature::Linear);
}

TEST(Curvature, DefaultRangeHandlesOverflowingExponential) {
  EXPECT_EQ(classify_curvature(CostSpec(1.0, Exponential{1.0, 50.0})), Curvature::Convex);
}

TEST(Curvature, TabulatedShapes) {
  EXPECT_EQ(classify_curvature(convex_table()), Curvature::Convex);
  const CostSpec concave(0.0, Tabulated{{{0.0, 0.0}, {1.0, 4.0}, {2.0, 6.0}, {4.0, 7.0}}});
  EXPECT_EQ(classify_curvature(concave), Curvature::Concave);
  const CostSpec straight(0.0, Tabulated{{{0.0, 0.0}, {1.0, 2.0}, {3.0, 6.0}}});
  EXPECT_EQ(classify_curvature(straight), Curvature::Linear);
  const CostSpec wiggle(0.0, Tabulated{{{0.0, 0.0}, {1.0, 1.0}, {2.0, 3.0}, {3.0, 4.0}}});
  EXPECT_EQ(classify_curvature(wiggle), Curvature::Indeterminate);
}

TEST(Curvature, RejectsBadRange) {
  const CostSpec spec(0.0, Linear{1.0});
  EXPECT_THROW(classify_curvature(spec, 1.0, 1.0), DomainError);
  EXPECT_THROW(classify_curvature(spec, 0.0, 1.0), DomainError);
}

// --- properties ------------------------------------------------------------

TEST(CostProperties, StrictlyIncreasing) {
  testing::Rng rng(1);
  for (const auto& spec : closed_forms()) {
    for (int i = 0; i < 100; ++i) {
      double a = rng.log_uniform(1e-3, 50.0), b = rng.log_uniform(1e-3, 50.0);
      if (a == b) continue;
      if (a > b) std::swap(a, b);
      EXPECT_LT(eval_cost(spec, a), eval_cost(spec, b));
    }
  }
  const CostSpec table = convex_table();
  for (int i = 0; i < 100; ++i) {
    double a = rng.uniform(1e-3, 8.0), b = rng.uniform(1e-3, 8.0);
    if (a > b) std::swap(a, b);
    if (a < b) {
      EXPECT_LT(eval_cost(table, a), eval_cost(table, b));
    }
  }
}

TEST(CostProperties, AnalyticDerivativesMatchFiniteDifferences) {
  testing::Rng rng(2);
  for (const auto& spec : closed_forms()) {
    for (int i = 0; i < 50; ++i) {
      const double t = rng.log_uniform(0.05, 10.0);
      const double h1 = 1e-5 * t;
      const double fd1 = (eval_incremental(spec, t + h1) - eval_incremental(spec, t - h1)) / (2.0 * h1);
      const double d1 = eval_incremental_deriv(spec, t, 1);
      EXPECT_LE(std::abs(fd1 - d1), 1e-5 * std::abs(d1)) << "theta=" << t;

      const double h2 = 1e-3 * t;
      const double fd2 =
          (eval_incremental(spec, t + h2) - 2.0 * eval_incremental(spec, t) + eval_incremental(spec, t - h2)) /
          (h2 * h2);
      const double d2 = eval_incremental_deriv(spec, t, 2);
      EXPECT_LE(std::abs(fd2 - d2), 1e-5 * std::abs(d2) + 1e-7 * std::abs(eval_incremental(spec, t)) / (t * t))
          << "theta=" << t;
    }
  }
}

TEST(CostProperties, VanishesAtZero) {
  for (const auto& spec : closed_forms()) {
    EXPECT_LE(std::abs(eval_incremental(spec, 1e-12)), 1e-6);
    EXPECT_NEAR(eval_cost(spec, 1e-12), spec.c_min(), 1e-6);
  }
  EXPECT_LE(eval_incremental(convex_table(), 1e-12), 1e-6);
}

TEST(CostProperties, CurvatureMatchesSecondDerivativeSign) {
  for (const auto& spec : closed_forms()) {
    double lo = 1e300, hi = -1e300;
    for (double t = 0.01; t <= 100.0; t *= 1.5) {
      lo = std::min(lo, eval_incremental_deriv(spec, t, 2));
      hi = std::max(hi, eval_incremental_deriv(spec, t, 2));
    }
    const Curvature c = classify_curvature(spec);
    if (lo == 0.0 && hi == 0.0) {
      EXPECT_EQ(c, Curvature::Linear);
    } else if (lo >= 0.0) {
      EXPECT_EQ(c, Curvature::Convex);
    } else {
      EXPECT_LE(hi, 0.0);
      EXPECT_EQ(c, Curvature::Concave);
    }
  }
}

}  // namespace
}  // namespace fusioncost
