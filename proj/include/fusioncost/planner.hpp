#pragma once

// Cost-optimal repetition strategy for a target MSE tau.
//
// With uniform fidelities the total cost relaxes to a convex function of the
// unit count a >= 1, so the minimizer is found by bisecting its slope
//   kappa(a) = c_min + D'(a) - V(1 / (tau a)),   V(x) = x G'(x) - G(x) at x = 1/tau.
// Fusion pays (a_o > 1) exactly when c_min + D'(1) < V(tau). V is nonincreasing
// in tau, which yields a single threshold T separating the fused and
// single-unit regions. Linear and concave costs never benefit from fusion.

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fusioncost/cost_model.hpp"
#include "fusioncost/errors.hpp"
#include "fusioncost/fusion_core.hpp"

namespace fusioncost {

/// Convex cost, fusion pays for tau < threshold. An empty threshold means
/// fusion pays for every tau.
struct ConvexThresholded {
  std::optional<double> threshold;
};

/// Convex cost whose V(tau) stays at or below c_min + D'(1) as tau -> 0.
struct ConvexAlwaysSingle {
  double limit;
};

struct LinearAlwaysSingle {};
struct ConcaveAlwaysSingle {};

using Regime = std::variant<ConvexThresholded, ConvexAlwaysSingle, LinearAlwaysSingle, ConcaveAlwaysSingle>;

inline const char* regime_name(const Regime& r) {
  return std::visit(detail::overloaded{
                        [](const ConvexThresholded&) { return "convex_thresholded"; },
                        [](const ConvexAlwaysSingle&) { return "convex_always_single"; },
                        [](const LinearAlwaysSingle&) { return "linear_always_single"; },
                        [](const ConcaveAlwaysSingle&) { return "concave_always_single"; },
                    },
                    r);
}

inline bool is_convex_regime(const Regime& r) {
  return std::holds_alternative<ConvexThresholded>(r) || std::holds_alternative<ConvexAlwaysSingle>(r);
}

struct PlanDiagnostics {
  double a_o = 1.0;
  std::optional<double> v_tau;       // absent when the cost law has no usable derivative
  std::optional<double> kappa_at_1;  // ditto
};

struct StrategyPlan {
  double tau;
  std::size_t n_o;
  double per_unit_fidelity;
  std::vector<double> weights;
  double total_cost;
  double achieved_mse;
  Regime regime;
  PlanDiagnostics diagnostics;
};

// ---------------------------------------------------------------------------

/// Whether V and the cost slope can be evaluated: closed forms that are
/// convex or linear everywhere.
inline bool supports_marginal_gain(const CostSpec& cost) {
  return std::visit(detail::overloaded{
                        [](const Exponential&) { return true; },
                        [](const Power& f) { return f.p >= 1.0; },
                        [](const Linear&) { return true; },
                        [](const LogConcave&) { return false; },
                        [](const Tabulated&) { return false; },
                    },
                    cost.incremental());
}

namespace detail {

// x G'(x) - G(x), arranged per form to stay finite when G overflows.
inline double marginal_gain(const CostSpec& cost, double x) {
  return std::visit(overloaded{
                        [&](const Exponential& f) {
                          const double u = f.beta * x;
                          return f.alpha * (std::expm1(u) * (u - 1.0) + u);
                        },
                        [&](const Power& f) -> double {
                          if (f.p < 1.0) throw UnsupportedRegime("power cost with p < 1 is concave");
                          return f.alpha * (f.p - 1.0) * std::pow(x, f.p);
                        },
                        [&](const Linear&) { return 0.0; },
                        [&](const LogConcave&) -> double {
                          throw UnsupportedRegime("log-concave cost has no convex-regime slope");
                        },
                        [&](const Tabulated&) -> double {
                          throw UnsupportedRegime("tabulated cost curves have no analytic slope");
                        },
                    },
                    cost.incremental());
}

inline double cutoff(const CostSpec& cost, const FusionCostSpec& fusion) {
  return cost.c_min() + eval_fusion_deriv(fusion, 1.0, 1);
}

}  // namespace detail

/// d/da of the relaxed total cost:
/// G(1/(tau a)) - (1/(tau a)) G'(1/(tau a)) + c_min + D'(a).
inline double cost_slope(const CostSpec& cost, const FusionCostSpec& fusion, double tau, double a) {
  detail::require_tau(tau);
  detail::require_relaxed_count(a);
  const double x = 1.0 / (tau * a);
  return (cost.c_min() + eval_fusion_deriv(fusion, a, 1)) - detail::marginal_gain(cost, x);
}

/// V(tau) = tau^-1 G'(tau^-1) - G(tau^-1).
inline double v_of_tau(const CostSpec& cost, double tau) {
  detail::require_tau(tau);
  return detail::marginal_gain(cost, 1.0 / tau);
}

/// Continuous minimizer a_o(tau) >= 1 of the relaxed total cost.
inline double solve_continuous_minimizer(const CostSpec& cost, const FusionCostSpec& fusion, double tau) {
  const double k1 = cost_slope(cost, fusion, tau, 1.0);
  if (k1 >= 0.0) return 1.0;

  const double tol = 1e-10 * (1.0 + std::abs(detail::cutoff(cost, fusion)));
  double lo = 1.0;
  double hi = 2.0;
  while (cost_slope(cost, fusion, tau, hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 0x1p60) throw DivergenceError("no root of the cost slope below 2^60; total cost does not grow with a");
  }
  double mid = 0.5 * (lo + hi);
  for (int iter = 0; iter < 400; ++iter) {
    mid = 0.5 * (lo + hi);
    const double k = cost_slope(cost, fusion, tau, mid);
    if (std::abs(k) <= tol) break;
    if (k < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-12 * std::max(1.0, lo)) {
      mid = 0.5 * (lo + hi);
      break;
    }
  }
  return mid;
}

/// Cheaper of floor(a_o) and ceil(a_o); ties go to the smaller count.
inline std::size_t select_optimal_n(const CostSpec& cost, const FusionCostSpec& fusion, double tau, double a_o) {
  detail::require_relaxed_count(a_o);
  if (a_o > static_cast<double>(kMaxUnits)) {
    throw DomainError("continuous minimizer exceeds the unit cap of " + std::to_string(kMaxUnits));
  }
  const auto lo = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(a_o)));
  const auto hi = static_cast<std::size_t>(std::ceil(a_o));
  if (lo == hi) return lo;
  return total_cost(cost, fusion, tau, hi) < total_cost(cost, fusion, tau, lo) ? hi : lo;
}

/// Regime of a (cost, fusion) pair and, for thresholded convex costs, the
/// threshold T = inf{tau : V(tau) = c_min + D'(1)}.
inline Regime threshold_tau(const CostSpec& cost, const FusionCostSpec& fusion) {
  switch (classify_curvature(cost)) {
    case Curvature::Linear: return LinearAlwaysSingle{};
    case Curvature::Concave: return ConcaveAlwaysSingle{};
    case Curvature::Indeterminate:
      throw UnsupportedRegime("cost curvature is indeterminate on the probe range; no regime applies");
    case Curvature::Convex: break;
  }

  const double c = detail::cutoff(cost, fusion);
  constexpr double kTauFloor = 1e-8;

  // Probe lim_{tau->0} V on a decreasing sweep.
  bool growing = true;
  double prev = -1.0;
  double v_floor = 0.0;
  for (double t = 1e-1; t >= kTauFloor * 0.5; t /= 10.0) {
    v_floor = v_of_tau(cost, t);
    growing = growing && v_floor > prev;
    prev = v_floor;
  }
  const bool unbounded = !std::isfinite(v_floor) || (v_floor > 1e15 && growing);
  if (!unbounded && v_floor <= c) return ConvexAlwaysSingle{v_floor};
  if (c <= 0.0) return ConvexThresholded{std::nullopt};

  auto above = [&](double t) { return v_of_tau(cost, t) > c; };
  double lo = kTauFloor;
  double hi = 1.0;
  while (above(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 0x1p60) return ConvexThresholded{std::nullopt};
  }
  for (;;) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (above(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  // hi is on the single-unit side, so tau = T itself plans one unit.
  return ConvexThresholded{hi};
}

/// Full plan for target MSE tau.
inline StrategyPlan plan(const CostSpec& cost, const FusionCostSpec& fusion, double tau) {
  detail::require_tau(tau);
  Regime regime = threshold_tau(cost, fusion);

  PlanDiagnostics diag;
  if (supports_marginal_gain(cost)) {
    diag.v_tau = v_of_tau(cost, tau);
    diag.kappa_at_1 = cost_slope(cost, fusion, tau, 1.0);
  }

  std::size_t n = 1;
  if (is_convex_regime(regime)) {
    diag.a_o = solve_continuous_minimizer(cost, fusion, tau);
    n = select_optimal_n(cost, fusion, tau, diag.a_o);
  }

  const FidelityVector theta = uniform_fidelities(tau, n);
  auto [w, mmse] = optimal_weights(theta);
  return StrategyPlan{
      .tau = tau,
      .n_o = n,
      .per_unit_fidelity = theta[0],
      .weights = std::move(w),
      .total_cost = total_cost(cost, fusion, tau, n),
      .achieved_mse = mmse,
      .regime = regime,
      .diagnostics = diag,
  };
}

}  // namespace fusioncost
