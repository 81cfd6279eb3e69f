#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fusioncost/cost_model.hpp"
#include "fusioncost/errors.hpp"

namespace fusioncost {

/// Hard cap on the number of fused units considered by any cost evaluation.
inline constexpr std::size_t kMaxUnits = 1'000'000;

/// Fidelities theta_i > 0 of the N units in a strategy; unit i has
/// perturbation variance 1 / theta_i.
class FidelityVector {
 public:
  explicit FidelityVector(std::vector<double> theta) : theta_(std::move(theta)) {
    if (theta_.empty()) throw DomainError("a strategy needs at least one unit");
    for (double t : theta_) {
      if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("fidelities must be finite and positive");
    }
  }

  std::size_t size() const noexcept { return theta_.size(); }
  std::span<const double> values() const noexcept { return theta_; }
  double operator[](std::size_t i) const { return theta_[i]; }

  double total() const noexcept { return std::accumulate(theta_.begin(), theta_.end(), 0.0); }

 private:
  std::vector<double> theta_;
};

struct OptimalFusion {
  std::vector<double> weights;
  double mmse;
};

/// Inverse-variance weights w_i = theta_i / sum(theta) and the resulting
/// minimum MSE 1 / sum(theta).
inline OptimalFusion optimal_weights(const FidelityVector& theta) {
  const double total = theta.total();
  std::vector<double> w(theta.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = theta[i] / total;
  // Second pass pulls sum(w) back onto 1 after the rounding of the division.
  const double s = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& wi : w) wi /= s;
  return {std::move(w), 1.0 / total};
}

/// MSE of the linear estimator sum_i w_i Z_i, with E[Y^2] supplied by the
/// caller:  E[Y^2] (sum(w) - 1)^2 + sum_i w_i^2 / theta_i.
inline double general_mse(std::span<const double> w, const FidelityVector& theta, double second_moment_y) {
  if (w.size() != theta.size()) {
    throw InvalidSpec("weight vector has " + std::to_string(w.size()) + " entries but there are " +
                      std::to_string(theta.size()) + " units");
  }
  if (!(second_moment_y >= 0.0)) throw DomainError("E[Y^2] must be nonnegative");
  double sum_w = 0.0;
  double variance = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    sum_w += w[i];
    variance += w[i] * w[i] / theta[i];
  }
  const double bias = sum_w - 1.0;
  return second_moment_y * bias * bias + variance;
}

namespace detail {

inline void require_tau(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("target MSE tau must be finite and positive");
}

inline void require_unit_count(std::size_t n) {
  if (n == 0) throw DomainError("unit count must be at least 1");
  if (n > kMaxUnits) throw DomainError("unit count exceeds the cap of " + std::to_string(kMaxUnits));
}

}  // namespace detail

/// theta_i = 1 / (tau n) for every unit, so that the fused MSE is exactly tau.
inline FidelityVector uniform_fidelities(double tau, std::size_t n) {
  detail::require_tau(tau);
  detail::require_unit_count(n);
  return FidelityVector(std::vector<double>(n, 1.0 / (tau * static_cast<double>(n))));
}

/// Relaxed total cost a G(1/(tau a)) + a c_min + D(a) for real a >= 1.
inline double relaxed_total_cost(const CostSpec& cost, const FusionCostSpec& fusion, double tau, double a) {
  detail::require_tau(tau);
  detail::require_relaxed_count(a);
  return a * eval_incremental(cost, 1.0 / (tau * a)) + a * cost.c_min() + eval_fusion_cost(fusion, a);
}

/// Total cost of the uniform N-unit strategy reaching MSE tau:
/// N G(1/(tau N)) + N c_min + D(N).
inline double total_cost(const CostSpec& cost, const FusionCostSpec& fusion, double tau, std::size_t n) {
  detail::require_unit_count(n);
  return relaxed_total_cost(cost, fusion, tau, static_cast<double>(n));
}

struct StrategyEvaluation {
  std::vector<double> weights;
  double mse;
  double total_cost;
  std::size_t n;
};

/// Optimal-weight evaluation of an arbitrary (not necessarily uniform)
/// allocation: sum_i C(theta_i) + D(N).
inline StrategyEvaluation evaluate_strategy(const CostSpec& cost, const FusionCostSpec& fusion,
                                            const FidelityVector& theta) {
  detail::require_unit_count(theta.size());
  auto [w, mmse] = optimal_weights(theta);
  double unit_cost = 0.0;
  for (double t : theta.values()) unit_cost += eval_cost(cost, t);
  const double fused = unit_cost + eval_fusion_cost(fusion, static_cast<double>(theta.size()));
  return {std::move(w), mmse, fused, theta.size()};
}

}  // namespace fusioncost
