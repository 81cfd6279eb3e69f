#pragma once

// Slow, exhaustive reference computations. Nothing here calls into the
// analytic routines it is meant to check (optimal_weights, general_mse,
// uniform_fidelities, total_cost, v_of_tau, the planner); only the raw cost
// law evaluators are shared.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "fusioncost/cost_model.hpp"
#include "fusioncost/errors.hpp"

namespace fusioncost::oracle {

struct OracleVerdict {
  std::string claim;
  double analytic_value;
  double brute_force_value;
  double max_abs_gap;
  bool passed;
};

struct WeightSearchResult {
  std::vector<double> best_w;
  double best_mse;
};

/// Exhaustive search over the weight simplex grid {w_i = k_i * step, sum k_i = 1/step}.
inline WeightSearchResult brute_force_weights(std::span<const double> theta, double grid_step,
                                              double second_moment_y) {
  const std::size_t n = theta.size();
  if (n == 0) throw DomainError("need at least one unit");
  if (n > 4) throw DomainError("weight grid search is limited to N <= 4");
  if (!(grid_step > 0.0) || grid_step > 0.05) throw DomainError("grid step must lie in (0, 0.05]");
  for (double t : theta) {
    if (!(t > 0.0)) throw DomainError("fidelities must be positive");
  }
  const auto cells = static_cast<int>(std::lround(1.0 / grid_step));

  WeightSearchResult best{std::vector<double>(n, 0.0), std::numeric_limits<double>::infinity()};
  std::vector<int> k(n, 0);
  std::vector<double> w(n);

  // Enumerates k_0..k_{n-2} freely; the last coordinate absorbs the remainder.
  auto visit = [&](auto&& self, std::size_t idx, int remaining) -> void {
    if (idx + 1 == n) {
      k[idx] = remaining;
      double s = 0.0, quad = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        w[i] = static_cast<double>(k[i]) / cells;
        s += w[i];
        quad += w[i] * w[i] / theta[i];
      }
      const double mse = second_moment_y * (s - 1.0) * (s - 1.0) + quad;
      if (mse < best.best_mse) {
        best.best_mse = mse;
        best.best_w = w;
      }
      return;
    }
    for (int v = 0; v <= remaining; ++v) {
      k[idx] = v;
      self(self, idx + 1, remaining - v);
    }
  };
  visit(visit, 0, cells);
  return best;
}

struct AllocationSearchResult {
  std::vector<double> best_theta;
  double best_sum_cost;
  double cell_width;
};

/// Grid search over {theta : sum theta = 1/tau, theta_i > 0} minimizing
/// sum_i C(theta_i). Grid coordinates are k/(grid_points+1) of the budget.
inline AllocationSearchResult brute_force_allocation(const CostSpec& cost, double tau, std::size_t n,
                                                     std::size_t grid_points) {
  if (n < 2 || n > 3) throw DomainError("allocation grid search supports N = 2 or 3");
  if (!(tau > 0.0)) throw DomainError("tau must be positive");
  if (grid_points < 1) throw DomainError("need at least one grid point");
  const double budget = 1.0 / tau;
  const auto cells = static_cast<long>(grid_points + 1);
  const double cell = budget / static_cast<double>(cells);

  AllocationSearchResult best{{}, std::numeric_limits<double>::infinity(), cell};
  auto consider = [&](std::vector<double> th) {
    double s = 0.0;
    for (double t : th) s += eval_cost(cost, t);
    if (s < best.best_sum_cost) {
      best.best_sum_cost = s;
      best.best_theta = std::move(th);
    }
  };
  if (n == 2) {
    for (long k1 = 1; k1 < cells; ++k1) {
      consider({budget * k1 / cells, budget * (cells - k1) / cells});
    }
  } else {
    for (long k1 = 1; k1 < cells; ++k1) {
      for (long k2 = 1; k1 + k2 < cells; ++k2) {
        consider({budget * k1 / cells, budget * k2 / cells, budget * (cells - k1 - k2) / cells});
      }
    }
  }
  return best;
}

struct IntegerSweep {
  std::size_t argmin;
  std::vector<double> cost_table;  // cost_table[N-1] = Cost_tau(N)
};

/// Cost_tau(N) for N = 1..n_max, summing the N identical unit costs one by one.
inline IntegerSweep sweep_integer_n(const CostSpec& cost, const FusionCostSpec& fusion, double tau,
                                    std::size_t n_max) {
  if (n_max < 1) throw DomainError("n_max must be at least 1");
  if (!(tau > 0.0)) throw DomainError("tau must be positive");
  IntegerSweep out{1, {}};
  out.cost_table.reserve(n_max);
  for (std::size_t n = 1; n <= n_max; ++n) {
    const double theta = 1.0 / (tau * static_cast<double>(n));
    const double unit = eval_cost(cost, theta);
    double units = 0.0;
    for (std::size_t i = 0; i < n; ++i) units += unit;
    out.cost_table.push_back(units + eval_fusion_cost(fusion, static_cast<double>(n)));
    if (out.cost_table.back() < out.cost_table[out.argmin - 1]) out.argmin = n;
  }
  return out;
}

namespace detail {

// Direct transcription of x G'(x) - G(x) per closed form.
inline double reference_v(const CostSpec& cost, double tau) {
  const double x = 1.0 / tau;
  return std::visit(fusioncost::detail::overloaded{
                        [&](const Exponential& f) { return f.alpha * std::exp(f.beta * x) * (f.beta * x - 1.0) + f.alpha; },
                        [&](const Power& f) -> double {
                          if (f.p < 1.0) throw UnsupportedRegime("V is only defined here for convex costs");
                          return x * (f.alpha * f.p * std::pow(x, f.p - 1.0)) - f.alpha * std::pow(x, f.p);
                        },
                        [&](const Linear& f) { return x * f.alpha - f.alpha * x; },
                        [&](const LogConcave&) -> double {
                          throw UnsupportedRegime("V is only defined here for convex costs");
                        },
                        [&](const Tabulated&) -> double {
                          throw UnsupportedRegime("V needs an analytic derivative");
                        },
                    },
                    cost.incremental());
}

}  // namespace detail

/// tau* with V(tau*) = target, bisected down to adjacent doubles.
/// Postcondition |V(tau*) - target| <= 1e-11 * target.
inline double bisect_v_inverse(const CostSpec& cost, double target) {
  if (!(target > 0.0)) throw DomainError("target must be positive");
  double lo = 1e-12;
  if (!(detail::reference_v(cost, lo) > target)) {
    throw DomainError("target " + std::to_string(target) + " lies outside the range of V");
  }
  double hi = 1.0;
  while (detail::reference_v(cost, hi) > target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 0x1p80) throw DomainError("V does not fall below the target");
  }
  for (;;) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (detail::reference_v(cost, mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double gap_lo = std::abs(detail::reference_v(cost, lo) - target);
  const double gap_hi = std::abs(detail::reference_v(cost, hi) - target);
  const double tau_star = gap_lo < gap_hi ? lo : hi;
  if (std::min(gap_lo, gap_hi) > 1e-11 * target) {
    throw DivergenceError("V inverse did not reach 1e-11 relative accuracy");
  }
  return tau_star;
}

}  // namespace fusioncost::oracle
