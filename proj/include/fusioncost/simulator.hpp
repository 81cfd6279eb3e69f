#pragma once

// Monte Carlo check of fused estimators Y_hat = sum_i w_i (Y + U_i).
//
// Every perturbation is a pure function of (seed, trial, unit), and trials are
// reduced in fixed-size chunks whose partial sums are combined in chunk order,
// so the report does not depend on how many threads ran it.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "fusioncost/errors.hpp"
#include "fusioncost/fusion_core.hpp"

namespace fusioncost {

enum class PerturbationKind { Gaussian, Uniform, Rademacher };

inline const char* to_string(PerturbationKind k) {
  switch (k) {
    case PerturbationKind::Gaussian: return "gaussian";
    case PerturbationKind::Uniform: return "uniform";
    case PerturbationKind::Rademacher: return "rademacher";
  }
  return "gaussian";
}

struct SimulationConfig {
  PerturbationKind kind = PerturbationKind::Gaussian;
  std::vector<double> theta;
  std::vector<double> weights;
  double y_value = 1.0;
  std::uint64_t trials = 1'000'000;
  std::uint64_t seed = 0;
  std::vector<double> epsilons;
};

struct TailEstimate {
  double epsilon;
  double empirical_prob;
  double binomial_std_err;
  double chebyshev_bound;
  double subgaussian_bound;
};

struct SimulationReport {
  double empirical_mse;
  double mse_std_err;
  double analytic_mse;
  std::vector<TailEstimate> tail_estimates;
  std::uint64_t trials;
  std::uint64_t seed;
};

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t counter_bits(std::uint64_t seed, std::uint64_t trial, std::uint64_t unit,
                                            std::uint64_t lane) noexcept {
  return splitmix64(splitmix64(splitmix64(seed) ^ trial) + ((unit << 2) | lane));
}

// (0, 1]
inline double open_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1p-53;
}

// [0, 1)
inline double half_open_unit(std::uint64_t bits) noexcept { return static_cast<double>(bits >> 11) * 0x1p-53; }

// Neumaier compensated sum.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) noexcept {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      carry += (sum - t) + x;
    } else {
      carry += (x - t) + sum;
    }
    sum = t;
  }
  double value() const noexcept { return sum + carry; }
};

struct ChunkTotals {
  CompensatedSum sq;
  CompensatedSum fourth;
  std::vector<std::uint64_t> exceed;
};

inline constexpr std::uint64_t kChunkTrials = 1u << 14;

}  // namespace detail

/// Zero-mean perturbation of variance 1/theta for unit `unit` in trial `trial`.
inline double draw_perturbation(PerturbationKind kind, double theta, std::uint64_t seed, std::uint64_t trial,
                                std::uint64_t unit) {
  const double sd = 1.0 / std::sqrt(theta);
  switch (kind) {
    case PerturbationKind::Gaussian: {
      const double r = std::sqrt(-2.0 * std::log(detail::open_unit(detail::counter_bits(seed, trial, unit, 0))));
      const double phase = 2.0 * std::numbers::pi * detail::half_open_unit(detail::counter_bits(seed, trial, unit, 1));
      return sd * r * std::cos(phase);
    }
    case PerturbationKind::Uniform: {
      const double u = detail::half_open_unit(detail::counter_bits(seed, trial, unit, 0));
      return sd * std::sqrt(3.0) * (2.0 * u - 1.0);
    }
    case PerturbationKind::Rademacher:
      return (detail::counter_bits(seed, trial, unit, 0) >> 63) ? sd : -sd;
  }
  return 0.0;
}

namespace detail {

inline void validate(const SimulationConfig& cfg) {
  if (cfg.trials == 0) throw DomainError("trials must be at least 1");
  if (cfg.theta.size() != cfg.weights.size()) {
    throw InvalidSpec("theta has " + std::to_string(cfg.theta.size()) + " entries but weights has " +
                      std::to_string(cfg.weights.size()));
  }
  FidelityVector{cfg.theta};  // validates entries
  for (double e : cfg.epsilons) {
    if (!(e > 0.0)) throw DomainError("tail thresholds epsilon must be positive");
  }
}

}  // namespace detail

/// Runs cfg.trials independent trials and reports empirical MSE and the tail
/// probability P(|Y_hat - Y| >= eps) for each eps in cfg.epsilons.
///
/// The attached bounds use the weighted noise variance s2 = sum w_i^2/theta_i
/// and the deterministic bias b = (sum w - 1) Y: Chebyshev/Markov gives
/// min(1, MSE/eps^2) and the sub-Gaussian bound is 2 exp(-(eps-|b|)_+^2 / (2 s2)).
/// With inverse-variance weights these reduce to min(1, 1/(eps^2 sum theta))
/// and 2 exp(-eps^2 sum theta / 2).
inline SimulationReport run_fusion_trials(const SimulationConfig& cfg, unsigned threads = 0) {
  detail::validate(cfg);
  const std::size_t n_units = cfg.theta.size();
  const std::size_t n_eps = cfg.epsilons.size();
  const std::uint64_t n_chunks = (cfg.trials + detail::kChunkTrials - 1) / detail::kChunkTrials;

  std::vector<detail::ChunkTotals> chunks(n_chunks);
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (std::uint64_t c = next.fetch_add(1); c < n_chunks; c = next.fetch_add(1)) {
      detail::ChunkTotals totals;
      totals.exceed.assign(n_eps, 0);
      const std::uint64_t begin = c * detail::kChunkTrials;
      const std::uint64_t end = std::min(cfg.trials, begin + detail::kChunkTrials);
      for (std::uint64_t t = begin; t < end; ++t) {
        double y_hat = 0.0;
        for (std::size_t i = 0; i < n_units; ++i) {
          y_hat += cfg.weights[i] * (cfg.y_value + draw_perturbation(cfg.kind, cfg.theta[i], cfg.seed, t, i));
        }
        const double err = y_hat - cfg.y_value;
        const double sq = err * err;
        totals.sq.add(sq);
        totals.fourth.add(sq * sq);
        for (std::size_t e = 0; e < n_eps; ++e) {
          if (std::abs(err) >= cfg.epsilons[e]) ++totals.exceed[e];
        }
      }
      chunks[c] = std::move(totals);
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, n_chunks));
  {
    std::vector<std::jthread> pool;
    for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
  }

  detail::CompensatedSum sq, fourth;
  std::vector<std::uint64_t> exceed(n_eps, 0);
  for (const auto& c : chunks) {
    sq.add(c.sq.value());
    fourth.add(c.fourth.value());
    for (std::size_t e = 0; e < n_eps; ++e) exceed[e] += c.exceed[e];
  }

  const double n = static_cast<double>(cfg.trials);
  const double mean_sq = sq.value() / n;
  double var_sq = 0.0;
  if (cfg.trials > 1) var_sq = std::max(0.0, (fourth.value() - n * mean_sq * mean_sq) / (n - 1.0));

  const FidelityVector theta(cfg.theta);
  const double analytic = general_mse(cfg.weights, theta, cfg.y_value * cfg.y_value);
  double noise_var = 0.0, sum_w = 0.0;
  for (std::size_t i = 0; i < n_units; ++i) {
    noise_var += cfg.weights[i] * cfg.weights[i] / cfg.theta[i];
    sum_w += cfg.weights[i];
  }
  const double bias = std::abs((sum_w - 1.0) * cfg.y_value);

  SimulationReport report{
      .empirical_mse = mean_sq,
      .mse_std_err = std::sqrt(var_sq / n),
      .analytic_mse = analytic,
      .tail_estimates = {},
      .trials = cfg.trials,
      .seed = cfg.seed,
  };
  for (std::size_t e = 0; e < n_eps; ++e) {
    const double eps = cfg.epsilons[e];
    const double p = static_cast<double>(exceed[e]) / n;
    const double slack = std::max(0.0, eps - bias);
    report.tail_estimates.push_back(TailEstimate{
        .epsilon = eps,
        .empirical_prob = p,
        .binomial_std_err = std::sqrt(p * (1.0 - p) / n),
        .chebyshev_bound = std::min(1.0, analytic / (eps * eps)),
        .subgaussian_bound = noise_var > 0.0 ? 2.0 * std::exp(-slack * slack / (2.0 * noise_var)) : (slack > 0.0 ? 0.0 : 2.0),
    });
  }
  return report;
}

/// Tail estimates only; `epsilons` replaces whatever cfg carries.
inline std::vector<TailEstimate> estimate_tail(SimulationConfig cfg, std::span<const double> epsilons,
                                               unsigned threads = 0) {
  if (epsilons.empty()) throw DomainError("at least one tail threshold epsilon is required");
  cfg.epsilons.assign(epsilons.begin(), epsilons.end());
  return run_fusion_trials(cfg, threads).tail_estimates;
}

}  // namespace fusioncost
