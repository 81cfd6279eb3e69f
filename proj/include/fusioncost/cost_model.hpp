#pragma once

// Cost-fidelity laws C(theta) = c_min + G(theta) for a single unit, and the
// fusion cost D(N) of linearly combining N outcomes.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "fusioncost/errors.hpp"

namespace fusioncost {

namespace detail {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidSpec(std::string(what) + " must be a finite positive number");
  }
}

inline void require_nonnegative(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw InvalidSpec(std::string(what) + " must be a finite nonnegative number");
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Incremental cost forms G(theta), all with G(0+) = 0 and strictly increasing.

/// G(theta) = alpha * (exp(beta * theta) - 1). Convex.
struct Exponential {
  double alpha;
  double beta;
};

/// G(theta) = alpha * theta^p. Convex for p >= 1, concave for p <= 1.
struct Power {
  double alpha;
  double p;
};

/// G(theta) = alpha * theta.
struct Linear {
  double alpha;
};

/// G(theta) = alpha * ln(1 + beta * theta). Concave.
struct LogConcave {
  double alpha;
  double beta;
};

struct Knot {
  double theta;
  double value;
};

/// Monotone piecewise-linear curve through user-supplied knots. The first knot
/// is (0, 0); evaluation past the last knot is an error.
struct Tabulated {
  std::vector<Knot> knots;
};

using IncrementalCostForm = std::variant<Exponential, Power, Linear, LogConcave, Tabulated>;

enum class Curvature { Convex, Linear, Concave, Indeterminate };

inline const char* to_string(Curvature c) {
  switch (c) {
    case Curvature::Convex: return "convex";
    case Curvature::Linear: return "linear";
    case Curvature::Concave: return "concave";
    case Curvature::Indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

/// A unit's cost law: baseline c_min plus the incremental form G.
class CostSpec {
 public:
  CostSpec(double c_min, IncrementalCostForm incremental)
      : c_min_(c_min), incremental_(std::move(incremental)) {
    detail::require_nonnegative(c_min_, "c_min");
    validate(incremental_);
  }

  double c_min() const noexcept { return c_min_; }
  const IncrementalCostForm& incremental() const noexcept { return incremental_; }

  /// True for the closed forms; tabulated curves only expose a numeric slope.
  bool has_analytic_derivatives() const noexcept {
    return !std::holds_alternative<Tabulated>(incremental_);
  }

 private:
  static void validate(const IncrementalCostForm& form) {
    std::visit(detail::overloaded{
                   [](const Exponential& f) {
                     detail::require_positive(f.alpha, "exponential.alpha");
                     detail::require_positive(f.beta, "exponential.beta");
                   },
                   [](const Power& f) {
                     detail::require_positive(f.alpha, "power.alpha");
                     detail::require_positive(f.p, "power.p");
                   },
                   [](const Linear& f) { detail::require_positive(f.alpha, "linear.alpha"); },
                   [](const LogConcave& f) {
                     detail::require_positive(f.alpha, "log_concave.alpha");
                     detail::require_positive(f.beta, "log_concave.beta");
                   },
                   [](const Tabulated& f) {
                     const auto& k = f.knots;
                     if (k.size() < 2) throw InvalidSpec("tabulated curve needs at least two knots");
                     if (k.front().theta != 0.0 || k.front().value != 0.0) {
                       throw InvalidSpec("tabulated curve must start at (0, 0)");
                     }
                     for (std::size_t i = 1; i < k.size(); ++i) {
                       if (!std::isfinite(k[i].theta) || !std::isfinite(k[i].value) ||
                           !(k[i].theta > k[i - 1].theta) || !(k[i].value > k[i - 1].value)) {
                         throw InvalidSpec("tabulated knots must be strictly increasing in both coordinates");
                       }
                     }
                   },
               },
               form);
  }

  double c_min_;
  IncrementalCostForm incremental_;
};

// ---------------------------------------------------------------------------
// Fusion cost forms D(N), with a convex continuous relaxation on [1, inf).

/// D(N) = gamma * (N - 1).
struct LinearMinusOne {
  double gamma;
};

/// D(N) = sum_j c_j (N - 1)^j, j = 1..d. coeffs[0] is c_1.
struct Polynomial {
  std::vector<double> coeffs;
};

/// D(N) = d0 + d1 * N.
struct Affine {
  double d0;
  double d1;
};

using FusionCostForm = std::variant<LinearMinusOne, Polynomial, Affine>;

class FusionCostSpec {
 public:
  explicit FusionCostSpec(FusionCostForm form) : form_(std::move(form)) { validate(form_); }

  const FusionCostForm& form() const noexcept { return form_; }

 private:
  static void validate(const FusionCostForm& form) {
    std::visit(detail::overloaded{
                   [](const LinearMinusOne& f) { detail::require_nonnegative(f.gamma, "linear_minus_one.gamma"); },
                   [](const Polynomial& f) {
                     if (f.coeffs.empty()) throw InvalidSpec("polynomial fusion cost needs at least one coefficient");
                     bool any_positive = false;
                     for (double c : f.coeffs) {
                       detail::require_nonnegative(c, "polynomial.coeffs");
                       any_positive = any_positive || c > 0.0;
                     }
                     if (!any_positive) throw InvalidSpec("polynomial fusion cost needs a positive coefficient");
                   },
                   [](const Affine& f) {
                     detail::require_nonnegative(f.d0, "affine.d0");
                     detail::require_positive(f.d1, "affine.d1");
                   },
               },
               form);
  }

  FusionCostForm form_;
};

// ---------------------------------------------------------------------------
// Evaluation

namespace detail {

inline void require_theta(double theta) {
  if (!(theta > 0.0) || std::isnan(theta)) {
    throw DomainError("fidelity must be positive, got " + std::to_string(theta));
  }
}

inline double tabulated_value(const Tabulated& t, double theta) {
  const auto& k = t.knots;
  if (theta > k.back().theta) {
    throw ExtrapolationError("fidelity " + std::to_string(theta) + " lies beyond the last tabulated knot " +
                             std::to_string(k.back().theta));
  }
  auto it = std::upper_bound(k.begin(), k.end(), theta, [](double x, const Knot& kn) { return x < kn.theta; });
  if (it == k.end()) return k.back().value;
  const Knot& hi = *it;
  const Knot& lo = *(it - 1);
  const double frac = (theta - lo.theta) / (hi.theta - lo.theta);
  return lo.value + frac * (hi.value - lo.value);
}

}  // namespace detail

/// Incremental cost G(theta), theta > 0.
inline double eval_incremental(const CostSpec& spec, double theta) {
  detail::require_theta(theta);
  return std::visit(detail::overloaded{
                        [&](const Exponential& f) { return f.alpha * std::expm1(f.beta * theta); },
                        [&](const Power& f) { return f.alpha * std::pow(theta, f.p); },
                        [&](const Linear& f) { return f.alpha * theta; },
                        [&](const LogConcave& f) { return f.alpha * std::log1p(f.beta * theta); },
                        [&](const Tabulated& f) { return detail::tabulated_value(f, theta); },
                    },
                    spec.incremental());
}

/// C(theta) = c_min + G(theta).
inline double eval_cost(const CostSpec& spec, double theta) {
  return spec.c_min() + eval_incremental(spec, theta);
}

/// First or second derivative of G. Closed forms are analytic; tabulated
/// curves get a central difference for order 1 and refuse order 2.
inline double eval_incremental_deriv(const CostSpec& spec, double theta, int order) {
  detail::require_theta(theta);
  if (order != 1 && order != 2) throw DomainError("derivative order must be 1 or 2");
  const bool first = order == 1;
  return std::visit(
      detail::overloaded{
          [&](const Exponential& f) {
            const double e = std::exp(f.beta * theta);
            return first ? f.alpha * f.beta * e : f.alpha * f.beta * f.beta * e;
          },
          [&](const Power& f) {
            if (first) return f.alpha * f.p * std::pow(theta, f.p - 1.0);
            if (f.p == 1.0) return 0.0;
            return f.alpha * f.p * (f.p - 1.0) * std::pow(theta, f.p - 2.0);
          },
          [&](const Linear& f) { return first ? f.alpha : 0.0; },
          [&](const LogConcave& f) {
            const double s = 1.0 + f.beta * theta;
            return first ? f.alpha * f.beta / s : -f.alpha * f.beta * f.beta / (s * s);
          },
          [&](const Tabulated& f) -> double {
            if (!first) throw UnsupportedRegime("second derivative is not available for tabulated curves");
            if (theta > f.knots.back().theta) {
              throw ExtrapolationError("fidelity " + std::to_string(theta) + " lies beyond the last tabulated knot");
            }
            const double h = std::max(1e-6, 1e-6 * theta);
            const double lo = std::max(theta - h, 0.0);
            const double hi = std::min(theta + h, f.knots.back().theta);
            const double g_lo = lo > 0.0 ? detail::tabulated_value(f, lo) : 0.0;
            return (detail::tabulated_value(f, hi) - g_lo) / (hi - lo);
          },
      },
      spec.incremental());
}

namespace detail {

inline void require_relaxed_count(double a) {
  if (!(a >= 1.0) || std::isnan(a)) throw DomainError("fusion unit count must be >= 1, got " + std::to_string(a));
}

}  // namespace detail

/// Continuous relaxation D(a), a >= 1. Equals D(N) at integers.
inline double eval_fusion_cost(const FusionCostSpec& spec, double a) {
  detail::require_relaxed_count(a);
  return std::visit(detail::overloaded{
                        [&](const LinearMinusOne& f) { return f.gamma * (a - 1.0); },
                        [&](const Polynomial& f) {
                          // Horner in (a - 1), constant term zero.
                          const double x = a - 1.0;
                          double acc = 0.0;
                          for (auto it = f.coeffs.rbegin(); it != f.coeffs.rend(); ++it) acc = (acc + *it) * x;
                          return acc;
                        },
                        [&](const Affine& f) { return f.d0 + f.d1 * a; },
                    },
                    spec.form());
}

inline double eval_fusion_deriv(const FusionCostSpec& spec, double a, int order) {
  detail::require_relaxed_count(a);
  if (order != 1 && order != 2) throw DomainError("derivative order must be 1 or 2");
  const bool first = order == 1;
  return std::visit(detail::overloaded{
                        [&](const LinearMinusOne& f) { return first ? f.gamma : 0.0; },
                        [&](const Polynomial& f) {
                          const double x = a - 1.0;
                          double acc = 0.0;
                          for (std::size_t i = 0; i < f.coeffs.size(); ++i) {
                            const double j = static_cast<double>(i + 1);
                            if (first) {
                              acc += j * f.coeffs[i] * std::pow(x, j - 1.0);
                            } else if (i >= 1) {
                              acc += j * (j - 1.0) * f.coeffs[i] * std::pow(x, j - 2.0);
                            }
                          }
                          return acc;
                        },
                        [&](const Affine& f) { return first ? f.d1 : 0.0; },
                    },
                    spec.form());
}

// ---------------------------------------------------------------------------
// Curvature

inline constexpr std::size_t kCurvatureGridPoints = 64;

/// Probe interval used when the caller has no preference: a fixed window for
/// closed forms, the knot span for tabulated curves.
inline std::pair<double, double> default_probe_range(const CostSpec& spec) {
  if (const auto* t = std::get_if<Tabulated>(&spec.incremental())) {
    return {t->knots[1].theta / 2.0, t->knots.back().theta};
  }
  return {1e-2, 1e2};
}

/// Classifies G by the sign of its second derivative on a geometric grid.
/// Analytic G'' for closed forms, second divided differences for tabulated.
inline Curvature classify_curvature(const CostSpec& spec, double theta_lo, double theta_hi) {
  detail::require_theta(theta_lo);
  if (!(theta_hi > theta_lo)) throw DomainError("probe range must satisfy 0 < lo < hi");

  constexpr std::size_t n = kCurvatureGridPoints;
  std::vector<double> grid(n);
  const double ratio = std::log(theta_hi / theta_lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) grid[i] = theta_lo * std::exp(ratio * static_cast<double>(i));
  grid.back() = theta_hi;

  std::vector<double> g(n);
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = eval_incremental(spec, grid[i]);
    if (std::isfinite(g[i])) scale = std::max(scale, std::abs(g[i]));
  }

  std::vector<double> curv;
  if (spec.has_analytic_derivatives()) {
    curv.reserve(n);
    for (double t : grid) curv.push_back(eval_incremental_deriv(spec, t, 2));
  } else {
    curv.reserve(n - 2);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double left = (g[i] - g[i - 1]) / (grid[i] - grid[i - 1]);
      const double right = (g[i + 1] - g[i]) / (grid[i + 1] - grid[i]);
      curv.push_back(2.0 * (right - left) / (grid[i + 1] - grid[i - 1]));
    }
  }

  const double tol = 1e-9 * scale;
  bool all_nonneg = true, all_nonpos = true, all_flat = true;
  for (double c : curv) {
    if (std::isnan(c)) return Curvature::Indeterminate;
    all_nonneg = all_nonneg && c >= -tol;
    all_nonpos = all_nonpos && c <= tol;
    all_flat = all_flat && std::abs(c) <= tol;
  }
  if (all_flat) return Curvature::Linear;
  if (all_nonneg) return Curvature::Convex;
  if (all_nonpos) return Curvature::Concave;
  return Curvature::Indeterminate;
}

inline Curvature classify_curvature(const CostSpec& spec) {
  const auto [lo, hi] = default_probe_range(spec);
  return classify_curvature(spec, lo, hi);
}

}  // namespace fusioncost
