#pragma once

// JSON forms of the model and the result types. Parsing is strict: unknown
// fields, missing fields and wrong types all raise InvalidSpec.

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "fusioncost/cost_model.hpp"
#include "fusioncost/errors.hpp"
#include "fusioncost/planner.hpp"
#include "fusioncost/simulator.hpp"

namespace fusioncost {

using json = nlohmann::json;

struct ModelConfig {
  CostSpec cost;
  FusionCostSpec fusion;
};

namespace detail {

inline void require_object(const json& j, std::string_view where) {
  if (!j.is_object()) throw InvalidSpec(std::string(where) + ": expected a JSON object");
}

inline void check_fields(const json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
  require_object(j, where);
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw InvalidSpec(std::string(where) + ": unknown field \"" + key + "\"");
  }
}

inline const json& field(const json& j, std::string_view where, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) throw InvalidSpec(std::string(where) + ": missing field \"" + name + "\"");
  return *it;
}

inline double number(const json& j, std::string_view where, const char* name) {
  const json& v = field(j, where, name);
  if (!v.is_number()) throw InvalidSpec(std::string(where) + "." + name + ": expected a number");
  return v.get<double>();
}

inline std::vector<double> number_list(const json& v, std::string_view where) {
  if (!v.is_array()) throw InvalidSpec(std::string(where) + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw InvalidSpec(std::string(where) + ": expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

inline std::string kind_of(const json& j, std::string_view where) {
  const json& k = field(j, where, "kind");
  if (!k.is_string()) throw InvalidSpec(std::string(where) + ".kind: expected a string");
  return k.get<std::string>();
}

}  // namespace detail

inline IncrementalCostForm parse_incremental(const json& j) {
  constexpr std::string_view where = "cost.incremental";
  detail::require_object(j, where);
  const std::string kind = detail::kind_of(j, where);
  if (kind == "exponential") {
    detail::check_fields(j, where, {"kind", "alpha", "beta"});
    return Exponential{detail::number(j, where, "alpha"), detail::number(j, where, "beta")};
  }
  if (kind == "power") {
    detail::check_fields(j, where, {"kind", "alpha", "p"});
    return Power{detail::number(j, where, "alpha"), detail::number(j, where, "p")};
  }
  if (kind == "linear") {
    detail::check_fields(j, where, {"kind", "alpha"});
    return Linear{detail::number(j, where, "alpha")};
  }
  if (kind == "log_concave") {
    detail::check_fields(j, where, {"kind", "alpha", "beta"});
    return LogConcave{detail::number(j, where, "alpha"), detail::number(j, where, "beta")};
  }
  if (kind == "tabulated") {
    detail::check_fields(j, where, {"kind", "knots"});
    const json& knots = detail::field(j, where, "knots");
    if (!knots.is_array()) throw InvalidSpec("cost.incremental.knots: expected an array of [theta, G] pairs");
    Tabulated t;
    for (const auto& k : knots) {
      const auto pair = detail::number_list(k, "cost.incremental.knots[]");
      if (pair.size() != 2) throw InvalidSpec("cost.incremental.knots: each knot is a [theta, G] pair");
      t.knots.push_back({pair[0], pair[1]});
    }
    return t;
  }
  throw InvalidSpec("cost.incremental.kind: unknown kind \"" + kind + "\"");
}

inline CostSpec parse_cost_spec(const json& j) {
  detail::check_fields(j, "cost", {"c_min", "incremental"});
  return CostSpec(detail::number(j, "cost", "c_min"), parse_incremental(detail::field(j, "cost", "incremental")));
}

inline FusionCostSpec parse_fusion_spec(const json& j) {
  constexpr std::string_view where = "fusion";
  detail::require_object(j, where);
  const std::string kind = detail::kind_of(j, where);
  if (kind == "linear_minus_one") {
    detail::check_fields(j, where, {"kind", "gamma"});
    return FusionCostSpec(LinearMinusOne{detail::number(j, where, "gamma")});
  }
  if (kind == "polynomial") {
    detail::check_fields(j, where, {"kind", "coeffs"});
    return FusionCostSpec(Polynomial{detail::number_list(detail::field(j, where, "coeffs"), "fusion.coeffs")});
  }
  if (kind == "affine") {
    detail::check_fields(j, where, {"kind", "d0", "d1"});
    return FusionCostSpec(Affine{detail::number(j, where, "d0"), detail::number(j, where, "d1")});
  }
  throw InvalidSpec("fusion.kind: unknown kind \"" + kind + "\"");
}

inline ModelConfig parse_model_config(const json& j) {
  detail::check_fields(j, "config", {"cost", "fusion"});
  return ModelConfig{parse_cost_spec(detail::field(j, "config", "cost")),
                     parse_fusion_spec(detail::field(j, "config", "fusion"))};
}

inline json to_json(const CostSpec& spec) {
  json g = std::visit(detail::overloaded{
                          [](const Exponential& f) { return json{{"kind", "exponential"}, {"alpha", f.alpha}, {"beta", f.beta}}; },
                          [](const Power& f) { return json{{"kind", "power"}, {"alpha", f.alpha}, {"p", f.p}}; },
                          [](const Linear& f) { return json{{"kind", "linear"}, {"alpha", f.alpha}}; },
                          [](const LogConcave& f) { return json{{"kind", "log_concave"}, {"alpha", f.alpha}, {"beta", f.beta}}; },
                          [](const Tabulated& f) {
                            json knots = json::array();
                            for (const auto& k : f.knots) knots.push_back({k.theta, k.value});
                            return json{{"kind", "tabulated"}, {"knots", knots}};
                          },
                      },
                      spec.incremental());
  return json{{"c_min", spec.c_min()}, {"incremental", std::move(g)}};
}

inline json to_json(const FusionCostSpec& spec) {
  return std::visit(detail::overloaded{
                        [](const LinearMinusOne& f) { return json{{"kind", "linear_minus_one"}, {"gamma", f.gamma}}; },
                        [](const Polynomial& f) { return json{{"kind", "polynomial"}, {"coeffs", f.coeffs}}; },
                        [](const Affine& f) { return json{{"kind", "affine"}, {"d0", f.d0}, {"d1", f.d1}}; },
                    },
                    spec.form());
}

inline json to_json(const ModelConfig& m) { return json{{"cost", to_json(m.cost)}, {"fusion", to_json(m.fusion)}}; }

inline json to_json(const StrategyPlan& p) {
  json regime_detail = json::object();
  std::visit(detail::overloaded{
                 [&](const ConvexThresholded& r) {
                   regime_detail["threshold_tau"] = r.threshold ? json(*r.threshold) : json("unbounded");
                 },
                 [&](const ConvexAlwaysSingle& r) { regime_detail["limit_l"] = r.limit; },
                 [](const auto&) {},
             },
             p.regime);
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return json{
      {"tau", p.tau},
      {"n_o", p.n_o},
      {"per_unit_fidelity", p.per_unit_fidelity},
      {"weights", p.weights},
      {"total_cost", p.total_cost},
      {"achieved_mse", p.achieved_mse},
      {"regime", regime_name(p.regime)},
      {"regime_detail", std::move(regime_detail)},
      {"diagnostics", {{"a_o", p.diagnostics.a_o}, {"v_tau", opt(p.diagnostics.v_tau)}, {"kappa_at_1", opt(p.diagnostics.kappa_at_1)}}},
  };
}

inline PerturbationKind parse_perturbation_kind(const std::string& s) {
  if (s == "gaussian") return PerturbationKind::Gaussian;
  if (s == "uniform") return PerturbationKind::Uniform;
  if (s == "rademacher") return PerturbationKind::Rademacher;
  throw InvalidSpec("simulation.kind: unknown perturbation kind \"" + s + "\"");
}

/// Simulation config. "weights" may be omitted, in which case the
/// inverse-variance weights of "theta" are used.
inline SimulationConfig parse_simulation_config(const json& j) {
  constexpr std::string_view where = "simulation";
  detail::check_fields(j, where, {"kind", "theta", "weights", "y_value", "trials", "seed", "epsilons"});
  SimulationConfig cfg;
  cfg.kind = parse_perturbation_kind(detail::kind_of(j, where));
  cfg.theta = detail::number_list(detail::field(j, where, "theta"), "simulation.theta");
  if (j.contains("weights")) {
    cfg.weights = detail::number_list(j["weights"], "simulation.weights");
  } else {
    cfg.weights = optimal_weights(FidelityVector(cfg.theta)).weights;
  }
  if (j.contains("y_value")) cfg.y_value = detail::number(j, where, "y_value");
  auto count = [&](const char* name) {
    const json& v = j[name];
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
      throw InvalidSpec(std::string("simulation.") + name + ": expected a nonnegative integer");
    }
    return v.get<std::uint64_t>();
  };
  if (j.contains("trials")) cfg.trials = count("trials");
  if (j.contains("seed")) cfg.seed = count("seed");
  if (j.contains("epsilons")) cfg.epsilons = detail::number_list(j["epsilons"], "simulation.epsilons");
  return cfg;
}

inline json to_json(const SimulationConfig& cfg) {
  return json{{"kind", to_string(cfg.kind)}, {"theta", cfg.theta},   {"weights", cfg.weights},
              {"y_value", cfg.y_value},      {"trials", cfg.trials}, {"seed", cfg.seed},
              {"epsilons", cfg.epsilons}};
}

inline json to_json(const SimulationReport& r) {
  json tails = json::array();
  for (const auto& t : r.tail_estimates) {
    tails.push_back({{"epsilon", t.epsilon},
                     {"empirical_prob", t.empirical_prob},
                     {"binomial_std_err", t.binomial_std_err},
                     {"chebyshev_bound", t.chebyshev_bound},
                     {"subgaussian_bound", t.subgaussian_bound}});
  }
  return json{{"empirical_mse", r.empirical_mse}, {"mse_std_err", r.mse_std_err}, {"analytic_mse", r.analytic_mse},
              {"tail_estimates", std::move(tails)}, {"trials", r.trials},          {"seed", r.seed}};
}

}  // namespace fusioncost
