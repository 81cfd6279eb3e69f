#pragma once

// fusionplan: plan, sweep, threshold, simulate and verify subcommands.
//
// Exit codes: 0 success, 1 verification failure, 2 input error (flags,
// unreadable or malformed config), 3 domain error.

#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fusioncost/fusioncost.hpp"

namespace fusionplan {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kVerifyFailed = 1, kInputError = 2, kDomainError = 3 };

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<double> parse_number_list(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw InputError(std::string(flag) + ": not a number: \"" + item + "\"");
    }
    if (used != item.size()) throw InputError(std::string(flag) + ": not a number: \"" + item + "\"");
    out.push_back(v);
  }
  return out;
}

inline fusioncost::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path);
  try {
    return fusioncost::json::parse(in);
  } catch (const fusioncost::json::exception& e) {
    throw InputError("config " + path + " is not valid JSON: " + e.what());
  }
}

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

struct RunManifest {
  std::string command;
  std::string config_digest;
  std::uint64_t seed = 0;
  std::string tool_version = kToolVersion;
  std::vector<std::string> outputs;
};

inline fusioncost::json to_json(const RunManifest& m) {
  return {{"command", m.command},
          {"config_digest", m.config_digest},
          {"seed", m.seed},
          {"tool_version", m.tool_version},
          {"outputs", m.outputs}};
}

inline std::string manifest_path(const std::string& out_path) { return out_path + ".manifest.json"; }

// Writes `body` to --out (plus its manifest) or to stdout.
inline void emit(const std::string& body, const std::string& out_path, const std::string& command,
                 const fusioncost::json& resolved, std::uint64_t seed, std::ostream& out) {
  if (out_path.empty()) {
    out << body;
    return;
  }
  {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw InputError("cannot write output file " + out_path);
    f << body;
  }
  const RunManifest manifest{command, sha256_hex(resolved.dump()), seed, kToolVersion, {out_path}};
  std::ofstream m(manifest_path(out_path), std::ios::binary);
  if (!m) throw InputError("cannot write manifest " + manifest_path(out_path));
  m << to_json(manifest).dump(2) << '\n';
}

inline fusioncost::ModelConfig load_model(const std::string& path) {
  return fusioncost::parse_model_config(read_json_file(path));
}

// ---------------------------------------------------------------------------

struct Options {
  std::string config;
  std::string out;
  double tau = 0.0;
  std::string tau_list;
  bool tau_list_given = false;
  std::size_t n_max = 50;
  std::optional<std::uint64_t> trials;
  std::optional<std::uint64_t> seed;
  std::string epsilons;
};

inline int cmd_plan(const Options& o, std::ostream& out) {
  const auto model = load_model(o.config);
  const auto p = fusioncost::plan(model.cost, model.fusion, o.tau);
  fusioncost::json resolved = {{"command", "plan"}, {"model", to_json(model)}, {"tau", o.tau}};
  emit(to_json(p).dump(2) + "\n", o.out, "plan", resolved, 0, out);
  return kOk;
}

inline std::vector<double> require_tau_list(const Options& o) {
  if (!o.tau_list_given) throw InputError("--tau-list is required");
  auto taus = parse_number_list(o.tau_list, "--tau-list");
  if (taus.empty()) throw InputError("--tau-list is empty; nothing to do");
  return taus;
}

inline int cmd_sweep(const Options& o, std::ostream& out) {
  const auto model = load_model(o.config);
  const auto taus = require_tau_list(o);
  if (o.n_max < 1) throw InputError("--n-max must be at least 1");
  std::string csv = "tau,n,total_cost,is_argmin\n";
  for (double tau : taus) {
    std::vector<double> costs;
    std::size_t best = 1;
    for (std::size_t n = 1; n <= o.n_max; ++n) {
      costs.push_back(fusioncost::total_cost(model.cost, model.fusion, tau, n));
      if (costs.back() < costs[best - 1]) best = n;
    }
    for (std::size_t n = 1; n <= o.n_max; ++n) {
      csv += fmt17(tau) + "," + std::to_string(n) + "," + fmt17(costs[n - 1]) + "," + (n == best ? "true" : "false") +
             "\n";
    }
  }
  fusioncost::json resolved = {
      {"command", "sweep"}, {"model", to_json(model)}, {"taus", taus}, {"n_max", o.n_max}};
  emit(csv, o.out, "sweep", resolved, 0, out);
  return kOk;
}

inline int cmd_threshold(const Options& o, std::ostream& out) {
  using namespace fusioncost;
  const auto model = load_model(o.config);
  const auto taus = require_tau_list(o);
  const Regime regime = threshold_tau(model.cost, model.fusion);
  if (std::holds_alternative<LinearAlwaysSingle>(regime)) {
    throw UnsupportedRegime("linear cost: a single unit is always optimal (linear-cost single-unit result); no threshold exists");
  }
  if (std::holds_alternative<ConcaveAlwaysSingle>(regime)) {
    throw UnsupportedRegime("concave cost: a single unit is always optimal (concave-cost single-unit result); no threshold exists");
  }
  const double cut = model.cost.c_min() + eval_fusion_deriv(model.fusion, 1.0, 1);
  std::string csv = "tau,v_tau,cutoff,region\n";
  for (double tau : taus) {
    const double v = v_of_tau(model.cost, tau);
    csv += fmt17(tau) + "," + fmt17(v) + "," + fmt17(cut) + "," + (cut < v ? "fused" : "single") + "\n";
  }
  if (const auto* t = std::get_if<ConvexThresholded>(&regime)) {
    out << "threshold_tau=" << (t->threshold ? fmt17(*t->threshold) : std::string("unbounded")) << "\n";
  }
  fusioncost::json resolved = {{"command", "threshold"}, {"model", to_json(model)}, {"taus", taus}};
  emit(csv, o.out, "threshold", resolved, 0, out);
  return kOk;
}

inline int cmd_simulate(const Options& o, std::ostream& out) {
  auto cfg = fusioncost::parse_simulation_config(read_json_file(o.config));
  if (o.trials) cfg.trials = *o.trials;
  if (o.seed) cfg.seed = *o.seed;
  if (!o.epsilons.empty()) cfg.epsilons = parse_number_list(o.epsilons, "--epsilons");
  const auto report = fusioncost::run_fusion_trials(cfg);
  fusioncost::json resolved = {{"command", "simulate"}, {"simulation", to_json(cfg)}};
  emit(to_json(report).dump(2) + "\n", o.out, "simulate", resolved, cfg.seed, out);
  return kOk;
}

inline int cmd_verify(const Options& o, std::ostream& out) {
  const auto model = load_model(o.config);
  std::vector<double> taus = {2.0, 1.0, 0.5, 0.1, 0.05};
  if (o.tau_list_given) taus = require_tau_list(o);
  for (double t : taus) {
    if (!(t > 0.0)) throw fusioncost::DomainError("tau values must be positive");
  }
  const auto entries = fusioncost::run_verification_suite(model.cost, model.fusion, taus);
  for (const auto& e : entries) {
    if (!e.verdict) {
      out << "SKIP " << e.claim << " reason=\"" << e.skip_reason << "\"\n";
      continue;
    }
    const auto& v = *e.verdict;
    out << (v.passed ? "PASS " : "FAIL ") << e.claim << " analytic=" << fmt17(v.analytic_value)
        << " brute_force=" << fmt17(v.brute_force_value) << " max_abs_gap=" << fmt17(v.max_abs_gap) << "\n";
  }
  return fusioncost::suite_passed(entries) ? kOk : kVerifyFailed;
}

// ---------------------------------------------------------------------------

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Cost-optimal fusion planning for unreliable computational units", "fusionplan"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  Options o;

  auto add_config = [&](CLI::App* sub) { sub->add_option("--config", o.config, "Config JSON file")->required(); };
  auto add_out = [&](CLI::App* sub) { sub->add_option("--out", o.out, "Output file (default: stdout)"); };
  auto add_tau_list = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--tau-list", o.tau_list, "Comma-separated target MSE values");
    if (required) opt->required();
  };

  auto* plan = app.add_subcommand("plan", "Cost-optimal strategy for one target MSE");
  add_config(plan);
  plan->add_option("--tau", o.tau, "Target MSE")->required();
  add_out(plan);

  auto* sweep = app.add_subcommand("sweep", "Total cost table over N for each tau (CSV)");
  add_config(sweep);
  add_tau_list(sweep, false);
  sweep->add_option("--n-max", o.n_max, "Largest N to tabulate");
  add_out(sweep);

  auto* threshold = app.add_subcommand("threshold", "V(tau) against the fusion cutoff on a tau grid (CSV)");
  add_config(threshold);
  add_tau_list(threshold, false);
  add_out(threshold);

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo MSE and tail estimates (JSON)");
  add_config(simulate);
  simulate->add_option("--trials", o.trials, "Number of trials");
  simulate->add_option("--seed", o.seed, "RNG seed");
  simulate->add_option("--epsilons", o.epsilons, "Comma-separated tail thresholds");
  add_out(simulate);

  auto* verify = app.add_subcommand("verify", "Cross-check analytic results against brute-force oracles");
  add_config(verify);
  add_tau_list(verify, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::CallForVersion& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "fusionplan: error: " << e.what() << "\n";
    return kInputError;
  }
  o.tau_list_given = sweep->count("--tau-list") + threshold->count("--tau-list") + verify->count("--tau-list") > 0;

  try {
    if (*plan) return cmd_plan(o, out);
    if (*sweep) return cmd_sweep(o, out);
    if (*threshold) return cmd_threshold(o, out);
    if (*simulate) return cmd_simulate(o, out);
    if (*verify) return cmd_verify(o, out);
  } catch (const InputError& e) {
    err << "fusionplan: input error: " << e.what() << "\n";
    return kInputError;
  } catch (const fusioncost::InvalidSpec& e) {
    err << "fusionplan: input error: " << e.what() << "\n";
    return kInputError;
  } catch (const fusioncost::DomainError& e) {
    err << "fusionplan: domain error: " << e.what() << "\n";
    return kDomainError;
  } catch (const fusioncost::UnsupportedRegime& e) {
    err << "fusionplan: domain error: " << e.what() << "\n";
    return kDomainError;
  } catch (const fusioncost::DivergenceError& e) {
    err << "fusionplan: domain error: " << e.what() << "\n";
    return kDomainError;
  } catch (const std::exception& e) {
    err << "fusionplan: input error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

}  // namespace fusionplan
