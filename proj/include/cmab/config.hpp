#ifndef CMAB_CONFIG_HPP
#define CMAB_CONFIG_HPP

// Flat JSON experiment/instance documents.
//
//   {"env": "dist1"}                       built-in environment, or inline:
//   {"arms": [{"support": [...], "probs": [...]},
//             {"breakpoints": [...], "densities": [...]}],
//    "family": {"kind": "cardinality", "K": 3} | {"kind": "explicit", "sets": [[0,1],[2]]},
//    "reward": {"kind": "kmax"} | {"kind": "linear_sum", "M": 3}
//            | {"kind": "utility", "utility": "square" | {"xs": [...], "ys": [...]},
//               "M": 9, "C": 6},
//    "policy": "sdcb", "oracle": "greedy", "epsilon": 0.25, "T": 10000,
//    "runs": 20, "seed": 42, "alpha": 1.0, "out": "trace.csv",
//    "per_run_out": "runs.csv", "threads": 1, "global_epoch_round": false,
//    "realized": false}
//
// A bare "K" is shorthand for a cardinality family. Built-in env names take
// precedence over inline arms.

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cmab/distribution.hpp"
#include "cmab/error.hpp"
#include "cmab/harness.hpp"
#include "cmab/oracle.hpp"
#include "cmab/reward.hpp"
#include "cmab/solver.hpp"

namespace cmab {

using Json = nlohmann::json;

inline Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

namespace detail {

template <typename T>
T json_get(const Json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

template <typename T>
T json_get_or(const Json& j, const char* key, T fallback) {
  return j.contains(key) ? json_get<T>(j, key) : fallback;
}

template <typename F>
auto rethrow_as_config(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace detail

inline ArmDistribution arm_from_json(const Json& j) {
  return detail::rethrow_as_config([&]() -> ArmDistribution {
    if (j.contains("support")) {
      const auto support = detail::json_get<std::vector<double>>(j, "support");
      const auto probs = detail::json_get<std::vector<double>>(j, "probs");
      return make_finite(support, probs);
    }
    if (j.contains("breakpoints")) {
      return PiecewiseDensity::make(detail::json_get<std::vector<double>>(j, "breakpoints"),
                                    detail::json_get<std::vector<double>>(j, "densities"));
    }
    throw ConfigError("arm needs 'support'/'probs' or 'breakpoints'/'densities'");
  });
}

inline FeasibleFamily family_from_json(const Json& doc, std::size_t m) {
  return detail::rethrow_as_config([&] {
    if (doc.contains("family")) {
      const Json& f = doc.at("family");
      const auto kind = detail::json_get<std::string>(f, "kind");
      if (kind == "cardinality") return FeasibleFamily::cardinality(detail::json_get<std::size_t>(f, "K"), m);
      if (kind == "explicit") {
        std::vector<SuperArm> sets;
        for (const auto& members : detail::json_get<std::vector<std::vector<ArmId>>>(f, "sets")) {
          sets.emplace_back(members);
        }
        return FeasibleFamily::explicit_list(std::move(sets), m);
      }
      throw ConfigError("unknown family kind '" + kind + "'");
    }
    return FeasibleFamily::cardinality(detail::json_get<std::size_t>(doc, "K"), m);
  });
}

inline RewardSpec reward_from_json(const Json& doc, std::size_t max_set_size) {
  if (!doc.contains("reward")) return RewardSpec::kmax();
  return detail::rethrow_as_config([&] {
    const Json& r = doc.at("reward");
    const auto kind = detail::json_get<std::string>(r, "kind");
    if (kind == "kmax") return RewardSpec::kmax();
    if (kind == "linear_sum") {
      return RewardSpec::linear_sum(
          detail::json_get_or<double>(r, "M", static_cast<double>(max_set_size)),
          detail::json_get_or<double>(r, "C", 1.0));
    }
    if (kind == "utility") {
      const Json& u = r.at("utility");
      Utility utility = u.is_string()
                            ? Utility::from_name(u.get<std::string>())
                            : Utility::tabulated(detail::json_get<std::vector<double>>(u, "xs"),
                                                 detail::json_get<std::vector<double>>(u, "ys"));
      return RewardSpec::utility_of_sum(std::move(utility), detail::json_get<double>(r, "M"),
                                        detail::json_get<double>(r, "C"),
                                        static_cast<double>(max_set_size));
    }
    throw ConfigError("unknown reward kind '" + kind + "'");
  });
}

inline Environment environment_from_json(const Json& doc) {
  if (doc.contains("env") && !doc.at("env").is_null()) {
    return builtin_env(detail::json_get<std::string>(doc, "env"));
  }
  if (!doc.contains("arms")) throw ConfigError("config needs 'env' or inline 'arms'");
  std::vector<ArmDistribution> arms;
  for (const auto& a : doc.at("arms")) arms.push_back(arm_from_json(a));
  FeasibleFamily family = family_from_json(doc, arms.size());
  RewardSpec spec = reward_from_json(doc, family.max_size());
  return Environment::make(std::move(arms), std::move(family), std::move(spec), "inline");
}

/// Offline instance: finite arms plus a family and an optional reward.
struct OfflineInstance {
  std::vector<FiniteDistribution> arms;
  FeasibleFamily family;
  RewardSpec spec;
};

inline OfflineInstance offline_instance_from_json(const Json& doc) {
  if (!doc.contains("arms")) throw ConfigError("instance needs 'arms'");
  std::vector<FiniteDistribution> arms;
  for (const auto& a : doc.at("arms")) {
    auto arm = arm_from_json(a);
    if (!std::holds_alternative<FiniteDistribution>(arm)) {
      throw ConfigError("offline instances need finite arms");
    }
    arms.push_back(std::get<FiniteDistribution>(std::move(arm)));
  }
  FeasibleFamily family = family_from_json(doc, arms.size());
  RewardSpec spec = reward_from_json(doc, family.max_size());
  return {std::move(arms), std::move(family), std::move(spec)};
}

struct RunConfig {
  Json environment = Json::object();
  std::string policy = "sdcb";
  std::string oracle = "greedy";
  double epsilon = 0.25;
  std::uint64_t horizon = 10000;
  std::size_t runs = 20;
  std::uint64_t seed = 42;
  std::optional<double> alpha;
  std::string out = "trace.csv";
  std::optional<std::string> per_run_out;
  std::size_t threads = 1;
  bool global_epoch_round = false;
  bool realized = false;
};

inline RunConfig run_config_from_json(const Json& doc) {
  RunConfig cfg;
  for (const char* key : {"env", "arms", "family", "K", "reward"}) {
    if (doc.contains(key)) cfg.environment[key] = doc.at(key);
  }
  cfg.policy = detail::json_get_or<std::string>(doc, "policy", cfg.policy);
  cfg.oracle = detail::json_get_or<std::string>(doc, "oracle", cfg.oracle);
  cfg.epsilon = detail::json_get_or<double>(doc, "epsilon", cfg.epsilon);
  cfg.horizon = detail::json_get_or<std::uint64_t>(doc, "T", cfg.horizon);
  cfg.runs = detail::json_get_or<std::size_t>(doc, "runs", cfg.runs);
  cfg.seed = detail::json_get_or<std::uint64_t>(doc, "seed", cfg.seed);
  if (doc.contains("alpha")) cfg.alpha = detail::json_get<double>(doc, "alpha");
  cfg.out = detail::json_get_or<std::string>(doc, "out", cfg.out);
  if (doc.contains("per_run_out")) cfg.per_run_out = detail::json_get<std::string>(doc, "per_run_out");
  cfg.threads = detail::json_get_or<std::size_t>(doc, "threads", cfg.threads);
  cfg.global_epoch_round = detail::json_get_or<bool>(doc, "global_epoch_round", false);
  cfg.realized = detail::json_get_or<bool>(doc, "realized", false);
  return cfg;
}

struct ExperimentResult {
  BatchResult batch;
  double alpha = 1.0;
  ScoredSet optimum;
};

/// Builds the environment and policy from `cfg`, runs the batch and writes
/// the CSV file(s).
inline ExperimentResult run_experiment(const RunConfig& cfg) {
  if (cfg.horizon == 0) throw ConfigError("T must be positive");
  if (cfg.runs == 0) throw ConfigError("runs must be positive");
  const Environment env = environment_from_json(cfg.environment);
  PolicyConfig pc;
  pc.kind = parse_policy_kind(cfg.policy);
  pc.oracle = parse_oracle_kind(cfg.oracle);
  pc.epsilon = cfg.epsilon;
  pc.horizon = cfg.horizon;
  pc.global_epoch_round = cfg.global_epoch_round;
  const PolicyFactory factory = detail::rethrow_as_config([&] { return make_policy_factory(env, pc); });
  RunOptions options;
  options.alpha = alpha_for(pc.oracle, cfg.alpha);
  options.realized = cfg.realized;
  options.oracle_name = pc.kind == PolicyKind::Osm ? "none" : cfg.oracle;
  ExperimentResult result;
  result.batch = run_many(env, factory, cfg.horizon, cfg.runs, cfg.seed, options, cfg.threads);
  result.alpha = options.alpha;
  result.optimum = env.optimum();
  write_csv(result.batch.average, cfg.out);
  if (cfg.per_run_out) write_csv(result.batch.runs, *cfg.per_run_out);
  return result;
}

}  // namespace cmab

#endif  // CMAB_CONFIG_HPP
