// Command-line front end: online experiments, offline oracle calls and the
// list of built-in environments.
//
// Exit status: 0 success, 1 bad configuration, 2 runtime guard tripped.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "cmab/config.hpp"
#include "cmab/error.hpp"
#include "cmab/harness.hpp"
#include "cmab/oracle.hpp"
#include "cmab/ptas.hpp"
#include "cmab/reward.hpp"
#include "cmab/solver.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitGuard = 2;

struct RunFlags {
  std::string config;
  std::string env;
  std::string policy;
  std::string oracle;
  double epsilon = 0.25;
  std::uint64_t horizon = 0;
  std::size_t runs = 0;
  std::uint64_t seed = 0;
  double alpha = 1.0;
  std::string out;
  std::string per_run_out;
  std::size_t threads = 1;
  bool global_epoch_round = false;
  bool realized = false;
};

struct OfflineFlags {
  std::string instance;
  std::string solver = "greedy";
  double epsilon = 0.25;
};

template <typename T>
void override_if(const CLI::Option* opt, const T& value, T& target) {
  if (opt->count() > 0) target = value;
}

int do_run(const RunFlags& f, const CLI::App& sub) {
  cmab::RunConfig cfg;
  if (!f.config.empty()) cfg = cmab::run_config_from_json(cmab::load_json(f.config));
  if (sub.get_option("--env")->count() > 0) cfg.environment = cmab::Json{{"env", f.env}};
  override_if(sub.get_option("--policy"), f.policy, cfg.policy);
  override_if(sub.get_option("--oracle"), f.oracle, cfg.oracle);
  override_if(sub.get_option("--epsilon"), f.epsilon, cfg.epsilon);
  override_if(sub.get_option("--T"), f.horizon, cfg.horizon);
  override_if(sub.get_option("--runs"), f.runs, cfg.runs);
  override_if(sub.get_option("--seed"), f.seed, cfg.seed);
  override_if(sub.get_option("--out"), f.out, cfg.out);
  override_if(sub.get_option("--threads"), f.threads, cfg.threads);
  if (sub.get_option("--alpha")->count() > 0) cfg.alpha = f.alpha;
  if (sub.get_option("--per-run-out")->count() > 0) cfg.per_run_out = f.per_run_out;
  if (f.global_epoch_round) cfg.global_epoch_round = true;
  if (f.realized) cfg.realized = true;
  if (cfg.environment.empty()) throw cmab::ConfigError("no environment: pass --env or --config");

  const auto result = cmab::run_experiment(cfg);
  const auto& avg = result.batch.average;
  std::printf("policy: %s\n", avg.policy.c_str());
  std::printf("optimum: %s value %.12g\n", result.optimum.set.to_string().c_str(),
              result.optimum.value);
  std::printf("alpha: %.12g\n", result.alpha);
  std::printf("rounds: %zu runs: %zu\n", avg.rounds(), result.batch.runs.size());
  std::printf("final mean cum_regret: %.12g\n", avg.cum_regret.empty() ? 0.0 : avg.cum_regret.back());
  std::printf("wrote: %s\n", cfg.out.c_str());
  return 0;
}

int do_offline(const OfflineFlags& f) {
  const auto instance = cmab::offline_instance_from_json(cmab::load_json(f.instance));
  const cmab::OracleKind kind = cmab::parse_oracle_kind(f.solver);
  const cmab::Oracle checked(kind, instance.family, instance.spec, f.epsilon);
  if (kind == cmab::OracleKind::Ptas) {
    const auto r = cmab::ptas_kmax_detailed(instance.arms, instance.family.max_size(), f.epsilon);
    std::printf("set: %s\n", r.set.to_string().c_str());
    std::printf("value: %.12g\n", r.value);
    std::printf("greedy_value: %.12g\n", r.greedy_value);
    std::printf("candidates: %zu\n", r.candidates);
    return 0;
  }
  const cmab::SuperArm set = checked(instance.arms);
  std::printf("set: %s\n", set.to_string().c_str());
  std::printf("value: %.12g\n", cmab::expected_reward(instance.arms, set, instance.spec));
  return 0;
}

int do_envs() {
  for (const auto& name : cmab::builtin_env_names()) {
    std::printf("%s  %s\n", name.c_str(), cmab::builtin_env_description(name).c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Combinatorial bandit experiments with general reward functions"};
  app.require_subcommand(1);

  RunFlags run;
  auto* run_cmd = app.add_subcommand("run", "simulate a policy on an environment");
  run_cmd->add_option("--config", run.config, "JSON experiment file");
  run_cmd->add_option("--env", run.env, "built-in environment (see `envs`)");
  run_cmd->add_option("--policy", run.policy, "sdcb|lazy-sdcb|lazy-sdcb-doubling|cucb|osm");
  run_cmd->add_option("--oracle", run.oracle, "exhaustive|greedy|ptas");
  run_cmd->add_option("--epsilon", run.epsilon, "ptas accuracy");
  run_cmd->add_option("--T", run.horizon, "horizon");
  run_cmd->add_option("--runs", run.runs, "independent runs");
  run_cmd->add_option("--seed", run.seed, "base seed; run r uses seed + r");
  run_cmd->add_option("--alpha", run.alpha, "approximation factor in the regret");
  run_cmd->add_option("--out", run.out, "averaged trace CSV");
  run_cmd->add_option("--per-run-out", run.per_run_out, "per-run trace CSV");
  run_cmd->add_option("--threads", run.threads, "worker threads");
  run_cmd->add_flag("--global-epoch-round", run.global_epoch_round,
                    "doubling variant: use the global round in the radius");
  run_cmd->add_flag("--realized", run.realized, "score rounds by realized instead of expected reward");

  OfflineFlags offline;
  auto* offline_cmd = app.add_subcommand("offline", "solve one offline instance");
  offline_cmd->add_option("--instance", offline.instance, "JSON instance")->required();
  offline_cmd->add_option("--solver", offline.solver, "exhaustive|greedy|ptas");
  offline_cmd->add_option("--epsilon", offline.epsilon, "ptas accuracy");

  auto* envs_cmd = app.add_subcommand("envs", "list built-in environments");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (run_cmd->parsed()) return do_run(run, *run_cmd);
    if (offline_cmd->parsed()) return do_offline(offline);
    if (envs_cmd->parsed()) return do_envs();
  } catch (const cmab::GuardError& e) {
    std::cerr << "guard: " << e.what() << '\n';
    return kExitGuard;
  } catch (const cmab::ConfigError& e) {
    std::cerr << "config: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config: " << e.what() << '\n';
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "io: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitGuard;
  }
  return 0;
}
