#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "cmab/config.hpp"

using namespace cmab;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("cmab_cfg_" + name)).string();
}

std::string write_file(const std::string& name, const std::string& text) {
  const std::string path = temp_path(name);
  std::ofstream(path, std::ios::binary) << text;
  return path;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliResult {
  int code;
  std::string out;
};

CliResult run_cli(const std::string& args) {
  const std::string log = temp_path("cli.log");
  const std::string cmd = std::string(CMAB_CLI_PATH) + " " + args + " > " + log + " 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(log)};
}

const char* kInstance = R"({
  "arms": [
    {"support": [0.0, 1.0], "probs": [0.5, 0.5]},
    {"support": [0.0, 0.6], "probs": [0.2, 0.8]},
    {"support": [0.3], "probs": [1.0]},
    {"support": [0.0, 0.9], "probs": [0.9, 0.1]}
  ],
  "K": 2
})";

}  // namespace

TEST(ConfigArms, FiniteAndDensity) {
  const auto a = arm_from_json(Json::parse(R"({"support": [0.2, 0.8], "probs": [0.25, 0.75]})"));
  const auto& f = std::get<FiniteDistribution>(a);
  EXPECT_DOUBLE_EQ(f.mean(), 0.65);
  const auto b = arm_from_json(Json::parse(R"({"breakpoints": [0, 0.5, 1], "densities": [1.2, 0.8]})"));
  EXPECT_NEAR(std::get<PiecewiseDensity>(b).mean(), 0.15 + 0.3, 1e-12);
}

TEST(ConfigArms, MalformedArmsAreConfigErrors) {
  for (const char* text : {R"({"support": [0.2, 0.8]})", R"({"support": [0.2, 0.8], "probs": [0.5]})",
                           R"({"support": [0.2, 1.8], "probs": [0.5, 0.5]})",
                           R"({"support": [0.2, 0.8], "probs": [0.6, 0.6]})",
                           R"({"support": "x", "probs": [1]})", R"({"values": [1]})",
                           R"({"breakpoints": [0, 1], "densities": [0.5]})"}) {
    EXPECT_THROW(arm_from_json(Json::parse(text)), ConfigError) << text;
  }
}

TEST(ConfigFamily, Kinds) {
  EXPECT_EQ(family_from_json(Json::parse(R"({"K": 2})"), 4).candidate_count(), 10.0);
  const auto c = family_from_json(Json::parse(R"({"family": {"kind": "cardinality", "K": 3}})"), 5);
  EXPECT_EQ(c.max_size(), 3U);
  const auto e = family_from_json(Json::parse(R"({"family": {"kind": "explicit", "sets": [[2, 0], [1]]}})"), 3);
  EXPECT_EQ(e.kind(), FeasibleFamily::Kind::ExplicitList);
  EXPECT_TRUE(e.contains(SuperArm{0, 2}));
  EXPECT_THROW(family_from_json(Json::parse(R"({"family": {"kind": "matroid"}})"), 3), ConfigError);
  EXPECT_THROW(family_from_json(Json::parse(R"({"K": 5})"), 3), ConfigError);
  EXPECT_THROW(family_from_json(Json::parse(R"({})"), 3), ConfigError);
  EXPECT_THROW(family_from_json(Json::parse(R"({"family": {"kind": "explicit", "sets": [[0, 0]]}})"), 3),
               ConfigError);
}

TEST(ConfigReward, Kinds) {
  EXPECT_EQ(reward_from_json(Json::parse("{}"), 3).kind(), RewardKind::KMax);
  const auto lin = reward_from_json(Json::parse(R"({"reward": {"kind": "linear_sum"}})"), 3);
  EXPECT_EQ(lin.kind(), RewardKind::LinearSum);
  EXPECT_DOUBLE_EQ(lin.bound_m(), 3.0);
  const auto sq = reward_from_json(Json::parse(R"({"reward": {"kind": "utility", "utility": "square", "M": 9, "C": 6}})"), 3);
  EXPECT_EQ(sq.kind(), RewardKind::UtilityOfSum);
  EXPECT_DOUBLE_EQ(sq.bound_m(), 9.0);
  EXPECT_DOUBLE_EQ(sq.lipschitz_c(), 6.0);
  const auto tab = reward_from_json(
      Json::parse(R"({"reward": {"kind": "utility", "utility": {"xs": [0, 2], "ys": [0, 1]}, "M": 1, "C": 0.5}})"), 2);
  const auto d = std::vector<FiniteDistribution>{FiniteDistribution::point_mass(0.5),
                                                 FiniteDistribution::point_mass(0.5)};
  EXPECT_NEAR(expected_reward(d, SuperArm{0, 1}, tab), 0.5, 1e-12);
  EXPECT_THROW(reward_from_json(Json::parse(R"({"reward": {"kind": "median"}})"), 3), ConfigError);
  EXPECT_THROW(reward_from_json(Json::parse(R"({"reward": {"kind": "utility", "utility": "cube", "M": 1, "C": 1}})"), 3),
               ConfigError);
  EXPECT_THROW(reward_from_json(Json::parse(R"({"reward": {"kind": "utility", "utility": "square"}})"), 3),
               ConfigError);
}

TEST(ConfigEnvironment, BuiltinTakesPrecedence) {
  const auto env = environment_from_json(Json::parse(R"({"env": "dist3", "arms": [{"support": [1], "probs": [1]}], "K": 1})"));
  EXPECT_EQ(env.name(), "dist3");
  EXPECT_EQ(env.arm_count(), 9U);
  const auto inline_env = environment_from_json(Json::parse(kInstance));
  EXPECT_EQ(inline_env.arm_count(), 4U);
  EXPECT_EQ(inline_env.optimum().set, (SuperArm{0, 1}));
  EXPECT_THROW(environment_from_json(Json::parse(R"({"env": "dist9"})")), ConfigError);
  EXPECT_THROW(environment_from_json(Json::parse(R"({"K": 1})")), ConfigError);
}

TEST(ConfigOffline, ParsesInstances) {
  const auto inst = offline_instance_from_json(Json::parse(kInstance));
  EXPECT_EQ(inst.arms.size(), 4U);
  EXPECT_EQ(inst.family.max_size(), 2U);
  EXPECT_EQ(exhaustive_oracle(inst.arms, inst.family, inst.spec), (SuperArm{0, 1}));
  EXPECT_THROW(offline_instance_from_json(Json::parse(R"({"arms": [{"breakpoints": [0, 1], "densities": [1]}], "K": 1})")),
               ConfigError);
  EXPECT_THROW(offline_instance_from_json(Json::parse(R"({"K": 1})")), ConfigError);
}

TEST(ConfigRun, FieldsAndDefaults) {
  const auto defaults = run_config_from_json(Json::parse(R"({"env": "dist1"})"));
  EXPECT_EQ(defaults.policy, "sdcb");
  EXPECT_EQ(defaults.oracle, "greedy");
  EXPECT_EQ(defaults.horizon, 10000U);
  EXPECT_EQ(defaults.runs, 20U);
  EXPECT_EQ(defaults.seed, 42U);
  EXPECT_FALSE(defaults.alpha.has_value());
  const auto cfg = run_config_from_json(Json::parse(R"({"env": "dist2", "policy": "cucb", "oracle": "exhaustive",
      "epsilon": 0.2, "T": 50, "runs": 3, "seed": 7, "alpha": 0.9, "out": "x.csv", "per_run_out": "y.csv",
      "threads": 2, "global_epoch_round": true, "realized": true})"));
  EXPECT_EQ(cfg.environment.at("env"), "dist2");
  EXPECT_EQ(cfg.policy, "cucb");
  EXPECT_EQ(cfg.oracle, "exhaustive");
  EXPECT_DOUBLE_EQ(cfg.epsilon, 0.2);
  EXPECT_EQ(cfg.horizon, 50U);
  EXPECT_EQ(cfg.runs, 3U);
  EXPECT_EQ(cfg.seed, 7U);
  EXPECT_EQ(cfg.alpha, std::optional<double>(0.9));
  EXPECT_EQ(cfg.per_run_out, std::optional<std::string>("y.csv"));
  EXPECT_EQ(cfg.threads, 2U);
  EXPECT_TRUE(cfg.global_epoch_round);
  EXPECT_TRUE(cfg.realized);
  EXPECT_THROW(run_config_from_json(Json::parse(R"({"T": "many"})")), ConfigError);
}

TEST(ConfigRun, LoadJsonErrors) {
  EXPECT_THROW(load_json("/nonexistent/config.json"), ConfigError);
  EXPECT_THROW(load_json(write_file("broken.json", "{\"env\": ")), ConfigError);
  EXPECT_EQ(load_json(write_file("ok.json", R"({"env": "dist1"})")).at("env"), "dist1");
}

TEST(ConfigRun, RunExperimentWritesTraces) {
  RunConfig cfg;
  cfg.environment = Json::parse(kInstance);
  cfg.policy = "lazy-sdcb";
  cfg.oracle = "exhaustive";
  cfg.horizon = 200;
  cfg.runs = 2;
  cfg.seed = 3;
  cfg.alpha = 0.95;
  cfg.out = temp_path("exp_avg.csv");
  cfg.per_run_out = temp_path("exp_runs.csv");
  const auto result = run_experiment(cfg);
  EXPECT_DOUBLE_EQ(result.alpha, 0.95);
  EXPECT_EQ(result.optimum.set, (SuperArm{0, 1}));
  EXPECT_EQ(read_csv(cfg.out).front().rounds(), 200U);
  EXPECT_EQ(read_csv(*cfg.per_run_out).size(), 2U);

  RunConfig bad = cfg;
  bad.runs = 0;
  EXPECT_THROW(run_experiment(bad), ConfigError);
  bad = cfg;
  bad.horizon = 0;
  EXPECT_THROW(run_experiment(bad), ConfigError);
  bad = cfg;
  bad.policy = "ucb1";
  EXPECT_THROW(run_experiment(bad), ConfigError);
  bad = cfg;
  bad.oracle = "ptas";
  bad.epsilon = 0.7;
  EXPECT_THROW(run_experiment(bad), ConfigError);
}

TEST(Cli, EnvsAndExitCodes) {
  const auto envs = run_cli("envs");
  EXPECT_EQ(envs.code, 0);
  for (const char* name : {"dist1", "dist2", "dist3", "dist4"}) {
    EXPECT_NE(envs.out.find(name), std::string::npos);
  }
  EXPECT_EQ(run_cli("").code, 1);
  EXPECT_EQ(run_cli("run --env dist7 --T 10 --runs 1 --out " + temp_path("x.csv")).code, 1);
  EXPECT_EQ(run_cli("run --env dist1 --policy magic --T 10 --runs 1 --out " + temp_path("x.csv")).code, 1);
  EXPECT_EQ(run_cli("run --env dist1 --T ten").code, 1);
  EXPECT_EQ(run_cli("offline --instance /nonexistent.json").code, 1);
}

TEST(Cli, RunWritesCsv) {
  const std::string out = temp_path("cli_run.csv");
  const auto r = run_cli("run --env dist2 --policy cucb --oracle greedy --T 25 --runs 2 --seed 5 --out " + out);
  ASSERT_EQ(r.code, 0) << r.out;
  const std::string text = slurp(out);
  EXPECT_EQ(text.substr(0, text.find('\n')), "round,expected_reward,cum_regret");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 26);
  EXPECT_EQ(text.substr(text.find('\n') + 1, 2), "1,");
}

TEST(Cli, ConfigFileWithOverrides) {
  const std::string out = temp_path("cli_cfg.csv");
  const std::string cfg = write_file("cli_cfg.json", R"({"env": "dist1", "policy": "osm", "T": 40, "runs": 1})");
  const auto r = run_cli("run --config " + cfg + " --T 12 --out " + out);
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("policy: osm"), std::string::npos);
  EXPECT_EQ(read_csv(out).front().rounds(), 12U);
}

TEST(Cli, OfflineSolvers) {
  const std::string inst = write_file("inst.json", kInstance);
  for (const char* solver : {"exhaustive", "greedy", "ptas"}) {
    const auto r = run_cli(std::string("offline --instance ") + inst + " --solver " + solver + " --epsilon 0.25");
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("set: {0,1}"), std::string::npos) << solver << "\n" << r.out;
    EXPECT_NE(r.out.find("value: 0.74\n"), std::string::npos) << solver << "\n" << r.out;
  }
  EXPECT_EQ(run_cli("offline --instance " + inst + " --solver ptas --epsilon 0.6").code, 1);
}

TEST(Cli, GuardViolationExitsTwo) {
  std::string arms;
  for (int i = 0; i < 40; ++i) arms += std::string(i ? "," : "") + R"({"support": [0.5], "probs": [1]})";
  const std::string inst = write_file("big.json", "{\"arms\": [" + arms + "], \"K\": 10}");
  EXPECT_EQ(run_cli("offline --instance " + inst + " --solver exhaustive").code, 2);
}
