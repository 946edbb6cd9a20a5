#ifndef CMAB_HARNESS_HPP
#define CMAB_HARNESS_HPP

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "cmab/distribution.hpp"
#include "cmab/error.hpp"
#include "cmab/oracle.hpp"
#include "cmab/policy.hpp"
#include "cmab/reward.hpp"
#include "cmab/rng.hpp"
#include "cmab/solver.hpp"

namespace cmab {

/// (E, F, D, R) with the optimum cached from an exhaustive search.
class Environment {
 public:
  static Environment make(std::vector<ArmDistribution> arms, FeasibleFamily family,
                          RewardSpec spec, std::string name = "custom") {
    if (arms.empty()) throw ConfigError("environment needs at least one arm");
    if (arms.size() != family.arm_count()) {
      throw ConfigError("family arm count does not match the number of arms");
    }
    Environment env(std::move(arms), std::move(family), std::move(spec), std::move(name));
    env.optimum_ = env.compute_optimum();
    return env;
  }

  const std::string& name() const noexcept { return name_; }
  const std::vector<ArmDistribution>& arms() const noexcept { return arms_; }
  const FeasibleFamily& family() const noexcept { return family_; }
  const RewardSpec& spec() const noexcept { return spec_; }
  std::size_t arm_count() const noexcept { return arms_.size(); }
  bool continuous() const noexcept { return !densities_.empty(); }
  const ScoredSet& optimum() const noexcept { return optimum_; }

  /// Exact r_D(S).
  double expected_reward(const SuperArm& s) const {
    if (continuous()) return expected_kmax_continuous(densities_, s);
    return cmab::expected_reward(finite_, s, spec_);
  }

  ScoredSet compute_optimum() const {
    return exhaustive_search(family_, [this](const SuperArm& s) { return expected_reward(s); });
  }

  /// The same problem with every arm replaced by its s-interval discretization.
  Environment discretized(std::size_t s) const {
    std::vector<ArmDistribution> arms;
    arms.reserve(arms_.size());
    for (const auto& a : arms_) arms.emplace_back(discretize_interval(a, s));
    return make(std::move(arms), family_, spec_, name_ + "-disc" + std::to_string(s));
  }

 private:
  Environment(std::vector<ArmDistribution> arms, FeasibleFamily family, RewardSpec spec,
              std::string name)
      : name_(std::move(name)),
        arms_(std::move(arms)),
        family_(std::move(family)),
        spec_(std::move(spec)) {
    for (const auto& a : arms_) {
      if (const auto* f = std::get_if<FiniteDistribution>(&a)) finite_.push_back(*f);
      else densities_.push_back(std::get<PiecewiseDensity>(a));
    }
    if (!finite_.empty() && !densities_.empty()) {
      throw ConfigError("environment mixes finite and continuous arms");
    }
    if (continuous() && spec_.kind() != RewardKind::KMax) {
      throw ConfigError("continuous arms are only scored under the K-MAX reward");
    }
  }

  std::string name_;
  std::vector<ArmDistribution> arms_;
  FeasibleFamily family_;
  RewardSpec spec_;
  std::vector<FiniteDistribution> finite_;
  std::vector<PiecewiseDensity> densities_;
  ScoredSet optimum_;
};

struct RegretTrace {
  std::vector<double> expected_reward;  // r_D(S_t), t = 1..T
  std::vector<double> cum_regret;       // sum over tau <= t of alpha r_D(S*) - r_D(S_tau)
  std::string policy;
  std::string oracle;
  double alpha = 1.0;
  std::uint64_t seed = 0;
  double runtime_seconds = 0.0;
  std::vector<SuperArm> played;  // filled only when requested

  std::size_t rounds() const noexcept { return expected_reward.size(); }
};

struct RunOptions {
  double alpha = 1.0;
  bool record_played = false;
  // Score rounds by the realized R(x, S_t) instead of r_D(S_t). Noisier;
  // only for diagnostics.
  bool realized = false;
  std::string oracle_name;
};

/// select -> sample member outcomes -> observe, scoring each round by its
/// exact expected reward. Arm i draws from substream i of `seed`.
inline RegretTrace run_one(const Environment& env, Policy& policy, std::uint64_t horizon,
                           std::uint64_t seed, const RunOptions& options = {}) {
  if (horizon == 0) throw std::invalid_argument("horizon must be positive");
  const auto start = std::chrono::steady_clock::now();
  std::vector<Rng> streams;
  streams.reserve(env.arm_count());
  for (std::size_t i = 0; i < env.arm_count(); ++i) streams.push_back(make_substream(seed, i));

  RegretTrace trace;
  trace.policy = policy.name();
  trace.oracle = options.oracle_name;
  trace.alpha = options.alpha;
  trace.seed = seed;
  trace.expected_reward.reserve(horizon);
  trace.cum_regret.reserve(horizon);
  const double target = options.alpha * env.optimum().value;
  std::map<SuperArm, double> cache;
  std::vector<ArmOutcome> outcomes;
  std::vector<double> values;
  double cumulative = 0.0;
  for (std::uint64_t t = 1; t <= horizon; ++t) {
    const SuperArm s = policy.select(t);
    if (!env.family().contains(s)) {
      throw std::runtime_error("policy " + policy.name() + " played infeasible super arm " +
                               s.to_string() + " in round " + std::to_string(t));
    }
    outcomes.clear();
    for (ArmId i : s.members()) outcomes.push_back({i, sample(env.arms()[i], streams[i])});
    policy.observe(t, s, outcomes);
    double reward = 0.0;
    if (options.realized) {
      values.clear();
      for (const auto& o : outcomes) values.push_back(o.value);
      reward = realized_reward(values, s, env.spec());
    } else {
      auto it = cache.find(s);
      if (it == cache.end()) it = cache.emplace(s, env.expected_reward(s)).first;
      reward = it->second;
    }
    cumulative += target - reward;
    trace.expected_reward.push_back(reward);
    trace.cum_regret.push_back(cumulative);
    if (options.record_played) trace.played.push_back(s);
  }
  trace.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return trace;
}

using PolicyFactory = std::function<std::unique_ptr<Policy>(std::uint64_t seed)>;

struct BatchResult {
  RegretTrace average;
  std::vector<RegretTrace> runs;
};

/// Pointwise mean over runs, accumulated in run order.
inline RegretTrace average_traces(const std::vector<RegretTrace>& runs) {
  if (runs.empty()) throw std::invalid_argument("no traces to average");
  RegretTrace avg;
  const std::size_t n = runs.front().rounds();
  avg.expected_reward.assign(n, 0.0);
  avg.cum_regret.assign(n, 0.0);
  for (const auto& r : runs) {
    for (std::size_t t = 0; t < n; ++t) {
      avg.expected_reward[t] += r.expected_reward[t];
      avg.cum_regret[t] += r.cum_regret[t];
    }
    avg.runtime_seconds += r.runtime_seconds;
  }
  const double k = static_cast<double>(runs.size());
  for (std::size_t t = 0; t < n; ++t) {
    avg.expected_reward[t] /= k;
    avg.cum_regret[t] /= k;
  }
  avg.policy = runs.front().policy;
  avg.oracle = runs.front().oracle;
  avg.alpha = runs.front().alpha;
  avg.seed = runs.front().seed;
  return avg;
}

/// Runs `runs` independent simulations with seeds seed_base + r on up to
/// `threads` workers. Results do not depend on the thread count.
inline BatchResult run_many(const Environment& env, const PolicyFactory& factory,
                            std::uint64_t horizon, std::size_t runs, std::uint64_t seed_base,
                            const RunOptions& options = {}, std::size_t threads = 1) {
  if (runs == 0) throw std::invalid_argument("need at least one run");
  BatchResult out;
  out.runs.resize(runs);
  std::vector<std::exception_ptr> errors(runs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < runs; r = next++) {
      try {
        auto policy = factory(seed_base + r);
        out.runs[r] = run_one(env, *policy, horizon, seed_base + r, options);
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, runs));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  out.average = average_traces(out.runs);
  return out;
}

// ---------------------------------------------------------------------------
// Built-in experiments: m = 9, K = 3, K-MAX, optimum {0, 1, 2}.

inline std::vector<std::string> builtin_env_names() { return {"dist1", "dist2", "dist3", "dist4"}; }

inline std::string builtin_env_description(const std::string& name) {
  if (name == "dist1") return "arms 0-2: P[1]=0.5; arms 3-8: P[0]=0.5 (easy)";
  if (name == "dist2") return "arms 0-2: P[1]=0.5; arms 3-8: P[1]=0.4 (hard)";
  if (name == "dist3") return "arms 0-2: P[1]=0.5; arms 3-5: P[1]=0.4; arms 6-8: P[1]=0.2";
  if (name == "dist4") return "arms 0-2: uniform; arms 3-8: density 1.2 on [0,0.5], 0.8 on (0.5,1]";
  throw ConfigError("unknown environment '" + name + "'");
}

namespace detail {

inline FiniteDistribution six_point(double p_low, double p_mid, double p_one) {
  const double support[] = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  const double probs[] = {p_low, p_mid, p_mid, p_mid, p_mid, p_one};
  return make_finite(support, probs);
}

}  // namespace detail

inline Environment builtin_env(const std::string& name) {
  constexpr std::size_t m = 9;
  constexpr std::size_t k = 3;
  std::vector<ArmDistribution> arms;
  const auto strong = detail::six_point(0.1, 0.1, 0.5);
  if (name == "dist1") {
    for (std::size_t i = 0; i < m; ++i) {
      arms.emplace_back(i < 3 ? strong : detail::six_point(0.5, 0.1, 0.1));
    }
  } else if (name == "dist2") {
    for (std::size_t i = 0; i < m; ++i) {
      arms.emplace_back(i < 3 ? strong : detail::six_point(0.12, 0.12, 0.4));
    }
  } else if (name == "dist3") {
    for (std::size_t i = 0; i < m; ++i) {
      if (i < 3) arms.emplace_back(strong);
      else if (i < 6) arms.emplace_back(detail::six_point(0.12, 0.12, 0.4));
      else arms.emplace_back(detail::six_point(0.16, 0.16, 0.2));
    }
  } else if (name == "dist4") {
    for (std::size_t i = 0; i < m; ++i) {
      if (i < 3) arms.emplace_back(PiecewiseDensity::uniform());
      else arms.emplace_back(PiecewiseDensity::make({0.0, 0.5, 1.0}, {1.2, 0.8}));
    }
  } else {
    throw ConfigError("unknown environment '" + name + "' (expected dist1|dist2|dist3|dist4)");
  }
  return Environment::make(std::move(arms), FeasibleFamily::cardinality(k, m), RewardSpec::kmax(),
                           name);
}

/// The alpha the regret column is measured against. Every oracle reports
/// 1-regret by default; `override_alpha` replaces it.
inline double alpha_for(OracleKind, std::optional<double> override_alpha = std::nullopt) {
  return override_alpha.value_or(1.0);
}

// ---------------------------------------------------------------------------
// Policy construction.

enum class PolicyKind { Sdcb, LazySdcb, LazySdcbDoubling, Cucb, Osm };

inline PolicyKind parse_policy_kind(const std::string& name) {
  if (name == "sdcb") return PolicyKind::Sdcb;
  if (name == "lazy-sdcb") return PolicyKind::LazySdcb;
  if (name == "lazy-sdcb-doubling") return PolicyKind::LazySdcbDoubling;
  if (name == "cucb") return PolicyKind::Cucb;
  if (name == "osm") return PolicyKind::Osm;
  throw ConfigError("unknown policy '" + name +
                    "' (expected sdcb|lazy-sdcb|lazy-sdcb-doubling|cucb|osm)");
}

struct PolicyConfig {
  PolicyKind kind = PolicyKind::Sdcb;
  OracleKind oracle = OracleKind::Greedy;
  double epsilon = 0.25;
  std::uint64_t horizon = 10000;
  bool global_epoch_round = false;
};

/// Factory for fresh policy instances. Policies only receive the family and
/// the reward spec, never the arm distributions.
inline PolicyFactory make_policy_factory(const Environment& env, const PolicyConfig& cfg) {
  const FeasibleFamily family = env.family();
  const RewardSpec spec = env.spec();
  if (cfg.kind == PolicyKind::Osm) {
    if (spec.kind() != RewardKind::KMax) throw ConfigError("osm needs the K-MAX reward");
    if (family.kind() != FeasibleFamily::Kind::CardinalityAtMost) {
      throw ConfigError("osm needs a cardinality family");
    }
    const double gamma = exp3_gamma(family.arm_count(), cfg.horizon);
    return [family, gamma](std::uint64_t seed) -> std::unique_ptr<Policy> {
      return std::make_unique<OnlineSubmodularMax>(family.arm_count(), family.max_size(), gamma,
                                                   seed);
    };
  }
  const Oracle oracle(cfg.oracle, family, spec, cfg.epsilon);
  switch (cfg.kind) {
    case PolicyKind::Sdcb:
      return [family, oracle](std::uint64_t) -> std::unique_ptr<Policy> {
        return std::make_unique<Sdcb>(family, oracle);
      };
    case PolicyKind::LazySdcb: {
      const auto horizon = cfg.horizon;
      return [family, oracle, horizon](std::uint64_t) -> std::unique_ptr<Policy> {
        return std::make_unique<Sdcb>(lazy_sdcb_known_horizon(family, oracle, horizon));
      };
    }
    case PolicyKind::LazySdcbDoubling: {
      const bool global = cfg.global_epoch_round;
      return [family, oracle, global](std::uint64_t) -> std::unique_ptr<Policy> {
        return std::make_unique<LazySdcbDoubling>(family, oracle, global);
      };
    }
    case PolicyKind::Cucb:
      return [family, oracle](std::uint64_t) -> std::unique_ptr<Policy> {
        return std::make_unique<Cucb>(family, oracle);
      };
    case PolicyKind::Osm: break;
  }
  throw std::logic_error("unhandled policy kind");
}

// ---------------------------------------------------------------------------
// CSV: header round,expected_reward,cum_regret[,run]; %.12g floats; LF.

namespace detail {

inline std::string format_g12(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::ios_base::failure("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace detail

inline std::string csv_text(const RegretTrace& trace) {
  std::string s = "round,expected_reward,cum_regret\n";
  for (std::size_t t = 0; t < trace.rounds(); ++t) {
    s += std::to_string(t + 1) + "," + detail::format_g12(trace.expected_reward[t]) + "," +
         detail::format_g12(trace.cum_regret[t]) + "\n";
  }
  return s;
}

inline std::string csv_text(const std::vector<RegretTrace>& runs) {
  std::string s = "round,expected_reward,cum_regret,run\n";
  for (std::size_t r = 0; r < runs.size(); ++r) {
    for (std::size_t t = 0; t < runs[r].rounds(); ++t) {
      s += std::to_string(t + 1) + "," + detail::format_g12(runs[r].expected_reward[t]) + "," +
           detail::format_g12(runs[r].cum_regret[t]) + "," + std::to_string(r) + "\n";
    }
  }
  return s;
}

inline void write_csv(const RegretTrace& trace, const std::string& path) {
  auto out = detail::open_for_write(path);
  out << csv_text(trace);
  if (!out) throw std::ios_base::failure("write to '" + path + "' failed");
}

inline void write_csv(const std::vector<RegretTrace>& runs, const std::string& path) {
  auto out = detail::open_for_write(path);
  out << csv_text(runs);
  if (!out) throw std::ios_base::failure("write to '" + path + "' failed");
}

/// Reads a CSV written by write_csv; per-run files yield one trace per run.
inline std::vector<RegretTrace> read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open '" + path + "' for reading");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("'" + path + "' is empty");
  const bool per_run = line == "round,expected_reward,cum_regret,run";
  if (!per_run && line != "round,expected_reward,cum_regret") {
    throw std::runtime_error("'" + path + "' has an unexpected header");
  }
  std::vector<RegretTrace> traces;
  if (!per_run) traces.emplace_back();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() != (per_run ? 4u : 3u)) {
      throw std::runtime_error("malformed row in '" + path + "': " + line);
    }
    std::size_t r = 0;
    if (per_run) {
      r = std::stoul(cells[3]);
      if (traces.size() <= r) traces.resize(r + 1);
    }
    traces[r].expected_reward.push_back(std::stod(cells[1]));
    traces[r].cum_regret.push_back(std::stod(cells[2]));
  }
  return traces;
}

}  // namespace cmab

#endif  // CMAB_HARNESS_HPP
