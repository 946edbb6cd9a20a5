#ifndef CMAB_POLICY_HPP
#define CMAB_POLICY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmab/distribution.hpp"
#include "cmab/oracle.hpp"
#include "cmab/reward.hpp"
#include "cmab/rng.hpp"
#include "cmab/solver.hpp"

namespace cmab {

/// Semi-bandit feedback for one member of the played super arm.
struct ArmOutcome {
  ArmId arm;
  double value;
};

/// Online policy driven one round at a time: select(t) then observe(t, ...).
class Policy {
 public:
  virtual ~Policy() = default;
  virtual SuperArm select(std::uint64_t t) = 0;
  virtual void observe(std::uint64_t t, const SuperArm& played,
                       std::span<const ArmOutcome> outcomes) = 0;
  virtual std::string name() const = 0;
};

namespace detail {

inline void check_feedback(const SuperArm& played, std::span<const ArmOutcome> outcomes) {
  std::vector<ArmId> arms;
  arms.reserve(outcomes.size());
  for (const auto& o : outcomes) arms.push_back(o.arm);
  std::sort(arms.begin(), arms.end());
  if (arms != played.members()) {
    throw std::invalid_argument("outcomes must cover exactly the members of " + played.to_string());
  }
}

inline void check_round(std::uint64_t t, std::uint64_t played_rounds) {
  if (t != played_rounds + 1) {
    throw std::logic_error("round " + std::to_string(t) + " out of sequence (expected " +
                           std::to_string(played_rounds + 1) + ")");
  }
}

}  // namespace detail

/// Always plays the same super arm.
class FixedPolicy final : public Policy {
 public:
  explicit FixedPolicy(SuperArm s) : s_(std::move(s)) {}
  SuperArm select(std::uint64_t) override { return s_; }
  void observe(std::uint64_t, const SuperArm& played, std::span<const ArmOutcome> outcomes) override {
    detail::check_feedback(played, outcomes);
  }
  std::string name() const override { return "fixed"; }

 private:
  SuperArm s_;
};

/// Stochastically dominant confidence bound learner.
///
/// Rounds 1..m play an initialization super arm containing arm t-1; later
/// rounds lower every empirical CDF by sqrt(3 ln t / 2 T_i), move the
/// removed mass to 1, and play the oracle's choice on that product. With
/// `bins` set, every outcome is first replaced by the right endpoint of its
/// interval on the bins-point grid.
class Sdcb : public Policy {
 public:
  Sdcb(FeasibleFamily family, Oracle oracle, std::optional<std::size_t> bins = std::nullopt)
      : family_(std::move(family)),
        oracle_(std::move(oracle)),
        bins_(bins),
        ecdfs_(family_.arm_count()) {
    if (bins_ && *bins_ == 0) throw std::invalid_argument("bin count must be positive");
  }

  SuperArm select(std::uint64_t t) override { return select(t, t); }

  /// `radius_round` is the t used inside ln t; it may differ from the
  /// sequencing round index (doubling epochs with a global clock).
  SuperArm select(std::uint64_t t, std::uint64_t radius_round) {
    detail::check_round(t, rounds_);
    const std::size_t m = family_.arm_count();
    if (t <= m) return family_.init_super_arm(static_cast<ArmId>(t - 1));
    std::vector<FiniteDistribution> dominant;
    dominant.reserve(m);
    for (const auto& e : ecdfs_) dominant.push_back(dominant_cdf(e, radius_round));
    return oracle_(dominant);
  }

  void observe(std::uint64_t t, const SuperArm& played,
               std::span<const ArmOutcome> outcomes) override {
    detail::check_round(t, rounds_);
    detail::check_feedback(played, outcomes);
    for (const auto& o : outcomes) {
      ecdfs_[o.arm].add(bins_ ? interval_right_endpoint(o.value, *bins_) : o.value);
    }
    ++rounds_;
  }

  std::string name() const override { return bins_ ? "lazy-sdcb" : "sdcb"; }

  const EmpiricalCdf& ecdf(ArmId i) const { return ecdfs_.at(i); }
  std::uint64_t counter(ArmId i) const { return ecdfs_.at(i).count(); }
  std::uint64_t rounds() const noexcept { return rounds_; }
  std::optional<std::size_t> bins() const noexcept { return bins_; }

 private:
  FeasibleFamily family_;
  Oracle oracle_;
  std::optional<std::size_t> bins_;
  std::vector<EmpiricalCdf> ecdfs_;
  std::uint64_t rounds_ = 0;
};

/// ceil(sqrt(n)) in integers.
inline std::size_t ceil_sqrt(std::uint64_t n) {
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
  while (r * r > n) --r;
  while (r * r < n) ++r;
  return static_cast<std::size_t>(r);
}

/// Smallest q with 2^q >= m.
inline unsigned ceil_log2(std::uint64_t m) {
  unsigned q = 0;
  while ((std::uint64_t{1} << q) < m) ++q;
  return q;
}

/// Lazy-SDCB with known horizon T: SDCB on outcomes binned to s = ceil(sqrt T).
inline Sdcb lazy_sdcb_known_horizon(FeasibleFamily family, Oracle oracle, std::uint64_t horizon) {
  if (horizon == 0) throw std::invalid_argument("horizon must be positive");
  return Sdcb(std::move(family), std::move(oracle), ceil_sqrt(horizon));
}

/// Lazy-SDCB without a known horizon. Rounds 1..2^q (q = ceil(log2 m)) run
/// a fresh known-horizon instance with T = 2^q; for k >= q, rounds
/// 2^k+1..2^{k+1} run a fresh instance with T = 2^k.
class LazySdcbDoubling final : public Policy {
 public:
  LazySdcbDoubling(FeasibleFamily family, Oracle oracle, bool global_radius_round = false)
      : family_(std::move(family)),
        oracle_(std::move(oracle)),
        global_radius_round_(global_radius_round),
        q_(ceil_log2(family_.arm_count())) {}

  SuperArm select(std::uint64_t t) override {
    detail::check_round(t, rounds_);
    if (!current_ || t > epoch_end_) start_epoch(t);
    const std::uint64_t local = t - epoch_start_ + 1;
    return current_->select(local, global_radius_round_ ? t : local);
  }

  void observe(std::uint64_t t, const SuperArm& played,
               std::span<const ArmOutcome> outcomes) override {
    detail::check_round(t, rounds_);
    current_->observe(t - epoch_start_ + 1, played, outcomes);
    ++rounds_;
  }

  std::string name() const override { return "lazy-sdcb-doubling"; }

  unsigned q() const noexcept { return q_; }
  /// Rounds after which a fresh instance was started.
  const std::vector<std::uint64_t>& resets() const noexcept { return resets_; }
  std::uint64_t epoch_horizon() const noexcept { return epoch_horizon_; }
  std::uint64_t epoch_start() const noexcept { return epoch_start_; }
  std::uint64_t epoch_end() const noexcept { return epoch_end_; }
  const Sdcb* current() const noexcept { return current_.get(); }

 private:
  void start_epoch(std::uint64_t t) {
    if (!current_) {
      epoch_start_ = 1;
      epoch_horizon_ = std::uint64_t{1} << q_;
      epoch_end_ = epoch_horizon_;
    } else {
      resets_.push_back(epoch_end_);
      epoch_start_ = epoch_end_ + 1;
      epoch_horizon_ = epoch_end_;
      epoch_end_ = 2 * epoch_end_;
    }
    if (t != epoch_start_) throw std::logic_error("epoch schedule out of sync");
    current_ = std::make_unique<Sdcb>(lazy_sdcb_known_horizon(family_, oracle_, epoch_horizon_));
  }

  FeasibleFamily family_;
  Oracle oracle_;
  bool global_radius_round_;
  unsigned q_;
  std::unique_ptr<Sdcb> current_;
  std::uint64_t epoch_start_ = 0;
  std::uint64_t epoch_end_ = 0;
  std::uint64_t epoch_horizon_ = 0;
  std::uint64_t rounds_ = 0;
  std::vector<std::uint64_t> resets_;
};

/// CUCB: per-arm UCB min(mean + sqrt(3 ln t / 2 T_i), 1) fed to the oracle
/// as point masses.
class Cucb final : public Policy {
 public:
  Cucb(FeasibleFamily family, Oracle oracle)
      : family_(std::move(family)),
        oracle_(std::move(oracle)),
        sums_(family_.arm_count(), 0.0),
        counts_(family_.arm_count(), 0) {}

  std::vector<double> ucb(std::uint64_t t) const {
    std::vector<double> out(counts_.size());
    for (std::size_t i = 0; i < counts_.size(); ++i) {
      if (counts_[i] == 0) throw std::logic_error("UCB of an unobserved arm");
      out[i] = ucb_value(mean(i), t, counts_[i]);
    }
    return out;
  }

  static double ucb_value(double mean, std::uint64_t t, std::uint64_t count) {
    return std::min(mean + confidence_radius(t, count), 1.0);
  }

  SuperArm select(std::uint64_t t) override {
    detail::check_round(t, rounds_);
    const std::size_t m = family_.arm_count();
    if (t <= m) return family_.init_super_arm(static_cast<ArmId>(t - 1));
    std::vector<FiniteDistribution> points;
    points.reserve(m);
    for (double u : ucb(t)) points.push_back(FiniteDistribution::point_mass(u));
    return oracle_(points);
  }

  void observe(std::uint64_t t, const SuperArm& played,
               std::span<const ArmOutcome> outcomes) override {
    detail::check_round(t, rounds_);
    detail::check_feedback(played, outcomes);
    for (const auto& o : outcomes) {
      if (!(o.value >= 0.0 && o.value <= 1.0)) throw std::invalid_argument("outcome outside [0,1]");
      sums_[o.arm] += o.value;
      ++counts_[o.arm];
    }
    ++rounds_;
  }

  std::string name() const override { return "cucb"; }

  double mean(ArmId i) const { return sums_.at(i) / static_cast<double>(counts_.at(i)); }
  std::uint64_t counter(ArmId i) const { return counts_.at(i); }

 private:
  FeasibleFamily family_;
  Oracle oracle_;
  std::vector<double> sums_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t rounds_ = 0;
};

/// min(1, sqrt(m ln m / ((e - 1) g))) with payoff bound g = horizon.
inline double exp3_gamma(std::size_t m, std::uint64_t horizon) {
  if (m <= 1 || horizon == 0) return 1.0;
  const double md = static_cast<double>(m);
  return std::min(1.0, std::sqrt(md * std::log(md) /
                                 ((std::numbers::e - 1.0) * static_cast<double>(horizon))));
}

/// Exp3 over m arms. Weights are kept in log space and renormalized so they
/// stay finite over long horizons.
class Exp3 {
 public:
  Exp3(std::size_t m, double gamma) : log_w_(m, 0.0), gamma_(gamma) {
    if (m == 0) throw std::invalid_argument("Exp3 needs at least one arm");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("Exp3 gamma must be in (0,1]");
  }

  std::size_t size() const noexcept { return log_w_.size(); }
  double gamma() const noexcept { return gamma_; }

  /// Weights normalized so the largest is 1.
  std::vector<double> weights() const {
    const double top = *std::max_element(log_w_.begin(), log_w_.end());
    std::vector<double> w(log_w_.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(log_w_[i] - top);
    return w;
  }

  /// p_i = (1 - gamma) w_i / sum w + gamma / m.
  std::vector<double> probabilities() const {
    auto w = weights();
    double total = 0.0;
    for (double x : w) total += x;
    const double md = static_cast<double>(w.size());
    for (double& x : w) x = (1.0 - gamma_) * x / total + gamma_ / md;
    return w;
  }

  ArmId select(Rng& rng) const {
    const auto p = probabilities();
    const double u = uniform01(rng);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
      acc += p[i];
      if (u < acc) return i;
    }
    return p.size() - 1;
  }

  /// Importance-weighted update of the chosen arm:
  /// w_a <- w_a exp(gamma (payoff / p_a) / m).
  void update(ArmId arm, double payoff) {
    if (!(payoff >= 0.0 && payoff <= 1.0)) throw std::invalid_argument("Exp3 payoff outside [0,1]");
    if (arm >= log_w_.size()) throw std::out_of_range("Exp3 arm out of range");
    const double p = probabilities()[arm];
    log_w_[arm] += gamma_ * (payoff / p) / static_cast<double>(log_w_.size());
    const double top = *std::max_element(log_w_.begin(), log_w_.end());
    if (top > 500.0) {
      for (double& x : log_w_) x -= top;
    }
  }

 private:
  std::vector<double> log_w_;
  double gamma_;
};

/// Online submodular maximization with K Exp3 instances: instance i picks
/// a_i, the union is played, and instance i is paid the marginal gain of
/// a_i over a_1..a_{i-1} under f_t(S) = max of observed outcomes.
class OnlineSubmodularMax final : public Policy {
 public:
  OnlineSubmodularMax(std::size_t m, std::size_t k, double gamma, std::uint64_t seed)
      : rng_(make_substream(seed, 0x05A1ULL)) {
    if (k == 0 || k > m) throw std::invalid_argument("OSM needs 1 <= K <= m");
    experts_.reserve(k);
    for (std::size_t i = 0; i < k; ++i) experts_.emplace_back(m, gamma);
  }

  SuperArm select(std::uint64_t t) override {
    detail::check_round(t, rounds_);
    draws_.clear();
    for (const auto& e : experts_) draws_.push_back(e.select(rng_));
    std::vector<ArmId> members = draws_;
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    return SuperArm(std::move(members));
  }

  void observe(std::uint64_t t, const SuperArm& played,
               std::span<const ArmOutcome> outcomes) override {
    detail::check_round(t, rounds_);
    detail::check_feedback(played, outcomes);
    last_gains_ = marginal_gains(draws_, outcomes);
    for (std::size_t i = 0; i < experts_.size(); ++i) experts_[i].update(draws_[i], last_gains_[i]);
    ++rounds_;
  }

  /// f(a_1..a_i) - f(a_1..a_{i-1}) for f = max of outcomes, f(empty) = 0.
  static std::vector<double> marginal_gains(std::span<const ArmId> draws,
                                            std::span<const ArmOutcome> outcomes) {
    std::vector<double> gains;
    gains.reserve(draws.size());
    double best = 0.0;
    for (ArmId a : draws) {
      const auto it = std::find_if(outcomes.begin(), outcomes.end(),
                                   [a](const ArmOutcome& o) { return o.arm == a; });
      if (it == outcomes.end()) throw std::invalid_argument("no outcome for drawn arm");
      const double next = std::max(best, it->value);
      gains.push_back(next - best);
      best = next;
    }
    return gains;
  }

  std::string name() const override { return "osm"; }

  const std::vector<Exp3>& experts() const noexcept { return experts_; }
  const std::vector<ArmId>& last_draws() const noexcept { return draws_; }
  const std::vector<double>& last_gains() const noexcept { return last_gains_; }

 private:
  Rng rng_;
  std::vector<Exp3> experts_;
  std::vector<ArmId> draws_;
  std::vector<double> last_gains_;
  std::uint64_t rounds_ = 0;
};

}  // namespace cmab

#endif  // CMAB_POLICY_HPP
