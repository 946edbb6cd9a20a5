#ifndef CMAB_ORACLE_HPP
#define CMAB_ORACLE_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cmab/distribution.hpp"
#include "cmab/error.hpp"
#include "cmab/reward.hpp"

namespace cmab {

inline constexpr double kCandidateGuard = 1e6;

/// The constraint family F: either all nonempty sets of at most K arms, or
/// an explicit list of super arms.
class FeasibleFamily {
 public:
  enum class Kind { CardinalityAtMost, ExplicitList };

  static FeasibleFamily cardinality(std::size_t k, std::size_t m) {
    if (k == 0 || m == 0 || k > m) {
      throw std::invalid_argument("cardinality family needs 1 <= K <= m");
    }
    return FeasibleFamily(Kind::CardinalityAtMost, k, m, {});
  }

  static FeasibleFamily explicit_list(std::vector<SuperArm> sets, std::size_t m) {
    if (sets.empty()) throw std::invalid_argument("explicit family is empty");
    std::vector<bool> covered(m, false);
    std::size_t k = 0;
    for (const auto& s : sets) {
      if (s.empty()) throw std::invalid_argument("explicit family holds an empty super arm");
      for (ArmId i : s.members()) {
        if (i >= m) throw std::invalid_argument("explicit family references arm " + std::to_string(i));
        covered[i] = true;
      }
      k = std::max(k, s.size());
    }
    if (std::find(covered.begin(), covered.end(), false) != covered.end()) {
      throw std::invalid_argument("every arm must appear in at least one super arm");
    }
    std::sort(sets.begin(), sets.end());
    sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
    return FeasibleFamily(Kind::ExplicitList, k, m, std::move(sets));
  }

  Kind kind() const noexcept { return kind_; }
  /// max |S| over the family.
  std::size_t max_size() const noexcept { return k_; }
  std::size_t arm_count() const noexcept { return m_; }
  const std::vector<SuperArm>& sets() const noexcept { return sets_; }

  double candidate_count() const {
    if (kind_ == Kind::ExplicitList) return static_cast<double>(sets_.size());
    double total = 0.0;
    double binom = 1.0;
    for (std::size_t j = 1; j <= k_; ++j) {
      binom = binom * static_cast<double>(m_ - j + 1) / static_cast<double>(j);
      total += binom;
    }
    return total;
  }

  /// Visits every feasible super arm in lexicographic order of members.
  void for_each(const std::function<void(const SuperArm&)>& visit) const {
    if (kind_ == Kind::ExplicitList) {
      for (const auto& s : sets_) visit(s);
      return;
    }
    std::vector<ArmId> current;
    std::function<void(ArmId)> extend = [&](ArmId from) {
      for (ArmId a = from; a < m_; ++a) {
        current.push_back(a);
        visit(SuperArm(current));
        if (current.size() < k_) extend(a + 1);
        current.pop_back();
      }
    };
    extend(0);
  }

  /// Lexicographically smallest feasible super arm containing `arm`.
  SuperArm init_super_arm(ArmId arm) const {
    if (arm >= m_) throw std::out_of_range("arm index out of range");
    if (kind_ == Kind::CardinalityAtMost) return SuperArm{arm};
    for (const auto& s : sets_) {
      if (s.contains(arm)) return s;
    }
    throw std::logic_error("arm not covered by family");
  }

  bool contains(const SuperArm& s) const {
    if (s.empty()) return false;
    if (kind_ == Kind::CardinalityAtMost) {
      return s.size() <= k_ && s.members().back() < m_;
    }
    return std::binary_search(sets_.begin(), sets_.end(), s);
  }

 private:
  FeasibleFamily(Kind kind, std::size_t k, std::size_t m, std::vector<SuperArm> sets)
      : kind_(kind), k_(k), m_(m), sets_(std::move(sets)) {}

  Kind kind_;
  std::size_t k_;
  std::size_t m_;
  std::vector<SuperArm> sets_;
};

struct ScoredSet {
  SuperArm set;
  double value = 0.0;
};

/// argmax of `value` over the family; ties go to the lexicographically
/// smallest member set.
inline ScoredSet exhaustive_search(const FeasibleFamily& family,
                                   const std::function<double(const SuperArm&)>& value) {
  const double count = family.candidate_count();
  if (count > kCandidateGuard) {
    throw GuardError("exhaustive oracle would enumerate " + std::to_string(count) +
                     " super arms (guard 1e6)");
  }
  ScoredSet best;
  bool found = false;
  family.for_each([&](const SuperArm& s) {
    const double v = value(s);
    if (!found || v > best.value + 1e-12) {
      best = {s, v};
      found = true;
    }
  });
  return best;
}

inline SuperArm exhaustive_oracle(std::span<const FiniteDistribution> dists,
                                  const FeasibleFamily& family, const RewardSpec& spec) {
  return exhaustive_search(family, [&](const SuperArm& s) {
           return expected_reward(dists, s, spec);
         }).set;
}

/// Greedy chain under a cardinality budget: each step adds the arm with
/// the largest r(S + j), lowest index on ties.
inline ScoredSet greedy_chain(std::span<const FiniteDistribution> dists, std::size_t k,
                              const RewardSpec& spec) {
  const std::size_t m = dists.size();
  if (k == 0 || k > m) throw std::invalid_argument("greedy needs 1 <= K <= m");
  ScoredSet current;
  if (spec.kind() == RewardKind::KMax) {
    // Carry the law of the running max so each candidate costs one merge.
    std::optional<FiniteDistribution> running;
    for (std::size_t step = 0; step < k; ++step) {
      ArmId best_arm = 0;
      double best_value = 0.0;
      bool found = false;
      for (ArmId j = 0; j < m; ++j) {
        if (current.set.contains(j)) continue;
        double v = 0.0;
        if (running) {
          const FiniteDistribution* pair[] = {&*running, &dists[j]};
          detail::sweep_max(pair, [&](double x, double p) { v += x * p; });
        } else {
          v = dists[j].mean();
        }
        if (!found || v > best_value + 1e-12) {
          best_arm = j;
          best_value = v;
          found = true;
        }
      }
      running = running ? max_distribution(*running, dists[best_arm]) : dists[best_arm];
      current = {current.set.with(best_arm), best_value};
    }
    return current;
  }
  for (std::size_t step = 0; step < k; ++step) {
    ScoredSet best;
    bool found = false;
    for (ArmId j = 0; j < m; ++j) {
      if (current.set.contains(j)) continue;
      SuperArm candidate = current.set.with(j);
      const double v = expected_reward(dists, candidate, spec);
      if (!found || v > best.value + 1e-12) {
        best = {std::move(candidate), v};
        found = true;
      }
    }
    current = std::move(best);
  }
  return current;
}

inline SuperArm greedy_kmax(std::span<const FiniteDistribution> dists, std::size_t k) {
  return greedy_chain(dists, k, RewardSpec::kmax()).set;
}

}  // namespace cmab

#endif  // CMAB_ORACLE_HPP
