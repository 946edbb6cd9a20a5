#ifndef CMAB_TESTS_GENERATORS_HPP
#define CMAB_TESTS_GENERATORS_HPP

// Seeded instance generators and brute-force reference computations shared
// by the unit and acceptance tests. None of these call into the code under
// test except to build distribution objects.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "cmab/distribution.hpp"
#include "cmab/reward.hpp"

namespace testgen {

using cmab::FiniteDistribution;
using cmab::SuperArm;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }
  std::size_t index(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }
  bool coin() { return index(0, 1) == 1; }
  std::mt19937_64& engine() { return rng_; }

  /// Distinct support values on a 1/100 grid (so sums stay well separated)
  /// with strictly positive masses.
  FiniteDistribution finite(std::size_t max_support, bool grid = true) {
    const std::size_t n = index(1, max_support);
    std::set<double> values;
    while (values.size() < n) {
      values.insert(grid ? static_cast<double>(index(0, 100)) / 100.0 : uniform());
    }
    std::vector<double> support(values.begin(), values.end());
    std::vector<double> weights(n);
    double total = 0.0;
    for (auto& w : weights) {
      w = 0.05 + uniform();
      total += w;
    }
    std::vector<double> probs(n);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      probs[i] = weights[i] / total;
      acc += probs[i];
    }
    probs[n - 1] = 1.0 - acc;
    return cmab::make_finite(support, probs);
  }

  std::vector<FiniteDistribution> product(std::size_t m, std::size_t max_support) {
    std::vector<FiniteDistribution> out;
    out.reserve(m);
    for (std::size_t i = 0; i < m; ++i) out.push_back(finite(max_support));
    return out;
  }

  SuperArm subset(std::size_t m, std::size_t max_size) {
    const std::size_t k = index(1, std::min(m, max_size));
    std::vector<cmab::ArmId> all(m);
    for (std::size_t i = 0; i < m; ++i) all[i] = i;
    std::shuffle(all.begin(), all.end(), rng_);
    all.resize(k);
    return SuperArm(all);
  }

 private:
  std::mt19937_64 rng_;
};

/// Joint outcome enumeration over the members of `s`: calls visit(values,
/// probability) once per joint support point.
template <typename Visit>
void enumerate_joint(const std::vector<FiniteDistribution>& dists, const SuperArm& s,
                     Visit&& visit) {
  const auto& members = s.members();
  std::vector<std::size_t> idx(members.size(), 0);
  std::vector<double> values(members.size());
  for (;;) {
    double p = 1.0;
    for (std::size_t k = 0; k < members.size(); ++k) {
      const auto& d = dists[members[k]];
      values[k] = d.support()[idx[k]];
      p *= d.probs()[idx[k]];
    }
    visit(values, p);
    std::size_t k = 0;
    while (k < members.size()) {
      if (++idx[k] < dists[members[k]].size()) break;
      idx[k] = 0;
      ++k;
    }
    if (k == members.size()) return;
  }
}

inline double brute_expected_max(const std::vector<FiniteDistribution>& dists, const SuperArm& s) {
  double total = 0.0;
  enumerate_joint(dists, s, [&](const std::vector<double>& v, double p) {
    total += *std::max_element(v.begin(), v.end()) * p;
  });
  return total;
}

template <typename F>
double brute_expected(const std::vector<FiniteDistribution>& dists, const SuperArm& s, F&& reward) {
  double total = 0.0;
  enumerate_joint(dists, s, [&](const std::vector<double>& v, double p) { total += reward(v) * p; });
  return total;
}

/// Every subset of {0..m-1} with 1 <= |S| <= k.
inline std::vector<SuperArm> all_subsets(std::size_t m, std::size_t k) {
  std::vector<SuperArm> out;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << m); ++mask) {
    std::vector<cmab::ArmId> members;
    for (std::size_t i = 0; i < m; ++i) {
      if (mask >> i & 1U) members.push_back(i);
    }
    if (members.size() <= k) out.emplace_back(members);
  }
  return out;
}

inline double brute_opt_kmax(const std::vector<FiniteDistribution>& dists, std::size_t k) {
  double best = 0.0;
  for (const auto& s : all_subsets(dists.size(), k)) best = std::max(best, brute_expected_max(dists, s));
  return best;
}

/// E[max] of independent Bernoullis B(value_k, prob_k) by enumerating all
/// 2^n activation patterns.
inline double brute_bernoulli_max(const std::vector<std::pair<double, double>>& bern) {
  const std::size_t n = bern.size();
  double total = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    double p = 1.0;
    double best = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (mask >> k & 1U) {
        p *= bern[k].second;
        best = std::max(best, bern[k].first);
      } else {
        p *= 1.0 - bern[k].second;
      }
    }
    total += p * best;
  }
  return total;
}

/// Law of max of independent Bernoullis, as value -> mass.
inline std::map<double, long double> brute_bernoulli_max_law(
    const std::vector<std::pair<double, double>>& bern) {
  const std::size_t n = bern.size();
  std::map<double, long double> law;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    long double p = 1.0L;
    double best = 0.0;
    bool any = false;
    for (std::size_t k = 0; k < n; ++k) {
      if (mask >> k & 1U) {
        p *= bern[k].second;
        best = any ? std::max(best, bern[k].first) : bern[k].first;
        any = true;
      } else {
        p *= 1.0L - bern[k].second;
      }
    }
    if (p > 0.0L) law[any ? best : 0.0] += p;
  }
  return law;
}


/// A distribution and a dominating copy obtained by moving random portions
/// of mass to strictly higher grid values, with the exact CDF gap
/// Lambda = sup_x (F(x) - F'(x)).
struct DominatingPair {
  FiniteDistribution base;
  FiniteDistribution raised;
  double gap;
};

inline DominatingPair dominating_pair(Gen& gen, std::size_t max_support) {
  const FiniteDistribution base = gen.finite(max_support);
  std::map<double, double> mass;
  for (std::size_t j = 0; j < base.size(); ++j) mass[base.support()[j]] += base.probs()[j];
  std::map<double, double> raised;
  for (const auto& [v, p] : mass) {
    const double moved = gen.coin() ? p * gen.uniform() : 0.0;
    raised[v] += p - moved;
    if (moved > 0.0) {
      const std::size_t lo = static_cast<std::size_t>(std::llround(v * 100.0)) + 1;
      const double target = lo > 100 ? 1.0 : static_cast<double>(gen.index(lo, 100)) / 100.0;
      raised[target] += moved;
    }
  }
  std::vector<double> support, probs;
  for (const auto& [v, p] : raised) {
    if (p > 0.0) {
      support.push_back(v);
      probs.push_back(p);
    }
  }
  double total = 0.0;
  for (double p : probs) total += p;
  for (double& p : probs) p /= total;
  FiniteDistribution r = cmab::make_finite(support, probs);
  std::set<double> grid(base.support().begin(), base.support().end());
  grid.insert(r.support().begin(), r.support().end());
  double gap = 0.0;
  for (double x : grid) gap = std::max(gap, base.cdf(x) - r.cdf(x));
  return {base, std::move(r), gap};
}

}  // namespace testgen

#endif  // CMAB_TESTS_GENERATORS_HPP
