#ifndef CMAB_PTAS_HPP
#define CMAB_PTAS_HPP

// Signature-based approximation scheme for offline K-MAX.
//
// Each arm is rewritten as a max of Bernoullis, the Bernoullis are snapped
// onto the grid DS = {0, eps W, 2 eps W, ..., W/eps}, and the per-grid-point
// activation rates are quantized (in integer units of eps^4/m) into a
// signature. Sets with equal signatures have nearly equal expected maxima,
// so trying one representative per reachable set signature suffices.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "cmab/distribution.hpp"
#include "cmab/error.hpp"
#include "cmab/oracle.hpp"
#include "cmab/reward.hpp"

namespace cmab {

inline constexpr double kSignatureTableGuard = 1e7;

/// Nonzero points of DS. Index 0 is the value 0; indices 1..regular are
/// k eps W; when 1/eps^2 is not an integer, W/eps is appended as one more
/// index.
class PtasGrid {
 public:
  static PtasGrid make(double epsilon, double w) {
    if (!(epsilon > 0.0 && epsilon < 0.5)) throw std::invalid_argument("PTAS needs 0 < eps < 1/2");
    if (!(w > 0.0)) throw std::invalid_argument("PTAS needs W > 0");
    const double ratio = 1.0 / (epsilon * epsilon);
    const double n = std::floor(ratio + kValueTolerance);
    PtasGrid g;
    g.epsilon_ = epsilon;
    g.w_ = w;
    g.regular_ = static_cast<std::size_t>(n);
    g.extra_top_ = std::abs(ratio - n) > kValueTolerance;
    return g;
  }

  double epsilon() const noexcept { return epsilon_; }
  double w() const noexcept { return w_; }
  /// Number of nonzero grid points (signature length).
  std::size_t size() const noexcept { return regular_ + (extra_top_ ? 1 : 0); }
  /// |DS| including the point 0.
  std::size_t full_size() const noexcept { return size() + 1; }
  std::size_t top_index() const noexcept { return size(); }
  /// Largest index of the form k eps W.
  std::size_t regular() const noexcept { return regular_; }
  double threshold() const noexcept { return w_ / epsilon_; }

  double value(std::size_t k) const noexcept {
    if (extra_top_ && k == top_index()) return threshold();
    return static_cast<double>(k) * epsilon_ * w_;
  }

  /// value(k) / (W / eps), which lies in [0, 1].
  double scaled_value(std::size_t k) const noexcept {
    if (extra_top_ && k == top_index()) return 1.0;
    return std::min(1.0, static_cast<double>(k) * epsilon_ * epsilon_);
  }

  std::size_t index_of_scaled(double v) const {
    if (extra_top_ && v >= 1.0 - kValueTolerance) return top_index();
    const auto k = static_cast<std::size_t>(std::llround(v / (epsilon_ * epsilon_)));
    return std::min(k, regular_);
  }

 private:
  double epsilon_ = 0.0;
  double w_ = 0.0;
  std::size_t regular_ = 0;
  bool extra_top_ = false;
};

/// B(grid value at `index`, prob).
struct GridBernoulli {
  std::size_t index;
  double prob;
};

using DiscretizedArm = std::vector<GridBernoulli>;

/// Case 1 (v > W/eps): B(W/eps, E[Z] eps/W), mean preserving.
/// Case 2: value floored onto the eps W grid.
inline GridBernoulli discretize_bernoulli(const BernoulliComponent& z, const PtasGrid& grid) {
  if (z.value > grid.threshold()) {
    const double p = z.value * z.prob * grid.epsilon() / grid.w();
    return {grid.top_index(), std::min(p, 1.0)};
  }
  const double units = std::floor(z.value / (grid.epsilon() * grid.w()) + kValueTolerance);
  auto k = static_cast<std::size_t>(std::max(units, 0.0));
  k = std::min(k, grid.regular());
  return {k, z.prob};
}

inline std::vector<DiscretizedArm> ptas_discretize(std::span<const FiniteDistribution> dists,
                                                   const PtasGrid& grid) {
  std::vector<DiscretizedArm> out;
  out.reserve(dists.size());
  for (const auto& d : dists) {
    DiscretizedArm arm;
    for (const auto& z : bernoulli_decomposition(d)) arm.push_back(discretize_bernoulli(z, grid));
    out.push_back(std::move(arm));
  }
  return out;
}

inline std::vector<DiscretizedArm> ptas_discretize(std::span<const FiniteDistribution> dists,
                                                   double w, double epsilon) {
  return ptas_discretize(dists, PtasGrid::make(epsilon, w));
}

/// Law of max_j Z~_j as a distribution on the scaled grid (value / (W/eps)).
inline FiniteDistribution recompose_scaled(const DiscretizedArm& arm, const PtasGrid& grid) {
  const std::size_t h = grid.size();
  // stay[k] = prod over Bernoullis at index k of (1 - p).
  std::vector<double> stay(h + 1, 1.0);
  for (const auto& b : arm) stay[b.index] *= 1.0 - b.prob;
  std::vector<double> cdf(h + 1);
  double acc = 1.0;
  for (std::size_t k = h + 1; k-- > 0;) {
    cdf[k] = acc;
    acc *= stay[k];
  }
  std::vector<std::pair<double, double>> points;
  double prev = 0.0;
  for (std::size_t k = 0; k <= h; ++k) {
    points.emplace_back(grid.scaled_value(k), cdf[k] - prev);
    prev = cdf[k];
  }
  return FiniteDistribution::from_points(std::move(points));
}

/// E[max_{i in S} X~_i] on the original value scale.
inline double discretized_expected_max(std::span<const DiscretizedArm> arms, const SuperArm& s,
                                       const PtasGrid& grid) {
  std::vector<FiniteDistribution> scaled;
  scaled.reserve(s.size());
  for (ArmId i : s.members()) scaled.push_back(recompose_scaled(arms[i], grid));
  std::vector<ArmId> idx(s.size());
  for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
  return grid.threshold() * expected_kmax(scaled, SuperArm(std::move(idx)));
}

/// Integer signature vector in units of eps^4/m over the nonzero grid points.
struct Signature {
  std::vector<std::int64_t> units;
  double unit_size = 0.0;
  std::int64_t cap_units = 0;

  Signature& operator+=(const Signature& o) {
    for (std::size_t k = 0; k < units.size(); ++k) units[k] += o.units[k];
    return *this;
  }
  friend Signature operator+(Signature a, const Signature& b) { return a += b; }
  friend Signature operator-(Signature a, const Signature& b) {
    for (std::size_t k = 0; k < a.units.size(); ++k) a.units[k] -= b.units[k];
    return a;
  }
  friend bool operator==(const Signature& a, const Signature& b) { return a.units == b.units; }
};

inline double signature_unit(double epsilon, std::size_t m) {
  return std::pow(epsilon, 4) / static_cast<double>(m);
}

/// floor(ln(1/eps^4) / (eps^4/m)).
inline std::int64_t signature_cap_units(double epsilon, std::size_t m) {
  const double e4 = std::pow(epsilon, 4);
  return static_cast<std::int64_t>(std::floor(std::log(1.0 / e4) / (e4 / static_cast<double>(m))));
}

inline Signature zero_signature(const PtasGrid& grid, std::size_t m) {
  return {std::vector<std::int64_t>(grid.size(), 0), signature_unit(grid.epsilon(), m),
          signature_cap_units(grid.epsilon(), m)};
}

/// Coordinate units for activation rate q: min(floor(-ln(1-q) m/eps^4), cap).
inline std::int64_t signature_units(double q, double epsilon, std::size_t m) {
  const std::int64_t cap = signature_cap_units(epsilon, m);
  if (q >= 1.0) return cap;
  if (q <= 0.0) return 0;
  const double raw = -std::log1p(-q) / signature_unit(epsilon, m);
  if (raw >= static_cast<double>(cap)) return cap;
  return static_cast<std::int64_t>(std::floor(raw));
}

/// Signature of one discretized arm: recompose max_j Z~_j on DS, take its
/// Bernoulli decomposition {Y_k ~ B(value_k, q_k)} and quantize each q_k.
inline Signature signature_of_arm(const DiscretizedArm& arm, const PtasGrid& grid,
                                  std::size_t m) {
  Signature sig = zero_signature(grid, m);
  for (const auto& y : bernoulli_decomposition(recompose_scaled(arm, grid))) {
    const std::size_t k = grid.index_of_scaled(y.value);
    if (k == 0) continue;
    sig.units[k - 1] = signature_units(y.prob, grid.epsilon(), m);
  }
  return sig;
}

/// Val(sg) = E[max_k B_k], B_k ~ B(value_k, 1 - exp(-sg_k)).
inline double signature_value(const Signature& sg, const PtasGrid& grid) {
  std::vector<FiniteDistribution> bernoullis;
  for (std::size_t k = 1; k <= grid.size(); ++k) {
    const double p = 1.0 - std::exp(-static_cast<double>(sg.units[k - 1]) * sg.unit_size);
    if (p <= 0.0) continue;
    bernoullis.push_back(FiniteDistribution::from_points({{0.0, 1.0 - p}, {grid.scaled_value(k), p}}));
  }
  if (bernoullis.empty()) return 0.0;
  std::vector<ArmId> idx(bernoullis.size());
  for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
  return grid.threshold() * expected_kmax(bernoullis, SuperArm(std::move(idx)));
}

inline double signature_value(const Signature& sg, double epsilon, double w) {
  return signature_value(sg, PtasGrid::make(epsilon, w));
}

/// Exact-sum subset search: R[i][j][sg] = R[i][j-1][sg] or
/// R[i-1][j-1][sg - Sig(X_j)], evaluated lazily from the target with a memo
/// shared across queries.
class SignatureSetFinder {
 public:
  explicit SignatureSetFinder(std::vector<Signature> arm_signatures)
      : sigs_(std::move(arm_signatures)) {}

  /// A set of exactly `k` arms whose signatures sum to `target`. Backtracking
  /// prefers excluding the highest remaining arm, so lower indices win ties.
  std::optional<SuperArm> find(std::size_t k, const Signature& target) {
    if (!sigs_.empty()) {
      const std::int64_t limit = static_cast<std::int64_t>(k) * sigs_.front().cap_units;
      for (auto u : target.units) {
        if (u < 0 || u > limit) {
          throw std::invalid_argument("target signature coordinate outside [0, K*cap]");
        }
      }
    }
    if (!reachable(k, sigs_.size(), target.units)) return std::nullopt;
    std::vector<ArmId> members;
    std::vector<std::int64_t> rest = target.units;
    std::size_t i = k;
    for (std::size_t j = sigs_.size(); j > 0 && i > 0; --j) {
      if (reachable(i, j - 1, rest)) continue;
      members.push_back(j - 1);
      rest = subtract(rest, sigs_[j - 1].units);
      --i;
    }
    return SuperArm(std::move(members));
  }

  std::size_t memo_size() const noexcept { return memo_.size(); }

 private:
  static std::vector<std::int64_t> subtract(const std::vector<std::int64_t>& a,
                                            const std::vector<std::int64_t>& b) {
    std::vector<std::int64_t> out(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] - b[k];
    return out;
  }

  // Can `sg` be written as the signature sum of exactly i arms among the first j?
  bool reachable(std::size_t i, std::size_t j, const std::vector<std::int64_t>& sg) {
    if (std::any_of(sg.begin(), sg.end(), [](auto u) { return u < 0; })) return false;
    if (i == 0) return std::all_of(sg.begin(), sg.end(), [](auto u) { return u == 0; });
    if (j < i) return false;
    auto key = std::make_tuple(i, j, sg);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    const bool result =
        reachable(i, j - 1, sg) || reachable(i - 1, j - 1, subtract(sg, sigs_[j - 1].units));
    memo_.emplace(std::move(key), result);
    if (static_cast<double>(memo_.size()) > kSignatureTableGuard) {
      throw GuardError("signature DP exceeded 1e7 table entries; raise eps or shrink m");
    }
    return result;
  }

  std::vector<Signature> sigs_;
  std::map<std::tuple<std::size_t, std::size_t, std::vector<std::int64_t>>, bool> memo_;
};

inline std::optional<SuperArm> dp_find_set(std::span<const Signature> arm_signatures,
                                           std::size_t k, const Signature& target) {
  SignatureSetFinder finder(std::vector<Signature>(arm_signatures.begin(), arm_signatures.end()));
  return finder.find(k, target);
}

/// Every signature Sig(S) with |S| = k, via a forward pass over arms keyed
/// by (arms chosen, signature). Returned in lexicographic order. Throws
/// GuardError once the table holds more than `entry_limit` entries.
inline std::vector<Signature> reachable_set_signatures(std::span<const Signature> arm_signatures,
                                                       std::size_t k,
                                                       double entry_limit = kSignatureTableGuard) {
  if (arm_signatures.empty()) return {};
  const Signature zero{std::vector<std::int64_t>(arm_signatures.front().units.size(), 0),
                       arm_signatures.front().unit_size, arm_signatures.front().cap_units};
  std::vector<std::set<std::vector<std::int64_t>>> layers(k + 1);
  layers[0].insert(zero.units);
  double entries = 1.0;
  for (const auto& sig : arm_signatures) {
    for (std::size_t j = k; j > 0; --j) {
      for (const auto& prev : layers[j - 1]) {
        auto next = prev;
        for (std::size_t c = 0; c < next.size(); ++c) next[c] += sig.units[c];
        if (layers[j].insert(std::move(next)).second && ++entries > entry_limit) {
          throw GuardError("signature enumeration exceeded the table limit; raise eps or shrink m");
        }
      }
    }
  }
  std::vector<Signature> out;
  out.reserve(layers[k].size());
  for (const auto& units : layers[k]) out.push_back({units, zero.unit_size, zero.cap_units});
  return out;
}

struct PtasResult {
  SuperArm set;
  double value = 0.0;       // exact E[max] on the original arms
  double greedy_value = 0.0;  // W
  std::size_t candidates = 0;
};

/// Greedy seed W, discretization, signatures, one candidate per reachable
/// set signature, best candidate by exact expected max on the original arms.
inline PtasResult ptas_kmax_detailed(std::span<const FiniteDistribution> dists, std::size_t k,
                                     double epsilon) {
  const std::size_t m = dists.size();
  if (k == 0 || k > m) throw std::invalid_argument("PTAS needs 1 <= K <= m");
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw std::invalid_argument("PTAS needs 0 < eps < 1/2");
  const ScoredSet greedy = greedy_chain(dists, k, RewardSpec::kmax());
  PtasResult result{greedy.set, greedy.value, greedy.value, 0};
  if (!(greedy.value > 0.0)) return result;

  const PtasGrid grid = PtasGrid::make(epsilon, greedy.value);
  const auto disc = ptas_discretize(dists, grid);
  std::vector<Signature> sigs;
  sigs.reserve(m);
  for (const auto& arm : disc) sigs.push_back(signature_of_arm(arm, grid, m));

  SignatureSetFinder finder(sigs);
  bool found = false;
  for (const auto& sg : reachable_set_signatures(sigs, k)) {
    auto candidate = finder.find(k, sg);
    if (!candidate) continue;
    ++result.candidates;
    const double v = expected_kmax(dists, *candidate);
    if (!found || v > result.value + 1e-12 ||
        (std::abs(v - result.value) <= 1e-12 && *candidate < result.set)) {
      result.set = std::move(*candidate);
      result.value = v;
      found = true;
    }
  }
  return result;
}

inline SuperArm ptas_kmax(std::span<const FiniteDistribution> dists, std::size_t k,
                          double epsilon) {
  return ptas_kmax_detailed(dists, k, epsilon).set;
}

}  // namespace cmab

#endif  // CMAB_PTAS_HPP
