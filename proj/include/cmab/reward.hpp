#ifndef CMAB_REWARD_HPP
#define CMAB_REWARD_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmab/distribution.hpp"
#include "cmab/error.hpp"

namespace cmab {

using ArmId = std::size_t;

/// A set of base arms played together; members are kept sorted.
class SuperArm {
 public:
  SuperArm() = default;
  explicit SuperArm(std::vector<ArmId> members) : members_(std::move(members)) {
    std::sort(members_.begin(), members_.end());
    if (std::adjacent_find(members_.begin(), members_.end()) != members_.end()) {
      throw std::invalid_argument("super arm has duplicate members");
    }
  }
  SuperArm(std::initializer_list<ArmId> members) : SuperArm(std::vector<ArmId>(members)) {}

  const std::vector<ArmId>& members() const noexcept { return members_; }
  std::size_t size() const noexcept { return members_.size(); }
  bool empty() const noexcept { return members_.empty(); }
  bool contains(ArmId arm) const {
    return std::binary_search(members_.begin(), members_.end(), arm);
  }

  SuperArm with(ArmId arm) const {
    auto m = members_;
    m.push_back(arm);
    return SuperArm(std::move(m));
  }

  std::string to_string() const {
    std::string s = "{";
    for (std::size_t i = 0; i < members_.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(members_[i]);
    }
    return s + "}";
  }

  friend auto operator<=>(const SuperArm&, const SuperArm&) = default;

 private:
  std::vector<ArmId> members_;
};

/// Monotone utility u on [0, K] for EUM-style rewards u(sum of outcomes).
class Utility {
 public:
  enum class Kind { Identity, Square, Sqrt, SaturatingExp, Tabulated };

  static Utility identity() { return Utility(Kind::Identity); }
  static Utility square() { return Utility(Kind::Square); }
  static Utility sqrt() { return Utility(Kind::Sqrt); }
  /// 1 - exp(-y).
  static Utility saturating_exp() { return Utility(Kind::SaturatingExp); }
  /// Piecewise-linear interpolation through (xs, ys), constant outside.
  static Utility tabulated(std::vector<double> xs, std::vector<double> ys) {
    if (xs.size() < 2 || xs.size() != ys.size()) {
      throw std::invalid_argument("tabulated utility needs >= 2 matching points");
    }
    for (std::size_t i = 1; i < xs.size(); ++i) {
      if (!(xs[i] > xs[i - 1])) throw std::invalid_argument("tabulated utility xs must ascend");
    }
    Utility u(Kind::Tabulated);
    u.xs_ = std::move(xs);
    u.ys_ = std::move(ys);
    return u;
  }

  static Utility from_name(const std::string& name) {
    if (name == "identity") return identity();
    if (name == "square") return square();
    if (name == "sqrt") return sqrt();
    if (name == "saturating_exp") return saturating_exp();
    throw ConfigError("unknown utility '" + name + "'");
  }

  Kind kind() const noexcept { return kind_; }

  double operator()(double y) const {
    switch (kind_) {
      case Kind::Identity: return y;
      case Kind::Square: return y * y;
      case Kind::Sqrt: return std::sqrt(std::max(y, 0.0));
      case Kind::SaturatingExp: return 1.0 - std::exp(-y);
      case Kind::Tabulated: {
        if (y <= xs_.front()) return ys_.front();
        if (y >= xs_.back()) return ys_.back();
        const auto it = std::upper_bound(xs_.begin(), xs_.end(), y);
        const auto k = static_cast<std::size_t>(it - xs_.begin());
        const double w = (y - xs_[k - 1]) / (xs_[k] - xs_[k - 1]);
        return ys_[k - 1] + w * (ys_[k] - ys_[k - 1]);
      }
    }
    return 0.0;
  }

 private:
  explicit Utility(Kind kind) : kind_(kind) {}
  Kind kind_;
  std::vector<double> xs_;
  std::vector<double> ys_;
};

enum class RewardKind { KMax, UtilityOfSum, LinearSum };

/// Which reward R(x, S) is in force, with its bound M and Lipschitz constant C.
class RewardSpec {
 public:
  static RewardSpec kmax() { return RewardSpec(RewardKind::KMax, Utility::identity(), 1.0, 1.0); }

  static RewardSpec linear_sum(double bound_m, double lipschitz_c = 1.0) {
    return RewardSpec(RewardKind::LinearSum, Utility::identity(), bound_m, lipschitz_c);
  }

  /// `max_sum` is the largest attainable sum (K); monotonicity of u is
  /// checked on a grid over [0, max_sum].
  static RewardSpec utility_of_sum(Utility u, double bound_m, double lipschitz_c,
                                   double max_sum) {
    constexpr int kGrid = 1000;
    double prev = u(0.0);
    for (int i = 1; i <= kGrid; ++i) {
      const double y = u(max_sum * i / kGrid);
      if (y < prev - 1e-12) throw std::invalid_argument("utility is not non-decreasing");
      prev = y;
    }
    return RewardSpec(RewardKind::UtilityOfSum, std::move(u), bound_m, lipschitz_c);
  }

  RewardKind kind() const noexcept { return kind_; }
  const Utility& utility() const noexcept { return utility_; }
  double bound_m() const noexcept { return bound_m_; }
  double lipschitz_c() const noexcept { return lipschitz_c_; }

 private:
  RewardSpec(RewardKind kind, Utility u, double bound_m, double lipschitz_c)
      : kind_(kind), utility_(std::move(u)), bound_m_(bound_m), lipschitz_c_(lipschitz_c) {
    if (!(bound_m_ > 0.0)) throw std::invalid_argument("reward bound M must be positive");
    if (!(lipschitz_c_ > 0.0)) throw std::invalid_argument("Lipschitz constant C must be positive");
  }

  RewardKind kind_;
  Utility utility_;
  double bound_m_;
  double lipschitz_c_;
};

/// R(x, S); `outcomes[k]` is the outcome of `s.members()[k]`.
inline double realized_reward(std::span<const double> outcomes, const SuperArm& s,
                              const RewardSpec& spec) {
  if (s.empty()) throw std::invalid_argument("reward of an empty super arm");
  if (outcomes.size() != s.size()) {
    throw std::invalid_argument("outcome count does not match super arm size");
  }
  switch (spec.kind()) {
    case RewardKind::KMax: return *std::max_element(outcomes.begin(), outcomes.end());
    case RewardKind::LinearSum: return std::accumulate(outcomes.begin(), outcomes.end(), 0.0);
    case RewardKind::UtilityOfSum:
      return spec.utility()(std::accumulate(outcomes.begin(), outcomes.end(), 0.0));
  }
  return 0.0;
}

namespace detail {

/// Sweeps the merged supports of `arms` in increasing order and reports,
/// for every distinct value v, Pr[max = v]. Values within kValueTolerance
/// of each other are treated as one point.
template <typename Visit>
void sweep_max(std::span<const FiniteDistribution* const> arms, Visit&& visit) {
  const std::size_t n = arms.size();
  std::vector<std::size_t> pos(n, 0);
  for (;;) {
    double v = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
      if (pos[k] < arms[k]->size()) v = std::min(v, arms[k]->support()[pos[k]]);
    }
    if (v == std::numeric_limits<double>::infinity()) return;
    // Pr[max = v] = prod_k Pr[X_k <= v] - prod_k Pr[X_k < v].
    double at_most_all = 1.0;
    double below_all = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      const auto& cum = arms[k]->cumulative();
      const double below = pos[k] == 0 ? 0.0 : cum[pos[k] - 1];
      double at_most = below;
      if (pos[k] < arms[k]->size() && arms[k]->support()[pos[k]] <= v + kValueTolerance) {
        at_most = cum[pos[k]];
        ++pos[k];
      }
      at_most_all *= at_most;
      below_all *= below;
    }
    visit(v, at_most_all - below_all);
  }
}

}  // namespace detail

/// E[max_{i in S} X_i] for independent finite arms, exact up to rounding.
inline double expected_kmax(std::span<const FiniteDistribution> dists, const SuperArm& s) {
  if (s.empty()) throw std::invalid_argument("expected_kmax of an empty super arm");
  std::vector<const FiniteDistribution*> arms;
  arms.reserve(s.size());
  for (ArmId i : s.members()) {
    if (i >= dists.size()) throw std::out_of_range("arm index out of range");
    arms.push_back(&dists[i]);
  }
  double total = 0.0;
  detail::sweep_max(arms, [&](double v, double p) { total += v * p; });
  return total;
}

/// Distribution of max(X_a, X_b) for independent finite arms.
inline FiniteDistribution max_distribution(const FiniteDistribution& a, const FiniteDistribution& b) {
  const FiniteDistribution* arms[] = {&a, &b};
  std::vector<std::pair<double, double>> points;
  points.reserve(a.size() + b.size());
  detail::sweep_max(arms, [&](double v, double p) {
    if (p > 0.0) points.emplace_back(v, p);
  });
  return FiniteDistribution::from_points(std::move(points));
}

/// Gauss-Legendre nodes and weights on [-1, 1]; exact for degree 2n-1.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(std::size_t n) {
  std::vector<double> nodes(n), weights(n);
  for (std::size_t i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[i] = x;
    weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return {nodes, weights};
}

/// Exact E[max] = integral over [0,1] of (1 - prod F_i) for piecewise
/// densities: on each merged segment the integrand is a polynomial of
/// degree |S|, integrated by Gauss-Legendre with ceil((|S|+1)/2) nodes.
inline double expected_kmax_continuous(std::span<const PiecewiseDensity> dists,
                                       const SuperArm& s) {
  if (s.empty()) throw std::invalid_argument("expected_kmax of an empty super arm");
  std::vector<double> cuts;
  for (ArmId i : s.members()) {
    if (i >= dists.size()) throw std::out_of_range("arm index out of range");
    cuts.insert(cuts.end(), dists[i].breakpoints().begin(), dists[i].breakpoints().end());
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  const auto [nodes, weights] = gauss_legendre((s.size() + 2) / 2);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k];
    const double b = cuts[k + 1];
    const double half = (b - a) / 2.0;
    const double mid = (a + b) / 2.0;
    for (std::size_t q = 0; q < nodes.size(); ++q) {
      const double x = mid + half * nodes[q];
      double prod = 1.0;
      for (ArmId i : s.members()) prod *= dists[i].cdf(x);
      total += weights[q] * half * (1.0 - prod);
    }
  }
  return total;
}

inline constexpr double kSumSupportGuard = 1e6;

/// Exact distribution of the sum of member outcomes as ascending
/// (value, probability) pairs, with sums snapped to a 1e-9 grid.
/// Throws GuardError once the support product reaches 1e6.
inline std::vector<std::pair<double, double>> sum_distribution(
    std::span<const FiniteDistribution> dists, const SuperArm& s) {
  double product = 1.0;
  for (ArmId i : s.members()) {
    if (i >= dists.size()) throw std::out_of_range("arm index out of range");
    product *= static_cast<double>(dists[i].size());
  }
  if (product >= kSumSupportGuard) {
    throw GuardError("sum convolution would visit " + std::to_string(product) +
                     " support points (guard 1e6)");
  }
  constexpr double kGrid = 1e9;
  std::map<std::int64_t, double> acc{{0, 1.0}};
  for (ArmId i : s.members()) {
    std::map<std::int64_t, double> next;
    for (const auto& [key, p] : acc) {
      for (std::size_t k = 0; k < dists[i].size(); ++k) {
        const auto step = static_cast<std::int64_t>(std::llround(dists[i].support()[k] * kGrid));
        next[key + step] += p * dists[i].probs()[k];
      }
    }
    acc = std::move(next);
  }
  std::vector<std::pair<double, double>> points;
  points.reserve(acc.size());
  for (const auto& [key, p] : acc) points.emplace_back(static_cast<double>(key) / kGrid, p);
  return points;
}

/// r_D(S) = E[R(X, S)] for independent finite arms.
inline double expected_reward(std::span<const FiniteDistribution> dists, const SuperArm& s,
                              const RewardSpec& spec) {
  if (s.empty()) throw std::invalid_argument("expected reward of an empty super arm");
  switch (spec.kind()) {
    case RewardKind::KMax: return expected_kmax(dists, s);
    case RewardKind::LinearSum: {
      double total = 0.0;
      for (ArmId i : s.members()) {
        if (i >= dists.size()) throw std::out_of_range("arm index out of range");
        total += dists[i].mean();
      }
      return total;
    }
    case RewardKind::UtilityOfSum: {
      double total = 0.0;
      for (const auto& [y, p] : sum_distribution(dists, s)) total += spec.utility()(y) * p;
      return total;
    }
  }
  return 0.0;
}

}  // namespace cmab

#endif  // CMAB_REWARD_HPP
