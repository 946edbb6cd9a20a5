#ifndef CMAB_DISTRIBUTION_HPP
#define CMAB_DISTRIBUTION_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cmab/rng.hpp"

namespace cmab {

inline constexpr double kMassTolerance = 1e-12;
inline constexpr double kValueTolerance = 1e-9;

/// Discrete distribution on [0, 1] with finite support.
///
/// Support is strictly ascending with every mass positive. CDF queries
/// treat values within kValueTolerance of a support point as equal to it.
class FiniteDistribution {
 public:
  /// Validating constructor. Exactly equal support values are merged and
  /// zero masses dropped; distinct values closer than kValueTolerance are rejected, as are
  /// values outside [0, 1], negative masses and masses not summing to 1.
  static FiniteDistribution make(std::span<const double> support,
                                 std::span<const double> probs) {
    if (support.size() != probs.size() || support.empty()) {
      throw std::invalid_argument("support and probs must have the same nonzero length");
    }
    std::vector<std::pair<double, double>> points;
    points.reserve(support.size());
    double total = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) {
      const double v = support[i];
      const double p = probs[i];
      if (!(v >= 0.0 && v <= 1.0)) {
        throw std::invalid_argument("support value " + std::to_string(v) + " outside [0,1]");
      }
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw std::invalid_argument("masses must be nonnegative and finite");
      }
      total += p;
      points.emplace_back(v, p);
    }
    if (std::abs(total - 1.0) > kMassTolerance) {
      throw std::invalid_argument("masses sum to " + std::to_string(total) + ", expected 1");
    }
    std::stable_sort(points.begin(), points.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::pair<double, double>> merged;
    for (const auto& [v, p] : points) {
      if (!merged.empty() && merged.back().first == v) {
        merged.back().second += p;
      } else {
        if (!merged.empty() && v - merged.back().first < kValueTolerance) {
          throw std::invalid_argument("distinct support values closer than 1e-9");
        }
        merged.emplace_back(v, p);
      }
    }
    std::erase_if(merged, [](const auto& point) { return point.second == 0.0; });
    return FiniteDistribution(std::move(merged), total);
  }

  /// Trusted construction for internally generated distributions: sorts,
  /// merges values within kValueTolerance onto the first of them and drops
  /// zero masses. Masses are renormalized to sum to one.
  static FiniteDistribution from_points(std::vector<std::pair<double, double>> points) {
    std::stable_sort(points.begin(), points.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::pair<double, double>> merged;
    double total = 0.0;
    for (const auto& [v, p] : points) {
      if (!(p > 0.0)) continue;
      total += p;
      if (!merged.empty() && v - merged.back().first < kValueTolerance) {
        merged.back().second += p;
      } else {
        merged.emplace_back(std::clamp(v, 0.0, 1.0), p);
      }
    }
    if (merged.empty()) {
      throw std::invalid_argument("distribution has no positive mass");
    }
    return FiniteDistribution(std::move(merged), total);
  }

  static FiniteDistribution point_mass(double v) {
    const double s[] = {v};
    const double p[] = {1.0};
    return make(s, p);
  }

  const std::vector<double>& support() const noexcept { return support_; }
  const std::vector<double>& probs() const noexcept { return probs_; }
  /// Running sums of probs(); the last entry is exactly 1.
  const std::vector<double>& cumulative() const noexcept { return cumulative_; }
  std::size_t size() const noexcept { return support_.size(); }

  /// Pr[X <= x].
  double cdf(double x) const noexcept {
    const auto it = std::upper_bound(support_.begin(), support_.end(), x + kValueTolerance);
    const auto k = static_cast<std::size_t>(it - support_.begin());
    if (k == 0) return 0.0;
    if (k == support_.size()) return 1.0;
    return cumulative_[k - 1];
  }

  /// Pr[X < x].
  double cdf_below(double x) const noexcept {
    const auto it = std::lower_bound(support_.begin(), support_.end(), x - kValueTolerance);
    const auto k = static_cast<std::size_t>(it - support_.begin());
    if (k == 0) return 0.0;
    if (k == support_.size()) return 1.0;
    return cumulative_[k - 1];
  }

  /// Pr[X = x].
  double mass_at(double x) const noexcept {
    const auto it = std::lower_bound(support_.begin(), support_.end(), x - kValueTolerance);
    if (it == support_.end() || *it > x + kValueTolerance) return 0.0;
    return probs_[static_cast<std::size_t>(it - support_.begin())];
  }

  double mean() const noexcept {
    double m = 0.0;
    for (std::size_t i = 0; i < support_.size(); ++i) m += support_[i] * probs_[i];
    return m;
  }

  /// Inverse-CDF draw: returns v_k with F(v_{k-1}) <= u < F(v_k).
  double sample(Rng& rng) const {
    const double u = uniform01(rng);
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end() - 1, u);
    return support_[static_cast<std::size_t>(it - cumulative_.begin())];
  }

 private:
  FiniteDistribution(std::vector<std::pair<double, double>> points, double total) {
    support_.reserve(points.size());
    probs_.reserve(points.size());
    cumulative_.reserve(points.size());
    double acc = 0.0;
    for (const auto& [v, p] : points) {
      support_.push_back(v);
      probs_.push_back(p / total);
      acc += p / total;
      cumulative_.push_back(acc);
    }
    cumulative_.back() = 1.0;
  }

  std::vector<double> support_;
  std::vector<double> probs_;
  std::vector<double> cumulative_;
};

inline FiniteDistribution make_finite(std::span<const double> support,
                                      std::span<const double> probs) {
  return FiniteDistribution::make(support, probs);
}

/// Piecewise-constant density on [0, 1].
class PiecewiseDensity {
 public:
  /// `breakpoints` runs from 0 to 1 ascending; `densities[k]` applies on
  /// (breakpoints[k], breakpoints[k+1]].
  static PiecewiseDensity make(std::vector<double> breakpoints, std::vector<double> densities) {
    if (breakpoints.size() < 2 || densities.size() + 1 != breakpoints.size()) {
      throw std::invalid_argument("need n+1 breakpoints for n density segments");
    }
    if (breakpoints.front() != 0.0 || breakpoints.back() != 1.0) {
      throw std::invalid_argument("breakpoints must start at 0 and end at 1");
    }
    double total = 0.0;
    for (std::size_t k = 0; k < densities.size(); ++k) {
      if (!(breakpoints[k + 1] > breakpoints[k])) {
        throw std::invalid_argument("breakpoints must be strictly ascending");
      }
      if (!(densities[k] >= 0.0) || !std::isfinite(densities[k])) {
        throw std::invalid_argument("densities must be nonnegative and finite");
      }
      total += densities[k] * (breakpoints[k + 1] - breakpoints[k]);
    }
    if (std::abs(total - 1.0) > kMassTolerance) {
      throw std::invalid_argument("density integrates to " + std::to_string(total) + ", expected 1");
    }
    return PiecewiseDensity(std::move(breakpoints), std::move(densities));
  }

  static PiecewiseDensity uniform() { return make({0.0, 1.0}, {1.0}); }

  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
  const std::vector<double>& densities() const noexcept { return densities_; }

  double cdf(double x) const noexcept {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
    const auto k = static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
    return cumulative_[k] + densities_[k] * (x - breakpoints_[k]);
  }

  double mean() const noexcept {
    double m = 0.0;
    for (std::size_t k = 0; k < densities_.size(); ++k) {
      const double a = breakpoints_[k];
      const double b = breakpoints_[k + 1];
      m += densities_[k] * (b * b - a * a) / 2.0;
    }
    return m;
  }

  double sample(Rng& rng) const {
    const double u = uniform01(rng);
    std::size_t k = 0;
    while (k + 1 < densities_.size() && cumulative_[k + 1] <= u) ++k;
    while (densities_[k] == 0.0 && k + 1 < densities_.size()) ++k;
    const double x = breakpoints_[k] + (u - cumulative_[k]) / densities_[k];
    return std::clamp(x, breakpoints_[k], breakpoints_[k + 1]);
  }

 private:
  PiecewiseDensity(std::vector<double> breakpoints, std::vector<double> densities)
      : breakpoints_(std::move(breakpoints)), densities_(std::move(densities)) {
    cumulative_.assign(breakpoints_.size(), 0.0);
    for (std::size_t k = 0; k < densities_.size(); ++k) {
      cumulative_[k + 1] = cumulative_[k] + densities_[k] * (breakpoints_[k + 1] - breakpoints_[k]);
    }
  }

  std::vector<double> breakpoints_;
  std::vector<double> densities_;
  std::vector<double> cumulative_;
};

using ArmDistribution = std::variant<FiniteDistribution, PiecewiseDensity>;

inline double sample(const FiniteDistribution& d, Rng& rng) { return d.sample(rng); }
inline double sample(const PiecewiseDensity& d, Rng& rng) { return d.sample(rng); }
inline double sample(const ArmDistribution& d, Rng& rng) {
  return std::visit([&](const auto& x) { return x.sample(rng); }, d);
}

inline double mean(const ArmDistribution& d) {
  return std::visit([](const auto& x) { return x.mean(); }, d);
}

/// Observation record of one arm: sorted value -> multiplicity.
class EmpiricalCdf {
 public:
  void add(double x) {
    if (!(x >= 0.0 && x <= 1.0)) {
      throw std::invalid_argument("observation " + std::to_string(x) + " outside [0,1]");
    }
    auto it = counts_.lower_bound(x - kValueTolerance);
    if (it != counts_.end() && it->first <= x + kValueTolerance) {
      ++it->second;
    } else {
      counts_.emplace(x, 1);
    }
    ++count_;
  }

  std::uint64_t count() const noexcept { return count_; }
  const std::map<double, std::uint64_t>& counts() const noexcept { return counts_; }

  double cdf(double x) const noexcept {
    if (count_ == 0) return 0.0;
    std::uint64_t below = 0;
    for (auto it = counts_.begin(); it != counts_.end() && it->first <= x + kValueTolerance; ++it) {
      below += it->second;
    }
    return static_cast<double>(below) / static_cast<double>(count_);
  }

 private:
  std::map<double, std::uint64_t> counts_;
  std::uint64_t count_ = 0;
};

inline EmpiricalCdf empirical_update(EmpiricalCdf ecdf, double x) {
  ecdf.add(x);
  return ecdf;
}

/// sqrt(3 ln t / (2 T)).
inline double confidence_radius(std::uint64_t t, std::uint64_t count) {
  return std::sqrt(3.0 * std::log(static_cast<double>(t)) / (2.0 * static_cast<double>(count)));
}

/// Stochastically dominant lowering of an empirical CDF:
/// F(x) = max(Fhat(x) - radius, 0) for x < 1 and F(1) = 1, with all removed
/// mass placed at 1. `radius_override` replaces sqrt(3 ln t / 2T).
inline FiniteDistribution dominant_cdf(const EmpiricalCdf& ecdf, std::uint64_t t,
                                       std::optional<double> radius_override = std::nullopt) {
  if (ecdf.count() == 0) {
    throw std::invalid_argument("dominant_cdf needs at least one observation");
  }
  if (!radius_override && t < 2) {
    throw std::invalid_argument("dominant_cdf needs round index t >= 2");
  }
  const double radius = radius_override ? *radius_override : confidence_radius(t, ecdf.count());
  const double n = static_cast<double>(ecdf.count());
  std::vector<std::pair<double, double>> points;
  points.reserve(ecdf.counts().size() + 1);
  std::uint64_t below = 0;
  double lowered_prev = 0.0;
  for (const auto& [v, c] : ecdf.counts()) {
    if (v >= 1.0 - kValueTolerance) break;
    below += c;
    const double lowered = std::max(static_cast<double>(below) / n - radius, 0.0);
    points.emplace_back(v, lowered - lowered_prev);
    lowered_prev = lowered;
  }
  points.emplace_back(1.0, 1.0 - lowered_prev);
  return FiniteDistribution::from_points(std::move(points));
}

/// Sum over the union support of |P(x) - Q(x)|.
inline double l1_distance(const FiniteDistribution& p, const FiniteDistribution& q) {
  const auto& sp = p.support();
  const auto& sq = q.support();
  std::size_t i = 0;
  std::size_t j = 0;
  double total = 0.0;
  while (i < sp.size() || j < sq.size()) {
    if (j == sq.size() || (i < sp.size() && sp[i] < sq[j] - kValueTolerance)) {
      total += p.probs()[i++];
    } else if (i == sp.size() || sq[j] < sp[i] - kValueTolerance) {
      total += q.probs()[j++];
    } else {
      total += std::abs(p.probs()[i++] - q.probs()[j++]);
    }
  }
  return total;
}

/// Index j in [1, s] of the interval I_1 = [0, 1/s], I_j = ((j-1)/s, j/s].
inline std::size_t interval_index(double x, std::size_t s) {
  const double scaled = std::ceil(x * static_cast<double>(s) - kValueTolerance);
  if (scaled < 1.0) return 1;
  return std::min(static_cast<std::size_t>(scaled), s);
}

inline double interval_right_endpoint(double x, std::size_t s) {
  return static_cast<double>(interval_index(x, s)) / static_cast<double>(s);
}

/// Moves the mass of each interval I_j onto its right endpoint j/s.
inline FiniteDistribution discretize_interval(const FiniteDistribution& dist, std::size_t s) {
  if (s == 0) throw std::invalid_argument("discretization needs s >= 1");
  std::vector<double> bins(s, 0.0);
  for (std::size_t k = 0; k < dist.size(); ++k) {
    bins[interval_index(dist.support()[k], s) - 1] += dist.probs()[k];
  }
  std::vector<std::pair<double, double>> points;
  for (std::size_t j = 0; j < s; ++j) {
    points.emplace_back(static_cast<double>(j + 1) / static_cast<double>(s), bins[j]);
  }
  return FiniteDistribution::from_points(std::move(points));
}

inline FiniteDistribution discretize_interval(const PiecewiseDensity& dist, std::size_t s) {
  if (s == 0) throw std::invalid_argument("discretization needs s >= 1");
  std::vector<std::pair<double, double>> points;
  double prev = 0.0;
  for (std::size_t j = 1; j <= s; ++j) {
    const double right = static_cast<double>(j) / static_cast<double>(s);
    const double f = j == s ? 1.0 : dist.cdf(right);
    points.emplace_back(right, f - prev);
    prev = f;
  }
  return FiniteDistribution::from_points(std::move(points));
}

inline FiniteDistribution discretize_interval(const ArmDistribution& dist, std::size_t s) {
  return std::visit([&](const auto& d) { return discretize_interval(d, s); }, dist);
}

/// B(value, prob): `value` with probability `prob`, else 0.
struct BernoulliComponent {
  double value;
  double prob;
};

/// Independent Bernoullis Z_j ~ B(v_j, p_j / sum_{j' <= j} p_j') whose
/// maximum has the same law as `dist`.
inline std::vector<BernoulliComponent> bernoulli_decomposition(const FiniteDistribution& dist) {
  std::vector<BernoulliComponent> out;
  out.reserve(dist.size());
  double cumulative = 0.0;
  for (std::size_t j = 0; j < dist.size(); ++j) {
    cumulative += dist.probs()[j];
    const double q = j == 0 ? 1.0 : dist.probs()[j] / cumulative;
    out.push_back({dist.support()[j], std::min(q, 1.0)});
  }
  return out;
}

}  // namespace cmab

#endif  // CMAB_DISTRIBUTION_HPP
