#ifndef CMAB_SOLVER_HPP
#define CMAB_SOLVER_HPP

#include <span>
#include <string>

#include "cmab/error.hpp"
#include "cmab/oracle.hpp"
#include "cmab/ptas.hpp"
#include "cmab/reward.hpp"

namespace cmab {

enum class OracleKind { Exhaustive, Greedy, Ptas };

inline OracleKind parse_oracle_kind(const std::string& name) {
  if (name == "exhaustive") return OracleKind::Exhaustive;
  if (name == "greedy") return OracleKind::Greedy;
  if (name == "ptas") return OracleKind::Ptas;
  throw ConfigError("unknown oracle '" + name + "' (expected exhaustive|greedy|ptas)");
}

inline std::string to_string(OracleKind kind) {
  switch (kind) {
    case OracleKind::Exhaustive: return "exhaustive";
    case OracleKind::Greedy: return "greedy";
    case OracleKind::Ptas: return "ptas";
  }
  return "?";
}

/// Offline computation oracle handle: product of finite distributions in,
/// feasible super arm out.
class Oracle {
 public:
  Oracle(OracleKind kind, FeasibleFamily family, RewardSpec spec, double epsilon = 0.25)
      : kind_(kind), family_(std::move(family)), spec_(std::move(spec)), epsilon_(epsilon) {
    if (kind_ != OracleKind::Exhaustive &&
        family_.kind() != FeasibleFamily::Kind::CardinalityAtMost) {
      throw ConfigError(to_string(kind_) + " oracle needs a cardinality family");
    }
    if (kind_ == OracleKind::Ptas) {
      if (spec_.kind() != RewardKind::KMax) throw ConfigError("ptas oracle needs the K-MAX reward");
      if (!(epsilon_ > 0.0 && epsilon_ < 0.5)) throw ConfigError("ptas epsilon must be in (0, 1/2)");
    }
  }

  SuperArm operator()(std::span<const FiniteDistribution> dists) const {
    switch (kind_) {
      case OracleKind::Exhaustive: return exhaustive_oracle(dists, family_, spec_);
      case OracleKind::Greedy: return greedy_chain(dists, family_.max_size(), spec_).set;
      case OracleKind::Ptas: return ptas_kmax(dists, family_.max_size(), epsilon_);
    }
    return {};
  }

  OracleKind kind() const noexcept { return kind_; }
  const FeasibleFamily& family() const noexcept { return family_; }
  const RewardSpec& spec() const noexcept { return spec_; }
  double epsilon() const noexcept { return epsilon_; }

 private:
  OracleKind kind_;
  FeasibleFamily family_;
  RewardSpec spec_;
  double epsilon_;
};

}  // namespace cmab

#endif  // CMAB_SOLVER_HPP
