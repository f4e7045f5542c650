#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lgs/gibbs.hpp"

namespace lgs {

inline constexpr std::uint64_t kDefaultBudget = 10'000'000;

struct Guarantee {
  enum class Kind { kExact, kTv, kMult };
  Kind kind = Kind::kExact;
  double bound = 0.0;
  std::string note;

  static Guarantee exact() { return {}; }
  static Guarantee tv(double b, std::string note = {}) { return {Kind::kTv, b, std::move(note)}; }
  static Guarantee mult(double b, std::string note = {}) { return {Kind::kMult, b, std::move(note)}; }
};

std::string to_string(Guarantee::Kind kind);
/// "exact", "tv(0.01)", "mult(0.5)".
std::string describe(const Guarantee& g);

/// Probability vector over the alphabet at one vertex.
struct MarginalDist {
  std::vector<double> probs;
  Guarantee guarantee;
  /// Set when the vertex was pinned and the result is the point mass.
  bool pinned = false;

  std::size_t size() const { return probs.size(); }
  double operator[](std::size_t c) const { return probs[c]; }
};

/// Normalizes non-negative weights; InputError if all are zero.
MarginalDist normalized(std::vector<double> weights, Guarantee g = Guarantee::exact());
MarginalDist point_mass(std::size_t q, Symbol s);

/// Z(tau). BudgetExceeded if q^{free} > budget.
double partition_function(const Instance& inst, std::uint64_t budget = kDefaultBudget);

/// mu_v^tau. For pinned v returns the point mass with `pinned` set.
MarginalDist marginal(const Instance& inst, Vertex v, std::uint64_t budget = kDefaultBudget);

/// All single-vertex marginals from one enumeration.
std::vector<MarginalDist> all_marginals(const Instance& inst, std::uint64_t budget = kDefaultBudget);

/// Marginal of v computed from the factors inside `region` only, with the
/// instance pinning and `boundary` applied. Every vertex of the region that
/// lies in the scope of a factor leaving the region must be assigned;
/// otherwise ContractViolation.
MarginalDist ball_marginal(const Instance& inst, Vertex v, std::span<const Vertex> region,
                           const PartialConfig& boundary, std::uint64_t budget = kDefaultBudget);

/// A discrete distribution over complete configurations.
using Distribution = std::map<std::vector<Symbol>, double>;

/// mu^tau over complete configurations (support = feasible configurations).
Distribution joint_distribution(const Instance& inst, std::uint64_t budget = kDefaultBudget);

double tv_distance(std::span<const double> p, std::span<const double> q);
double tv_distance(const MarginalDist& p, const MarginalDist& q);
double tv_distance(const Distribution& p, const Distribution& q);

/// max_x |ln p(x) - ln q(x)| with 0/0 contributing 0 and a one-sided zero
/// giving +infinity.
double mult_error(std::span<const double> p, std::span<const double> q);
double mult_error(const MarginalDist& p, const MarginalDist& q);

/// Exact marginals of one target vertex under every partial configuration of
/// the other vertices (on top of a fixed base pinning), computed in a single
/// pass over feasible configurations. Partial configurations are encoded in
/// base q+1 over the non-target free vertices (digit 0 = unassigned).
class MarginalTable {
 public:
  MarginalTable(const Instance& base, Vertex target, std::uint64_t budget = kDefaultBudget);

  Vertex target() const { return target_; }
  std::size_t codes() const { return codes_; }
  std::span<const Vertex> coded_vertices() const { return coded_; }

  /// Code of the restriction of `extra` to the coded vertices. Assignments
  /// at other vertices must agree with the base pinning (the target must be
  /// unassigned); InputError otherwise.
  std::size_t encode(const PartialConfig& extra) const;
  /// Base pinning extended by the configuration with the given code.
  PartialConfig decode(std::size_t code) const;

  bool feasible(std::size_t code) const;
  /// Unnormalized Z(rho, target = c) per symbol c.
  std::span<const double> weights(std::size_t code) const;
  MarginalDist marginal(std::size_t code) const;

 private:
  PartialConfig base_;
  Vertex target_;
  std::size_t q_;
  std::vector<Vertex> coded_;
  std::vector<std::size_t> place_;
  std::size_t codes_ = 0;
  std::vector<double> table_;  // codes_ * q_
};

}  // namespace lgs
