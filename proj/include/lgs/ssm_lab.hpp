#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lgs/gibbs.hpp"
#include "lgs/inference.hpp"

namespace lgs {

/// Measured spatial-mixing profile: entry t is the largest distance between
/// the marginals at v under two feasible boundary conditions on the same
/// Lambda whose disagreement set is at distance >= t from v. An empty max is
/// 0. mult entries may be infinite when zero sets differ.
struct SsmProfile {
  std::vector<double> tv;
  std::vector<double> mult;
  std::string scope;      // which Lambda and pairs were enumerated
  std::size_t pairs = 0;  // differing feasible pairs compared
  bool partial = false;   // budget stopped the enumeration early
  std::string note;
};

struct SsmScope {
  enum class Kind {
    /// Lambda = sphere S_t(v) for every t.
    kSpheres,
    /// One given Lambda.
    kFixed,
    /// Every Lambda not containing v (small n only).
    kAllSubsets,
  };
  Kind kind = Kind::kSpheres;
  std::vector<Vertex> lambda;  // for kFixed
};

/// Entries for t = 0..t_max. The instance's own pinning stays in place.
SsmProfile measure_ssm(const Instance& inst, Vertex v, const SsmScope& scope, std::size_t t_max,
                       std::uint64_t budget = kDefaultBudget);

/// "t,delta_tv,delta_mult" rows.
std::string profile_csv(const SsmProfile& profile);

struct DecayFit {
  double alpha = 0.0;
  double c = 0.0;
  /// Root mean square residual of the log-space fit.
  double residual = 0.0;
  std::size_t points = 0;
  std::string note;
};

/// Least squares of log delta(t) = log c + t log alpha over the finite
/// positive entries with t >= t_min. All-zero profile: alpha = 0 with a
/// note. One or two usable points: InputError.
DecayFit fit_decay_rate(const std::vector<double>& profile, std::size_t t_min = 1);

/// (D-1)^(D-1) / (D-2)^D; infinity for D <= 2.
double hardcore_lambda_c(std::size_t max_degree);
/// Root of x = exp(1/x).
double coloring_alpha_star();

struct ChainCount {
  PartialConfig sigma;          // the configuration the chain is taken along
  std::vector<double> factors;  // base marginal of sigma(v_i) given the prefix, by step
  double log_weight = 0.0;      // log w(sigma)
  double log_z = 0.0;
  double z = 0.0;
};

/// Z(tau) = w(sigma) / prod_i p_i for the ground state sigma along `order`.
ChainCount chain_rule_count(const Inferencer& base, const Instance& inst, const Ordering& order,
                            double target = 0.0);

/// Root-marginal profile of the hardcore model on regular_tree(degree,
/// depth): entry t compares the all-occupied and all-empty conditions on the
/// sphere at distance t (these are the extreme boundaries, by monotonicity
/// of the tree recursion), for t = 1..depth. Entry 0 is unused.
SsmProfile hardcore_tree_profile(std::size_t degree, double lambda, std::size_t depth);

struct PhaseRow {
  double lambda = 0.0;
  SsmProfile profile;
  DecayFit fit;
  /// Empty at lambda = lambda_c; true when delta_tv stays >= floor at the two
  /// deepest distances and the last step shrinks it by less than 10%.
  std::optional<bool> non_decay;
};

struct PhaseReport {
  std::size_t degree = 0;
  std::size_t depth = 0;
  double lambda_c = 0.0;
  double floor = 0.01;
  std::vector<PhaseRow> rows;
};

PhaseReport phase_transition_report(std::size_t degree, const std::vector<double>& lambdas, std::size_t depth,
                                    double floor = 0.01);

}  // namespace lgs
