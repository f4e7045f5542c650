#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lgs/gibbs.hpp"
#include "lgs/inference.hpp"
#include "lgs/local_runtime.hpp"
#include "lgs/random.hpp"

namespace lgs {

/// Vertex-by-vertex sampling: free node v_i draws from base(prefix, v_i,
/// delta / n). Pinned nodes copy tau.
PartialConfig sequential_sample(const Inferencer& base, const Instance& inst, double delta, const Ordering& order,
                                Randomness& rng);

// ---------------------------------------------------------------------------
// Local JVV

enum class FailurePolarity {
  /// Accept (F' = 0) with probability q, so success has probability prod q.
  kAcceptWithQ,
  /// F' = 1 with probability q; success then has probability prod (1 - q).
  kFailWithQ,
};

struct JvvOptions {
  FailurePolarity polarity = FailurePolarity::kAcceptWithQ;
  /// Assert the three path invariants after every bridge step.
  bool check_invariants = true;
  std::uint64_t bridge_budget = kDefaultBudget;
};

/// t for JVV: locality of the base at target 1/n^3.
std::size_t jvv_radius(const Inferencer& base, const GibbsSpec& spec);

/// Base marginal at v for the prefix configuration, with the pinning
/// restricted to B_t(v) so that every call sees only its t-view.
MarginalDist jvv_base_marginal(const Inferencer& base, const Instance& inst, const PartialConfig& prefix, Vertex v,
                               std::size_t t);

/// Pass one: extends tau along the order with the lowest symbol of positive
/// reported marginal.
PartialConfig jvv_ground_state(const Inferencer& base, const Instance& inst, const Ordering& order);

struct Proposal {
  PartialConfig y;
  double density = 1.0;  // chain-rule density mu-hat(y)
};

/// Pass two: draws each node from the base marginal given the prefix.
Proposal jvv_propose(const Inferencer& base, const Instance& inst, const Ordering& order, Randomness& rng);

/// mu-hat(sigma): product of the base marginals along the order.
double chain_density(const Inferencer& base, const Instance& inst, const Ordering& order, const PartialConfig& sigma);

/// sigma_i from sigma_{i-1}: keep sigma_{i-1} if it already agrees with y at
/// v_i, otherwise the first replacement on B_t(v_i) (free positions in
/// increasing id, symbols ascending) that fixes v_1..v_i to y, keeps tau and
/// has positive weight. `step` is 1-based. ContractViolation if none exists.
PartialConfig jvv_bridge(const Instance& inst, const PartialConfig& prev, const PartialConfig& y,
                         const Ordering& order, std::size_t step, std::size_t t,
                         std::uint64_t budget = kDefaultBudget);

/// mu-hat(prev) w(next) / (mu-hat(next) w(prev)) * exp(-3/n^2), from global
/// densities (no clamping).
double jvv_accept_ratio(const Inferencer& base, const Instance& inst, const Ordering& order,
                        const PartialConfig& prev, const PartialConfig& next);

struct JvvTrace {
  std::vector<Vertex> order;
  std::size_t t = 0;
  PartialConfig ground;
  PartialConfig y;
  double proposal_density = 0.0;
  std::vector<PartialConfig> bridges;  // sigma_1 .. sigma_n
  std::vector<double> q;               // raw q_{v_i}, by step
  std::vector<std::uint8_t> fail;      // F' per vertex
  std::size_t out_of_bounds = 0;       // q outside [e^{-5/n^2}, 1]
  /// prod q and the telescoped value mu-hat(s0) w(Y) / (mu-hat(Y) w(s0)) e^{-3/n}.
  double q_product = 1.0;
  double q_telescoped = 1.0;
};

struct JvvResult {
  SampleOutcome outcome;
  JvvTrace trace;
};

/// Global (centralized) run of the three passes.
JvvResult jvv_sample(const Inferencer& base, const Instance& inst, const Ordering& order, Randomness& rng,
                     const JvvOptions& options = {});

/// Text dump of a trace (ground state, proposal, q vector, flags).
std::string format_trace(const Instance& inst, const JvvTrace& trace);

struct JvvAnalysis {
  std::vector<PartialConfig> support;  // feasible sigma
  std::vector<double> joint;           // Pr[Y = sigma and success]
  std::vector<double> weights;         // w(sigma)
  double success = 0.0;                // Pr[success]
  /// Largest relative deviation of joint / weight from its mean.
  double ratio_spread = 0.0;
  /// Mass mu-hat puts on infeasible configurations (must be 0).
  double infeasible_mass = 0.0;
  std::size_t out_of_bounds = 0;
};

/// Exact Pr[Y = sigma and success] = mu-hat(sigma) prod_i q_i(sigma) for all
/// complete sigma extending tau, using the deterministic bridge sequence with
/// Y = sigma. Budget bounds q^{free}.
JvvAnalysis jvv_analyze(const Inferencer& base, const Instance& inst, const Ordering& order,
                        const JvvOptions& options = {}, std::uint64_t budget = 1'000'000);

// SLOCAL form ----------------------------------------------------------------

struct JvvNodeState {
  Symbol tau = kUnassigned;
  Symbol ground = kUnassigned;
  Symbol y = kUnassigned;
  Symbol current = kUnassigned;  // value in the running bridge configuration
  bool pass1 = false;
  bool pass2 = false;
  bool pass3 = false;
  /// Nodes of B_t(v) already processed when v drew Y(v) in pass two.
  std::vector<Vertex> preds;
  double q = 1.0;
  bool fail = false;
  bool out_of_bounds = false;
};

std::vector<JvvNodeState> jvv_initial_states(const Instance& inst);

/// The three passes with read radii (t, t, 3t + l) and write radius t in pass
/// three. Holds references to base and inst.
SlocalAlgorithm<JvvNodeState> jvv_slocal_algorithm(const Inferencer& base, const Instance& inst,
                                                   const JvvOptions& options = {});

/// run_slocal of the JVV algorithm on a given order.
SlocalRun<JvvNodeState> jvv_slocal(const Inferencer& base, const Instance& inst, const Ordering& order,
                                   Randomness& rng, const JvvOptions& options = {});

/// LOCAL compilation: decomposition failures F'' are or-ed into F'.
CompiledRun<JvvNodeState> jvv_local(const Inferencer& base, const Instance& inst, Randomness& rng,
                                    std::uint64_t decomposition_seed, const DecompositionParams& params = {},
                                    const JvvOptions& options = {}, const Graph* power = nullptr);

}  // namespace lgs
