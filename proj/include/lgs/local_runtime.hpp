#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lgs/errors.hpp"
#include "lgs/gibbs.hpp"
#include "lgs/graph.hpp"
#include "lgs/random.hpp"

namespace lgs {

/// Output of a distributed sampler: a value and a failure flag per node.
struct SampleOutcome {
  std::vector<std::optional<Symbol>> y;
  std::vector<std::uint8_t> fail;

  explicit SampleOutcome(std::size_t n = 0) : y(n), fail(n, 0) {}
  std::size_t size() const { return y.size(); }
  /// Number of raised flags (sum of F_v).
  std::size_t failure_mass() const;
  bool success() const { return failure_mass() == 0; }
  /// Complete configuration; InputError if some node has no value.
  PartialConfig config() const;
};

struct NodeResult {
  std::optional<Symbol> y;
  bool failed = false;
};

/// Everything node `center` may read after `radius` rounds. Indices refer to
/// the extracted ball subgraph; ids are preserved.
template <class Input>
struct NodeView {
  Graph graph;
  Vertex center = 0;
  std::size_t radius = 0;
  std::vector<Input> inputs;          // per local vertex
  std::vector<std::size_t> hops;      // distance from center, per local vertex
  std::vector<Vertex> to_parent;      // local -> vertex of the full graph
  Randomness* rng = nullptr;          // draws restricted to nodes of the view

  NodeId center_id() const { return graph.id(center); }
};

/// Runs fn(i) for i in [0, count), on up to `threads` workers (0 = hardware
/// concurrency). Each index is handled exactly once; callers write results
/// into per-index slots so the outcome does not depend on scheduling.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn, unsigned threads = 0);

template <class Input>
NodeView<Input> extract_view(const Graph& g, const std::vector<Input>& inputs, Vertex v, std::size_t t) {
  const auto members = ball(g, v, t);
  auto sub = induced_subgraph(g, members);
  NodeView<Input> view;
  view.center = sub.to_local[v];
  view.radius = t;
  view.to_parent = sub.to_parent;
  view.inputs.reserve(members.size());
  for (Vertex u : members) view.inputs.push_back(inputs[u]);
  const auto d = distances_from(sub.graph, view.center);
  view.hops.reserve(members.size());
  for (const auto& x : d) view.hops.push_back(x.hops());
  view.graph = std::move(sub.graph);
  return view;
}

struct LocalRunOptions {
  /// Evaluate nodes in this order (default: index order). Results never
  /// depend on it.
  std::optional<std::vector<Vertex>> evaluation_order;
  /// Evaluate views on worker threads; requires thread-safe randomness.
  bool parallel = false;
};

/// LOCAL model with t rounds: node v's result is alg(view of ball(v, t)).
template <class Input>
SampleOutcome run_local(const Graph& g, const std::vector<Input>& inputs,
                        const std::function<NodeResult(const NodeView<Input>&)>& alg, std::size_t t,
                        Randomness& rng, const LocalRunOptions& options = {}) {
  if (inputs.size() != g.size()) throw InputError("one input per node required");
  std::vector<Vertex> order(g.size());
  for (Vertex v = 0; v < g.size(); ++v) order[v] = v;
  if (options.evaluation_order) {
    order = *options.evaluation_order;
    Ordering check(order, g.size());  // validates the permutation
  }
  SampleOutcome out(g.size());
  auto evaluate = [&](std::size_t i) {
    const Vertex v = order[i];
    auto view = extract_view(g, inputs, v, t);
    RestrictedRandomness restricted(rng, std::vector<NodeId>(view.graph.ids().begin(), view.graph.ids().end()));
    view.rng = &restricted;
    const NodeResult r = alg(view);
    out.y[v] = r.y;
    out.fail[v] = r.failed ? 1 : 0;
  };
  if (options.parallel) {
    parallel_for(order.size(), evaluate);
  } else {
    for (std::size_t i = 0; i < order.size(); ++i) evaluate(i);
  }
  return out;
}

// ---------------------------------------------------------------------------
// SLOCAL

struct PassSpec {
  std::size_t read_radius = 0;
  /// Radius within which the pass may modify other nodes' states.
  std::size_t write_radius = 0;
};

/// Single-pass locality that simulates the given passes: r'_1 + 2 sum_{i>=2}
/// r'_i with r'_i = read_i + write_i.
std::size_t effective_locality(const std::vector<PassSpec>& passes);

struct SlocalReport {
  std::vector<PassSpec> passes;
  std::size_t effective_locality = 0;
  /// Largest distances actually read/written, per pass.
  std::vector<std::size_t> max_read;
  std::vector<std::size_t> max_write;
};

/// Capability handed to an SLOCAL step: checked access to states around the
/// node being processed.
template <class State>
class SlocalContext {
 public:
  SlocalContext(const Graph& g, std::vector<State>& states, Vertex center, std::size_t pass,
                const PassSpec& spec, Randomness& rng, std::size_t& max_read, std::size_t& max_write)
      : g_(g), states_(states), center_(center), pass_(pass), spec_(spec), rng_(rng),
        max_read_(max_read), max_write_(max_write) {
    hops_ = distances_from(g, center, std::max(spec.read_radius, spec.write_radius));
  }

  const Graph& graph() const { return g_; }
  Vertex center() const { return center_; }
  std::size_t pass() const { return pass_; }
  const PassSpec& spec() const { return spec_; }
  Randomness& rng() { return rng_; }
  const std::vector<Distance>& hops() const { return hops_; }

  State& self() { return states_[center_]; }
  const State& read(Vertex u) {
    const std::size_t d = checked(u, spec_.read_radius, "read");
    max_read_ = std::max(max_read_, d);
    return states_[u];
  }
  State& write(Vertex u) {
    const std::size_t d = checked(u, spec_.write_radius, "write");
    max_write_ = std::max(max_write_, d);
    return states_[u];
  }
  bool readable(Vertex u) const { return hops_[u].within(spec_.read_radius); }

 private:
  std::size_t checked(Vertex u, std::size_t radius, const char* what) const {
    g_.check_vertex(u);
    if (!hops_[u].within(radius)) {
      throw ContractViolation(std::string("SLOCAL ") + what + " of node " + std::to_string(g_.id(u)) +
                              " outside radius " + std::to_string(radius) + " of node " +
                              std::to_string(g_.id(center_)));
    }
    return hops_[u].hops();
  }

  const Graph& g_;
  std::vector<State>& states_;
  Vertex center_;
  std::size_t pass_;
  const PassSpec& spec_;
  Randomness& rng_;
  std::size_t& max_read_;
  std::size_t& max_write_;
  std::vector<Distance> hops_;
};

template <class State>
struct SlocalAlgorithm {
  std::vector<PassSpec> passes;
  /// Processes the context's center during the context's pass.
  std::function<void(SlocalContext<State>&)> step;
  /// Final per-node result read from the node's own state.
  std::function<NodeResult(const State&)> output;
};

template <class State>
struct SlocalRun {
  std::vector<State> states;
  SampleOutcome outcome;
  SlocalReport report;
};

/// Processes nodes in `order`, once per pass.
template <class State>
SlocalRun<State> run_slocal(const Graph& g, std::vector<State> states, const SlocalAlgorithm<State>& alg,
                            const Ordering& order, Randomness& rng) {
  if (states.size() != g.size() || order.size() != g.size()) throw InputError("one state per node required");
  SlocalRun<State> run;
  run.report.passes = alg.passes;
  run.report.effective_locality = effective_locality(alg.passes);
  run.report.max_read.assign(alg.passes.size(), 0);
  run.report.max_write.assign(alg.passes.size(), 0);
  for (std::size_t p = 0; p < alg.passes.size(); ++p) {
    for (Vertex v : order) {
      std::vector<NodeId> allowed;
      for (Vertex u : ball(g, v, alg.passes[p].read_radius)) allowed.push_back(g.id(u));
      RestrictedRandomness restricted(rng, std::move(allowed));
      SlocalContext<State> ctx(g, states, v, p, alg.passes[p], restricted, run.report.max_read[p],
                               run.report.max_write[p]);
      alg.step(ctx);
    }
  }
  run.outcome = SampleOutcome(g.size());
  for (Vertex v = 0; v < g.size(); ++v) {
    const NodeResult r = alg.output(states[v]);
    run.outcome.y[v] = r.y;
    run.outcome.fail[v] = r.failed ? 1 : 0;
  }
  run.states = std::move(states);
  return run;
}

// ---------------------------------------------------------------------------
// Network decomposition

struct DecompositionParams {
  double c1 = 4.0;  // color bound C = floor(c1 log2 n)
  double c2 = 4.0;  // radius cap R = floor(c2 log2 n)
  /// Target expected number of failed nodes; 0 selects 1/n^2.
  double failure_budget = 0.0;
};

struct Decomposition {
  std::vector<std::size_t> cluster;  // cluster id per node (its center's index)
  std::vector<std::size_t> color;    // per node (color of its cluster)
  std::vector<std::uint8_t> failed;
  std::size_t color_bound = 0;
  std::size_t radius_cap = 0;
  double failure_budget = 0.0;
  double beta = 0.0;  // rate of the exponential shifts
  std::size_t colors_used = 0;
  /// Largest weak radius over non-failed clusters.
  std::size_t max_radius = 0;

  std::size_t failed_count() const;
};

std::size_t log2_bound(double c, std::size_t n);

/// Phase-based exponential-shift clustering. In phase k every remaining node
/// draws a shift delta ~ Exp(beta); a node joins the remaining node s that
/// maximizes delta_s - dist(s, x) when that maximum beats the runner-up by more
/// than 1, and all clusters formed in phase k get color k. Clusters whose weak
/// radius exceeds the cap, and nodes still unclustered after C phases, fail.
Decomposition network_decomposition(const Graph& g, std::uint64_t seed, const DecompositionParams& params = {});

/// Structural check of the decomposition contract; returns a description of
/// the first violation or an empty string.
std::string check_decomposition(const Graph& g, const Decomposition& d);

/// CSV with header node_id,cluster,color,failed (cluster as the center's id).
std::string decomposition_csv(const Graph& g, const Decomposition& d);

struct LocalityReport {
  std::size_t slocal_locality = 0;  // r
  std::size_t colors_used = 0;
  std::size_t color_bound = 0;
  std::size_t max_cluster_radius = 0;
  std::size_t radius_cap = 0;
  /// colors_used * (r + 1) * (2 * max_cluster_radius + 1)
  std::size_t local_rounds = 0;
  /// color_bound * (r + 1) * (2 * radius_cap + 1)
  std::size_t round_bound = 0;
};

/// Induced schedule: non-failed nodes by (color, id), then failed nodes.
Ordering chromatic_order(const Graph& g, const Decomposition& d);

/// F''_v: v failed or ball(v, r) meets a failed node.
std::vector<std::uint8_t> decomposition_failures(const Graph& g, const Decomposition& d, std::size_t r);

LocalityReport locality_report(std::size_t r, const Decomposition& d);

template <class State>
struct CompiledRun {
  SlocalRun<State> slocal;
  Ordering order;
  Decomposition decomposition;
  std::vector<std::uint8_t> decomposition_failed;  // F''
  SampleOutcome outcome;                           // F = F' or F''
  LocalityReport locality;
};

/// LOCAL simulation of an SLOCAL algorithm: decomposes power_graph(g, r+1)
/// for the algorithm's effective locality r, runs the algorithm in the
/// induced chromatic order and raises F'' around failed clusters. `power`
/// may supply a precomputed power_graph(g, r+1).
template <class State>
CompiledRun<State> slocal_to_local(const Graph& g, std::vector<State> states, const SlocalAlgorithm<State>& alg,
                                   Randomness& rng, std::uint64_t decomposition_seed,
                                   const DecompositionParams& params = {}, const Graph* power = nullptr) {
  const std::size_t r = effective_locality(alg.passes);
  CompiledRun<State> out;
  if (power) {
    if (power->size() != g.size()) throw InputError("power graph size mismatch");
    out.decomposition = network_decomposition(*power, decomposition_seed, params);
  } else {
    out.decomposition = network_decomposition(power_graph(g, r + 1), decomposition_seed, params);
  }
  out.order = chromatic_order(g, out.decomposition);
  out.decomposition_failed = decomposition_failures(g, out.decomposition, r);
  out.slocal = run_slocal(g, std::move(states), alg, out.order, rng);
  out.outcome = out.slocal.outcome;
  for (Vertex v = 0; v < g.size(); ++v) out.outcome.fail[v] |= out.decomposition_failed[v];
  out.locality = locality_report(r, out.decomposition);
  return out;
}

}  // namespace lgs
