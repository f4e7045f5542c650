#include "lgs/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <optional>
#include <sstream>

#include "lgs/detail/enumerate.hpp"

namespace lgs {

namespace {

double as_n(std::size_t n) { return static_cast<double>(std::max<std::size_t>(n, 1)); }

double jvv_target(std::size_t n) { return 1.0 / (as_n(n) * as_n(n) * as_n(n)); }

double step_discount(std::size_t n) { return std::exp(-3.0 / (as_n(n) * as_n(n))); }

bool q_in_bounds(double q, std::size_t n) {
  constexpr double kSlack = 1e-12;
  const double lo = std::exp(-5.0 / (as_n(n) * as_n(n)));
  return q >= lo * (1.0 - kSlack) && q <= 1.0 + kSlack;
}

void require_mult_base(const Inferencer& base) {
  if (base.guarantee_kind() == Guarantee::Kind::kTv) {
    throw InputError("JVV needs a base with a multiplicative guarantee, got " + base.name());
  }
}

std::string node_name(const Graph& g, Vertex v) { return std::to_string(g.id(v)); }

void check_marginal(const MarginalDist& m, std::size_t q, const Graph& g, Vertex v) {
  if (m.size() != q) throw ContractViolation("base returned a vector of wrong length at node " + node_name(g, v));
  double total = 0.0;
  for (double p : m.probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw ContractViolation("base returned an invalid probability at node " + node_name(g, v));
    }
    total += p;
  }
  if (!(total > 0.0)) throw ContractViolation("base returned an all-zero marginal at node " + node_name(g, v));
}

MarginalDist call_base(const Inferencer& base, const Instance& inst, const PartialConfig& pinning, Vertex v,
                       double target) {
  const Instance conditioned = inst.with_pinning(pinning, FeasibilityCheck::kLocal);
  MarginalDist m = base.infer(conditioned, v, target);
  check_marginal(m, inst.spec().q(), inst.graph(), v);
  return m;
}

Symbol lowest_positive(const MarginalDist& m, const Graph& g, Vertex v) {
  for (std::size_t s = 0; s < m.size(); ++s) {
    if (m[s] > 0.0) return static_cast<Symbol>(s);
  }
  throw ContractViolation("base reported no positive symbol at node " + node_name(g, v));
}

double accept_probability(double q) { return std::clamp(q, 0.0, 1.0); }

/// Success probability of one node given its raw q, per polarity.
double node_success(double q, FailurePolarity polarity) {
  const double a = accept_probability(q);
  return polarity == FailurePolarity::kAcceptWithQ ? a : 1.0 - a;
}

bool draw_failure(Randomness& rng, NodeId id, double q, FailurePolarity polarity) {
  const bool hit = rng.bernoulli(DrawLabel{id, streams::kAccept, 0}, accept_probability(q));
  return polarity == FailurePolarity::kAcceptWithQ ? !hit : hit;
}

double log_weight(const GibbsSpec& spec, const PartialConfig& sigma) {
  double s = 0.0;
  for (const Factor& f : spec.factors()) s += std::log(f.evaluate(sigma));
  return s;
}

/// First replacement of prev on `region` that sets v to yv, keeps the
/// vertices marked by `fixed`, and makes every factor touching the region
/// nonzero. prev must assign B_{t+l}.
std::optional<PartialConfig> find_bridge(const GibbsSpec& spec, const PartialConfig& prev,
                                         std::span<const Vertex> region, const std::function<bool(Vertex)>& fixed,
                                         Vertex v, Symbol yv, std::uint64_t budget) {
  if (prev[v] == yv) return prev;
  std::vector<Vertex> free;
  for (Vertex u : region) {
    if (u != v && !fixed(u)) free.push_back(u);
  }
  sort_by_id(spec.graph(), free);
  detail::check_budget(spec.q(), free.size(), budget, "bridge search");
  PartialConfig start = prev;
  for (Vertex u : free) start.clear(u);
  start.set(v, yv);
  std::vector<std::size_t> factors;
  for (Vertex u : region) {
    for (std::size_t f : spec.factors_of(u)) factors.push_back(f);
  }
  std::sort(factors.begin(), factors.end());
  factors.erase(std::unique(factors.begin(), factors.end()), factors.end());
  detail::ConfigEnumerator en(spec, std::move(free), factors, std::move(start));
  std::optional<PartialConfig> found;
  en.run([&](const PartialConfig& leaf, double) {
    found = leaf;
    return false;
  });
  return found;
}

/// Centralized evaluation of the chain-rule quantities along one order.
class GlobalJvv {
 public:
  GlobalJvv(const Inferencer& base, const Instance& inst, const Ordering& order)
      : base_(base), inst_(inst), order_(order), n_(inst.size()), t_(jvv_radius(base, inst.spec())),
        target_(jvv_target(inst.size())) {
    if (order.size() != n_) throw InputError("ordering size does not match the instance");
    masks_.reserve(n_);
    for (Vertex v = 0; v < n_; ++v) masks_.push_back(ball_mask(inst.graph(), v, t_));
  }

  std::size_t t() const { return t_; }

  /// Pinning seen by the base at step j: sigma on (Lambda u {v_1..v_{j-1}}) n B_t(v_j).
  bool in_view(Vertex u, std::size_t j) const {
    return masks_[order_[j]][u] && (inst_.pinned(u) || order_.position(u) < j);
  }

  MarginalDist marginal_at(const PartialConfig& sigma, std::size_t j) const {
    PartialConfig p(n_);
    for (Vertex u = 0; u < n_; ++u) {
      if (in_view(u, j)) p.set(u, sigma[u]);
    }
    return call_base(base_, inst_, p, order_[j], target_);
  }

  double log_density(const PartialConfig& sigma) const {
    double s = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
      const Vertex v = order_[j];
      if (inst_.pinned(v)) continue;
      s += std::log(marginal_at(sigma, j)[static_cast<std::size_t>(sigma[v])]);
    }
    return s;
  }

  PartialConfig ground() const {
    PartialConfig s = inst_.pinning();
    for (std::size_t j = 0; j < n_; ++j) {
      const Vertex v = order_[j];
      if (inst_.pinned(v)) continue;
      s.set(v, lowest_positive(marginal_at(s, j), inst_.graph(), v));
    }
    return s;
  }

  Proposal propose(Randomness& rng) const {
    Proposal p{inst_.pinning(), 1.0};
    for (std::size_t j = 0; j < n_; ++j) {
      const Vertex v = order_[j];
      if (inst_.pinned(v)) continue;
      const MarginalDist m = marginal_at(p.y, j);
      const std::size_t s = rng.categorical(DrawLabel{inst_.graph().id(v), streams::kProposal, 0}, m.probs);
      p.y.set(v, static_cast<Symbol>(s));
      p.density *= m[s];
    }
    return p;
  }

  /// Raw q: termwise density ratio over every node and weight ratio over
  /// every factor. Terms whose inputs coincide are exactly 1 and skipped.
  double ratio(const PartialConfig& prev, const PartialConfig& next) const {
    double r = step_discount(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      const Vertex v = order_[j];
      bool same = prev[v] == next[v];
      for (Vertex u = 0; same && u < n_; ++u) {
        if (in_view(u, j) && prev[u] != next[u]) same = false;
      }
      if (same) continue;
      const double a = marginal_at(prev, j)[static_cast<std::size_t>(prev[v])];
      const double b = marginal_at(next, j)[static_cast<std::size_t>(next[v])];
      if (!(b > 0.0)) throw ContractViolation("bridge configuration has zero proposal density");
      r *= a / b;
    }
    for (const Factor& f : inst_.spec().factors()) {
      const double a = f.evaluate(prev);
      const double b = f.evaluate(next);
      if (a != b) r *= b / a;
    }
    return r;
  }

  void check_step(std::size_t step, const PartialConfig& prev, const PartialConfig& next,
                  const PartialConfig& y) const {
    const Vertex v = order_[step - 1];
    const std::string where = " after step " + std::to_string(step) + " (node " + node_name(inst_.graph(), v) + ")";
    if (!next.complete() || !weight_positive(inst_.spec(), next)) throw ContractViolation("bridge infeasible" + where);
    if (!next.consistent_with(inst_.pinning())) throw ContractViolation("bridge changes the pinning" + where);
    for (std::size_t j = 0; j < step; ++j) {
      if (next[order_[j]] != y[order_[j]]) throw ContractViolation("bridge disagrees with the proposal" + where);
    }
    for (Vertex u = 0; u < n_; ++u) {
      if (prev[u] != next[u] && !masks_[v][u]) throw ContractViolation("bridge changes a node outside the ball" + where);
    }
  }

  PartialConfig bridge(const PartialConfig& prev, const PartialConfig& y, std::size_t step,
                       std::uint64_t budget) const {
    return jvv_bridge(inst_, prev, y, order_, step, t_, budget);
  }

 private:
  const Inferencer& base_;
  const Instance& inst_;
  const Ordering& order_;
  std::size_t n_;
  std::size_t t_;
  double target_;
  std::vector<std::vector<std::uint8_t>> masks_;
};

struct BridgeWalk {
  std::vector<PartialConfig> bridges;
  std::vector<double> q;
  std::size_t out_of_bounds = 0;
};

BridgeWalk walk_bridges(const GlobalJvv& ctx, const Instance& inst, const PartialConfig& ground,
                        const PartialConfig& y, const JvvOptions& options) {
  BridgeWalk w;
  PartialConfig cur = ground;
  for (std::size_t step = 1; step <= inst.size(); ++step) {
    PartialConfig next = ctx.bridge(cur, y, step, options.bridge_budget);
    if (options.check_invariants) ctx.check_step(step, cur, next, y);
    const double q = ctx.ratio(cur, next);
    if (!q_in_bounds(q, inst.size())) ++w.out_of_bounds;
    w.q.push_back(q);
    w.bridges.push_back(next);
    cur = std::move(next);
  }
  if (inst.size() > 0 && !(cur == y)) throw ContractViolation("final bridge differs from the proposal");
  return w;
}

}  // namespace

PartialConfig sequential_sample(const Inferencer& base, const Instance& inst, double delta, const Ordering& order,
                                Randomness& rng) {
  if (!(delta > 0.0)) throw InputError("sequential sampling needs delta > 0");
  const std::size_t n = inst.size();
  if (order.size() != n) throw InputError("ordering size does not match the instance");
  const double target = delta / as_n(n);
  PartialConfig sigma = inst.pinning();
  // Once noise has produced an infeasible prefix there is nothing left to
  // condition on; the remaining nodes take symbol 0.
  bool broken = false;
  for (Vertex v : order) {
    if (inst.pinned(v)) continue;
    Symbol s = 0;
    if (!broken) {
      try {
        const MarginalDist m = call_base(base, inst, sigma, v, target);
        s = static_cast<Symbol>(rng.categorical(DrawLabel{inst.graph().id(v), streams::kSequential, 0}, m.probs));
      } catch (const InfeasibleError&) {
        broken = true;
      }
    }
    sigma.set(v, s);
  }
  return sigma;
}

std::size_t jvv_radius(const Inferencer& base, const GibbsSpec& spec) {
  return base.locality(spec, jvv_target(spec.size()));
}

MarginalDist jvv_base_marginal(const Inferencer& base, const Instance& inst, const PartialConfig& prefix, Vertex v,
                               std::size_t t) {
  const auto mask = ball_mask(inst.graph(), v, t);
  return call_base(base, inst, prefix.restricted(mask), v, jvv_target(inst.size()));
}

PartialConfig jvv_ground_state(const Inferencer& base, const Instance& inst, const Ordering& order) {
  require_mult_base(base);
  return GlobalJvv(base, inst, order).ground();
}

Proposal jvv_propose(const Inferencer& base, const Instance& inst, const Ordering& order, Randomness& rng) {
  require_mult_base(base);
  return GlobalJvv(base, inst, order).propose(rng);
}

double chain_density(const Inferencer& base, const Instance& inst, const Ordering& order, const PartialConfig& sigma) {
  if (!sigma.complete() || !sigma.consistent_with(inst.pinning())) return 0.0;
  return std::exp(GlobalJvv(base, inst, order).log_density(sigma));
}

PartialConfig jvv_bridge(const Instance& inst, const PartialConfig& prev, const PartialConfig& y,
                         const Ordering& order, std::size_t step, std::size_t t, std::uint64_t budget) {
  if (step == 0 || step > order.size()) throw InputError("bridge step out of range");
  const Vertex v = order[step - 1];
  const auto region = ball(inst.graph(), v, t);
  auto fixed = [&](Vertex u) { return inst.pinned(u) || order.position(u) < step - 1; };
  auto found = find_bridge(inst.spec(), prev, region, fixed, v, y[v], budget);
  if (!found) {
    throw ContractViolation("no bridge configuration at step " + std::to_string(step) + " (node " +
                            node_name(inst.graph(), v) + ")");
  }
  return *found;
}

double jvv_accept_ratio(const Inferencer& base, const Instance& inst, const Ordering& order,
                        const PartialConfig& prev, const PartialConfig& next) {
  return GlobalJvv(base, inst, order).ratio(prev, next);
}

JvvResult jvv_sample(const Inferencer& base, const Instance& inst, const Ordering& order, Randomness& rng,
                     const JvvOptions& options) {
  require_mult_base(base);
  const std::size_t n = inst.size();
  const GlobalJvv ctx(base, inst, order);
  JvvResult res;
  JvvTrace& tr = res.trace;
  tr.order.assign(order.begin(), order.end());
  tr.t = ctx.t();
  tr.ground = ctx.ground();
  Proposal prop = ctx.propose(rng);
  tr.y = prop.y;
  tr.proposal_density = prop.density;

  BridgeWalk walk = walk_bridges(ctx, inst, tr.ground, tr.y, options);
  tr.bridges = std::move(walk.bridges);
  tr.q = std::move(walk.q);
  tr.out_of_bounds = walk.out_of_bounds;
  tr.fail.assign(n, 0);
  res.outcome = SampleOutcome(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vertex v = order[i];
    const bool fail = draw_failure(rng, inst.graph().id(v), tr.q[i], options.polarity);
    tr.fail[v] = fail ? 1 : 0;
    res.outcome.y[v] = tr.y[v];
    res.outcome.fail[v] = tr.fail[v];
    tr.q_product *= tr.q[i];
  }
  const GibbsSpec& spec = inst.spec();
  tr.q_telescoped = std::exp(ctx.log_density(tr.ground) - ctx.log_density(tr.y) + log_weight(spec, tr.y) -
                             log_weight(spec, tr.ground) - 3.0 / as_n(n));
  return res;
}

std::string format_trace(const Instance& inst, const JvvTrace& trace) {
  const Graph& g = inst.graph();
  std::ostringstream out;
  out << std::setprecision(17);
  auto config_line = [&](const char* name, const PartialConfig& c) {
    out << name;
    for (Vertex v = 0; v < c.size(); ++v) out << ' ' << g.id(v) << '=' << c[v];
    out << '\n';
  };
  out << "t " << trace.t << '\n';
  out << "order";
  for (Vertex v : trace.order) out << ' ' << g.id(v);
  out << '\n';
  config_line("ground", trace.ground);
  config_line("proposal", trace.y);
  out << "proposal_density " << trace.proposal_density << '\n';
  out << "q";
  for (std::size_t i = 0; i < trace.q.size(); ++i) out << ' ' << g.id(trace.order[i]) << ':' << trace.q[i];
  out << '\n';
  out << "fail";
  for (Vertex v = 0; v < trace.fail.size(); ++v) out << ' ' << g.id(v) << '=' << int(trace.fail[v]);
  out << '\n';
  out << "q_product " << trace.q_product << '\n';
  out << "q_telescoped " << trace.q_telescoped << '\n';
  out << "out_of_bounds " << trace.out_of_bounds << '\n';
  return out.str();
}

JvvAnalysis jvv_analyze(const Inferencer& base, const Instance& inst, const Ordering& order,
                        const JvvOptions& options, std::uint64_t budget) {
  require_mult_base(base);
  const GibbsSpec& spec = inst.spec();
  const GlobalJvv ctx(base, inst, order);
  std::vector<Vertex> free;
  for (Vertex v = 0; v < inst.size(); ++v) {
    if (!inst.pinned(v)) free.push_back(v);
  }
  detail::check_budget(spec.q(), free.size(), budget, "JVV analysis");
  const PartialConfig ground = ctx.ground();

  JvvAnalysis a;
  detail::CompensatedSum feasible_mass;
  detail::CompensatedSum success;
  const auto factors = detail::all_factors(spec);
  detail::ConfigEnumerator en(spec, free, factors, inst.pinning());
  en.run([&](const PartialConfig& sigma, double w) {
    const double density = std::exp(ctx.log_density(sigma));
    BridgeWalk walk = walk_bridges(ctx, inst, ground, sigma, options);
    double p = density;
    for (double q : walk.q) p *= node_success(q, options.polarity);
    a.support.push_back(sigma);
    a.joint.push_back(p);
    a.weights.push_back(w);
    a.out_of_bounds += walk.out_of_bounds;
    feasible_mass.add(density);
    success.add(p);
    return true;
  });
  a.success = success.value();
  a.infeasible_mass = std::max(0.0, 1.0 - feasible_mass.value());
  if (!a.joint.empty()) {
    detail::CompensatedSum mean;
    for (std::size_t i = 0; i < a.joint.size(); ++i) mean.add(a.joint[i] / a.weights[i]);
    const double m = mean.value() / static_cast<double>(a.joint.size());
    for (std::size_t i = 0; i < a.joint.size(); ++i) {
      a.ratio_spread = std::max(a.ratio_spread, std::abs(a.joint[i] / a.weights[i] / m - 1.0));
    }
  }
  return a;
}

// ---------------------------------------------------------------------------
// SLOCAL form

std::vector<JvvNodeState> jvv_initial_states(const Instance& inst) {
  std::vector<JvvNodeState> states(inst.size());
  for (Vertex v = 0; v < inst.size(); ++v) states[v].tau = inst.pinning()[v];
  return states;
}

namespace {

using Ctx = SlocalContext<JvvNodeState>;

void ground_step(const Inferencer& base, const Instance& inst, std::size_t t, Ctx& ctx) {
  const Graph& g = ctx.graph();
  const Vertex v = ctx.center();
  JvvNodeState& self = ctx.self();
  self.pass1 = true;
  if (self.tau != kUnassigned) {
    self.ground = self.current = self.tau;
    return;
  }
  PartialConfig prefix(g.size());
  for (Vertex u : ball(g, v, t)) {
    const JvvNodeState& s = ctx.read(u);
    if (s.tau != kUnassigned) {
      prefix.set(u, s.tau);
    } else if (s.pass1 && u != v) {
      prefix.set(u, s.ground);
    }
  }
  const MarginalDist m = call_base(base, inst, prefix, v, jvv_target(g.size()));
  ctx.self().ground = ctx.self().current = lowest_positive(m, g, v);
}

void propose_step(const Inferencer& base, const Instance& inst, std::size_t t, Ctx& ctx) {
  const Graph& g = ctx.graph();
  const Vertex v = ctx.center();
  PartialConfig prefix(g.size());
  std::vector<Vertex> preds;
  for (Vertex u : ball(g, v, t)) {
    if (u == v) continue;
    const JvvNodeState& s = ctx.read(u);
    if (s.pass2) preds.push_back(u);
    if (s.tau != kUnassigned) {
      prefix.set(u, s.tau);
    } else if (s.pass2) {
      prefix.set(u, s.y);
    }
  }
  JvvNodeState& self = ctx.self();
  self.preds = std::move(preds);
  self.pass2 = true;
  if (self.tau != kUnassigned) {
    self.y = self.tau;
    return;
  }
  const MarginalDist m = call_base(base, inst, prefix, v, jvv_target(g.size()));
  const std::size_t s = ctx.rng().categorical(DrawLabel{g.id(v), streams::kProposal, 0}, m.probs);
  ctx.self().y = static_cast<Symbol>(s);
}

void accept_step(const Inferencer& base, const Instance& inst, std::size_t t, const JvvOptions& options, Ctx& ctx) {
  const Graph& g = ctx.graph();
  const GibbsSpec& spec = inst.spec();
  const std::size_t n = g.size();
  const Vertex v = ctx.center();
  const double target = jvv_target(n);

  PartialConfig prev(n);
  for (Vertex u : ball(g, v, 3 * t + spec.locality())) prev.set(u, ctx.read(u).current);
  const Symbol yv = ctx.read(v).y;
  const auto region = ball(g, v, t);
  auto fixed = [&](Vertex u) {
    const JvvNodeState& s = ctx.read(u);
    return s.tau != kUnassigned || s.pass3;
  };
  auto found = find_bridge(spec, prev, region, fixed, v, yv, options.bridge_budget);
  if (!found) throw ContractViolation("no bridge configuration at node " + node_name(g, v));
  const PartialConfig& next = *found;

  double r = step_discount(n);
  for (Vertex vj : ball(g, v, 2 * t)) {
    const JvvNodeState& sj = ctx.read(vj);
    std::vector<Vertex> view;
    for (Vertex u : ball(g, vj, t)) {
      if (ctx.read(u).tau != kUnassigned) view.push_back(u);
    }
    view.insert(view.end(), sj.preds.begin(), sj.preds.end());
    bool same = prev[vj] == next[vj];
    for (std::size_t k = 0; same && k < view.size(); ++k) same = prev[view[k]] == next[view[k]];
    if (same) continue;
    PartialConfig pa(n);
    PartialConfig pb(n);
    for (Vertex u : view) {
      pa.set(u, prev[u]);
      pb.set(u, next[u]);
    }
    const double a = call_base(base, inst, pa, vj, target)[static_cast<std::size_t>(prev[vj])];
    const double b = call_base(base, inst, pb, vj, target)[static_cast<std::size_t>(next[vj])];
    if (!(b > 0.0)) throw ContractViolation("bridge configuration has zero proposal density");
    r *= a / b;
  }

  std::vector<Vertex> changed;
  for (Vertex u : region) {
    if (prev[u] != next[u]) changed.push_back(u);
  }
  std::vector<std::size_t> factors;
  for (Vertex u : changed) {
    for (std::size_t f : spec.factors_of(u)) factors.push_back(f);
  }
  std::sort(factors.begin(), factors.end());
  factors.erase(std::unique(factors.begin(), factors.end()), factors.end());
  for (std::size_t f : factors) {
    const double a = spec.factors()[f].evaluate(prev);
    const double b = spec.factors()[f].evaluate(next);
    if (a != b) r *= b / a;
  }

  for (Vertex u : changed) ctx.write(u).current = next[u];
  JvvNodeState& self = ctx.self();
  self.q = r;
  self.out_of_bounds = !q_in_bounds(r, n);
  self.fail = draw_failure(ctx.rng(), g.id(v), r, options.polarity);
  self.pass3 = true;
}

}  // namespace

SlocalAlgorithm<JvvNodeState> jvv_slocal_algorithm(const Inferencer& base, const Instance& inst,
                                                   const JvvOptions& options) {
  require_mult_base(base);
  const std::size_t t = jvv_radius(base, inst.spec());
  const std::size_t ell = inst.spec().locality();
  SlocalAlgorithm<JvvNodeState> alg;
  alg.passes = {PassSpec{t, 0}, PassSpec{t, 0}, PassSpec{3 * t + ell, t}};
  alg.step = [&base, &inst, options, t](Ctx& ctx) {
    switch (ctx.pass()) {
      case 0:
        ground_step(base, inst, t, ctx);
        break;
      case 1:
        propose_step(base, inst, t, ctx);
        break;
      default:
        accept_step(base, inst, t, options, ctx);
        break;
    }
  };
  alg.output = [](const JvvNodeState& s) { return NodeResult{s.y, s.fail}; };
  return alg;
}

SlocalRun<JvvNodeState> jvv_slocal(const Inferencer& base, const Instance& inst, const Ordering& order,
                                   Randomness& rng, const JvvOptions& options) {
  return run_slocal(inst.graph(), jvv_initial_states(inst), jvv_slocal_algorithm(base, inst, options), order, rng);
}

CompiledRun<JvvNodeState> jvv_local(const Inferencer& base, const Instance& inst, Randomness& rng,
                                    std::uint64_t decomposition_seed, const DecompositionParams& params,
                                    const JvvOptions& options, const Graph* power) {
  return slocal_to_local(inst.graph(), jvv_initial_states(inst), jvv_slocal_algorithm(base, inst, options), rng,
                         decomposition_seed, params, power);
}

}  // namespace lgs
