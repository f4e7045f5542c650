#include "lgs/inference.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "lgs/detail/enumerate.hpp"
#include "lgs/errors.hpp"

namespace lgs {

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t x) {
  h ^= x + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  h *= 0xff51afd7ed558ccdULL;
  return h ^ (h >> 33);
}

// Hash of v, the target and the pinning inside ball(v, radius).
std::uint64_t view_hash(const Instance& inst, Vertex v, std::size_t radius, double target, std::uint64_t seed) {
  std::uint64_t h = mix(seed, inst.graph().id(v));
  h = mix(h, std::bit_cast<std::uint64_t>(target));
  for (Vertex u : ball(inst.graph(), v, radius)) {
    if (inst.pinned(u)) h = mix(mix(h, inst.graph().id(u)), static_cast<std::uint64_t>(inst.pinning()[u]));
  }
  return h;
}

std::size_t argmax_lowest(std::span<const double> p) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < p.size(); ++c) {
    if (p[c] > p[best]) best = c;
  }
  return best;
}

}  // namespace

MarginalDist ExactInferencer::infer(const Instance& inst, Vertex v, double) const {
  return marginal(inst, v, budget_);
}

// ---------------------------------------------------------------------------

TabulatedInferencer::TabulatedInferencer(SpecPtr spec, std::uint64_t budget)
    : spec_(std::move(spec)), budget_(budget), tables_(spec_->size()) {}

const MarginalTable& TabulatedInferencer::table(Vertex v) const {
  std::lock_guard lock(mutex_);
  auto& slot = tables_.at(v);
  if (!slot) slot = std::make_unique<MarginalTable>(Instance(spec_), v, budget_);
  return *slot;
}

MarginalDist TabulatedInferencer::infer(const Instance& inst, Vertex v, double) const {
  if (&inst.spec() != spec_.get()) throw InputError("tabulated inferencer queried with a different spec");
  const std::size_t q = inst.spec().q();
  if (inst.pinned(v)) return point_mass(q, inst.pinning()[v]);
  const MarginalTable& t = table(v);
  return t.marginal(t.encode(inst.pinning()));
}

// ---------------------------------------------------------------------------

std::size_t CachingInferencer::KeyHash::operator()(const std::vector<std::int64_t>& k) const {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (std::int64_t x : k) h = mix(h, static_cast<std::uint64_t>(x));
  return static_cast<std::size_t>(h);
}

MarginalDist CachingInferencer::infer(const Instance& inst, Vertex v, double target) const {
  std::vector<std::int64_t> key;
  key.reserve(inst.size() + 2);
  key.push_back(static_cast<std::int64_t>(v));
  key.push_back(std::bit_cast<std::int64_t>(target));
  for (Symbol s : inst.pinning().values()) key.push_back(s);
  {
    std::lock_guard lock(mutex_);
    if (spec_ != &inst.spec()) {
      cache_.clear();
      spec_ = &inst.spec();
    }
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  MarginalDist out = inner_->infer(inst, v, target);
  std::lock_guard lock(mutex_);
  if (spec_ == &inst.spec()) cache_.emplace(std::move(key), out);
  return out;
}

std::size_t CachingInferencer::cache_size() const {
  std::lock_guard lock(mutex_);
  return cache_.size();
}

// ---------------------------------------------------------------------------

NoisyInferencer::NoisyInferencer(InferencerPtr exact,
                                 std::function<std::size_t(const GibbsSpec&, double)> declared_locality,
                                 std::uint64_t seed)
    : exact_(std::move(exact)), declared_(std::move(declared_locality)), seed_(seed) {}

MarginalDist NoisyInferencer::infer(const Instance& inst, Vertex v, double target) const {
  MarginalDist p = exact_->infer(inst, v, 0.0);
  if (p.pinned || p.size() < 2) return p;
  const std::size_t q = p.size();
  const std::size_t from = argmax_lowest(p.probs);
  const std::uint64_t h = view_hash(inst, v, declared_(inst.spec(), target), target, seed_);
  std::size_t to = h % (q - 1);
  if (to >= from) ++to;
  const double moved = std::min(target, p.probs[from]);
  p.probs[from] -= moved;
  p.probs[to] += moved;
  p.guarantee = Guarantee::tv(target, "injected noise");
  return p;
}

MultNoisyInferencer::MultNoisyInferencer(InferencerPtr exact, std::size_t declared_locality, std::uint64_t seed)
    : exact_(std::move(exact)), declared_(declared_locality), seed_(seed) {}

MarginalDist MultNoisyInferencer::infer(const Instance& inst, Vertex v, double target) const {
  MarginalDist p = exact_->infer(inst, v, 0.0);
  if (p.pinned) return p;
  const std::uint64_t h = view_hash(inst, v, declared_, target, seed_);
  std::vector<double> w(p.size());
  for (std::size_t c = 0; c < p.size(); ++c) {
    const double sign = (mix(h, c) & 1U) ? 1.0 : -1.0;
    w[c] = p.probs[c] * std::exp(sign * target / 2);
  }
  return normalized(std::move(w), Guarantee::mult(target, "injected noise"));
}

// ---------------------------------------------------------------------------

MarginalDist ssm_ball_inference(const Instance& inst, Vertex v, std::size_t t, double certified_tv,
                                std::uint64_t budget) {
  const GibbsSpec& spec = inst.spec();
  const Graph& g = spec.graph();
  g.check_vertex(v);
  const std::size_t q = spec.q();
  if (inst.pinned(v)) return point_mass(q, inst.pinning()[v]);
  const std::size_t l = spec.locality();
  const auto region = ball(g, v, t + l);
  const auto inner = ball_mask(g, v, t);
  const auto outer = ball_mask(g, v, t + 2 * l);

  std::vector<Vertex> gamma;
  for (Vertex u : region) {
    if (!inner[u] && !inst.pinned(u)) gamma.push_back(u);
  }
  sort_by_id(g, gamma);
  detail::check_budget(q, gamma.size(), budget, "ssm ball boundary search");

  // Factors inside B_{t+2l} whose scope lies in Lambda u Gamma.
  std::vector<std::uint8_t> in_gamma(g.size(), 0);
  for (Vertex u : gamma) in_gamma[u] = 1;
  std::vector<std::size_t> factors;
  for (std::size_t f : detail::factors_within(spec, outer)) {
    const auto scope = spec.factors()[f].scope();
    if (std::all_of(scope.begin(), scope.end(), [&](Vertex u) { return inst.pinned(u) || in_gamma[u]; })) {
      factors.push_back(f);
    }
  }
  std::optional<PartialConfig> extension;
  detail::ConfigEnumerator en(spec, gamma, factors, inst.pinning());
  en.run([&](const PartialConfig& leaf, double) {
    extension = leaf;
    return false;
  });
  if (!extension) {
    throw InfeasibleError("ssm_ball_inference: no locally feasible boundary extension (spec not locally admissible?)");
  }
  PartialConfig boundary(g.size());
  for (Vertex u : gamma) boundary.set(u, (*extension)[u]);
  MarginalDist out = ball_marginal(inst, v, region, boundary, budget);
  const bool covers = region.size() == g.size() && gamma.empty();
  out.guarantee = covers ? Guarantee::exact() : Guarantee::tv(certified_tv, "ssm ball radius " + std::to_string(t));
  return out;
}

// ---------------------------------------------------------------------------

MarginalDist boost_inference(const Inferencer& base, const Instance& inst, Vertex v, double eps, BoostTrace* trace,
                             std::uint64_t budget) {
  if (!(eps > 0.0 && eps < 1.0)) throw InputError("boost_inference requires 0 < eps < 1");
  const GibbsSpec& spec = inst.spec();
  const Graph& g = spec.graph();
  g.check_vertex(v);
  const std::size_t q = spec.q();
  if (inst.pinned(v)) return point_mass(q, inst.pinning()[v]);
  const std::size_t n = spec.size();
  const std::size_t l = spec.locality();
  const double delta = eps / (5.0 * static_cast<double>(q) * static_cast<double>(n));
  const std::size_t t = base.locality(spec, delta);

  const auto region = ball(g, v, t + l);
  const auto inner = ball_mask(g, v, t);
  std::vector<Vertex> gamma;
  for (Vertex u : region) {
    if (!inner[u] && !inst.pinned(u)) gamma.push_back(u);
  }
  sort_by_id(g, gamma);
  if (trace) {
    trace->base_locality = t;
    trace->base_target = delta;
    trace->gamma = gamma;
    trace->chosen.clear();
    trace->pinnings.clear();
  }

  PartialConfig tau = inst.pinning();
  for (Vertex u : gamma) {
    const Instance current = inst.with_pinning(tau, FeasibilityCheck::kLocal);
    const MarginalDist m = base.infer(current, u, delta);
    if (m.size() != q) throw ContractViolation("base inferencer returned a vector of the wrong size");
    const std::size_t c = argmax_lowest(m.probs);
    if (!(m.probs[c] > 0.0)) throw ContractViolation("base inferencer returned an all-zero marginal");
    tau.set(u, static_cast<Symbol>(c));
    if (trace) {
      trace->chosen.push_back(static_cast<Symbol>(c));
      trace->pinnings.push_back(tau);
    }
  }
  const Instance final_inst = inst.with_pinning(std::move(tau), FeasibilityCheck::kLocal);
  MarginalDist out;
  try {
    out = ball_marginal(final_inst, v, region, PartialConfig(n), budget);
  } catch (const InfeasibleError&) {
    throw ContractViolation("boosting reached an infeasible pinning; base inferencer broke its guarantee");
  }
  out.guarantee = gamma.empty() && region.size() == n ? Guarantee::exact() : Guarantee::mult(eps, "boosted");
  return out;
}

std::size_t BoostedInferencer::locality(const GibbsSpec& spec, double eps) const {
  const double delta = eps / (5.0 * static_cast<double>(spec.q()) * static_cast<double>(spec.size()));
  return 2 * base_->locality(spec, delta) + spec.locality();
}

// ---------------------------------------------------------------------------

std::vector<double> single_site_influence(const Instance& inst, std::uint64_t budget) {
  const Graph& g = inst.graph();
  const std::size_t q = inst.spec().q();
  std::vector<double> influence(1, 0.0);
  for (Vertex u = 0; u < g.size(); ++u) {
    if (inst.pinned(u)) continue;
    const MarginalTable table(inst, u, budget);
    const auto coded = table.coded_vertices();
    const auto hops = distances_from(g, u);
    // step[i] = code contribution of coded vertex i holding symbol 0.
    std::vector<std::size_t> step(coded.size());
    for (std::size_t i = 0; i < coded.size(); ++i) {
      PartialConfig single = inst.pinning();
      single.set(coded[i], 0);
      step[i] = table.encode(single);
    }
    for (std::size_t code = 0; code < table.codes(); ++code) {
      if (!table.feasible(code)) continue;
      const auto base = table.marginal(code);
      for (std::size_t i = 0; i < coded.size(); ++i) {
        if (code / step[i] % (q + 1) != 0 || !hops[coded[i]].is_finite()) continue;
        const std::size_t d = hops[coded[i]].hops();
        if (influence.size() <= d) influence.resize(d + 1, 0.0);
        for (std::size_t c = 0; c < q; ++c) {
          const std::size_t next = code + (c + 1) * step[i];
          if (!table.feasible(next)) continue;
          influence[d] = std::max(influence[d], tv_distance(table.marginal(next), base));
        }
      }
    }
  }
  return influence;
}

std::size_t certified_influence_radius(const std::vector<double>& influence, double delta) {
  std::size_t t = influence.size();
  while (t > 0 && influence[t - 1] <= delta) --t;
  // influence[d] <= delta for all d >= t, so t - 1 works unless t == 0.
  return t == 0 ? 0 : t - 1;
}

// ---------------------------------------------------------------------------

SamplerInference inference_from_sampler(const Sampler& sampler, const Instance& inst, Vertex v,
                                        const SamplerInferenceOptions& options) {
  inst.graph().check_vertex(v);
  const std::size_t q = inst.spec().q();
  SamplerInference out;

  auto monte_carlo = [&](std::string note) {
    if (options.runs == 0) throw InputError("monte carlo inference needs at least one run");
    std::vector<double> counts(q, 0.0);
    double flags = 0.0;
    for (std::size_t k = 0; k < options.runs; ++k) {
      RandomTape tape(derive_seed(options.seed, k));
      const SampleOutcome s = sampler(inst, tape);
      flags += static_cast<double>(s.failure_mass());
      if (s.y.at(v)) counts.at(static_cast<std::size_t>(*s.y[v])) += 1.0;
    }
    const double radius = std::sqrt(static_cast<double>(q) / (2.0 * static_cast<double>(options.runs)));
    out.failure_mass = flags / static_cast<double>(options.runs);
    out.marginal = normalized(std::move(counts));
    out.marginal.guarantee = Guarantee::tv(options.sampler_tv + out.failure_mass + radius, std::move(note));
    out.enumerated = false;
    return out;
  };

  if (options.mode == SamplerInferenceOptions::Mode::kMonteCarlo) return monte_carlo("monte carlo");

  ChoiceEnumerator en(options.max_leaves);
  std::vector<double> acc(q, 0.0);
  double flags = 0.0;
  try {
    while (en.next_leaf()) {
      const SampleOutcome s = sampler(inst, en);
      const double p = en.leaf_probability();
      flags += p * static_cast<double>(s.failure_mass());
      if (s.y.at(v)) acc.at(static_cast<std::size_t>(*s.y[v])) += p;
    }
  } catch (const BudgetExceeded&) {
    if (en.leaves() < options.max_leaves) throw;
    return monte_carlo("tape budget exceeded; monte carlo fallback");
  }
  out.failure_mass = flags;
  out.marginal = normalized(std::move(acc));
  out.marginal.guarantee = Guarantee::tv(options.sampler_tv + flags, "enumerated");
  out.enumerated = true;
  out.leaves = en.leaves();
  return out;
}

}  // namespace lgs
