#include "lgs/gibbs.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "lgs/detail/enumerate.hpp"
#include "lgs/errors.hpp"

namespace lgs {

// ---------------------------------------------------------------------------
// PartialConfig

std::vector<Vertex> PartialConfig::domain() const {
  std::vector<Vertex> out;
  for (Vertex v = 0; v < values_.size(); ++v) {
    if (values_[v] != kUnassigned) out.push_back(v);
  }
  return out;
}

std::size_t PartialConfig::assigned_count() const {
  return static_cast<std::size_t>(
      std::count_if(values_.begin(), values_.end(), [](Symbol s) { return s != kUnassigned; }));
}

bool PartialConfig::consistent_with(const PartialConfig& other) const {
  if (other.size() != size()) return false;
  for (Vertex v = 0; v < size(); ++v) {
    if (assigned(v) && other.assigned(v) && values_[v] != other.values_[v]) return false;
  }
  return true;
}

PartialConfig PartialConfig::merged(const PartialConfig& other) const {
  if (other.size() != size()) throw InputError("configurations over different vertex sets");
  PartialConfig out = *this;
  for (Vertex v = 0; v < size(); ++v) {
    if (!other.assigned(v)) continue;
    if (assigned(v) && values_[v] != other[v]) {
      throw InputError("conflicting assignment at vertex " + std::to_string(v));
    }
    out.values_[v] = other[v];
  }
  return out;
}

PartialConfig PartialConfig::restricted(std::span<const std::uint8_t> mask) const {
  PartialConfig out(size());
  for (Vertex v = 0; v < size(); ++v) {
    if (mask[v]) out.values_[v] = values_[v];
  }
  return out;
}

std::size_t PartialConfigHash::operator()(const PartialConfig& c) const {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (Symbol s : c.values()) {
    h ^= static_cast<std::uint64_t>(s + 2) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

// ---------------------------------------------------------------------------
// Factor

Factor::Factor(std::vector<Vertex> scope, std::size_t q, std::vector<double> table)
    : scope_(std::move(scope)), q_(q), table_(std::move(table)) {
  if (scope_.empty()) throw InputError("factor scope must be nonempty");
  auto sorted = scope_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw InputError("factor scope has a repeated vertex");
  }
  const double expected = detail::state_count(q_, scope_.size());
  if (static_cast<double>(table_.size()) != expected) {
    throw InputError("factor table has " + std::to_string(table_.size()) + " entries, expected " +
                     std::to_string(static_cast<std::uint64_t>(expected)));
  }
  zero_.resize(table_.size());
  for (std::size_t i = 0; i < table_.size(); ++i) {
    if (!(table_[i] >= 0.0) || std::isinf(table_[i])) {
      throw InputError("factor entries must be finite and non-negative");
    }
    zero_[i] = table_[i] == 0.0;
  }
}

std::size_t Factor::index_of(const PartialConfig& config) const {
  std::size_t idx = 0;
  for (std::size_t k = scope_.size(); k-- > 0;) {
    idx = idx * q_ + static_cast<std::size_t>(config[scope_[k]]);
  }
  return idx;
}

bool Factor::covered_by(const PartialConfig& config) const {
  return std::all_of(scope_.begin(), scope_.end(), [&](Vertex v) { return config.assigned(v); });
}

// ---------------------------------------------------------------------------
// GibbsSpec

namespace {

std::size_t scope_diameter(const Graph& g, std::span<const Vertex> scope) {
  if (scope.size() == 1) return 0;
  if (scope.size() == 2 && g.has_edge(scope[0], scope[1])) return 1;
  std::size_t best = 0;
  for (Vertex u : scope) {
    const auto d = distances_from(g, u);
    for (Vertex v : scope) {
      if (!d[v].is_finite()) throw InputError("factor scope spans disconnected vertices");
      best = std::max(best, d[v].hops());
    }
  }
  return best;
}

}  // namespace

GibbsSpec::GibbsSpec(Graph graph, std::size_t q, std::vector<Factor> factors, SpecOptions options)
    : graph_(std::move(graph)), q_(q), factors_(std::move(factors)), incident_(graph_.size()),
      options_(std::move(options)) {
  if (q_ == 0) throw InputError("alphabet size must be positive");
  const std::size_t n = graph_.size();
  const std::size_t cap = options_.alphabet_cap ? options_.alphabet_cap : std::max<std::size_t>(64, n * n);
  if (q_ > cap) throw InputError("alphabet size exceeds the configured cap " + std::to_string(cap));
  for (std::size_t f = 0; f < factors_.size(); ++f) {
    const auto scope = factors_[f].scope();
    for (Vertex v : scope) {
      if (v >= n) throw InputError("factor scope references unknown vertex");
      incident_[v].push_back(f);
    }
    if (factors_[f].table_size() != static_cast<std::size_t>(detail::state_count(q_, scope.size()))) {
      throw InputError("factor table does not match the alphabet size");
    }
    locality_ = std::max(locality_, scope_diameter(graph_, scope));
  }
}

double weight(const GibbsSpec& spec, const PartialConfig& sigma) {
  if (sigma.size() != spec.size() || !sigma.complete()) {
    throw InputError("weight requires a complete configuration");
  }
  double w = 1.0;
  for (const Factor& f : spec.factors()) {
    const std::size_t idx = f.index_of(sigma);
    if (f.is_zero(idx)) return 0.0;
    w *= f.value(idx);
  }
  return w;
}

bool weight_positive(const GibbsSpec& spec, const PartialConfig& sigma) {
  if (sigma.size() != spec.size() || !sigma.complete()) {
    throw InputError("weight requires a complete configuration");
  }
  return std::none_of(spec.factors().begin(), spec.factors().end(),
                      [&](const Factor& f) { return f.vanishes(sigma); });
}

bool is_locally_feasible(const GibbsSpec& spec, const PartialConfig& tau) {
  if (tau.size() != spec.size()) throw InputError("configuration size mismatch");
  for (const Factor& f : spec.factors()) {
    if (f.covered_by(tau) && f.vanishes(tau)) return false;
  }
  return true;
}

bool is_locally_feasible_within(const GibbsSpec& spec, const PartialConfig& tau,
                                std::span<const std::uint8_t> region) {
  for (const Factor& f : spec.factors()) {
    const auto scope = f.scope();
    const bool inside = std::all_of(scope.begin(), scope.end(), [&](Vertex v) { return region[v] != 0; });
    if (inside && f.covered_by(tau) && f.vanishes(tau)) return false;
  }
  return true;
}

bool is_feasible(const GibbsSpec& spec, const PartialConfig& tau, std::uint64_t budget) {
  if (tau.size() != spec.size()) throw InputError("configuration size mismatch");
  for (Vertex v : tau.domain()) {
    if (static_cast<std::size_t>(tau[v]) >= spec.q()) throw InputError("symbol outside the alphabet");
  }
  if (!is_locally_feasible(spec, tau)) return false;
  std::vector<Vertex> free;
  for (Vertex v = 0; v < spec.size(); ++v) {
    if (!tau.assigned(v)) free.push_back(v);
  }
  detail::check_budget(spec.q(), free.size(), budget, "feasibility check");
  const auto factors = detail::all_factors(spec);
  detail::ConfigEnumerator en(spec, std::move(free), factors, tau);
  bool found = false;
  en.run([&](const PartialConfig&, double) {
    found = true;
    return false;
  });
  return found;
}

AdmissibilityVerdict check_local_admissibility(const GibbsSpec& spec, std::uint64_t budget) {
  const std::size_t n = spec.size();
  const std::size_t q = spec.q();
  const double partial_states = detail::state_count(q + 1, n);
  const double marking = detail::state_count(q, n) * detail::state_count(2, n);
  AdmissibilityVerdict verdict{AdmissibilityVerdict::Kind::kAdmissible, std::nullopt, partial_states + marking};
  if (partial_states + marking > static_cast<double>(budget)) {
    verdict.kind = AdmissibilityVerdict::Kind::kBudgetExceeded;
    return verdict;
  }
  const std::size_t codes = static_cast<std::size_t>(partial_states);
  std::vector<std::size_t> place(n);
  for (std::size_t v = 0, p = 1; v < n; ++v, p *= (q + 1)) place[v] = p;

  // Mark every restriction of every positive-weight configuration.
  std::vector<std::uint8_t> feasible(codes, 0);
  const auto factors = detail::all_factors(spec);
  std::vector<Vertex> all(n);
  std::iota(all.begin(), all.end(), Vertex{0});
  detail::ConfigEnumerator en(spec, all, factors, PartialConfig(n));
  en.run([&](const PartialConfig& sigma, double) {
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
      std::size_t code = 0;
      for (Vertex v = 0; v < n; ++v) {
        if (mask >> v & 1U) code += place[v] * static_cast<std::size_t>(sigma[v] + 1);
      }
      feasible[code] = 1;
    }
    return true;
  });

  PartialConfig tau(n);
  for (std::size_t code = 0; code < codes; ++code) {
    if (feasible[code]) continue;
    std::size_t rest = code;
    for (Vertex v = 0; v < n; ++v) {
      const std::size_t digit = rest % (q + 1);
      rest /= (q + 1);
      if (digit == 0) {
        tau.clear(v);
      } else {
        tau.set(v, static_cast<Symbol>(digit - 1));
      }
    }
    if (is_locally_feasible(spec, tau)) {
      verdict.kind = AdmissibilityVerdict::Kind::kCounterexample;
      verdict.counterexample = tau;
      return verdict;
    }
  }
  return verdict;
}

// ---------------------------------------------------------------------------
// Instance

namespace {

void validate_pinning(const GibbsSpec& spec, const PartialConfig& pinning, FeasibilityCheck check) {
  if (pinning.size() != spec.size()) throw InputError("pinning size does not match the graph");
  for (Vertex v : pinning.domain()) {
    if (static_cast<std::size_t>(pinning[v]) >= spec.q()) {
      throw InputError("pinned symbol outside the alphabet at node " + std::to_string(spec.graph().id(v)));
    }
  }
  if (!is_locally_feasible(spec, pinning)) throw InfeasibleError("pinning violates a constraint");
  if (check == FeasibilityCheck::kLocal || spec.certified_locally_admissible()) return;
  if (!is_feasible(spec, pinning)) throw InfeasibleError("pinning has no feasible extension");
}

}  // namespace

Instance::Instance(SpecPtr spec, PartialConfig pinning, FeasibilityCheck check)
    : spec_(std::move(spec)), pinning_(std::move(pinning)) {
  if (!spec_) throw InputError("null model");
  validate_pinning(*spec_, pinning_, check);
}

Instance::Instance(SpecPtr spec) : Instance(spec, PartialConfig(spec ? spec->size() : 0)) {}

Instance Instance::with_pinning(PartialConfig pinning, FeasibilityCheck check) const {
  return Instance(spec_, std::move(pinning), check);
}

Instance condition(const Instance& inst, const PartialConfig& extra, FeasibilityCheck check) {
  return inst.with_pinning(inst.pinning().merged(extra), check);
}

// ---------------------------------------------------------------------------
// Catalog

namespace {

void check_catalog_locality(const GibbsSpec& spec) {
  const std::size_t expected = spec.graph().edge_count() > 0 ? 1 : 0;
  if (spec.locality() != expected) throw ContractViolation("catalog model with locality != 1");
}

}  // namespace

SpecPtr hardcore(const Graph& g, double lambda) {
  if (!(lambda >= 0.0)) throw InputError("hardcore activity must be non-negative");
  std::vector<Factor> factors;
  for (Vertex v = 0; v < g.size(); ++v) factors.emplace_back(std::vector<Vertex>{v}, 2, std::vector<double>{1.0, lambda});
  for (const auto& [u, v] : g.edges()) {
    factors.emplace_back(std::vector<Vertex>{u, v}, 2, std::vector<double>{1.0, 1.0, 1.0, 0.0});
  }
  auto spec = std::make_shared<const GibbsSpec>(g, 2, std::move(factors),
                                                SpecOptions{0, true, "hardcore"});
  check_catalog_locality(*spec);
  return spec;
}

SpecPtr two_spin(const Graph& g, double beta, double gamma, double lambda) {
  if (!(beta >= 0.0 && gamma >= 0.0 && lambda >= 0.0)) {
    throw InputError("two-spin parameters must be non-negative");
  }
  std::vector<Factor> factors;
  for (Vertex v = 0; v < g.size(); ++v) factors.emplace_back(std::vector<Vertex>{v}, 2, std::vector<double>{lambda, 1.0});
  for (const auto& [u, v] : g.edges()) {
    // index = s_u + 2 s_v: (0,0)->beta, (1,0)->1, (0,1)->1, (1,1)->gamma
    factors.emplace_back(std::vector<Vertex>{u, v}, 2, std::vector<double>{beta, 1.0, 1.0, gamma});
  }
  const bool soft = beta > 0.0 && gamma > 0.0 && lambda > 0.0;
  auto spec = std::make_shared<const GibbsSpec>(g, 2, std::move(factors),
                                                SpecOptions{0, soft, "two_spin"});
  check_catalog_locality(*spec);
  return spec;
}

SpecPtr coloring(const Graph& g, std::size_t q, const std::vector<std::vector<Symbol>>& lists) {
  if (q == 0) throw InputError("coloring needs at least one color");
  if (lists.size() != g.size()) throw InputError("one color list per vertex required");
  std::vector<Factor> factors;
  bool admissible = true;
  for (Vertex v = 0; v < g.size(); ++v) {
    if (lists[v].empty()) throw InputError("empty color list at node " + std::to_string(g.id(v)));
    std::vector<double> mask(q, 0.0);
    for (Symbol c : lists[v]) {
      if (c < 0 || static_cast<std::size_t>(c) >= q) throw InputError("color outside the alphabet");
      mask[c] = 1.0;
    }
    const auto allowed = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1.0));
    admissible = admissible && allowed > g.degree(v);
    if (allowed < q) factors.emplace_back(std::vector<Vertex>{v}, q, std::move(mask));
  }
  std::vector<double> differ(q * q, 1.0);
  for (std::size_t c = 0; c < q; ++c) differ[c * q + c] = 0.0;
  for (const auto& [u, v] : g.edges()) factors.emplace_back(std::vector<Vertex>{u, v}, q, differ);
  auto spec = std::make_shared<const GibbsSpec>(g, q, std::move(factors),
                                                SpecOptions{0, admissible, "coloring"});
  check_catalog_locality(*spec);
  return spec;
}

SpecPtr coloring(const Graph& g, std::size_t q) {
  std::vector<Symbol> full(q);
  std::iota(full.begin(), full.end(), Symbol{0});
  return coloring(g, q, std::vector<std::vector<Symbol>>(g.size(), full));
}

MatchingModel matching(const Graph& g, double lambda) {
  MatchingModel model;
  model.line = line_graph(g);
  auto base = hardcore(model.line.graph, lambda);
  // Same factors, relabelled as a matching model.
  std::vector<Factor> factors(base->factors().begin(), base->factors().end());
  model.spec = std::make_shared<const GibbsSpec>(model.line.graph, 2, std::move(factors),
                                                 SpecOptions{0, true, "matching"});
  return model;
}

std::vector<std::pair<Vertex, Vertex>> MatchingModel::matching_of(const PartialConfig& sigma) const {
  std::vector<std::pair<Vertex, Vertex>> out;
  for (Vertex e = 0; e < sigma.size(); ++e) {
    if (sigma.assigned(e) && sigma[e] == 1) out.push_back(line.edge_of[e]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Enumeration support

namespace detail {

std::vector<std::size_t> factors_within(const GibbsSpec& spec, std::span<const std::uint8_t> region) {
  std::vector<std::size_t> out;
  for (std::size_t f = 0; f < spec.factors().size(); ++f) {
    const auto scope = spec.factors()[f].scope();
    if (std::all_of(scope.begin(), scope.end(), [&](Vertex v) { return region[v] != 0; })) out.push_back(f);
  }
  return out;
}

std::vector<std::size_t> all_factors(const GibbsSpec& spec) {
  std::vector<std::size_t> out(spec.factors().size());
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

ConfigEnumerator::ConfigEnumerator(const GibbsSpec& spec, std::vector<Vertex> free,
                                   std::span<const std::size_t> factors, PartialConfig base)
    : spec_(&spec), q_(spec.q()), free_(std::move(free)), by_level_(free_.size()), config_(std::move(base)) {
  std::vector<std::size_t> level_of(spec.size(), static_cast<std::size_t>(-1));
  for (std::size_t i = 0; i < free_.size(); ++i) {
    if (config_.assigned(free_[i])) throw ContractViolation("enumerated vertex is already assigned");
    level_of[free_[i]] = i;
  }
  for (std::size_t f : factors) {
    const Factor& factor = spec.factors()[f];
    std::size_t level = static_cast<std::size_t>(-1);
    bool any_free = false;
    for (Vertex v : factor.scope()) {
      if (level_of[v] != static_cast<std::size_t>(-1)) {
        level = any_free ? std::max(level, level_of[v]) : level_of[v];
        any_free = true;
      } else if (!config_.assigned(v)) {
        throw ContractViolation("factor scope not covered by the enumeration");
      }
    }
    if (any_free) {
      by_level_[level].push_back(f);
    } else {
      const std::size_t idx = factor.index_of(config_);
      if (factor.is_zero(idx)) root_feasible_ = false;
      root_weight_ *= factor.value(idx);
    }
  }
}

}  // namespace detail

}  // namespace lgs
