#include "lgs/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

#include "lgs/detail/enumerate.hpp"
#include "lgs/errors.hpp"

namespace lgs {

std::string to_string(Guarantee::Kind kind) {
  switch (kind) {
    case Guarantee::Kind::kExact: return "exact";
    case Guarantee::Kind::kTv: return "tv";
    case Guarantee::Kind::kMult: return "mult";
  }
  return "?";
}

std::string describe(const Guarantee& g) {
  if (g.kind == Guarantee::Kind::kExact) return "exact";
  std::ostringstream out;
  out.precision(6);
  out << to_string(g.kind) << "(" << g.bound << ")";
  return out.str();
}

MarginalDist normalized(std::vector<double> weights, Guarantee g) {
  detail::CompensatedSum total;
  for (double w : weights) {
    if (!(w >= 0.0) || std::isinf(w)) throw InputError("marginal weights must be finite and non-negative");
    total.add(w);
  }
  const double z = total.value();
  if (!(z > 0.0)) throw InputError("marginal weights sum to zero");
  for (double& w : weights) w /= z;
  return MarginalDist{std::move(weights), std::move(g), false};
}

MarginalDist point_mass(std::size_t q, Symbol s) {
  MarginalDist out;
  out.probs.assign(q, 0.0);
  out.probs.at(static_cast<std::size_t>(s)) = 1.0;
  out.pinned = true;
  return out;
}

namespace {

std::vector<Vertex> free_vertices(const Instance& inst) {
  std::vector<Vertex> out;
  for (Vertex v = 0; v < inst.size(); ++v) {
    if (!inst.pinned(v)) out.push_back(v);
  }
  return out;
}

}  // namespace

double partition_function(const Instance& inst, std::uint64_t budget) {
  auto free = free_vertices(inst);
  detail::check_budget(inst.spec().q(), free.size(), budget, "partition function");
  const auto factors = detail::all_factors(inst.spec());
  detail::ConfigEnumerator en(inst.spec(), std::move(free), factors, inst.pinning());
  detail::CompensatedSum z;
  en.run([&](const PartialConfig&, double w) {
    z.add(w);
    return true;
  });
  return z.value();
}

MarginalDist marginal(const Instance& inst, Vertex v, std::uint64_t budget) {
  inst.graph().check_vertex(v);
  const std::size_t q = inst.spec().q();
  if (inst.pinned(v)) return point_mass(q, inst.pinning()[v]);
  auto free = free_vertices(inst);
  detail::check_budget(q, free.size(), budget, "marginal");
  const auto factors = detail::all_factors(inst.spec());
  detail::ConfigEnumerator en(inst.spec(), std::move(free), factors, inst.pinning());
  std::vector<detail::CompensatedSum> acc(q);
  en.run([&](const PartialConfig& sigma, double w) {
    acc[sigma[v]].add(w);
    return true;
  });
  std::vector<double> weights(q);
  for (std::size_t c = 0; c < q; ++c) weights[c] = acc[c].value();
  return normalized(std::move(weights));
}

std::vector<MarginalDist> all_marginals(const Instance& inst, std::uint64_t budget) {
  const std::size_t n = inst.size();
  const std::size_t q = inst.spec().q();
  auto free = free_vertices(inst);
  detail::check_budget(q, free.size(), budget, "marginals");
  const auto factors = detail::all_factors(inst.spec());
  detail::ConfigEnumerator en(inst.spec(), free, factors, inst.pinning());
  std::vector<detail::CompensatedSum> acc(n * q);
  en.run([&](const PartialConfig& sigma, double w) {
    for (Vertex v : free) acc[v * q + sigma[v]].add(w);
    return true;
  });
  std::vector<MarginalDist> out;
  out.reserve(n);
  for (Vertex v = 0; v < n; ++v) {
    if (inst.pinned(v)) {
      out.push_back(point_mass(q, inst.pinning()[v]));
      continue;
    }
    std::vector<double> weights(q);
    for (std::size_t c = 0; c < q; ++c) weights[c] = acc[v * q + c].value();
    out.push_back(normalized(std::move(weights)));
  }
  return out;
}

MarginalDist ball_marginal(const Instance& inst, Vertex v, std::span<const Vertex> region,
                           const PartialConfig& boundary, std::uint64_t budget) {
  const GibbsSpec& spec = inst.spec();
  const std::size_t n = spec.size();
  const std::size_t q = spec.q();
  spec.graph().check_vertex(v);
  std::vector<std::uint8_t> mask(n, 0);
  for (Vertex u : region) {
    spec.graph().check_vertex(u);
    mask[u] = 1;
  }
  if (!mask[v]) throw InputError("ball_marginal: vertex outside the region");

  PartialConfig pin = inst.pinning().restricted(mask).merged(boundary.restricted(mask));
  if (pin.assigned(v)) return point_mass(q, pin[v]);

  for (const Factor& f : spec.factors()) {
    const auto scope = f.scope();
    const bool crosses = std::any_of(scope.begin(), scope.end(), [&](Vertex u) { return !mask[u]; });
    if (!crosses) continue;
    for (Vertex u : scope) {
      if (mask[u] && !pin.assigned(u)) {
        throw ContractViolation("ball_marginal: boundary does not separate the region at node " +
                                std::to_string(spec.graph().id(u)));
      }
    }
  }

  std::vector<Vertex> free;
  for (Vertex u : region) {
    if (!pin.assigned(u)) free.push_back(u);
  }
  std::sort(free.begin(), free.end());
  detail::check_budget(q, free.size(), budget, "ball marginal");
  // Vertices outside the region must look assigned to the enumerator; their
  // values never matter since only inside factors are used.
  PartialConfig base = pin;
  for (Vertex u = 0; u < n; ++u) {
    if (!mask[u]) base.set(u, 0);
  }
  const auto factors = detail::factors_within(spec, mask);
  detail::ConfigEnumerator en(spec, std::move(free), factors, std::move(base));
  std::vector<detail::CompensatedSum> acc(q);
  en.run([&](const PartialConfig& sigma, double w) {
    acc[sigma[v]].add(w);
    return true;
  });
  std::vector<double> weights(q);
  for (std::size_t c = 0; c < q; ++c) weights[c] = acc[c].value();
  if (std::all_of(weights.begin(), weights.end(), [](double w) { return w == 0.0; })) {
    throw InfeasibleError("ball_marginal: boundary has no feasible extension inside the region");
  }
  return normalized(std::move(weights));
}

Distribution joint_distribution(const Instance& inst, std::uint64_t budget) {
  auto free = free_vertices(inst);
  detail::check_budget(inst.spec().q(), free.size(), budget, "joint distribution");
  const auto factors = detail::all_factors(inst.spec());
  detail::ConfigEnumerator en(inst.spec(), std::move(free), factors, inst.pinning());
  Distribution out;
  detail::CompensatedSum z;
  en.run([&](const PartialConfig& sigma, double w) {
    out.emplace(std::vector<Symbol>(sigma.values().begin(), sigma.values().end()), w);
    z.add(w);
    return true;
  });
  const double total = z.value();
  for (auto& [config, p] : out) p /= total;
  return out;
}

double tv_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw InputError("tv_distance: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

double tv_distance(const MarginalDist& p, const MarginalDist& q) { return tv_distance(p.probs, q.probs); }

double tv_distance(const Distribution& p, const Distribution& q) {
  double s = 0.0;
  auto a = p.begin();
  auto b = q.begin();
  while (a != p.end() || b != q.end()) {
    if (b == q.end() || (a != p.end() && a->first < b->first)) {
      s += std::abs(a->second);
      ++a;
    } else if (a == p.end() || b->first < a->first) {
      s += std::abs(b->second);
      ++b;
    } else {
      s += std::abs(a->second - b->second);
      ++a;
      ++b;
    }
  }
  return 0.5 * s;
}

double mult_error(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw InputError("mult_error: dimension mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0 && q[i] == 0.0) continue;
    if (p[i] == 0.0 || q[i] == 0.0) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, std::abs(std::log(p[i]) - std::log(q[i])));
  }
  return worst;
}

double mult_error(const MarginalDist& p, const MarginalDist& q) { return mult_error(p.probs, q.probs); }

// ---------------------------------------------------------------------------
// MarginalTable

MarginalTable::MarginalTable(const Instance& base, Vertex target, std::uint64_t budget)
    : base_(base.pinning()), target_(target), q_(base.spec().q()) {
  const GibbsSpec& spec = base.spec();
  spec.graph().check_vertex(target);
  if (base.pinned(target)) throw InputError("MarginalTable: target vertex is pinned");
  for (Vertex v = 0; v < spec.size(); ++v) {
    if (v != target && !base.pinned(v)) coded_.push_back(v);
  }
  const std::size_t k = coded_.size();
  const double need = detail::state_count(q_ + 1, k) * static_cast<double>(q_);
  if (need > static_cast<double>(budget) || k >= 63) throw BudgetExceeded("marginal table", need, budget);
  detail::check_budget(q_, k + 1, budget, "marginal table");
  place_.resize(k);
  codes_ = 1;
  for (std::size_t i = 0; i < k; ++i) {
    place_[i] = codes_;
    codes_ *= q_ + 1;
  }
  table_.assign(codes_ * q_, 0.0);

  std::vector<Vertex> free = coded_;
  free.push_back(target);
  const auto factors = detail::all_factors(spec);
  detail::ConfigEnumerator en(spec, std::move(free), factors, base_);
  std::vector<std::size_t> digit(k);
  en.run([&](const PartialConfig& sigma, double w) {
    for (std::size_t i = 0; i < k; ++i) digit[i] = static_cast<std::size_t>(sigma[coded_[i]] + 1) * place_[i];
    const auto c = static_cast<std::size_t>(sigma[target_]);
    // Gray-code walk over all subsets of the coded vertices.
    std::size_t code = 0;
    std::uint64_t gray = 0;
    table_[c] += w;
    for (std::uint64_t i = 1; i < (std::uint64_t{1} << k); ++i) {
      const int bit = std::countr_zero(i);
      gray ^= std::uint64_t{1} << bit;
      if (gray >> bit & 1U) {
        code += digit[bit];
      } else {
        code -= digit[bit];
      }
      table_[code * q_ + c] += w;
    }
    return true;
  });
}

std::size_t MarginalTable::encode(const PartialConfig& extra) const {
  if (extra.size() != base_.size()) throw InputError("MarginalTable: configuration size mismatch");
  if (extra.assigned(target_)) throw InputError("MarginalTable: target vertex is assigned");
  std::size_t code = 0;
  std::size_t i = 0;
  for (Vertex v = 0; v < extra.size(); ++v) {
    if (i < coded_.size() && coded_[i] == v) {
      if (extra.assigned(v)) {
        if (static_cast<std::size_t>(extra[v]) >= q_) throw InputError("symbol outside the alphabet");
        code += static_cast<std::size_t>(extra[v] + 1) * place_[i];
      }
      ++i;
    } else if (v != target_ && extra.assigned(v) && extra[v] != base_[v]) {
      throw InputError("MarginalTable: assignment conflicts with the base pinning");
    }
  }
  return code;
}

PartialConfig MarginalTable::decode(std::size_t code) const {
  PartialConfig out = base_;
  for (std::size_t i = 0; i < coded_.size(); ++i) {
    const std::size_t digit = code / place_[i] % (q_ + 1);
    if (digit > 0) out.set(coded_[i], static_cast<Symbol>(digit - 1));
  }
  return out;
}

bool MarginalTable::feasible(std::size_t code) const {
  const auto w = weights(code);
  return std::any_of(w.begin(), w.end(), [](double x) { return x > 0.0; });
}

std::span<const double> MarginalTable::weights(std::size_t code) const {
  return std::span<const double>(table_).subspan(code * q_, q_);
}

MarginalDist MarginalTable::marginal(std::size_t code) const {
  const auto w = weights(code);
  if (!feasible(code)) throw InfeasibleError("MarginalTable: infeasible partial configuration");
  return normalized(std::vector<double>(w.begin(), w.end()));
}

}  // namespace lgs
