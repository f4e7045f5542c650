#include "lgs/ssm_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "lgs/detail/enumerate.hpp"
#include "lgs/errors.hpp"
#include "lgs/oracle.hpp"

namespace lgs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kStallRatio = 0.9;

struct Sample {
  std::vector<Symbol> boundary;  // values on the group's Lambda
  std::vector<double> probs;
};

/// Max over differing pairs within one Lambda, binned by dist(v, D).
void compare_group(const std::vector<Vertex>& lambda, const std::vector<std::size_t>& hops,
                   const std::vector<Sample>& samples, std::size_t t_max, std::vector<double>& best_tv,
                   std::vector<double>& best_mult, std::size_t& pairs) {
  for (std::size_t a = 0; a < samples.size(); ++a) {
    for (std::size_t b = a + 1; b < samples.size(); ++b) {
      std::size_t d = t_max;
      bool differ = false;
      for (std::size_t i = 0; i < lambda.size(); ++i) {
        if (samples[a].boundary[i] != samples[b].boundary[i]) {
          differ = true;
          d = std::min(d, hops[lambda[i]]);
        }
      }
      if (!differ) continue;
      ++pairs;
      best_tv[d] = std::max(best_tv[d], tv_distance(samples[a].probs, samples[b].probs));
      best_mult[d] = std::max(best_mult[d], mult_error(samples[a].probs, samples[b].probs));
    }
  }
}

/// Marginals at v for every feasible assignment of Lambda on top of the
/// instance's pinning.
std::vector<Sample> enumerate_boundaries(const Instance& inst, Vertex v, const std::vector<Vertex>& lambda,
                                         std::uint64_t budget) {
  const std::size_t q = inst.spec().q();
  std::vector<Sample> out;
  std::vector<Symbol> digits(lambda.size(), 0);
  while (true) {
    PartialConfig tau = inst.pinning();
    for (std::size_t i = 0; i < lambda.size(); ++i) tau.set(lambda[i], digits[i]);
    try {
      const Instance pinned = inst.with_pinning(tau, FeasibilityCheck::kLocal);
      out.push_back(Sample{digits, marginal(pinned, v, budget).probs});
    } catch (const InfeasibleError&) {
    }
    std::size_t i = 0;
    while (i < digits.size() && ++digits[i] == static_cast<Symbol>(q)) digits[i++] = 0;
    if (i == digits.size()) break;
  }
  return out;
}

void finish(SsmProfile& p, const std::vector<double>& best_tv, const std::vector<double>& best_mult) {
  const std::size_t n = best_tv.size();
  p.tv.assign(n, 0.0);
  p.mult.assign(n, 0.0);
  double tv = 0.0;
  double mult = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    tv = std::max(tv, best_tv[t]);
    mult = std::max(mult, best_mult[t]);
    p.tv[t] = tv;
    p.mult[t] = mult;
  }
}

}  // namespace

SsmProfile measure_ssm(const Instance& inst, Vertex v, const SsmScope& scope, std::size_t t_max,
                       std::uint64_t budget) {
  const Graph& g = inst.graph();
  g.check_vertex(v);
  if (inst.pinned(v)) throw InputError("measure_ssm: vertex is pinned");
  const std::size_t q = inst.spec().q();
  const auto dist = distances_from(g, v);
  std::vector<std::size_t> hops(g.size());
  for (Vertex u = 0; u < g.size(); ++u) hops[u] = dist[u].is_finite() ? dist[u].hops() : t_max;

  SsmProfile p;
  std::vector<double> best_tv(t_max + 1, 0.0);
  std::vector<double> best_mult(t_max + 1, 0.0);
  std::size_t unpinned = 0;
  for (Vertex u = 0; u < g.size(); ++u) unpinned += !inst.pinned(u);

  auto run_fixed = [&](std::vector<Vertex> lambda) {
    std::erase_if(lambda, [&](Vertex u) { return u == v || inst.pinned(u); });
    const double need = detail::state_count(q, lambda.size()) * detail::state_count(q, unpinned - lambda.size());
    if (need > static_cast<double>(budget)) return false;
    const auto samples = enumerate_boundaries(inst, v, lambda, budget);
    compare_group(lambda, hops, samples, t_max, best_tv, best_mult, p.pairs);
    return true;
  };

  switch (scope.kind) {
    case SsmScope::Kind::kSpheres: {
      p.scope = "spheres S_t(v), all feasible pairs";
      for (std::size_t t = 1; t <= t_max; ++t) {
        std::vector<Vertex> sphere;
        for (Vertex u = 0; u < g.size(); ++u) {
          if (dist[u].is_finite() && dist[u].hops() == t) sphere.push_back(u);
        }
        if (sphere.empty()) break;
        if (!run_fixed(sphere)) {
          p.partial = true;
          p.note = "budget exceeded at t=" + std::to_string(t);
          break;
        }
      }
      break;
    }
    case SsmScope::Kind::kFixed: {
      p.scope = "fixed Lambda of " + std::to_string(scope.lambda.size()) + " vertices, all feasible pairs";
      if (!run_fixed(scope.lambda)) {
        p.partial = true;
        p.note = "budget exceeded";
      }
      break;
    }
    case SsmScope::Kind::kAllSubsets: {
      p.scope = "all Lambda, all feasible pairs";
      const MarginalTable table(inst, v, budget);
      const auto coded = table.coded_vertices();
      std::map<std::uint64_t, std::vector<std::size_t>> groups;
      for (std::size_t code = 0; code < table.codes(); ++code) {
        if (!table.feasible(code)) continue;
        std::uint64_t mask = 0;
        std::size_t rest = code;
        for (std::size_t i = 0; i < coded.size(); ++i, rest /= q + 1) {
          if (rest % (q + 1) != 0) mask |= std::uint64_t{1} << i;
        }
        groups[mask].push_back(code);
      }
      for (const auto& [mask, codes] : groups) {
        std::vector<Vertex> lambda;
        std::vector<std::size_t> slots;
        for (std::size_t i = 0; i < coded.size(); ++i) {
          if (mask >> i & 1) {
            lambda.push_back(coded[i]);
            slots.push_back(i);
          }
        }
        std::vector<Sample> samples;
        for (std::size_t code : codes) {
          Sample s;
          for (std::size_t i : slots) {
            std::size_t digit = code;
            for (std::size_t k = 0; k < i; ++k) digit /= q + 1;
            s.boundary.push_back(static_cast<Symbol>(digit % (q + 1)) - 1);
          }
          s.probs = table.marginal(code).probs;
          samples.push_back(std::move(s));
        }
        compare_group(lambda, hops, samples, t_max, best_tv, best_mult, p.pairs);
      }
      break;
    }
  }
  finish(p, best_tv, best_mult);
  if (p.note.empty()) p.note = "empty max counts as 0";
  return p;
}

std::string profile_csv(const SsmProfile& profile) {
  std::ostringstream out;
  out.precision(17);
  out << "t,delta_tv,delta_mult\n";
  for (std::size_t t = 0; t < profile.tv.size(); ++t) {
    out << t << ',' << profile.tv[t] << ',' << profile.mult[t] << '\n';
  }
  return out.str();
}

DecayFit fit_decay_rate(const std::vector<double>& profile, std::size_t t_min) {
  std::vector<std::pair<double, double>> pts;
  bool any_nonzero = false;
  for (std::size_t t = t_min; t < profile.size(); ++t) {
    if (profile[t] != 0.0) any_nonzero = true;
    if (profile[t] > 0.0 && std::isfinite(profile[t])) pts.emplace_back(double(t), std::log(profile[t]));
  }
  DecayFit fit;
  fit.points = pts.size();
  if (!any_nonzero) {
    fit.note = "all-zero profile";
    return fit;
  }
  if (pts.size() < 3) throw InputError("fit_decay_rate needs at least 3 positive finite points");
  double sx = 0, sy = 0;
  for (const auto& [x, y] : pts) {
    sx += x;
    sy += y;
  }
  const double m = double(pts.size());
  const double mx = sx / m;
  const double my = sy / m;
  double sxx = 0, sxy = 0;
  for (const auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  const double slope = sxy / sxx;
  const double icpt = my - slope * mx;
  double ss = 0;
  for (const auto& [x, y] : pts) ss += std::pow(y - (icpt + slope * x), 2);
  fit.alpha = std::exp(slope);
  fit.c = std::exp(icpt);
  fit.residual = std::sqrt(ss / m);
  return fit;
}

double hardcore_lambda_c(std::size_t max_degree) {
  if (max_degree <= 2) return kInf;
  const double d = static_cast<double>(max_degree);
  return std::pow(d - 1, d - 1) / std::pow(d - 2, d);
}

double coloring_alpha_star() {
  // x - exp(1/x) is increasing; the root lies in [1, 2].
  double lo = 1.0;
  double hi = 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid - std::exp(1.0 / mid) < 0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

ChainCount chain_rule_count(const Inferencer& base, const Instance& inst, const Ordering& order, double target) {
  const std::size_t n = inst.size();
  if (order.size() != n) throw InputError("ordering size does not match the instance");
  ChainCount out;
  out.sigma = inst.pinning();
  double log_p = 0.0;
  for (Vertex v : order) {
    if (inst.pinned(v)) continue;
    const MarginalDist m = base.infer(inst.with_pinning(out.sigma, FeasibilityCheck::kLocal), v, target);
    std::size_t c = 0;
    while (c < m.size() && !(m[c] > 0.0)) ++c;
    if (c == m.size()) throw ContractViolation("base reported an all-zero marginal at node " +
                                               std::to_string(inst.graph().id(v)));
    out.sigma.set(v, static_cast<Symbol>(c));
    out.factors.push_back(m[c]);
    log_p += std::log(m[c]);
  }
  for (const Factor& f : inst.spec().factors()) {
    const double x = f.evaluate(out.sigma);
    if (!(x > 0.0)) throw ContractViolation("chain ended in a zero-weight configuration");
    out.log_weight += std::log(x);
  }
  out.log_z = out.log_weight - log_p;
  out.z = std::exp(out.log_z);
  return out;
}

SsmProfile hardcore_tree_profile(std::size_t degree, double lambda, std::size_t depth) {
  if (degree < 2) throw InputError("tree degree must be at least 2");
  if (!(lambda > 0)) throw InputError("lambda must be positive");
  SsmProfile p;
  p.scope = "regular tree, sphere at distance t pinned all-occupied vs all-empty";
  p.note = "tree recursion";
  p.tv.assign(depth + 1, 0.0);
  p.mult.assign(depth + 1, 0.0);
  const double k = static_cast<double>(degree - 1);
  const double root_children = static_cast<double>(degree);
  // x = 1 / (1 + R) for a child subtree, R = occupancy ratio; an occupied
  // pinned vertex has x = 0, an empty one x = 1.
  auto root_p1 = [&](std::size_t t, double leaf_x) {
    double x = leaf_x;
    for (std::size_t level = t; level > 1; --level) {
      const double r = lambda * std::pow(x, k);
      x = 1.0 / (1.0 + r);
    }
    const double r = lambda * std::pow(x, root_children);
    return r / (1.0 + r);
  };
  for (std::size_t t = 1; t <= depth; ++t) {
    const double a = root_p1(t, 0.0);
    const double b = root_p1(t, 1.0);
    const double pa[2] = {1 - a, a};
    const double pb[2] = {1 - b, b};
    p.tv[t] = tv_distance(pa, pb);
    p.mult[t] = mult_error(pa, pb);
    ++p.pairs;
  }
  return p;
}

PhaseReport phase_transition_report(std::size_t degree, const std::vector<double>& lambdas, std::size_t depth,
                                    double floor) {
  if (depth < 3) throw InputError("phase report needs depth >= 3");
  PhaseReport rep;
  rep.degree = degree;
  rep.depth = depth;
  rep.lambda_c = hardcore_lambda_c(degree);
  rep.floor = floor;
  for (double lambda : lambdas) {
    PhaseRow row;
    row.lambda = lambda;
    row.profile = hardcore_tree_profile(degree, lambda, depth);
    row.fit = fit_decay_rate(row.profile.tv, 1);
    if (lambda != rep.lambda_c) {
      const double last = row.profile.tv[depth];
      const double prev = row.profile.tv[depth - 1];
      row.non_decay = last >= floor && prev >= floor && last >= kStallRatio * prev;
    }
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

}  // namespace lgs
