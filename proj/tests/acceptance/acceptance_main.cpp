// One line per acceptance criterion; exit status 1 if any is red.
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "lgs/inference.hpp"
#include "lgs/local_runtime.hpp"
#include "lgs/oracle.hpp"
#include "lgs/samplers.hpp"
#include "lgs/ssm_lab.hpp"

using namespace lgs;
using lgs::testing::corpus;
using lgs::testing::feasible_pinnings;
using lgs::testing::tiny_corpus;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

InferencerPtr exact_ptr() { return std::make_shared<ExactInferencer>(); }

InferencerPtr boosted_noisy(const Instance& inst, std::uint64_t seed) {
  const auto influence = single_site_influence(Instance(inst.spec_ptr()));
  auto noisy = std::make_shared<NoisyInferencer>(
      exact_ptr(), [influence](const GibbsSpec&, double d) { return certified_influence_radius(influence, d); }, seed);
  return std::make_shared<BoostedInferencer>(noisy);
}

Ordering shuffled(std::size_t n, std::mt19937_64& rng) {
  std::vector<Vertex> o(n);
  std::iota(o.begin(), o.end(), 0);
  std::shuffle(o.begin(), o.end(), rng);
  return Ordering(o, n);
}

bool same_zeros(const MarginalDist& a, const MarginalDist& b) {
  for (std::size_t c = 0; c < a.size(); ++c) {
    if ((a[c] == 0.0) != (b[c] == 0.0)) return false;
  }
  return true;
}

// 1 -------------------------------------------------------------------------
Verdict jvv_analytic() {
  Verdict v;
  double worst = 0;
  double lost = 0;
  std::size_t checked = 0;
  for (const auto& e : tiny_corpus()) {
    const Ordering order = Ordering::by_id(e.inst.graph());
    for (int which = 0; which < 2; ++which) {
      const InferencerPtr base = which == 0 ? exact_ptr() : boosted_noisy(e.inst, 11);
      const JvvAnalysis a = jvv_analyze(*base, e.inst, order);
      worst = std::max(worst, a.ratio_spread);
      lost = std::max(lost, a.infeasible_mass);
      ++checked;
      if (a.ratio_spread > 1e-9 || a.infeasible_mass > 1e-12) {
        v.pass = false;
        v.detail += " [" + e.name + (which ? " boosted" : " exact") + "]";
      }
    }
  }
  v.detail = fmt("max relative spread of Pr[Y=s,ok]/w(s) = %.2e over %zu runs (tol 1e-9); proposal mass off the "
                 "support %.1e",
                 worst, checked, lost) +
             v.detail;
  return v;
}

// 2 -------------------------------------------------------------------------
Verdict jvv_empirical() {
  Verdict v;
  const std::size_t n = 16;
  const Instance inst(hardcore(cycle_graph(n), 0.8));
  const auto base = std::make_shared<CachingInferencer>(exact_ptr());
  const std::size_t r = effective_locality(jvv_slocal_algorithm(*base, inst).passes);
  const Graph power = power_graph(inst.graph(), r + 1);
  constexpr std::size_t kRuns = 100'000;
  std::vector<std::array<std::size_t, 2>> ones(n, {0, 0});
  std::size_t jvv_ok = 0;
  std::size_t all_ok = 0;
  double budget = 0;
  for (std::size_t k = 0; k < kRuns; ++k) {
    RandomTape tape(derive_seed(2024, k));
    const auto run = jvv_local(*base, inst, tape, derive_seed(2025, k), {}, {}, &power);
    budget = run.decomposition.failure_budget;
    jvv_ok += run.slocal.outcome.success();
    if (!run.outcome.success()) continue;
    ++all_ok;
    for (Vertex u = 0; u < n; ++u) ++ones[u][static_cast<std::size_t>(*run.outcome.y[u])];
  }
  double max_tv = 0;
  for (Vertex u = 0; u < n; ++u) {
    const MarginalDist truth = marginal(inst, u);
    const std::vector<double> emp = {double(ones[u][0]) / double(all_ok), double(ones[u][1]) / double(all_ok)};
    max_tv = std::max(max_tv, tv_distance(emp, truth.probs));
  }
  const double target = std::exp(-3.0 / n);
  const double rate = double(jvv_ok) / kRuns;
  const double overall = double(all_ok) / kRuns;
  const double floor = 1 - 5.0 / n - budget;
  v.pass = max_tv <= 0.01 && std::abs(rate - target) <= 0.02 && overall >= floor;
  v.detail = fmt(
      "C16 l=0.8, 1e5 runs: max marginal tv %.4f (tol 0.01); success before decomposition %.4f vs e^(-3/16)=%.4f "
      "(+-0.02); overall %.4f >= %.4f",
      max_tv, rate, target, overall, floor);
  return v;
}

// 3 -------------------------------------------------------------------------
Verdict boosting() {
  Verdict v;
  double worst_ratio = 0;
  std::size_t calls = 0;
  std::size_t zero_mismatch = 0;
  for (const auto& e : corpus(8)) {
    const auto influence = single_site_influence(e.inst);
    const auto tab = std::make_shared<TabulatedInferencer>(e.inst.spec_ptr());
    const NoisyInferencer noisy(
        tab, [influence](const GibbsSpec&, double d) { return certified_influence_radius(influence, d); }, 5);
    const auto pinnings = feasible_pinnings(e.inst);
    for (double eps : {0.5, 0.1}) {
      for (const auto& tau : pinnings) {
        const Instance inst = e.inst.with_pinning(tau, FeasibilityCheck::kLocal);
        for (Vertex u = 0; u < inst.size(); ++u) {
          if (inst.pinned(u)) continue;
          const MarginalDist out = boost_inference(noisy, inst, u, eps);
          const MarginalDist truth = tab->infer(inst, u, 0.0);
          const double err = mult_error(out, truth);
          worst_ratio = std::max(worst_ratio, err / eps);
          zero_mismatch += !same_zeros(out, truth);
          if (err > eps) {
            v.pass = false;
          }
          ++calls;
        }
      }
    }
  }
  if (zero_mismatch) v.pass = false;
  v.detail = fmt("%zu boosted calls on n<=8 corpus x all feasible pinnings: max mult_error/eps = %.3f (tol 1); "
                 "zero-set mismatches %zu",
                 calls, worst_ratio, zero_mismatch);
  return v;
}

// 4 -------------------------------------------------------------------------
Verdict sequential() {
  Verdict v;
  double worst_noisy = 0;  // max tv / delta
  double worst_exact = 0;
  std::size_t cases = 0;
  for (const auto& e : corpus(4)) {
    const NoisyInferencer noisy(exact_ptr(), [](const GibbsSpec& s, double) { return s.size(); }, 17);
    const Ordering order = Ordering::by_id(e.inst.graph());
    for (const auto& tau : feasible_pinnings(e.inst)) {
      const Instance inst = e.inst.with_pinning(tau);
      const Distribution truth = joint_distribution(inst);
      auto key = [](const PartialConfig& c) { return std::vector<Symbol>(c.values().begin(), c.values().end()); };
      for (double delta : {0.2, 0.05}) {
        const auto dist = enumerate_outcomes<std::vector<Symbol>>(
            [&](Randomness& r) { return key(sequential_sample(noisy, inst, delta, order, r)); });
        worst_noisy = std::max(worst_noisy, tv_distance(Distribution(dist.begin(), dist.end()), truth) / delta);
      }
      const auto exact = enumerate_outcomes<std::vector<Symbol>>(
          [&](Randomness& r) { return key(sequential_sample(ExactInferencer(), inst, 0.1, order, r)); });
      worst_exact = std::max(worst_exact, tv_distance(Distribution(exact.begin(), exact.end()), truth));
      ++cases;
    }
  }
  v.pass = worst_noisy <= 1 + 1e-12 && worst_exact <= 1e-12;
  v.detail = fmt("%zu pinned n<=4 instances: max tv/delta with noise %.3f (tol 1); exact base tv %.1e (tol 1e-12)",
                 cases, worst_noisy, worst_exact);
  return v;
}

// 5 -------------------------------------------------------------------------
Verdict counting() {
  Verdict v;
  std::mt19937_64 rng(55);
  double worst = 0;
  std::size_t runs = 0;
  const ExactInferencer exact;
  for (const auto& e : corpus(12)) {
    const double z = partition_function(e.inst);
    for (int k = 0; k < 5; ++k) {
      const ChainCount c = chain_rule_count(exact, e.inst, shuffled(e.inst.size(), rng));
      worst = std::max(worst, std::abs(c.z - z) / z);
      ++runs;
    }
  }
  v.pass = worst <= 1e-9;
  v.detail = fmt("%zu orderings over the n<=12 corpus: max relative error of Z %.2e (tol 1e-9)", runs, worst);
  return v;
}

// 6 -------------------------------------------------------------------------
Verdict phase() {
  Verdict v;
  const PhaseReport rep = phase_transition_report(3, {1.0, 6.0}, 7);
  const auto& low = rep.rows[0];
  const auto& high = rep.rows[1];
  const double d6 = high.profile.tv[6];
  const double d7 = high.profile.tv[7];
  v.pass = low.fit.alpha < 0.9 && low.fit.residual < 0.1 && d6 >= 0.01 && d7 >= 0.01 && high.non_decay.value_or(false);
  v.detail = fmt("depth 7: l=1 alpha %.4f (tol <0.9), residual %.4f (tol <0.1); l=6 tv(6)=%.4f tv(7)=%.4f (>=0.01), "
                 "non-decay %s",
                 low.fit.alpha, low.fit.residual, d6, d7, high.non_decay.value_or(false) ? "set" : "unset");
  return v;
}

// 7 -------------------------------------------------------------------------
SpecPtr hardcore_field(const Graph& g, const std::vector<double>& lambdas) {
  std::vector<Factor> f;
  for (Vertex u = 0; u < g.size(); ++u) {
    f.emplace_back(std::vector<Vertex>{u}, 2, std::vector<double>{1.0, lambdas[u]});
  }
  for (const auto& [a, b] : g.edges()) f.emplace_back(std::vector<Vertex>{a, b}, 2, std::vector<double>{1, 1, 1, 0});
  SpecOptions o;
  o.locally_admissible = true;
  return std::make_shared<const GibbsSpec>(g, 2, std::move(f), o);
}

Verdict ssm_inference() {
  Verdict v;
  const Graph g = cycle_graph(12);
  const Instance inst(hardcore(g, 1.0));
  const Vertex root = 0;
  SsmScope all;
  all.kind = SsmScope::Kind::kAllSubsets;
  const SsmProfile prof = measure_ssm(inst, root, all, 6);
  const MarginalTable table(inst, root);
  std::string parts;
  for (std::size_t t = 1; t <= 3; ++t) {
    double err = 0;
    for (std::size_t code = 0; code < table.codes(); ++code) {
      if (!table.feasible(code)) continue;
      const Instance pinned = inst.with_pinning(table.decode(code), FeasibilityCheck::kLocal);
      err = std::max(err, tv_distance(ssm_ball_inference(pinned, root, t), table.marginal(code)));
    }
    if (err > prof.tv[t]) v.pass = false;
    parts += fmt(" t=%zu err %.4f <= delta %.4f;", t, err, prof.tv[t]);
  }

  std::mt19937_64 rng(77);
  std::size_t changed = 0;
  const std::size_t l = inst.spec().locality();
  for (int k = 0; k < 200; ++k) {
    const std::size_t t = 1 + k % 3;
    const auto near = ball_mask(g, root, t + 2 * l);
    std::vector<Vertex> far;
    for (Vertex u = 0; u < g.size(); ++u) {
      if (!near[u]) far.push_back(u);
    }
    std::vector<double> lambdas(g.size(), 1.0);
    PartialConfig tau(g.size());
    for (Vertex u = 0; u < g.size(); ++u) {
      lambdas[u] = 0.2 + 0.1 * double(rng() % 30);
      if (u != root && rng() % 4 == 0) tau.set(u, 0);
    }
    const Instance before(hardcore_field(g, lambdas), tau);
    auto lambdas2 = lambdas;
    auto tau2 = tau;
    const Vertex a = far[rng() % far.size()];
    switch (rng() % 3) {
      case 0:
        lambdas2[a] = 0.2 + 0.1 * double(rng() % 30);
        break;
      case 1:
        tau2.clear(a);
        break;
      default: {
        tau2.set(a, 1);
        for (Vertex b : g.neighbors(a)) {
          if (!near[b]) tau2.set(b, 0);
        }
        if (!is_locally_feasible(before.spec(), tau2)) tau2.set(a, 0);
      }
    }
    const Instance after(hardcore_field(g, lambdas2), tau2);
    changed += ssm_ball_inference(before, root, t).probs != ssm_ball_inference(after, root, t).probs;
  }
  if (changed) v.pass = false;
  v.detail = "C12 l=1, all feasible pinnings:" + parts + fmt(" far edits changing the output: %zu / 200", changed);
  return v;
}

// 8 -------------------------------------------------------------------------
Verdict decomposition() {
  Verdict v;
  std::string parts;
  for (int kind = 0; kind < 2; ++kind) {
    const std::size_t n = 256;
    const double cap = 4 * std::log2(double(n));
    std::size_t worst_radius = 0;
    std::size_t worst_colors = 0;
    std::size_t failed = 0;
    double budget = 0;
    std::size_t problems = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const Graph g = kind == 0 ? erdos_renyi(n, 4.0 / double(n - 1), 1000 + seed) : cycle_graph(n);
      const Decomposition d = network_decomposition(g, seed);
      budget = d.failure_budget;
      problems += !check_decomposition(g, d).empty();
      std::vector<std::size_t> used;
      for (Vertex x = 0; x < n; ++x) {
        if (d.failed[x]) continue;
        const auto hops = distances_from(g, d.cluster[x]);
        if (!hops[x].is_finite()) {
          ++problems;
          continue;
        }
        worst_radius = std::max(worst_radius, hops[x].hops());
        used.push_back(d.color[x]);
      }
      std::sort(used.begin(), used.end());
      worst_colors = std::max<std::size_t>(worst_colors, std::unique(used.begin(), used.end()) - used.begin());
      failed += d.failed_count();
    }
    const double mean_failed = double(failed) / 100;
    if (double(worst_radius) > cap || double(worst_colors) > cap || mean_failed > budget || problems) v.pass = false;
    parts += fmt(" %s: radius %zu, colors %zu (cap %.0f), mean failures %.4f (budget %.2e), contract errors %zu;",
                 kind == 0 ? "ER(256,d=4)" : "C256", worst_radius, worst_colors, cap, mean_failed, budget, problems);
  }
  v.detail = "100 seeds each." + parts;
  return v;
}

// 9 -------------------------------------------------------------------------
Verdict locality() {
  Verdict v;
  std::string parts;
  for (std::size_t n : {64u, 256u}) {
    const Instance inst(hardcore(cycle_graph(n), 1.0));
    const std::size_t l = inst.spec().locality();
    const auto base = std::make_shared<CachingInferencer>(
        std::make_shared<BoostedInferencer>(std::make_shared<SsmBallInferencer>(1)));
    const std::size_t t = jvv_radius(*base, inst.spec());
    RandomTape tape(derive_seed(9, n));
    const auto run = jvv_local(*base, inst, tape, derive_seed(10, n));
    const auto& rep = run.slocal.report;
    const std::size_t formula = t + 2 * t + 2 * ((3 * t + l) + t);
    bool reads_ok = rep.max_read.size() == 3 && rep.max_read[0] <= t && rep.max_read[1] <= t &&
                    rep.max_read[2] <= 3 * t + l && rep.max_write[2] <= t;
    const auto& loc = run.locality;
    const std::size_t compiled = loc.colors_used * (formula + 1) * (2 * loc.max_cluster_radius + 1);
    const double log2n = std::log2(double(n));
    const double shape = double(loc.round_bound) / (double(formula + 1) * log2n * log2n);
    const std::size_t cap = log2_bound(4.0, n);
    const double shape_cap = double(cap * (2 * cap + 1)) / (log2n * log2n);
    const bool ok = rep.effective_locality == formula && reads_ok && loc.local_rounds == compiled &&
                    loc.local_rounds <= loc.round_bound && loc.slocal_locality == formula && shape <= shape_cap + 1e-9;
    if (!ok) v.pass = false;
    parts += fmt(" n=%zu: t=%zu, effective %zu = 11t+2l %zu, reads ok %s, LOCAL rounds %zu = %zu colors x %zu x "
                 "(2*%zu+1) <= bound %zu = (r+1) log2^2 n x %.1f;",
                 n, t, rep.effective_locality, formula, reads_ok ? "yes" : "no", loc.local_rounds, loc.colors_used,
                 formula + 1, loc.max_cluster_radius, loc.round_bound, shape);
  }
  v.detail = "hardcore cycles, boosted ball base." + parts;
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"JVV exactness, analytic", jvv_analytic},
      {"JVV exactness, empirical LOCAL", jvv_empirical},
      {"boosting", boosting},
      {"sequential sampler coupling", sequential},
      {"chain-rule counting", counting},
      {"SSM phase transition", phase},
      {"SSM to inference", ssm_inference},
      {"decomposition contract", decomposition},
      {"locality accounting", locality},
  };
  int red = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("threw: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %zu %s: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                v.detail.c_str(), secs);
    std::fflush(stdout);
    red += !v.pass;
  }
  return red == 0 ? 0 : 1;
}
