#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <random>

#include "corpus.hpp"
#include "doctest.h"
#include "lgs/errors.hpp"
#include "lgs/inference.hpp"
#include "lgs/oracle.hpp"
#include "lgs/samplers.hpp"

using namespace lgs;
using lgs::testing::corpus;
using lgs::testing::feasible_pinnings;
using lgs::testing::tiny_corpus;

namespace {

constexpr Symbol U = kUnassigned;

InferencerPtr exact_ptr() { return std::make_shared<ExactInferencer>(); }

std::vector<Symbol> key(const PartialConfig& c) { return std::vector<Symbol>(c.values().begin(), c.values().end()); }

std::vector<Symbol> key(const SampleOutcome& s) {
  std::vector<Symbol> k;
  for (const auto& y : s.y) k.push_back(y ? *y : U);
  return k;
}

/// Boosted noisy oracle whose base declares its certified influence radius.
InferencerPtr boosted_noisy(const Instance& inst, std::uint64_t seed) {
  const auto influence = single_site_influence(Instance(inst.spec_ptr()));
  auto noisy = std::make_shared<NoisyInferencer>(
      exact_ptr(), [influence](const GibbsSpec&, double d) { return certified_influence_radius(influence, d); }, seed);
  return std::make_shared<BoostedInferencer>(noisy);
}

std::vector<Ordering> some_orders(std::size_t n, std::mt19937_64& rng, std::size_t count) {
  std::vector<Ordering> out;
  std::vector<Vertex> o(n);
  std::iota(o.begin(), o.end(), 0);
  out.emplace_back(o, n);
  std::reverse(o.begin(), o.end());
  out.emplace_back(o, n);
  while (out.size() < count) {
    std::shuffle(o.begin(), o.end(), rng);
    out.emplace_back(o, n);
  }
  return out;
}

double tv(const Distribution& a, const Distribution& b) { return tv_distance(a, b); }

}  // namespace

TEST_CASE("sequential sampling with an exact base is the chain rule") {
  std::mt19937_64 rng(1);
  for (const auto& e : corpus(4)) {
    for (const auto& tau : feasible_pinnings(e.inst)) {
      const Instance inst = e.inst.with_pinning(tau);
      const Distribution truth = joint_distribution(inst);
      for (const auto& order : some_orders(inst.size(), rng, 3)) {
        const auto dist = enumerate_outcomes<std::vector<Symbol>>(
            [&](Randomness& r) { return key(sequential_sample(ExactInferencer(), inst, 0.1, order, r)); });
        CHECK(tv(Distribution(dist.begin(), dist.end()), truth) < 1e-12);
      }
    }
  }
}

TEST_CASE("sequential sampling of a fully pinned instance returns the pinning") {
  const Instance inst(hardcore(path_graph(3), 1.0), PartialConfig({1, 0, 1}));
  RandomTape tape(0);
  CHECK(sequential_sample(ExactInferencer(), inst, 0.1, Ordering::by_id(inst.graph()), tape) == inst.pinning());
  CHECK_THROWS_AS(sequential_sample(ExactInferencer(), inst, 0.0, Ordering::by_id(inst.graph()), tape), InputError);
}

TEST_CASE("sequential sampling with per-call noise delta/n stays within delta") {
  std::mt19937_64 rng(2);
  for (const auto& e : corpus(4)) {
    const NoisyInferencer noisy(exact_ptr(), [](const GibbsSpec& s, double) { return s.size(); }, rng());
    const Distribution truth = joint_distribution(e.inst);
    for (double delta : {0.2, 0.05}) {
      for (const auto& order : some_orders(e.inst.size(), rng, 3)) {
        const auto dist = enumerate_outcomes<std::vector<Symbol>>(
            [&](Randomness& r) { return key(sequential_sample(noisy, e.inst, delta, order, r)); });
        const double d = tv(Distribution(dist.begin(), dist.end()), truth);
        CHECK(d <= delta + 1e-12);
        if (e.inst.size() > 1) CHECK(d > 0.0);
      }
    }
  }
}

TEST_CASE("ground state") {
  const Instance p4(hardcore(path_graph(4), 2.0));
  const Ordering id4 = Ordering::by_id(p4.graph());
  CHECK(jvv_ground_state(ExactInferencer(), p4, id4) == PartialConfig({0, 0, 0, 0}));
  const Instance pinned = p4.with_pinning(PartialConfig({U, 1, U, U}));
  CHECK(jvv_ground_state(ExactInferencer(), pinned, id4) == PartialConfig({0, 1, 0, 0}));
  const Instance full = p4.with_pinning(PartialConfig({1, 0, 0, 1}));
  CHECK(jvv_ground_state(ExactInferencer(), full, id4) == full.pinning());

  const Instance col(coloring(path_graph(4), 3));
  std::mt19937_64 rng(3);
  for (const auto& order : some_orders(4, rng, 6)) {
    const auto g = jvv_ground_state(ExactInferencer(), col, order);
    CHECK(g.complete());
    CHECK(weight_positive(col.spec(), g));
  }
  CHECK_THROWS_AS(jvv_ground_state(SsmBallInferencer(1), p4, id4), InputError);
}

TEST_CASE("proposal densities") {
  std::mt19937_64 rng(4);
  for (const auto& e : corpus(6)) {
    const double n = double(e.inst.size());
    const Distribution truth = joint_distribution(e.inst);
    const Ordering order = some_orders(e.inst.size(), rng, 3)[2];
    const MultNoisyInferencer mult(exact_ptr(), e.inst.size(), rng());
    for (const auto& [sigma, p] : truth) {
      const PartialConfig s{std::vector<Symbol>(sigma)};
      CHECK(chain_density(ExactInferencer(), e.inst, order, s) == doctest::Approx(p).epsilon(1e-12));
      const double ratio = chain_density(mult, e.inst, order, s) / p;
      CHECK(std::abs(std::log(ratio)) <= 1.0 / (n * n) + 1e-12);
    }
    RandomTape tape(rng());
    const Proposal prop = jvv_propose(mult, e.inst, order, tape);
    CHECK(prop.density == doctest::Approx(chain_density(mult, e.inst, order, prop.y)).epsilon(1e-12));
  }
  const Instance full(hardcore(path_graph(2), 1.0), PartialConfig({0, 1}));
  RandomTape tape(0);
  const Proposal p = jvv_propose(ExactInferencer(), full, Ordering::by_id(full.graph()), tape);
  CHECK(p.y == full.pinning());
  CHECK(p.density == 1.0);
}

TEST_CASE("bridges") {
  const Instance p4(hardcore(path_graph(4), 1.0));
  const Ordering order = Ordering::by_id(p4.graph());
  const PartialConfig empty({0, 0, 0, 0});
  const PartialConfig y({0, 1, 0, 1});
  // Zero-change bridge.
  CHECK(jvv_bridge(p4, empty, y, order, 1, 4) == empty);
  // Occupying v_2 in an empty configuration flips only v_2.
  CHECK(jvv_bridge(p4, empty, y, order, 2, 4) == PartialConfig({0, 1, 0, 0}));
  CHECK(jvv_bridge(p4, PartialConfig({0, 1, 0, 0}), y, order, 4, 1) == y);
  // A bridge that has to clear a neighbor inside the ball.
  const PartialConfig prev({0, 0, 1, 0});
  const PartialConfig y2({0, 1, 0, 0});
  CHECK(jvv_bridge(p4, prev, y2, order, 2, 1) == PartialConfig({0, 1, 0, 0}));
  // Radius 0 cannot clear the neighbor.
  CHECK_THROWS_AS(jvv_bridge(p4, prev, y2, order, 2, 0), ContractViolation);
}

TEST_CASE("exact base: every q is e^{-3/n^2} and success is e^{-3/n}") {
  std::mt19937_64 rng(5);
  for (const auto& e : corpus(6)) {
    const double n = double(e.inst.size());
    for (const auto& tau : {PartialConfig(e.inst.size()), feasible_pinnings(e.inst).back()}) {
      const Instance inst = e.inst.with_pinning(tau);
      for (const auto& order : some_orders(inst.size(), rng, 3)) {
        RandomTape tape(rng());
        const JvvResult r = jvv_sample(ExactInferencer(), inst, order, tape);
        for (double q : r.trace.q) CHECK(q == doctest::Approx(std::exp(-3.0 / (n * n))).epsilon(1e-12));
        CHECK(r.trace.out_of_bounds == 0);
        CHECK(r.trace.q_product == doctest::Approx(std::exp(-3.0 / n)).epsilon(1e-12));
        CHECK(r.trace.q_telescoped == doctest::Approx(r.trace.q_product).epsilon(1e-9));
        CHECK(r.trace.bridges.back() == r.trace.y);
        CHECK(r.outcome.config() == r.trace.y);
      }
    }
  }
}

TEST_CASE("q bounds and telescoping with a multiplicative-noise base") {
  std::mt19937_64 rng(6);
  for (const auto& e : corpus(8)) {
    const double n = double(e.inst.size());
    const MultNoisyInferencer mult(exact_ptr(), e.inst.size(), rng());
    for (const auto& order : some_orders(e.inst.size(), rng, 3)) {
      RandomTape tape(rng());
      const JvvResult r = jvv_sample(mult, e.inst, order, tape);
      for (double q : r.trace.q) {
        CHECK(q <= 1.0);
        CHECK(q >= std::exp(-5.0 / (n * n)));
      }
      CHECK(r.trace.q_telescoped == doctest::Approx(r.trace.q_product).epsilon(1e-9));
    }
  }
}

TEST_CASE("analytic exactness on the tiny corpus") {
  std::mt19937_64 rng(7);
  for (const auto& e : tiny_corpus()) {
    const auto boosted = boosted_noisy(e.inst, rng());
    const MultNoisyInferencer mult(exact_ptr(), e.inst.size(), rng());
    for (const auto& tau : {PartialConfig(e.inst.size()), feasible_pinnings(e.inst)[1]}) {
      const Instance inst = e.inst.with_pinning(tau);
      const Ordering order = some_orders(inst.size(), rng, 3)[2];
      const double n = double(inst.size());
      const auto exact = jvv_analyze(ExactInferencer(), inst, order);
      CHECK(exact.ratio_spread <= 1e-9);
      CHECK(exact.success == doctest::Approx(std::exp(-3.0 / n)).epsilon(1e-12));
      CHECK(exact.infeasible_mass < 1e-12);
      for (const Inferencer* base : {static_cast<const Inferencer*>(boosted.get()),
                                     static_cast<const Inferencer*>(&mult)}) {
        const auto a = jvv_analyze(*base, inst, order);
        CHECK(a.ratio_spread <= 1e-9);
        CHECK(a.out_of_bounds == 0);
        CHECK(a.success >= std::exp(-5.0 / n));
        CHECK(a.infeasible_mass < 1e-12);
      }
    }
  }
}

TEST_CASE("every ordering of four nodes gives the target conditional") {
  std::mt19937_64 rng(8);
  for (const auto& e : tiny_corpus()) {
    if (e.inst.size() != 4) continue;
    const MultNoisyInferencer mult(exact_ptr(), 4, rng());
    std::vector<Vertex> o = {0, 1, 2, 3};
    do {
      const auto a = jvv_analyze(mult, e.inst, Ordering(o, 4));
      CHECK(a.ratio_spread <= 1e-9);
    } while (std::next_permutation(o.begin(), o.end()));
  }
}

TEST_CASE("literal failure polarity") {
  const Instance p3(hardcore(path_graph(3), 1.0));
  JvvOptions literal;
  literal.polarity = FailurePolarity::kFailWithQ;
  const auto a = jvv_analyze(ExactInferencer(), p3, Ordering::by_id(p3.graph()), literal);
  CHECK(a.success == doctest::Approx(std::pow(1 - std::exp(-3.0 / 9), 3)).epsilon(1e-12));
}

TEST_CASE("sequential and JVV conditioned on success agree") {
  std::mt19937_64 rng(9);
  for (const auto& e : corpus(4)) {
    const Ordering order = some_orders(e.inst.size(), rng, 3)[2];
    const auto seq = enumerate_outcomes<std::vector<Symbol>>(
        [&](Randomness& r) { return key(sequential_sample(ExactInferencer(), e.inst, 0.1, order, r)); });
    const auto jvv = enumerate_outcomes<std::pair<std::vector<Symbol>, bool>>([&](Randomness& r) {
      const auto res = jvv_sample(ExactInferencer(), e.inst, order, r);
      return std::make_pair(key(res.outcome), res.outcome.success());
    });
    double success = 0;
    for (const auto& [k, p] : jvv) success += k.second ? p : 0.0;
    CHECK(success == doctest::Approx(std::exp(-3.0 / double(e.inst.size()))).epsilon(1e-12));
    Distribution cond;
    for (const auto& [k, p] : jvv) {
      if (k.second) cond[k.first] += p / success;
    }
    CHECK(tv(cond, Distribution(seq.begin(), seq.end())) < 1e-12);
  }
}

TEST_CASE("SLOCAL run matches the centralized run draw for draw") {
  std::mt19937_64 rng(10);
  for (const auto& e : corpus(8)) {
    std::vector<InferencerPtr> bases = {exact_ptr(), std::make_shared<MultNoisyInferencer>(exact_ptr(), 1, rng())};
    for (const auto& base : bases) {
      for (const auto& order : some_orders(e.inst.size(), rng, 2)) {
        const std::uint64_t seed = rng();
        RandomTape t1(seed);
        RandomTape t2(seed);
        JvvOptions opt;
        const JvvResult global = jvv_sample(*base, e.inst, order, t1, opt);
        const auto local = jvv_slocal(*base, e.inst, order, t2, opt);
        CHECK(local.outcome.y == global.outcome.y);
        CHECK(local.outcome.fail == global.outcome.fail);
        for (std::size_t i = 0; i < order.size(); ++i) {
          const auto& s = local.states[order[i]];
          CHECK(s.q == doctest::Approx(global.trace.q[i]).epsilon(1e-12));
          CHECK(s.ground == global.trace.ground[order[i]]);
        }
        const std::size_t t = jvv_radius(*base, e.inst.spec());
        const std::size_t ell = e.inst.spec().locality();
        CHECK(local.report.effective_locality == t + 2 * t + 2 * (4 * t + ell));
        for (std::size_t p = 0; p < 3; ++p) {
          CHECK(local.report.max_read[p] <= local.report.passes[p].read_radius);
          CHECK(local.report.max_write[p] <= local.report.passes[p].write_radius);
        }
      }
    }
  }
}

TEST_CASE("ground state of the SLOCAL run does not depend on the seed") {
  const Instance c6(coloring(cycle_graph(6), 3));
  const Ordering order({3, 1, 5, 0, 2, 4}, 6);
  std::vector<Symbol> first;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    RandomTape tape(seed);
    const auto run = jvv_slocal(ExactInferencer(), c6, order, tape);
    std::vector<Symbol> g;
    for (const auto& s : run.states) g.push_back(s.ground);
    if (seed == 0) first = g;
    CHECK(g == first);
  }
}

TEST_CASE("jvv_local conditioned on success is exact") {
  for (const auto& e : corpus(4)) {
    if (e.inst.size() < 2) continue;
    for (std::uint64_t dseed = 0; dseed < 3; ++dseed) {
      const auto dist = enumerate_outcomes<std::pair<std::vector<Symbol>, bool>>([&](Randomness& r) {
        const auto run = jvv_local(ExactInferencer(), e.inst, r, dseed);
        return std::make_pair(key(run.outcome), run.outcome.success());
      });
      double success = 0;
      for (const auto& [k, p] : dist) success += k.second ? p : 0.0;
      REQUIRE(success > 0);
      Distribution cond;
      for (const auto& [k, p] : dist) {
        if (k.second) cond[k.first] += p / success;
      }
      CHECK(tv(cond, joint_distribution(e.inst)) < 1e-12);
    }
  }
}

TEST_CASE("jvv_local failure mass") {
  // Exact mass by enumeration on n <= 4.
  for (const auto& e : corpus(4)) {
    const double n = double(e.inst.size());
    const Sampler s = [](const Instance& inst, Randomness& r) {
      return jvv_local(ExactInferencer(), inst, r, 1).outcome;
    };
    const auto res = inference_from_sampler(s, e.inst, 0);
    CHECK(res.enumerated);
    CHECK(res.failure_mass == doctest::Approx(n * (1 - std::exp(-3.0 / (n * n)))).epsilon(1e-12));
    CHECK(res.failure_mass <= 3.0 / n);
    CHECK(tv_distance(res.marginal, marginal(e.inst, 0)) <= res.marginal.guarantee.bound);
  }
  // Monte Carlo on 8 nodes against 3/n plus the decomposition budget.
  const Instance c8(hardcore(cycle_graph(8), 1.0));
  const auto tab = std::make_shared<TabulatedInferencer>(c8.spec_ptr());
  const Graph power = power_graph(c8.graph(), effective_locality(jvv_slocal_algorithm(*tab, c8).passes) + 1);
  double mass = 0;
  double sq = 0;
  constexpr int kRuns = 2000;
  for (int k = 0; k < kRuns; ++k) {
    RandomTape tape(derive_seed(77, k));
    const auto run = jvv_local(*tab, c8, tape, derive_seed(78, k), {}, {}, &power);
    const double m = double(run.outcome.failure_mass());
    mass += m;
    sq += m * m;
  }
  const double mean = mass / kRuns;
  const double se = std::sqrt((sq / kRuns - mean * mean) / kRuns);
  CHECK(mean <= 3.0 / 8 + 1.0 / 64 + 3 * se);
}

TEST_CASE("trace dump") {
  const Instance p3(hardcore(path_graph(3), 1.0));
  RandomTape tape(3);
  const auto r = jvv_sample(ExactInferencer(), p3, Ordering::by_id(p3.graph()), tape);
  const std::string dump = format_trace(p3, r.trace);
  CHECK(dump.find("ground 0=0 1=0 2=0\n") != std::string::npos);
  CHECK(dump.find("\nq 0:") != std::string::npos);
  CHECK(dump.find("\nfail ") != std::string::npos);
  CHECK(dump.find("t 3\n") == 0);
}
