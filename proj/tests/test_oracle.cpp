#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "corpus.hpp"
#include "doctest.h"
#include "lgs/errors.hpp"
#include "lgs/oracle.hpp"

using namespace lgs;

namespace {

constexpr Symbol U = kUnassigned;
PartialConfig config(std::vector<Symbol> v) { return PartialConfig(std::move(v)); }
MarginalDist dist_of(std::vector<double> p) { return MarginalDist{std::move(p), Guarantee::exact(), false}; }

std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t k, bool positive) {
  std::uniform_real_distribution<double> u(positive ? 0.05 : 0.0, 1.0);
  std::vector<double> p(k);
  for (auto& x : p) x = u(rng);
  if (!positive) p[rng() % k] = 0.0;
  const double s = std::accumulate(p.begin(), p.end(), 0.0);
  for (auto& x : p) x /= s;
  return p;
}

}  // namespace

TEST_CASE("partition functions") {
  CHECK(partition_function(Instance(hardcore(path_graph(3), 1.0))) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(partition_function(Instance(coloring(complete_graph(3), 3))) == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(partition_function(Instance(hardcore(path_graph(1), 0.7))) == doctest::Approx(1.7).epsilon(1e-15));
  try {
    partition_function(Instance(hardcore(cycle_graph(30), 1.0)), 1000);
    FAIL("expected refusal");
  } catch (const BudgetExceeded& e) {
    CHECK(e.required() == doctest::Approx(std::pow(2.0, 30)));
    CHECK(e.budget() == 1000);
  }
}

TEST_CASE("marginals") {
  const double lambda = 0.3;
  const auto one = marginal(Instance(hardcore(path_graph(1), lambda)), 0);
  CHECK(one[0] == doctest::Approx(1 / (1 + lambda)).epsilon(1e-15));
  CHECK(one.guarantee.kind == Guarantee::Kind::kExact);

  const Instance p3(hardcore(path_graph(3), 1.0));
  CHECK(marginal(p3, 1)[1] == doctest::Approx(0.2).epsilon(1e-15));
  const Instance end_pinned = condition(p3, config({1, U, U}));
  CHECK(marginal(end_pinned, 1)[1] == 0.0);
  const auto pm = marginal(end_pinned, 0);
  CHECK(pm.pinned);
  CHECK(pm[1] == 1.0);

  const auto all = all_marginals(p3);
  for (Vertex v = 0; v < 3; ++v) CHECK(tv_distance(all[v], marginal(p3, v)) < 1e-15);
}

TEST_CASE("ball marginals") {
  const Instance c6(hardcore(cycle_graph(6), 1.0));
  const auto full = std::vector<Vertex>{0, 1, 2, 3, 4, 5};
  CHECK(tv_distance(ball_marginal(c6, 0, full, PartialConfig(6)), marginal(c6, 0)) < 1e-15);

  const auto b2 = ball(c6.graph(), 0, 2);  // {0,1,2,4,5}; 3 is outside
  const auto boundary = config({U, U, 0, U, 0, U});
  const auto bm = ball_marginal(c6, 0, b2, boundary);
  CHECK(tv_distance(bm, marginal(condition(c6, boundary), 0)) < 1e-14);
  CHECK_THROWS_AS(ball_marginal(c6, 0, b2, config({U, U, 0, U, U, U})), ContractViolation);
  CHECK_THROWS_AS(ball_marginal(c6, 3, b2, boundary), InputError);

  // Pinned neighbors screen off the rest of any graph.
  const Instance c8(hardcore(cycle_graph(8), 2.0));
  const auto b1 = ball(c8.graph(), 4, 1);
  for (Symbol a : {0, 1}) {
    for (Symbol b : {0, 1}) {
      PartialConfig nb(8);
      nb.set(3, a);
      nb.set(5, b);
      const auto expected = marginal(condition(c8, nb), 4);
      CHECK(tv_distance(ball_marginal(c8, 4, b1, nb), expected) < 1e-14);
    }
  }
}

TEST_CASE("tv distance and multiplicative error") {
  CHECK(tv_distance(dist_of({0.3, 0.7}), dist_of({0.3, 0.7})) == 0.0);
  CHECK(tv_distance(dist_of({1, 0}), dist_of({0, 1})) == 1.0);
  CHECK(tv_distance(dist_of({0.5, 0.5}), dist_of({0.25, 0.75})) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK_THROWS_AS(tv_distance(dist_of({1.0}), dist_of({0.5, 0.5})), InputError);

  CHECK(mult_error(dist_of({0.5, 0.5, 0}), dist_of({0.5, 0.5, 0})) == 0.0);
  CHECK(mult_error(dist_of({0.5, 0.5}), dist_of({0.25, 0.75})) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(mult_error(dist_of({1, 0}), dist_of({0.5, 0.5})) == std::numeric_limits<double>::infinity());
}

TEST_CASE("property: tv is a metric, mult error is symmetric and subadditive") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t k = 2 + rng() % 4;
    const bool positive = trial % 2 == 0;
    const auto p = dist_of(random_simplex(rng, k, positive));
    const auto q = dist_of(random_simplex(rng, k, positive));
    const auto r = dist_of(random_simplex(rng, k, positive));
    CHECK(tv_distance(p, q) == doctest::Approx(tv_distance(q, p)));
    CHECK(tv_distance(p, r) <= tv_distance(p, q) + tv_distance(q, r) + 1e-15);
    CHECK(tv_distance(p, q) <= 1.0);
    if (positive) {
      const double e = mult_error(p, q);
      CHECK(e == doctest::Approx(mult_error(q, p)));
      CHECK(mult_error(p, r) <= e + mult_error(q, r) + 1e-12);
      CHECK(tv_distance(p, q) <= (std::exp(e) - 1) / 2 + 1e-15);
    }
  }
}

TEST_CASE("property: chain rule reconstructs weights") {
  std::mt19937_64 rng(17);
  for (const auto& entry : testing::corpus(10)) {
    const Instance& inst = entry.inst;
    const double z = partition_function(inst);
    std::vector<Vertex> order(inst.size());
    std::iota(order.begin(), order.end(), Vertex{0});
    int checked = 0;
    for (const auto& [values, p] : joint_distribution(inst)) {
      if (checked++ > 40) break;
      std::shuffle(order.begin(), order.end(), rng);
      PartialConfig prefix(inst.size());
      double prod = z;
      for (Vertex v : order) {
        prod *= marginal(condition(inst, prefix), v)[values[v]];
        prefix.set(v, values[v]);
      }
      CHECK(prod == doctest::Approx(weight(inst.spec(), PartialConfig(values))).epsilon(1e-10));
    }
  }
}

TEST_CASE("property: ball marginals match conditioned marginals when separated") {
  std::mt19937_64 rng(23);
  for (const auto& entry : testing::corpus(12)) {
    const Instance& inst = entry.inst;
    if (inst.graph().edge_count() == 0) continue;
    const auto joint = joint_distribution(inst);
    std::vector<std::vector<Symbol>> support;
    for (const auto& kv : joint) support.push_back(kv.first);
    for (int trial = 0; trial < 6; ++trial) {
      const Vertex v = rng() % inst.size();
      const std::size_t r = rng() % 3;
      const auto region = ball(inst.graph(), v, r + inst.spec().locality());
      const auto inner = ball_mask(inst.graph(), v, r);
      // Pin everything in the region outside ball(v, r) to a feasible configuration.
      const auto& sigma = support[rng() % support.size()];
      PartialConfig boundary(inst.size());
      for (Vertex u : region) {
        if (!inner[u]) boundary.set(u, sigma[u]);
      }
      CAPTURE(entry.name);
      CAPTURE(v);
      const auto bm = ball_marginal(inst, v, region, boundary);
      CHECK(tv_distance(bm, marginal(condition(inst, boundary), v)) < 1e-12);
    }
  }
}

TEST_CASE("marginal tables agree with direct marginals") {
  std::mt19937_64 rng(29);
  for (const auto& entry : testing::corpus(8)) {
    const Instance& inst = entry.inst;
    const auto pins = testing::feasible_pinnings(inst);
    for (Vertex v = 0; v < inst.size(); v += 2) {
      const MarginalTable table(inst, v);
      for (int trial = 0; trial < 20; ++trial) {
        PartialConfig tau = pins[rng() % pins.size()];
        tau.clear(v);
        const std::size_t code = table.encode(tau);
        CHECK(table.decode(code) == tau);
        REQUIRE(table.feasible(code));
        CHECK(tv_distance(table.marginal(code), marginal(condition(inst, tau), v)) < 1e-12);
      }
    }
  }
  const Instance c4(coloring(cycle_graph(4), 2));
  const MarginalTable t(c4, 1);
  CHECK_FALSE(t.feasible(t.encode(config({0, U, 1, U}))));
}
