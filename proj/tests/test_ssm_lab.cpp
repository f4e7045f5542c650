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
#include "lgs/ssm_lab.hpp"

using namespace lgs;
using lgs::testing::corpus;

namespace {

InferencerPtr exact_ptr() { return std::make_shared<ExactInferencer>(); }

/// Root occupation probability with the level-t vertices of the tree pinned
/// to `s`, by brute force.
double root_occupied(std::size_t degree, std::size_t depth, double lambda, std::size_t t, Symbol s) {
  const Graph g = regular_tree(degree, depth);
  const auto levels = regular_tree_levels(degree, depth);
  PartialConfig tau(g.size());
  for (Vertex u = 0; u < g.size(); ++u) {
    if (levels[u] == t) tau.set(u, s);
  }
  const Instance inst(hardcore(g, lambda), tau);
  return marginal(inst, 0)[1];
}

}  // namespace

TEST_CASE("closed-form thresholds") {
  CHECK(hardcore_lambda_c(3) == doctest::Approx(4.0));
  CHECK(hardcore_lambda_c(5) == doctest::Approx(256.0 / 243));
  CHECK(std::isinf(hardcore_lambda_c(2)));
  CHECK(std::isinf(hardcore_lambda_c(1)));
  const double a = coloring_alpha_star();
  CHECK(a == doctest::Approx(1.76322).epsilon(1e-5));
  CHECK(std::abs(a - std::exp(1.0 / a)) < 1e-12);
}

TEST_CASE("decay fit") {
  std::vector<double> p(10, 0.0);
  for (std::size_t t = 0; t < p.size(); ++t) p[t] = 0.3 * std::pow(0.6, double(t));
  auto fit = fit_decay_rate(p);
  CHECK(std::abs(fit.alpha - 0.6) < 1e-9);
  CHECK(std::abs(fit.c - 0.3) < 1e-9);
  CHECK(fit.residual < 1e-9);
  CHECK(fit.points == 9);

  fit = fit_decay_rate(std::vector<double>(6, 0.25));
  CHECK(fit.alpha == doctest::Approx(1.0));

  fit = fit_decay_rate(std::vector<double>(6, 0.0));
  CHECK(fit.alpha == 0.0);
  CHECK_FALSE(fit.note.empty());

  CHECK_THROWS_AS(fit_decay_rate({0.0, 0.5, 0.2, 0.0}), InputError);
  // infinite and zero entries are skipped
  fit = fit_decay_rate({0.0, INFINITY, 0.5, 0.25, 0.0, 0.125 / 2});
  CHECK(fit.points == 3);
}

TEST_CASE("a single boundary vertex") {
  const double lambda = 1.5;
  const Instance inst(hardcore(path_graph(2), lambda));
  SsmScope scope;
  scope.kind = SsmScope::Kind::kFixed;
  scope.lambda = {1};
  const auto p = measure_ssm(inst, 0, scope, 3);
  REQUIRE(p.tv.size() == 4);
  const double expected = lambda / (1 + lambda);
  CHECK(p.tv[0] == doctest::Approx(expected));
  CHECK(p.tv[1] == doctest::Approx(expected));
  CHECK(p.tv[2] == 0.0);
  CHECK(std::isinf(p.mult[1]));
  CHECK(p.pairs == 1);
}

TEST_CASE("profiles are non-increasing and tv is bounded by mult") {
  for (const auto& e : corpus(7)) {
    CAPTURE(e.name);
    for (auto kind : {SsmScope::Kind::kSpheres, SsmScope::Kind::kAllSubsets}) {
      SsmScope scope;
      scope.kind = kind;
      const auto p = measure_ssm(e.inst, 0, scope, 4);
      CHECK_FALSE(p.partial);
      for (std::size_t t = 1; t < p.tv.size(); ++t) {
        CHECK(p.tv[t] <= p.tv[t - 1]);
        CHECK(p.mult[t] <= p.mult[t - 1]);
      }
      for (std::size_t t = 0; t < p.tv.size(); ++t) CHECK(p.tv[t] <= 1 - std::exp(-p.mult[t]) + 1e-12);
    }
  }
}

TEST_CASE("all subsets dominate spheres") {
  for (const auto& e : corpus(6)) {
    CAPTURE(e.name);
    SsmScope spheres;
    SsmScope all;
    all.kind = SsmScope::Kind::kAllSubsets;
    const auto a = measure_ssm(e.inst, 0, spheres, 3);
    const auto b = measure_ssm(e.inst, 0, all, 3);
    for (std::size_t t = 0; t <= 3; ++t) {
      CHECK(a.tv[t] <= b.tv[t] + 1e-12);
      CHECK(a.mult[t] <= b.mult[t] + 1e-12);
    }
  }
}

TEST_CASE("budget overrun marks the profile partial") {
  const Instance inst(hardcore(cycle_graph(16), 1.0));
  const auto p = measure_ssm(inst, 0, SsmScope{}, 8, 1000);
  CHECK(p.partial);
  CHECK_FALSE(p.note.empty());
  CHECK(p.tv.size() == 9);
}

TEST_CASE("tree recursion matches brute force") {
  for (std::size_t degree : {2u, 3u, 4u}) {
    for (double lambda : {0.5, 1.0, 3.0}) {
      const std::size_t depth = 2;
      const auto prof = hardcore_tree_profile(degree, lambda, depth);
      for (std::size_t t = 1; t <= depth; ++t) {
        const double gap =
            std::abs(root_occupied(degree, depth, lambda, t, 1) - root_occupied(degree, depth, lambda, t, 0));
        CHECK(std::abs(prof.tv[t] - gap) < 1e-12);
      }
      // the extremes are the worst sphere boundaries
      const auto measured = measure_ssm(Instance(hardcore(regular_tree(degree, depth), lambda)), 0, SsmScope{}, depth);
      CHECK_FALSE(measured.partial);
      for (std::size_t t = 1; t <= depth; ++t) CHECK(std::abs(measured.tv[t] - prof.tv[t]) < 1e-12);
    }
  }
}

TEST_CASE("tree profile decays below the threshold and not above") {
  const auto below = hardcore_tree_profile(3, 1.0, 7);
  const auto fit = fit_decay_rate(below.tv, 1);
  CHECK(fit.alpha < 0.9);
  CHECK(fit.residual < 0.1);
  // tv and mult decay at about the same rate once the mult entries are finite
  const auto mfit = fit_decay_rate(std::vector<double>(below.mult.begin() + 1, below.mult.end()), 1);
  CHECK(mfit.alpha < 1.0);
  CHECK(std::abs(mfit.alpha - fit.alpha) < 0.1);

  const auto rep = phase_transition_report(3, {1.0, 4.0, 6.0}, 7);
  CHECK(rep.lambda_c == doctest::Approx(4.0));
  REQUIRE(rep.rows.size() == 3);
  CHECK(rep.rows[0].non_decay == std::optional<bool>(false));
  CHECK_FALSE(rep.rows[1].non_decay.has_value());
  CHECK(rep.rows[2].non_decay == std::optional<bool>(true));
}

TEST_CASE("chain rule counting with an exact base") {
  const ExactInferencer exact;
  const Instance k1(hardcore(path_graph(1), 2.5));
  CHECK(chain_rule_count(exact, k1, Ordering::by_id(k1.graph())).z == doctest::Approx(3.5));
  const Instance p3(hardcore(path_graph(3), 1.0));
  CHECK(chain_rule_count(exact, p3, Ordering::by_id(p3.graph())).z == doctest::Approx(5.0));

  std::mt19937_64 rng(9);
  for (const auto& e : corpus(7)) {
    CAPTURE(e.name);
    const double z = partition_function(e.inst);
    std::vector<Vertex> o(e.inst.size());
    std::iota(o.begin(), o.end(), 0);
    for (int rep = 0; rep < 3; ++rep) {
      std::shuffle(o.begin(), o.end(), rng);
      const auto c = chain_rule_count(exact, e.inst, Ordering(o, o.size()));
      CHECK(std::abs(c.z - z) <= 1e-9 * z);
      CHECK(c.factors.size() == e.inst.size());
      CHECK(c.log_weight == doctest::Approx(std::log(weight(e.inst.spec(), c.sigma))));
    }
  }
}

TEST_CASE("chain rule counting with a mult-noisy base") {
  const double eps = 0.05;
  for (const auto& e : corpus(7)) {
    CAPTURE(e.name);
    const MultNoisyInferencer noisy(exact_ptr(), e.inst.size(), 3);
    const double log_z = std::log(partition_function(e.inst));
    const auto c = chain_rule_count(noisy, e.inst, Ordering::by_id(e.inst.graph()), eps);
    CHECK(std::abs(c.log_z - log_z) <= double(e.inst.size()) * eps + 1e-12);
  }
}

TEST_CASE("pinned instances count their conditional partition function") {
  const Instance base(hardcore(cycle_graph(6), 1.0));
  PartialConfig tau(6);
  tau.set(0, 1);
  tau.set(3, 0);
  const Instance inst = base.with_pinning(tau);
  const auto c = chain_rule_count(ExactInferencer(), inst, Ordering::by_id(inst.graph()));
  CHECK(c.z == doctest::Approx(partition_function(inst)));
  CHECK(c.factors.size() == 4);
}

TEST_CASE("csv") {
  SsmProfile p;
  p.tv = {1.0, 0.5};
  p.mult = {INFINITY, 0.25};
  CHECK(profile_csv(p) == "t,delta_tv,delta_mult\n0,1,inf\n1,0.5,0.25\n");
}

TEST_CASE("forward bound from ball inference error") {
  for (const auto& e : corpus(7)) {
    CAPTURE(e.name);
    const std::size_t l = e.inst.spec().locality();
    const std::size_t n = e.inst.size();
    SsmScope all;
    all.kind = SsmScope::Kind::kAllSubsets;
    const auto prof = measure_ssm(e.inst, 0, all, n);
    for (std::size_t t = 0; t + 2 * l + 1 <= n; ++t) {
      double err = 0.0;
      for (const auto& tau : lgs::testing::feasible_pinnings(e.inst)) {
        if (tau.assigned(0)) continue;
        const Instance pinned = e.inst.with_pinning(tau);
        err = std::max(err, tv_distance(ssm_ball_inference(pinned, 0, t), marginal(pinned, 0)));
      }
      CAPTURE(t);
      CHECK(prof.tv[t + 2 * l + 1] <= 2 * err + 1e-12);
    }
  }
}
