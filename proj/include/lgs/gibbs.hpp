#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lgs/graph.hpp"

namespace lgs {

/// A symbol of the alphabet {0, ..., q-1}.
using Symbol = int;
inline constexpr Symbol kUnassigned = -1;

/// Assignment of symbols to a subset of the vertices (its domain).
class PartialConfig {
 public:
  PartialConfig() = default;
  explicit PartialConfig(std::size_t n) : values_(n, kUnassigned) {}
  explicit PartialConfig(std::vector<Symbol> values) : values_(std::move(values)) {}

  std::size_t size() const { return values_.size(); }
  bool assigned(Vertex v) const { return values_[v] != kUnassigned; }
  Symbol operator[](Vertex v) const { return values_[v]; }
  void set(Vertex v, Symbol s) { values_[v] = s; }
  void clear(Vertex v) { values_[v] = kUnassigned; }

  std::vector<Vertex> domain() const;
  std::size_t assigned_count() const;
  bool complete() const { return assigned_count() == size(); }

  /// True iff the two agree wherever both are assigned.
  bool consistent_with(const PartialConfig& other) const;
  /// Union of two consistent configurations; InputError on conflict.
  PartialConfig merged(const PartialConfig& other) const;
  /// This configuration restricted to vertices with mask[v] != 0.
  PartialConfig restricted(std::span<const std::uint8_t> mask) const;

  std::span<const Symbol> values() const { return values_; }
  bool operator==(const PartialConfig&) const = default;

 private:
  std::vector<Symbol> values_;
};

struct PartialConfigHash {
  std::size_t operator()(const PartialConfig& c) const;
};

/// A non-negative function on Sigma^scope stored as a dense mixed-radix table;
/// the first scope vertex is the least significant digit. Exact zeros are
/// tracked as a separate flag so hard constraints never depend on rounding.
class Factor {
 public:
  Factor(std::vector<Vertex> scope, std::size_t q, std::vector<double> table);

  std::span<const Vertex> scope() const { return scope_; }
  std::size_t table_size() const { return table_.size(); }
  std::span<const double> table() const { return table_; }

  /// Table index of the scope assignment read from `config`; all scope
  /// vertices must be assigned.
  std::size_t index_of(const PartialConfig& config) const;
  double value(std::size_t index) const { return table_[index]; }
  bool is_zero(std::size_t index) const { return zero_[index] != 0; }

  double evaluate(const PartialConfig& config) const { return table_[index_of(config)]; }
  bool vanishes(const PartialConfig& config) const { return zero_[index_of(config)] != 0; }
  bool covered_by(const PartialConfig& config) const;

 private:
  std::vector<Vertex> scope_;
  std::size_t q_;
  std::vector<double> table_;
  std::vector<std::uint8_t> zero_;
};

struct SpecOptions {
  /// Upper bound on q; 0 selects max(64, n^2).
  std::size_t alphabet_cap = 0;
  /// Caller certifies that local feasibility equals feasibility (catalog
  /// models set this where it is known to hold; check_local_admissibility can
  /// verify it on small instances).
  bool locally_admissible = false;
  std::string model = "custom";
};

/// Factor graph (G, Sigma, F) defining a Gibbs distribution.
class GibbsSpec {
 public:
  GibbsSpec(Graph graph, std::size_t q, std::vector<Factor> factors, SpecOptions options = {});

  const Graph& graph() const { return graph_; }
  std::size_t size() const { return graph_.size(); }
  std::size_t q() const { return q_; }
  std::span<const Factor> factors() const { return factors_; }
  /// Indices of factors whose scope contains v.
  std::span<const std::size_t> factors_of(Vertex v) const { return incident_[v]; }
  /// Max over factors of the scope diameter in the graph.
  std::size_t locality() const { return locality_; }
  bool certified_locally_admissible() const { return options_.locally_admissible; }
  const std::string& model() const { return options_.model; }

 private:
  Graph graph_;
  std::size_t q_;
  std::vector<Factor> factors_;
  std::vector<std::vector<std::size_t>> incident_;
  std::size_t locality_ = 0;
  SpecOptions options_;
};

using SpecPtr = std::shared_ptr<const GibbsSpec>;

/// w(sigma): product of all factors. sigma must be complete.
double weight(const GibbsSpec& spec, const PartialConfig& sigma);
/// Structural check w(sigma) > 0 that never consults floating-point values.
bool weight_positive(const GibbsSpec& spec, const PartialConfig& sigma);

/// True iff no factor whose scope lies inside the domain of tau vanishes.
bool is_locally_feasible(const GibbsSpec& spec, const PartialConfig& tau);
/// Local feasibility restricted to factors with scope inside `region`.
bool is_locally_feasible_within(const GibbsSpec& spec, const PartialConfig& tau,
                                std::span<const std::uint8_t> region);

/// Exhaustive feasibility (some complete extension has positive weight).
/// Throws BudgetExceeded when q^{free} exceeds `budget`.
bool is_feasible(const GibbsSpec& spec, const PartialConfig& tau, std::uint64_t budget = 10'000'000);

struct AdmissibilityVerdict {
  enum class Kind { kAdmissible, kCounterexample, kBudgetExceeded };
  Kind kind;
  /// Locally feasible but infeasible configuration when kind == kCounterexample.
  std::optional<PartialConfig> counterexample;
  double required_states = 0;
};

/// Tests every Lambda and every sigma in Sigma^Lambda.
AdmissibilityVerdict check_local_admissibility(const GibbsSpec& spec, std::uint64_t budget);

enum class FeasibilityCheck {
  /// Exact feasibility: local check for certified-admissible specs, brute
  /// force otherwise (BudgetExceeded if too large).
  kVerify,
  /// Local feasibility only. For hot paths inside algorithms whose own
  /// guarantees imply feasibility.
  kLocal,
};

/// A Gibbs model together with a feasible pinning tau.
class Instance {
 public:
  Instance(SpecPtr spec, PartialConfig pinning, FeasibilityCheck check = FeasibilityCheck::kVerify);
  explicit Instance(SpecPtr spec);

  const GibbsSpec& spec() const { return *spec_; }
  const SpecPtr& spec_ptr() const { return spec_; }
  const Graph& graph() const { return spec_->graph(); }
  std::size_t size() const { return spec_->size(); }
  const PartialConfig& pinning() const { return pinning_; }
  bool pinned(Vertex v) const { return pinning_.assigned(v); }

  /// Same spec, different pinning.
  Instance with_pinning(PartialConfig pinning, FeasibilityCheck check = FeasibilityCheck::kVerify) const;

 private:
  SpecPtr spec_;
  PartialConfig pinning_;
};

/// Instance conditioned additionally on `extra`. InputError on conflicting
/// assignments, InfeasibleError if the union is infeasible.
Instance condition(const Instance& inst, const PartialConfig& extra,
                   FeasibilityCheck check = FeasibilityCheck::kVerify);

// Catalog models. Symbol 1 means "occupied"/"in the matching" for the
// two-state models. All have locality <= 1.

/// Unary (1, lambda) per vertex, hard constraint forbidding adjacent 1s.
SpecPtr hardcore(const Graph& g, double lambda);
/// Edge tables ((beta, 1), (1, gamma)) and vertex field (lambda, 1).
SpecPtr two_spin(const Graph& g, double beta, double gamma, double lambda);
/// Proper colorings with per-vertex color lists (hard unary masks) over
/// alphabet q.
SpecPtr coloring(const Graph& g, std::size_t q, const std::vector<std::vector<Symbol>>& lists);
/// Proper q-colorings with full lists.
SpecPtr coloring(const Graph& g, std::size_t q);

struct MatchingModel {
  SpecPtr spec;  // hardcore on the line graph with activity lambda
  LineGraph line;
  /// Edges of the original graph selected by a line-graph configuration.
  std::vector<std::pair<Vertex, Vertex>> matching_of(const PartialConfig& sigma) const;
};
MatchingModel matching(const Graph& g, double lambda);

}  // namespace lgs
