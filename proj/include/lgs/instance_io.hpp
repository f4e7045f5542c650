#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lgs/gibbs.hpp"
#include "lgs/oracle.hpp"

namespace lgs {

/// Parsed form of an `lgs-instance 1` document (see docs/instance-format.md).
struct InstanceFile {
  struct FactorLine {
    std::vector<NodeId> scope;
    std::vector<double> table;
    bool operator==(const FactorLine&) const = default;
  };
  struct Pin {
    std::vector<NodeId> at;  // one node, or two endpoints for matching
    Symbol symbol = 0;
    bool operator==(const Pin&) const = default;
  };

  std::vector<NodeId> nodes;
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::string model;  // hardcore | two-spin | coloring | matching | factors
  std::map<std::string, double> params;
  std::map<NodeId, std::vector<Symbol>> lists;  // coloring only
  std::vector<FactorLine> factors;              // factors only
  std::vector<Pin> pins;
  std::uint64_t seed = 0;
  std::uint64_t budget = kDefaultBudget;

  /// Source line of each entry (0 when built in code); ignored by ==.
  struct Lines {
    std::size_t model = 0;
    std::vector<std::size_t> edges, factors, pins;
    std::map<NodeId, std::size_t> lists;
    bool operator==(const Lines&) const { return true; }
  } lines;

  bool operator==(const InstanceFile&) const = default;
};

/// InputError messages start with "line N: ".
InstanceFile parse_instance_text(std::string_view text);
InstanceFile read_instance_file(const std::string& path);
std::string emit_instance(const InstanceFile& file);

/// InputError for bad model data, InfeasibleError for an infeasible pinning.
Instance build_instance(const InstanceFile& file);
/// Same, also returning the matching model when model == "matching".
Instance build_instance(const InstanceFile& file, std::optional<MatchingModel>& matching_out);

}  // namespace lgs
