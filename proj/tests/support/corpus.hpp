#pragma once

#include <string>
#include <vector>

#include "lgs/gibbs.hpp"

namespace lgs::testing {

struct CorpusEntry {
  std::string name;
  Instance inst;
};

/// Small unpinned instances: hardcore, colorings, matchings, two-spin.
/// Entries are sorted by size; every entry has n <= max_n.
std::vector<CorpusEntry> corpus(std::size_t max_n);

/// The n <= 5 set: hardcore lambda in {0.5, 1, 2} on P3, P4, C5; 3-coloring
/// of P4 and K3; matchings of P4.
std::vector<CorpusEntry> tiny_corpus();

/// Every feasible pinning of the instance (all partial configurations that
/// extend to a feasible configuration), including the empty one.
std::vector<PartialConfig> feasible_pinnings(const Instance& inst);

}  // namespace lgs::testing
