#pragma once

#include <optional>
#include <span>
#include <string>

#include "lgs/gibbs.hpp"
#include "lgs/local_runtime.hpp"
#include "lgs/oracle.hpp"

namespace lgs {

struct VerifyReport {
  std::size_t runs = 0;
  std::size_t successes = 0;
  std::size_t support = 0;   // feasible configurations of mu^tau
  double tv = 0.0;           // empirical joint vs exact
  double marginal_tv = 0.0;  // max over vertices of single-site tv
  double radius = 0.0;       // sqrt(support / (2 N))
  double tolerance = 0.0;
  bool pass = false;
};

/// Frequencies of the successful outcomes against mu^tau. With no tolerance
/// the confidence radius is used. InputError when no outcome succeeded.
VerifyReport verify_distribution(std::span<const SampleOutcome> outcomes, const Instance& inst,
                                 std::optional<double> tolerance = std::nullopt,
                                 std::uint64_t budget = kDefaultBudget);

/// Same, from complete configurations that all count as successes.
VerifyReport verify_distribution(std::span<const PartialConfig> samples, const Instance& inst,
                                 std::optional<double> tolerance = std::nullopt,
                                 std::uint64_t budget = kDefaultBudget);

std::string format_report(const VerifyReport& r);

}  // namespace lgs
