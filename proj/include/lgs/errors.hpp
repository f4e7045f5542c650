#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lgs {

/// Malformed or inconsistent caller input (unknown node, bad parameter, ...).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A pinning or configuration that has no feasible extension.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An algorithm observed a broken precondition of a component it relies on,
/// e.g. a base inferencer that violated its declared guarantee, or a read
/// outside a declared locality radius.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Refusal to run an enumeration larger than the configured budget.
class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(const std::string& what, double required, std::uint64_t budget)
      : std::runtime_error(what + " (requires ~" + std::to_string(required) +
                           " states, budget " + std::to_string(budget) + ")"),
        required_(required),
        budget_(budget) {}

  double required() const { return required_; }
  std::uint64_t budget() const { return budget_; }

 private:
  double required_;
  std::uint64_t budget_;
};

}  // namespace lgs
