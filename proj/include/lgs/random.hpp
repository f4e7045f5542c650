#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "lgs/graph.hpp"

namespace lgs {

/// Names one random draw: owning node, purpose and an index within that
/// purpose (pass, phase, counter). Draws are pure functions of their label,
/// so replaying a label returns the same value.
struct DrawLabel {
  NodeId node = 0;
  std::uint32_t stream = 0;
  std::uint64_t index = 0;

  auto operator<=>(const DrawLabel&) const = default;
};

/// Stream tags used by the library.
namespace streams {
inline constexpr std::uint32_t kSequential = 1;
inline constexpr std::uint32_t kProposal = 2;
inline constexpr std::uint32_t kAccept = 3;
inline constexpr std::uint32_t kDecomposition = 4;
inline constexpr std::uint32_t kUser = 100;
}  // namespace streams

class Randomness {
 public:
  virtual ~Randomness() = default;
  /// Index drawn with probability proportional to weights (never a
  /// zero-weight index).
  virtual std::size_t categorical(const DrawLabel& label, std::span<const double> weights) = 0;
  /// Uniform in [0, 1).
  virtual double uniform(const DrawLabel& label) = 0;

  /// True with probability p.
  bool bernoulli(const DrawLabel& label, double p);
  double exponential(const DrawLabel& label, double rate);
};

/// Counter-free tape: every label hashes (seed, node, stream, index) to an
/// independent 64-bit value. Thread-safe.
class RandomTape final : public Randomness {
 public:
  explicit RandomTape(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t bits(const DrawLabel& label) const;

  std::size_t categorical(const DrawLabel& label, std::span<const double> weights) override;
  double uniform(const DrawLabel& label) override;

 private:
  std::uint64_t seed_;
};

/// Only allows draws owned by nodes of a view; anything else is a
/// ContractViolation.
class RestrictedRandomness final : public Randomness {
 public:
  RestrictedRandomness(Randomness& inner, std::vector<NodeId> allowed);

  std::size_t categorical(const DrawLabel& label, std::span<const double> weights) override;
  double uniform(const DrawLabel& label) override;

 private:
  void check(const DrawLabel& label) const;
  Randomness& inner_;
  std::vector<NodeId> allowed_;  // sorted
};

/// Exact enumeration of a randomized computation with discrete draws. The
/// computation is re-executed along every branch of its choice tree; a label
/// seen twice in one execution replays its first outcome. Continuous draws
/// are rejected.
class ChoiceEnumerator final : public Randomness {
 public:
  explicit ChoiceEnumerator(std::uint64_t max_leaves = std::uint64_t{1} << 20) : max_leaves_(max_leaves) {}

  /// Calls run() once per leaf; returns false if no more leaves remain.
  bool next_leaf();
  /// Probability of the execution that just finished.
  double leaf_probability() const { return prob_; }
  std::uint64_t leaves() const { return leaves_; }

  std::size_t categorical(const DrawLabel& label, std::span<const double> weights) override;
  double uniform(const DrawLabel& label) override;

 private:
  struct Choice {
    std::vector<double> probs;  // normalized weights
    std::size_t taken;
  };
  std::vector<Choice> script_;
  std::size_t depth_ = 0;
  std::map<DrawLabel, std::size_t> seen_;
  double prob_ = 1.0;
  std::uint64_t leaves_ = 0;
  std::uint64_t max_leaves_;
  bool started_ = false;
};

/// Exact output distribution of `run` over all its random choices.
/// BudgetExceeded past max_leaves leaves.
template <class R, class F>
std::map<R, double> enumerate_outcomes(F&& run, std::uint64_t max_leaves = std::uint64_t{1} << 20) {
  ChoiceEnumerator en(max_leaves);
  std::map<R, double> out;
  while (en.next_leaf()) {
    R r = run(static_cast<Randomness&>(en));
    out[r] += en.leaf_probability();
  }
  return out;
}

/// Seed for an independent sub-computation (e.g. run number k of a batch).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace lgs
