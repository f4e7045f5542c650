#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "lgs/errors.hpp"
#include "lgs/gibbs.hpp"

namespace lgs::detail {

/// Factors whose scope lies entirely inside `region` (mask over vertices).
std::vector<std::size_t> factors_within(const GibbsSpec& spec, std::span<const std::uint8_t> region);
/// All factor indices.
std::vector<std::size_t> all_factors(const GibbsSpec& spec);

/// q^k as a double, for budget checks.
inline double state_count(std::size_t q, std::size_t k) {
  return std::pow(static_cast<double>(q), static_cast<double>(k));
}

inline void check_budget(std::size_t q, std::size_t free, std::uint64_t budget, const char* what) {
  const double need = state_count(q, free);
  if (need > static_cast<double>(budget)) throw BudgetExceeded(what, need, budget);
}

/// Depth-first enumeration of all assignments to `free` (first vertex is the
/// most significant digit, symbols ascending) on top of `base`, multiplying
/// the selected factors. Each factor is applied as soon as its last free
/// scope vertex is assigned, and branches hitting an exact zero are pruned,
/// so only positive-weight leaves are visited.
class ConfigEnumerator {
 public:
  ConfigEnumerator(const GibbsSpec& spec, std::vector<Vertex> free, std::span<const std::size_t> factors,
                   PartialConfig base);

  /// visit(const PartialConfig& leaf, double weight) -> bool; returning false
  /// stops the enumeration. Returns false iff stopped early.
  template <class Visit>
  bool run(Visit&& visit) {
    if (!root_feasible_) return true;
    return descend(0, root_weight_, visit);
  }

 private:
  template <class Visit>
  bool descend(std::size_t depth, double w, Visit& visit) {
    if (depth == free_.size()) return visit(static_cast<const PartialConfig&>(config_), w);
    const Vertex v = free_[depth];
    for (std::size_t s = 0; s < q_; ++s) {
      config_.set(v, static_cast<Symbol>(s));
      double wd = w;
      bool zero = false;
      for (std::size_t f : by_level_[depth]) {
        const Factor& factor = spec_->factors()[f];
        const std::size_t idx = factor.index_of(config_);
        if (factor.is_zero(idx)) {
          zero = true;
          break;
        }
        wd *= factor.value(idx);
      }
      if (zero) continue;
      if (!descend(depth + 1, wd, visit)) {
        config_.clear(v);
        return false;
      }
    }
    config_.clear(v);
    return true;
  }

  const GibbsSpec* spec_;
  std::size_t q_;
  std::vector<Vertex> free_;
  std::vector<std::vector<std::size_t>> by_level_;
  PartialConfig config_;
  double root_weight_ = 1.0;
  bool root_feasible_ = true;
};

/// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace lgs::detail
