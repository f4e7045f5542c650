#include "lgs/random.hpp"

#include <algorithm>
#include <cmath>

#include "lgs/errors.hpp"

namespace lgs {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double to_unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

std::vector<double> checked_probs(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || std::isinf(w)) throw ContractViolation("categorical draw with invalid weight");
    total += w;
  }
  if (!(total > 0.0)) throw ContractViolation("categorical draw with all-zero weights");
  std::vector<double> probs(weights.begin(), weights.end());
  for (double& p : probs) p /= total;
  return probs;
}

}  // namespace

bool Randomness::bernoulli(const DrawLabel& label, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ContractViolation("bernoulli probability outside [0,1]");
  const double w[2] = {1.0 - p, p};
  return categorical(label, w) == 1;
}

double Randomness::exponential(const DrawLabel& label, double rate) {
  if (!(rate > 0.0)) throw InputError("exponential rate must be positive");
  return -std::log1p(-uniform(label)) / rate;
}

std::uint64_t RandomTape::bits(const DrawLabel& label) const {
  std::uint64_t h = splitmix(seed_);
  h = splitmix(h ^ label.node);
  h = splitmix(h ^ label.stream);
  return splitmix(h ^ label.index);
}

double RandomTape::uniform(const DrawLabel& label) { return to_unit(bits(label)); }

std::size_t RandomTape::categorical(const DrawLabel& label, std::span<const double> weights) {
  const auto probs = checked_probs(weights);
  const double u = uniform(label);
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] == 0.0) continue;
    last = i;
    acc += probs[i];
    if (u < acc) return i;
  }
  return last;  // rounding left u above the final cumulative sum
}

RestrictedRandomness::RestrictedRandomness(Randomness& inner, std::vector<NodeId> allowed)
    : inner_(inner), allowed_(std::move(allowed)) {
  std::sort(allowed_.begin(), allowed_.end());
}

void RestrictedRandomness::check(const DrawLabel& label) const {
  if (!std::binary_search(allowed_.begin(), allowed_.end(), label.node)) {
    throw ContractViolation("random draw of node " + std::to_string(label.node) + " outside the view");
  }
}

std::size_t RestrictedRandomness::categorical(const DrawLabel& label, std::span<const double> weights) {
  check(label);
  return inner_.categorical(label, weights);
}

double RestrictedRandomness::uniform(const DrawLabel& label) {
  check(label);
  return inner_.uniform(label);
}

bool ChoiceEnumerator::next_leaf() {
  if (started_) {
    // Backtrack to the deepest choice with an untried positive option.
    script_.resize(std::min(script_.size(), depth_));
    bool advanced = false;
    while (!script_.empty()) {
      Choice& c = script_.back();
      std::size_t next = c.taken + 1;
      while (next < c.probs.size() && c.probs[next] == 0.0) ++next;
      if (next < c.probs.size()) {
        c.taken = next;
        advanced = true;
        break;
      }
      script_.pop_back();
    }
    if (!advanced) return false;
  }
  started_ = true;
  if (leaves_ >= max_leaves_) {
    throw BudgetExceeded("random choice enumeration", static_cast<double>(leaves_ + 1), max_leaves_);
  }
  ++leaves_;
  depth_ = 0;
  seen_.clear();
  prob_ = 1.0;
  return true;
}

std::size_t ChoiceEnumerator::categorical(const DrawLabel& label, std::span<const double> weights) {
  if (auto it = seen_.find(label); it != seen_.end()) {
    if (it->second >= weights.size() || !(weights[it->second] > 0.0)) {
      throw ContractViolation("replayed draw is no longer admissible");
    }
    return it->second;
  }
  if (depth_ == script_.size()) {
    auto probs = checked_probs(weights);
    const auto first = static_cast<std::size_t>(
        std::find_if(probs.begin(), probs.end(), [](double p) { return p > 0.0; }) - probs.begin());
    script_.push_back(Choice{std::move(probs), first});
  } else if (script_[depth_].probs.size() != weights.size()) {
    throw ContractViolation("re-execution diverged from its recorded choices");
  }
  const Choice& c = script_[depth_++];
  prob_ *= c.probs[c.taken];
  seen_.emplace(label, c.taken);
  return c.taken;
}

double ChoiceEnumerator::uniform(const DrawLabel&) {
  throw ContractViolation("continuous draws cannot be enumerated exactly");
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  return splitmix(splitmix(seed) ^ splitmix(salt + 0x5851f42d4c957f2dULL));
}

}  // namespace lgs
