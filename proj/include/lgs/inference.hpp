#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "lgs/gibbs.hpp"
#include "lgs/local_runtime.hpp"
#include "lgs/oracle.hpp"
#include "lgs/random.hpp"

namespace lgs {

/// Approximate inference: given an instance, a vertex and an error target,
/// produce an estimate of mu_v^tau with a declared kind of guarantee.
class Inferencer {
 public:
  virtual ~Inferencer() = default;
  /// Marginal estimate at v. For pinned v, the point mass.
  virtual MarginalDist infer(const Instance& inst, Vertex v, double target) const = 0;
  /// kTv or kMult; kExact satisfies either.
  virtual Guarantee::Kind guarantee_kind() const = 0;
  /// Radius of the view the output depends on, for target error `target`.
  virtual std::size_t locality(const GibbsSpec& spec, double target) const = 0;
  virtual std::string name() const = 0;
};

using InferencerPtr = std::shared_ptr<const Inferencer>;

/// Brute-force oracle. Its locality is the whole graph.
class ExactInferencer final : public Inferencer {
 public:
  explicit ExactInferencer(std::uint64_t budget = kDefaultBudget) : budget_(budget) {}
  MarginalDist infer(const Instance& inst, Vertex v, double target) const override;
  Guarantee::Kind guarantee_kind() const override { return Guarantee::Kind::kExact; }
  std::size_t locality(const GibbsSpec& spec, double) const override { return spec.size(); }
  std::string name() const override { return "exact"; }

 private:
  std::uint64_t budget_;
};

/// Exact marginals answered from per-vertex MarginalTables of one spec
/// (built lazily, unpinned base). Cheap repeated queries on small instances.
class TabulatedInferencer final : public Inferencer {
 public:
  explicit TabulatedInferencer(SpecPtr spec, std::uint64_t budget = kDefaultBudget);
  MarginalDist infer(const Instance& inst, Vertex v, double target) const override;
  Guarantee::Kind guarantee_kind() const override { return Guarantee::Kind::kExact; }
  std::size_t locality(const GibbsSpec& spec, double) const override { return spec.size(); }
  std::string name() const override { return "tabulated"; }
  const MarginalTable& table(Vertex v) const;

 private:
  SpecPtr spec_;
  std::uint64_t budget_;
  mutable std::mutex mutex_;
  mutable std::vector<std::unique_ptr<MarginalTable>> tables_;
};

/// Memoizes another inferencer on (spec, v, pinning, target).
class CachingInferencer final : public Inferencer {
 public:
  explicit CachingInferencer(InferencerPtr inner) : inner_(std::move(inner)) {}
  MarginalDist infer(const Instance& inst, Vertex v, double target) const override;
  Guarantee::Kind guarantee_kind() const override { return inner_->guarantee_kind(); }
  std::size_t locality(const GibbsSpec& spec, double target) const override { return inner_->locality(spec, target); }
  std::string name() const override { return "cached(" + inner_->name() + ")"; }
  std::size_t cache_size() const;

 private:
  struct KeyHash {
    std::size_t operator()(const std::vector<std::int64_t>& k) const;
  };
  InferencerPtr inner_;
  mutable std::mutex mutex_;
  mutable const GibbsSpec* spec_ = nullptr;
  mutable std::unordered_map<std::vector<std::int64_t>, MarginalDist, KeyHash> cache_;
};

/// Adversarial noise on top of an exact inferencer: moves exactly `target`
/// probability mass (capped by what is available) from the most likely symbol
/// to another symbol chosen by hashing the pinning inside the declared view.
/// The destination may be a symbol of probability zero.
class NoisyInferencer final : public Inferencer {
 public:
  /// `declared_locality(spec, target)` is what locality() reports.
  NoisyInferencer(InferencerPtr exact, std::function<std::size_t(const GibbsSpec&, double)> declared_locality,
                  std::uint64_t seed = 0);
  MarginalDist infer(const Instance& inst, Vertex v, double target) const override;
  Guarantee::Kind guarantee_kind() const override { return Guarantee::Kind::kTv; }
  std::size_t locality(const GibbsSpec& spec, double target) const override { return declared_(spec, target); }
  std::string name() const override { return "noisy(" + exact_->name() + ")"; }

 private:
  InferencerPtr exact_;
  std::function<std::size_t(const GibbsSpec&, double)> declared_;
  std::uint64_t seed_;
};

/// Same as NoisyInferencer but with multiplicative noise: the output is
/// proportional to p(c) * exp(+-target) with signs chosen by hashing the
/// view, so mult_error(output, p) <= target.
class MultNoisyInferencer final : public Inferencer {
 public:
  MultNoisyInferencer(InferencerPtr exact, std::size_t declared_locality, std::uint64_t seed = 0);
  MarginalDist infer(const Instance& inst, Vertex v, double target) const override;
  Guarantee::Kind guarantee_kind() const override { return Guarantee::Kind::kMult; }
  std::size_t locality(const GibbsSpec&, double) const override { return declared_; }
  std::string name() const override { return "mult-noisy(" + exact_->name() + ")"; }

 private:
  InferencerPtr exact_;
  std::size_t declared_;
  std::uint64_t seed_;
};

/// Marginal at v from the ball of radius t + l, after fixing the shell
/// Gamma = B_{t+l}(v) \ (B_t(v) u Lambda) to the first assignment (Gamma in
/// increasing id, lexicographic) that is locally feasible for the factors
/// inside B_{t+2l}(v). The result depends on the instance only through
/// B_{t+2l}(v). The guarantee carries `certified_tv` (infinity if unknown).
MarginalDist ssm_ball_inference(const Instance& inst, Vertex v, std::size_t t,
                                double certified_tv = std::numeric_limits<double>::infinity(),
                                std::uint64_t budget = kDefaultBudget);

class SsmBallInferencer final : public Inferencer {
 public:
  explicit SsmBallInferencer(std::size_t t, double certified_tv = std::numeric_limits<double>::infinity(),
                             std::uint64_t budget = kDefaultBudget)
      : t_(t), certified_(certified_tv), budget_(budget) {}
  MarginalDist infer(const Instance& inst, Vertex v, double) const override {
    return ssm_ball_inference(inst, v, t_, certified_, budget_);
  }
  Guarantee::Kind guarantee_kind() const override { return Guarantee::Kind::kTv; }
  std::size_t locality(const GibbsSpec& spec, double) const override { return t_ + 2 * spec.locality(); }
  std::string name() const override { return "ssm-ball(t=" + std::to_string(t_) + ")"; }

 private:
  std::size_t t_;
  double certified_;
  std::uint64_t budget_;
};

struct BoostTrace {
  std::size_t base_locality = 0;  // t
  double base_target = 0.0;       // delta = eps / (5 q n)
  std::vector<Vertex> gamma;      // pinned in this order
  std::vector<Symbol> chosen;
  std::vector<PartialConfig> pinnings;  // tau_1 .. tau_m
};

/// Turns a tv-inferencer into one with multiplicative error eps.
MarginalDist boost_inference(const Inferencer& base, const Instance& inst, Vertex v, double eps,
                             BoostTrace* trace = nullptr, std::uint64_t budget = kDefaultBudget);

class BoostedInferencer final : public Inferencer {
 public:
  explicit BoostedInferencer(InferencerPtr base, std::uint64_t budget = kDefaultBudget)
      : base_(std::move(base)), budget_(budget) {}
  MarginalDist infer(const Instance& inst, Vertex v, double eps) const override {
    return boost_inference(*base_, inst, v, eps, nullptr, budget_);
  }
  Guarantee::Kind guarantee_kind() const override { return Guarantee::Kind::kMult; }
  /// 2t + l with t = base locality at eps / (5 q n).
  std::size_t locality(const GibbsSpec& spec, double eps) const override;
  std::string name() const override { return "boosted(" + base_->name() + ")"; }

 private:
  InferencerPtr base_;
  std::uint64_t budget_;
};

/// Largest tv change of a single-vertex marginal caused by pinning one more
/// vertex at distance d, over all feasible pinnings of the unpinned instance
/// (index d of the result; index 0 unused).
std::vector<double> single_site_influence(const Instance& inst, std::uint64_t budget = kDefaultBudget);
/// Smallest t such that every influence at distance > t is <= delta.
std::size_t certified_influence_radius(const std::vector<double>& influence, double delta);

// ---------------------------------------------------------------------------
// Inference from a sampler

using Sampler = std::function<SampleOutcome(const Instance&, Randomness&)>;

struct SamplerInferenceOptions {
  enum class Mode { kEnumerate, kMonteCarlo };
  Mode mode = Mode::kEnumerate;
  /// Monte Carlo runs (also used by the enumerate fallback).
  std::size_t runs = 10'000;
  std::uint64_t seed = 0;
  std::uint64_t max_leaves = std::uint64_t{1} << 20;
  /// Known tv error of the sampler's output distribution.
  double sampler_tv = 0.0;
};

struct SamplerInference {
  MarginalDist marginal;
  /// Expected number of raised failure flags (exact or estimated).
  double failure_mass = 0.0;
  bool enumerated = false;
  std::uint64_t leaves = 0;
};

/// Distribution of Y_v (not conditioned on success) with a tv guarantee of
/// sampler_tv + failure mass (+ a confidence radius sqrt(q / 2N) for Monte
/// Carlo).
SamplerInference inference_from_sampler(const Sampler& sampler, const Instance& inst, Vertex v,
                                        const SamplerInferenceOptions& options = {});

}  // namespace lgs
