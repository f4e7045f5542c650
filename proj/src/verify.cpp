#include "lgs/verify.hpp"

#include <cmath>
#include <cstdio>

#include "lgs/errors.hpp"

namespace lgs {

namespace {

VerifyReport compare(const std::map<std::vector<Symbol>, std::size_t>& counts, std::size_t runs,
                     std::size_t successes, const Instance& inst, std::optional<double> tolerance,
                     std::uint64_t budget) {
  if (successes == 0) throw InputError("verify: no successful samples");
  const Distribution exact = joint_distribution(inst, budget);
  const std::size_t n = inst.size();
  const std::size_t q = inst.spec().q();
  Distribution empirical;
  std::vector<std::vector<double>> emp(n, std::vector<double>(q, 0.0));
  std::vector<std::vector<double>> ref(n, std::vector<double>(q, 0.0));
  for (const auto& [cfg, c] : counts) {
    const double p = double(c) / double(successes);
    empirical[cfg] = p;
    for (Vertex v = 0; v < n; ++v) emp[v][static_cast<std::size_t>(cfg[v])] += p;
  }
  for (const auto& [cfg, p] : exact) {
    for (Vertex v = 0; v < n; ++v) ref[v][static_cast<std::size_t>(cfg[v])] += p;
  }
  VerifyReport r;
  r.runs = runs;
  r.successes = successes;
  r.support = exact.size();
  r.tv = tv_distance(empirical, exact);
  for (Vertex v = 0; v < n; ++v) r.marginal_tv = std::max(r.marginal_tv, tv_distance(emp[v], ref[v]));
  r.radius = std::sqrt(double(r.support) / (2.0 * double(successes)));
  r.tolerance = tolerance.value_or(r.radius);
  r.pass = r.tv <= r.tolerance;
  return r;
}

std::vector<Symbol> key_of(const PartialConfig& c, std::size_t q) {
  std::vector<Symbol> k(c.values().begin(), c.values().end());
  for (Symbol s : k) {
    if (s < 0 || static_cast<std::size_t>(s) >= q) throw InputError("verify: sample is not a complete configuration");
  }
  return k;
}

}  // namespace

VerifyReport verify_distribution(std::span<const SampleOutcome> outcomes, const Instance& inst,
                                 std::optional<double> tolerance, std::uint64_t budget) {
  if (outcomes.empty()) throw InputError("verify: no samples");
  std::map<std::vector<Symbol>, std::size_t> counts;
  std::size_t ok = 0;
  for (const auto& o : outcomes) {
    if (!o.success()) continue;
    ++counts[key_of(o.config(), inst.spec().q())];
    ++ok;
  }
  return compare(counts, outcomes.size(), ok, inst, tolerance, budget);
}

VerifyReport verify_distribution(std::span<const PartialConfig> samples, const Instance& inst,
                                 std::optional<double> tolerance, std::uint64_t budget) {
  if (samples.empty()) throw InputError("verify: no samples");
  std::map<std::vector<Symbol>, std::size_t> counts;
  for (const auto& s : samples) ++counts[key_of(s, inst.spec().q())];
  return compare(counts, samples.size(), samples.size(), inst, tolerance, budget);
}

std::string format_report(const VerifyReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "runs %zu\nsuccesses %zu\nsuccess_rate %.6f\nsupport %zu\nempirical_tv %.6f\nmax_marginal_tv %.6f\n"
                "confidence_radius %.6f\ntolerance %.6f\nverdict %s\n",
                r.runs, r.successes, double(r.successes) / double(r.runs), r.support, r.tv, r.marginal_tv, r.radius,
                r.tolerance, r.pass ? "pass" : "fail");
  return buf;
}

}  // namespace lgs
