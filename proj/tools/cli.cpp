#include "cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

#include "lgs/errors.hpp"
#include "lgs/inference.hpp"
#include "lgs/instance_io.hpp"
#include "lgs/local_runtime.hpp"
#include "lgs/oracle.hpp"
#include "lgs/samplers.hpp"
#include "lgs/ssm_lab.hpp"
#include "lgs/verify.hpp"

namespace lgs {

namespace {

constexpr int kFail = 1;
constexpr int kUsage = 2;

std::string num(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

struct Loaded {
  InstanceFile file;
  std::optional<Instance> inst;
  std::uint64_t seed = 0;
  std::uint64_t budget = kDefaultBudget;
};

struct Common {
  std::string instance;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> budget;
  std::string out;
};

Loaded load(const Common& c) {
  Loaded l;
  l.file = read_instance_file(c.instance);
  std::optional<MatchingModel> unused;
  l.inst.emplace(build_instance(l.file, unused));
  l.seed = c.seed.value_or(l.file.seed);
  l.budget = c.budget.value_or(l.file.budget);
  return l;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write '" + path + "'");
  f << text;
}

Vertex vertex_of(const Instance& inst, NodeId id) {
  if (!inst.graph().contains(id)) throw InputError("--vertex: no node with id " + std::to_string(id));
  return inst.graph().vertex(id);
}

/// Uniform permutation drawn from the tape.
Ordering tape_order(std::size_t n, std::uint64_t seed) {
  RandomTape tape(seed);
  std::vector<Vertex> o(n);
  for (Vertex i = 0; i < n; ++i) o[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    const std::vector<double> w(i, 1.0);
    const std::size_t j = tape.categorical(DrawLabel{i, streams::kUser, 0}, w);
    std::swap(o[i - 1], o[j]);
  }
  return Ordering(o, n);
}

std::string samples_csv(const Instance& inst, const std::vector<SampleOutcome>& outcomes) {
  std::ostringstream s;
  s << "run,success";
  for (Vertex v = 0; v < inst.size(); ++v) s << ',' << inst.graph().id(v);
  s << '\n';
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    s << k << ',' << (outcomes[k].success() ? 1 : 0);
    for (const auto& y : outcomes[k].y) s << ',' << (y ? std::to_string(*y) : "");
    s << '\n';
  }
  return s.str();
}

int verdict(std::ostream& rep, bool ok) {
  rep << "verdict " << (ok ? "pass" : "fail") << '\n';
  return ok ? 0 : kFail;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Local Gibbs sampling toolkit"};
  app.require_subcommand(1);
  bool timing = false;
  app.add_flag("--timing", timing, "Print wall time to stderr");

  Common c;
  auto add_common = [&](CLI::App* sub, bool needs_instance) {
    auto* opt = sub->add_option("--instance", c.instance, "Instance file")->check(CLI::ExistingFile);
    if (needs_instance) opt->required();
    sub->add_option("--seed", c.seed, "Seed (default: the file's)");
    sub->add_option("--budget", c.budget, "Enumeration budget (default: the file's)");
    sub->add_option("--out", c.out, "Output file for CSV data");
  };

  std::uint64_t vertex = 0;
  std::optional<double> delta;
  std::optional<double> eps;
  std::optional<std::size_t> radius;
  std::optional<double> tol;
  std::size_t runs = 10000;

  auto* infer = app.add_subcommand("infer", "Marginal at one vertex");
  add_common(infer, true);
  infer->add_option("--vertex", vertex, "Node id")->required();
  auto* infer_delta = infer->add_option("--delta", delta, "Target tv error");
  infer->add_option("--eps", eps, "Target multiplicative error (boosted)")->excludes(infer_delta);
  infer->add_option("--radius", radius, "Ball radius t for ball inference");

  auto* sample = app.add_subcommand("sample", "Sequential sampler");
  add_common(sample, true);
  sample->add_option("--runs", runs, "Number of runs")->check(CLI::PositiveNumber);
  sample->add_option("--delta", delta, "Per-call tv target of the base (default 0.01)");
  sample->add_option("--radius", radius, "Use ball inference of this radius as the base");
  sample->add_option("--tol", tol, "Tolerance on the empirical tv");

  bool local = false;
  auto* jvv = app.add_subcommand("jvv", "Local JVV sampler");
  add_common(jvv, true);
  jvv->add_option("--runs", runs, "Number of runs")->check(CLI::PositiveNumber);
  jvv->add_option("--radius", radius, "Use boosted ball inference of this radius as the base");
  jvv->add_flag("--local", local, "Compile to LOCAL through a network decomposition");
  jvv->add_option("--tol", tol, "Tolerance on the empirical tv");

  std::string scope = "spheres";
  auto* ssm = app.add_subcommand("ssm", "Spatial-mixing profile at one vertex");
  add_common(ssm, true);
  ssm->add_option("--vertex", vertex, "Node id")->required();
  ssm->add_option("--radius", radius, "Largest distance t (default 4)");
  ssm->add_option("--scope", scope, "spheres | all")->check(CLI::IsMember({"spheres", "all"}));

  auto* count = app.add_subcommand("count", "Chain-rule partition function");
  add_common(count, true);
  count->add_option("--eps", eps, "Use a mult-noisy base with this error");
  count->add_option("--tol", tol, "Tolerance on the relative error of Z (default 1e-9, or n*eps in log space)");
  bool random_order = false;
  count->add_flag("--random-order", random_order, "Order drawn from --seed instead of by id");

  double failure_budget = 0.0;
  auto* decomp = app.add_subcommand("decomp", "Network decomposition");
  add_common(decomp, true);
  decomp->add_option("--failure-budget", failure_budget, "Expected failed nodes (0: 1/n^2)");

  std::size_t degree = 3;
  std::size_t depth = 7;
  std::vector<double> lambdas{1.0, 6.0};
  double floor = 0.01;
  auto* phase = app.add_subcommand("phase", "Hardcore tree phase-transition table");
  phase->add_option("--degree", degree, "Tree degree")->check(CLI::Range(2, 64));
  phase->add_option("--depth", depth, "Tree depth")->check(CLI::Range(3, 200));
  phase->add_option("--lambda", lambdas, "Activities")->delimiter(',');
  phase->add_option("--floor", floor, "Non-decay floor");
  phase->add_option("--out", c.out, "Output CSV");

  std::string samples_path;
  auto* verify = app.add_subcommand("verify", "Empirical vs exact distribution");
  add_common(verify, true);
  verify->add_option("--samples", samples_path, "One configuration per line, symbols in node order")
      ->required()
      ->check(CLI::ExistingFile);
  verify->add_option("--tol", tol, "Tolerance on the empirical tv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : kUsage;
  }

  const auto start = std::chrono::steady_clock::now();
  std::ostringstream rep;
  rep << "command";
  for (int i = 1; i < argc; ++i) rep << ' ' << argv[i];
  rep << '\n';
  int code = 0;

  try {
    if (*infer) {
      const Loaded l = load(c);
      const Instance& inst = *l.inst;
      const Vertex v = vertex_of(inst, vertex);
      InferencerPtr base;
      if (radius) {
        base = std::make_shared<SsmBallInferencer>(*radius, delta.value_or(INFINITY), l.budget);
      } else {
        base = std::make_shared<ExactInferencer>(l.budget);
      }
      double target = delta.value_or(0.0);
      if (eps) {
        base = std::make_shared<BoostedInferencer>(base, l.budget);
        target = *eps;
      }
      const MarginalDist m = base->infer(inst, v, target);
      rep << "vertex " << vertex << "\nbase " << base->name() << "\nguarantee " << describe(m.guarantee) << '\n';
      for (std::size_t s = 0; s < m.size(); ++s) rep << "p " << s << ' ' << num(m[s]) << '\n';
      if (eps || delta) {
        try {
          const MarginalDist exact = marginal(inst, v, l.budget);
          const double e = eps ? mult_error(m, exact) : tv_distance(m, exact);
          const double bound = eps ? *eps : *delta;
          rep << "error_vs_exact " << num(e) << "\ntolerance " << num(bound) << '\n';
          code = verdict(rep, e <= bound + 1e-12);
        } catch (const BudgetExceeded&) {
          rep << "error_vs_exact unavailable (budget)\n";
        }
      }
    } else if (*sample) {
      const Loaded l = load(c);
      const Instance& inst = *l.inst;
      InferencerPtr base = radius ? InferencerPtr(std::make_shared<SsmBallInferencer>(*radius, INFINITY, l.budget))
                                  : std::make_shared<CachingInferencer>(std::make_shared<ExactInferencer>(l.budget));
      const Ordering order = Ordering::by_id(inst.graph());
      const double d = delta.value_or(0.01);
      std::vector<PartialConfig> samples(runs);
      parallel_for(runs, [&](std::size_t k) {
        RandomTape tape(derive_seed(l.seed, k));
        samples[k] = sequential_sample(*base, inst, d, order, tape);
      });
      rep << "seed " << l.seed << "\nbase " << base->name() << "\ndelta " << num(d) << '\n';
      VerifyReport r = verify_distribution(samples, inst, std::nullopt, l.budget);
      r.tolerance = tol.value_or(d + r.radius);
      r.pass = r.tv <= r.tolerance;
      rep << format_report(r);
      code = r.pass ? 0 : kFail;
      if (!c.out.empty()) {
        std::vector<SampleOutcome> outcomes;
        for (const auto& s : samples) {
          SampleOutcome o(inst.size());
          for (Vertex v = 0; v < inst.size(); ++v) o.y[v] = s[v];
          outcomes.push_back(std::move(o));
        }
        write_file(c.out, samples_csv(inst, outcomes));
      }
    } else if (*jvv) {
      const Loaded l = load(c);
      const Instance& inst = *l.inst;
      InferencerPtr base;
      if (radius) {
        base = std::make_shared<BoostedInferencer>(std::make_shared<SsmBallInferencer>(*radius, INFINITY, l.budget),
                                                   l.budget);
      } else {
        base = std::make_shared<CachingInferencer>(std::make_shared<ExactInferencer>(l.budget));
      }
      const Ordering order = Ordering::by_id(inst.graph());
      const std::size_t r = effective_locality(jvv_slocal_algorithm(*base, inst).passes);
      std::optional<Graph> power;
      if (local) power = power_graph(inst.graph(), r + 1);
      std::vector<SampleOutcome> outcomes(runs);
      std::vector<std::size_t> dfail(runs, 0);
      std::vector<std::size_t> rounds(runs, 0);
      parallel_for(runs, [&](std::size_t k) {
        RandomTape tape(derive_seed(derive_seed(l.seed, 0), k));
        if (local) {
          const auto run = jvv_local(*base, inst, tape, derive_seed(derive_seed(l.seed, 1), k), {}, {}, &*power);
          outcomes[k] = run.outcome;
          for (auto f : run.decomposition_failed) dfail[k] += f;
          rounds[k] = run.locality.local_rounds;
        } else {
          outcomes[k] = jvv_sample(*base, inst, order, tape).outcome;
        }
      });
      std::size_t ok = 0;
      double mass = 0;
      double dmass = 0;
      std::size_t max_rounds = 0;
      for (std::size_t k = 0; k < runs; ++k) {
        ok += outcomes[k].success();
        mass += double(outcomes[k].failure_mass());
        dmass += double(dfail[k]);
        max_rounds = std::max(max_rounds, rounds[k]);
      }
      const double n = double(inst.size());
      rep << "seed " << l.seed << "\nbase " << base->name() << "\nmode " << (local ? "local" : "global") << '\n';
      rep << "t " << jvv_radius(*base, inst.spec()) << "\neffective_locality " << r << '\n';
      if (local) rep << "max_local_rounds " << max_rounds << "\nmean_decomposition_failures " << num(dmass / runs) << '\n';
      rep << "success_rate " << num(double(ok) / runs) << "\nexpected_success_rate " << num(std::exp(-3.0 / n))
          << "\nmean_failure_mass " << num(mass / runs) << '\n';
      if (ok == 0) {
        rep << "verify no successful samples\n";
        code = verdict(rep, false);
      } else {
        const VerifyReport vr = verify_distribution(outcomes, inst, tol, l.budget);
        rep << format_report(vr);
        code = vr.pass ? 0 : kFail;
      }
      if (!c.out.empty()) write_file(c.out, samples_csv(inst, outcomes));
    } else if (*ssm) {
      const Loaded l = load(c);
      const Instance& inst = *l.inst;
      SsmScope s;
      s.kind = scope == "all" ? SsmScope::Kind::kAllSubsets : SsmScope::Kind::kSpheres;
      const SsmProfile p = measure_ssm(inst, vertex_of(inst, vertex), s, radius.value_or(4), l.budget);
      rep << "scope " << p.scope << "\npairs " << p.pairs << "\npartial " << (p.partial ? "yes" : "no") << "\nnote "
          << p.note << '\n';
      const std::string csv = profile_csv(p);
      rep << csv;
      try {
        const DecayFit f = fit_decay_rate(p.tv, 1);
        rep << "fit_alpha " << num(f.alpha) << "\nfit_c " << num(f.c) << "\nfit_residual " << num(f.residual)
            << "\nfit_points " << f.points << (f.note.empty() ? "" : "\nfit_note " + f.note) << '\n';
      } catch (const InputError& e) {
        rep << "fit unavailable: " << e.what() << '\n';
      }
      if (!c.out.empty()) write_file(c.out, csv);
    } else if (*count) {
      const Loaded l = load(c);
      const Instance& inst = *l.inst;
      const Ordering order = random_order ? tape_order(inst.size(), l.seed) : Ordering::by_id(inst.graph());
      InferencerPtr base = eps ? InferencerPtr(std::make_shared<MultNoisyInferencer>(
                                     std::make_shared<ExactInferencer>(l.budget), inst.size(), l.seed))
                               : std::make_shared<ExactInferencer>(l.budget);
      const ChainCount cc = chain_rule_count(*base, inst, order, eps.value_or(0.0));
      rep << "base " << base->name() << "\nZ " << num(cc.z) << "\nlog_Z " << num(cc.log_z) << '\n';
      try {
        const double z = partition_function(inst, l.budget);
        rep << "exact_Z " << num(z) << '\n';
        if (eps) {
          const double e = std::abs(cc.log_z - std::log(z));
          const double bound = tol.value_or(double(inst.size()) * *eps);
          rep << "log_error " << num(e) << "\ntolerance " << num(bound) << '\n';
          code = verdict(rep, e <= bound + 1e-12);
        } else {
          const double e = std::abs(cc.z - z) / z;
          const double bound = tol.value_or(1e-9);
          rep << "relative_error " << num(e) << "\ntolerance " << num(bound) << '\n';
          code = verdict(rep, e <= bound);
        }
      } catch (const BudgetExceeded&) {
        rep << "exact_Z unavailable (budget)\n";
      }
    } else if (*decomp) {
      const Loaded l = load(c);
      const Graph& g = l.inst->graph();
      DecompositionParams p;
      p.failure_budget = failure_budget;
      const Decomposition d = network_decomposition(g, l.seed, p);
      const std::string problem = check_decomposition(g, d);
      rep << "seed " << l.seed << "\ncolors_used " << d.colors_used << "\ncolor_bound " << d.color_bound
          << "\nmax_radius " << d.max_radius << "\nradius_cap " << d.radius_cap << "\nfailed " << d.failed_count()
          << "\nfailure_budget " << num(d.failure_budget) << '\n';
      if (!problem.empty()) rep << "problem " << problem << '\n';
      code = verdict(rep, problem.empty());
      if (!c.out.empty()) write_file(c.out, decomposition_csv(g, d));
    } else if (*phase) {
      const PhaseReport pr = phase_transition_report(degree, lambdas, depth, floor);
      std::ostringstream csv;
      csv << "lambda,alpha,residual,delta_deepest,non_decay\n";
      for (const auto& row : pr.rows) {
        csv << num(row.lambda) << ',' << num(row.fit.alpha) << ',' << num(row.fit.residual) << ','
            << num(row.profile.tv[depth]) << ',' << (row.non_decay ? (*row.non_decay ? "yes" : "no") : "none") << '\n';
      }
      rep << "degree " << degree << "\ndepth " << depth << "\nlambda_c " << num(pr.lambda_c) << "\nfloor " << num(floor)
          << '\n'
          << csv.str();
      if (!c.out.empty()) write_file(c.out, csv.str());
    } else if (*verify) {
      const Loaded l = load(c);
      const Instance& inst = *l.inst;
      std::ifstream in(samples_path);
      std::vector<PartialConfig> samples;
      std::string line;
      std::size_t line_no = 0;
      while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::vector<Symbol> vals;
        std::string tok;
        while (ls >> tok) {
          if (tok[0] == '#') break;
          try {
            vals.push_back(std::stoi(tok));
          } catch (const std::exception&) {
            throw InputError(samples_path + ": line " + std::to_string(line_no) + ": bad symbol '" + tok + "'");
          }
        }
        if (vals.empty()) continue;
        if (vals.size() != inst.size()) {
          throw InputError(samples_path + ": line " + std::to_string(line_no) + ": expected " +
                           std::to_string(inst.size()) + " symbols");
        }
        samples.emplace_back(std::move(vals));
      }
      const VerifyReport r = verify_distribution(samples, inst, tol, l.budget);
      rep << format_report(r);
      code = r.pass ? 0 : kFail;
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const InfeasibleError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const BudgetExceeded& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  out << rep.str();
  if (timing) {
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    err << "wall_time_s " << num(secs) << '\n';
  }
  return code;
}

}  // namespace lgs
