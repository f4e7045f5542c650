#include "lgs/instance_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "lgs/errors.hpp"

namespace lgs {

namespace {

constexpr std::string_view kHeader = "lgs-instance";

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
  if (line == 0) throw InputError(msg);
  throw InputError("line " + std::to_string(line) + ": " + msg);
}

std::vector<std::string_view> tokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

template <class T>
T number(std::string_view tok, std::size_t line, const std::string& what) {
  T value{};
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    fail(line, what + ": '" + std::string(tok) + "' is not a valid number");
  }
  return value;
}

std::string fmt(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

const std::map<std::string, std::set<std::string>>& model_params() {
  static const std::map<std::string, std::set<std::string>> m = {
      {"hardcore", {"lambda"}},
      {"two-spin", {"beta", "gamma", "lambda"}},
      {"coloring", {"q"}},
      {"matching", {"lambda"}},
      {"factors", {"q", "admissible"}},
  };
  return m;
}

double require(const InstanceFile& f, const std::string& key) {
  const auto it = f.params.find(key);
  if (it == f.params.end()) fail(f.lines.model, "model: " + f.model + " needs " + key + "=");
  return it->second;
}

std::size_t alphabet(const InstanceFile& f) {
  const double q = require(f, "q");
  if (!(q >= 1) || q != static_cast<double>(static_cast<std::size_t>(q))) {
    fail(f.lines.model, "model: q must be a positive integer");
  }
  return static_cast<std::size_t>(q);
}

std::size_t line_at(const std::vector<std::size_t>& lines, std::size_t i) { return i < lines.size() ? lines[i] : 0; }

}  // namespace

InstanceFile parse_instance_text(std::string_view text) {
  InstanceFile f;
  bool header = false;
  bool have_seed = false;
  bool have_budget = false;
  std::set<NodeId> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    const auto tok = tokens(line);
    if (tok.empty() || tok[0].front() == '#') continue;
    const std::string kw(tok[0]);
    if (!header) {
      if (kw != kHeader) fail(line_no, "expected '" + std::string(kHeader) + " 1' header");
      if (tok.size() != 2 || tok[1] != "1") fail(line_no, "unsupported format version");
      header = true;
      continue;
    }
    if (kw == "nodes") {
      for (std::size_t i = 1; i < tok.size(); ++i) {
        const auto id = number<NodeId>(tok[i], line_no, "nodes");
        if (!seen.insert(id).second) fail(line_no, "nodes: duplicate node " + std::to_string(id));
        f.nodes.push_back(id);
      }
    } else if (kw == "edge") {
      if (tok.size() != 3) fail(line_no, "edge: expected two node ids");
      f.edges.emplace_back(number<NodeId>(tok[1], line_no, "edge"), number<NodeId>(tok[2], line_no, "edge"));
      f.lines.edges.push_back(line_no);
    } else if (kw == "model") {
      if (!f.model.empty()) fail(line_no, "model: given twice");
      if (tok.size() < 2) fail(line_no, "model: missing model name");
      f.model = std::string(tok[1]);
      f.lines.model = line_no;
      const auto known = model_params().find(f.model);
      if (known == model_params().end()) fail(line_no, "model: unknown model '" + f.model + "'");
      for (std::size_t i = 2; i < tok.size(); ++i) {
        const auto eq = tok[i].find('=');
        if (eq == std::string_view::npos) fail(line_no, "model: expected key=value, got '" + std::string(tok[i]) + "'");
        const std::string key(tok[i].substr(0, eq));
        if (!known->second.contains(key)) fail(line_no, "model: unknown parameter '" + key + "' for " + f.model);
        if (f.params.contains(key)) fail(line_no, "model: parameter '" + key + "' given twice");
        f.params[key] = number<double>(tok[i].substr(eq + 1), line_no, "model " + key);
      }
    } else if (kw == "list") {
      if (tok.size() < 2) fail(line_no, "list: missing node id");
      const auto id = number<NodeId>(tok[1], line_no, "list");
      if (f.lists.contains(id)) fail(line_no, "list: node " + std::to_string(id) + " listed twice");
      auto& l = f.lists[id];
      for (std::size_t i = 2; i < tok.size(); ++i) l.push_back(number<Symbol>(tok[i], line_no, "list"));
      f.lines.lists[id] = line_no;
    } else if (kw == "factor") {
      const auto colon = std::find(tok.begin(), tok.end(), std::string_view(":"));
      if (colon == tok.end()) fail(line_no, "factor: expected 'factor <nodes> : <values>'");
      InstanceFile::FactorLine fl;
      for (auto it = tok.begin() + 1; it != colon; ++it) fl.scope.push_back(number<NodeId>(*it, line_no, "factor"));
      for (auto it = colon + 1; it != tok.end(); ++it) fl.table.push_back(number<double>(*it, line_no, "factor"));
      if (fl.scope.empty()) fail(line_no, "factor: empty scope");
      f.factors.push_back(std::move(fl));
      f.lines.factors.push_back(line_no);
    } else if (kw == "pin") {
      if (tok.size() != 3 && tok.size() != 4) fail(line_no, "pin: expected 'pin <node> <symbol>'");
      InstanceFile::Pin p;
      for (std::size_t i = 1; i + 1 < tok.size(); ++i) p.at.push_back(number<NodeId>(tok[i], line_no, "pin"));
      p.symbol = number<Symbol>(tok.back(), line_no, "pin");
      f.pins.push_back(std::move(p));
      f.lines.pins.push_back(line_no);
    } else if (kw == "seed") {
      if (have_seed || tok.size() != 2) fail(line_no, "seed: expected exactly one 'seed <n>' line");
      f.seed = number<std::uint64_t>(tok[1], line_no, "seed");
      have_seed = true;
    } else if (kw == "budget") {
      if (have_budget || tok.size() != 2) fail(line_no, "budget: expected exactly one 'budget <n>' line");
      f.budget = number<std::uint64_t>(tok[1], line_no, "budget");
      have_budget = true;
    } else {
      fail(line_no, "unknown directive '" + kw + "'");
    }
  }
  if (!header) fail(line_no, "empty document");
  if (f.model.empty()) fail(line_no, "model: missing 'model' line");
  if (f.model != "coloring" && !f.lists.empty()) fail(f.lines.lists.begin()->second, "list: only valid for coloring");
  if (f.model != "factors" && !f.factors.empty()) fail(f.lines.factors.front(), "factor: only valid for model factors");
  return f;
}

InstanceFile read_instance_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open instance file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_instance_text(buf.str());
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

std::string emit_instance(const InstanceFile& f) {
  std::ostringstream out;
  out << kHeader << " 1\n";
  out << "nodes";
  for (NodeId id : f.nodes) out << ' ' << id;
  out << '\n';
  for (const auto& [u, v] : f.edges) out << "edge " << u << ' ' << v << '\n';
  out << "model " << f.model;
  for (const auto& [k, v] : f.params) out << ' ' << k << '=' << fmt(v);
  out << '\n';
  for (const auto& [id, l] : f.lists) {
    out << "list " << id;
    for (Symbol s : l) out << ' ' << s;
    out << '\n';
  }
  for (const auto& fl : f.factors) {
    out << "factor";
    for (NodeId id : fl.scope) out << ' ' << id;
    out << " :";
    for (double x : fl.table) out << ' ' << fmt(x);
    out << '\n';
  }
  for (const auto& p : f.pins) {
    out << "pin";
    for (NodeId id : p.at) out << ' ' << id;
    out << ' ' << p.symbol << '\n';
  }
  out << "seed " << f.seed << '\n';
  out << "budget " << f.budget << '\n';
  return out.str();
}

Instance build_instance(const InstanceFile& f) {
  std::optional<MatchingModel> unused;
  return build_instance(f, unused);
}

Instance build_instance(const InstanceFile& f, std::optional<MatchingModel>& matching_out) {
  const std::set<NodeId> ids(f.nodes.begin(), f.nodes.end());
  for (std::size_t i = 0; i < f.edges.size(); ++i) {
    const auto [u, v] = f.edges[i];
    if (!ids.contains(u) || !ids.contains(v)) fail(line_at(f.lines.edges, i), "edge: unknown node");
  }
  Graph g;
  try {
    g = Graph(f.nodes, f.edges);
  } catch (const InputError& e) {
    fail(f.lines.edges.empty() ? 0 : f.lines.edges.front(), std::string("graph: ") + e.what());
  }

  SpecPtr spec;
  try {
    if (f.model == "hardcore") {
      spec = hardcore(g, require(f, "lambda"));
    } else if (f.model == "two-spin") {
      spec = two_spin(g, require(f, "beta"), require(f, "gamma"), require(f, "lambda"));
    } else if (f.model == "coloring") {
      const std::size_t q = alphabet(f);
      std::vector<std::vector<Symbol>> lists(g.size());
      for (Vertex v = 0; v < g.size(); ++v) {
        const auto it = f.lists.find(g.id(v));
        if (it != f.lists.end()) {
          lists[v] = it->second;
        } else {
          for (std::size_t c = 0; c < q; ++c) lists[v].push_back(static_cast<Symbol>(c));
        }
      }
      for (const auto& [id, l] : f.lists) {
        if (!g.contains(id)) fail(f.lines.lists.at(id), "list: unknown node " + std::to_string(id));
        for (Symbol s : l) {
          if (s < 0 || static_cast<std::size_t>(s) >= q) fail(f.lines.lists.at(id), "list: color outside 0..q-1");
        }
      }
      spec = coloring(g, q, lists);
    } else if (f.model == "matching") {
      matching_out = matching(g, require(f, "lambda"));
      spec = matching_out->spec;
    } else if (f.model == "factors") {
      const std::size_t q = alphabet(f);
      std::vector<Factor> factors;
      for (std::size_t i = 0; i < f.factors.size(); ++i) {
        std::vector<Vertex> scope;
        for (NodeId id : f.factors[i].scope) {
          if (!g.contains(id)) fail(line_at(f.lines.factors, i), "factor: unknown node " + std::to_string(id));
          scope.push_back(g.vertex(id));
        }
        try {
          factors.emplace_back(scope, q, f.factors[i].table);
        } catch (const InputError& e) {
          fail(line_at(f.lines.factors, i), std::string("factor: ") + e.what());
        }
      }
      SpecOptions opt;
      opt.model = "factors";
      opt.locally_admissible = f.params.contains("admissible") && f.params.at("admissible") != 0;
      spec = std::make_shared<const GibbsSpec>(g, q, std::move(factors), opt);
    } else {
      fail(f.lines.model, "model: unknown model '" + f.model + "'");
    }
  } catch (const InputError& e) {
    const std::string msg = e.what();
    if (msg.rfind("line ", 0) == 0 || f.lines.model == 0) throw;
    fail(f.lines.model, "model: " + msg);
  }

  PartialConfig tau(spec->size());
  for (std::size_t i = 0; i < f.pins.size(); ++i) {
    const auto& p = f.pins[i];
    const std::size_t line = line_at(f.lines.pins, i);
    Vertex v = 0;
    if (matching_out) {
      if (p.at.size() != 2) fail(line, "pin: matching pins name an edge 'pin <u> <v> <symbol>'");
      if (!g.contains(p.at[0]) || !g.contains(p.at[1])) fail(line, "pin: unknown node");
      const Vertex a = g.vertex(p.at[0]);
      const Vertex b = g.vertex(p.at[1]);
      const auto& edges = matching_out->line.edge_of;
      const auto it = std::find(edges.begin(), edges.end(), std::pair{std::min(a, b), std::max(a, b)});
      if (it == edges.end()) fail(line, "pin: no such edge");
      v = static_cast<Vertex>(it - edges.begin());
    } else {
      if (p.at.size() != 1) fail(line, "pin: expected 'pin <node> <symbol>'");
      if (!g.contains(p.at[0])) fail(line, "pin: unknown node " + std::to_string(p.at[0]));
      v = g.vertex(p.at[0]);
    }
    if (p.symbol < 0 || static_cast<std::size_t>(p.symbol) >= spec->q()) fail(line, "pin: symbol outside the alphabet");
    if (tau.assigned(v)) fail(line, "pin: node pinned twice");
    tau.set(v, p.symbol);
    if (!is_locally_feasible(*spec, tau)) {
      const std::string where = line ? "line " + std::to_string(line) + ": " : "";
      throw InfeasibleError(where + "pin: pinning violates a factor");
    }
  }
  try {
    return Instance(spec, tau);
  } catch (const InfeasibleError& e) {
    throw InfeasibleError(std::string("pin: ") + e.what());
  }
}

}  // namespace lgs
