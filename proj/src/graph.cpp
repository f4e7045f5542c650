#include "lgs/graph.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <random>
#include <string>

#include "lgs/errors.hpp"

namespace lgs {

namespace {

constexpr std::size_t kUnreached = static_cast<std::size_t>(-1);

// Plain BFS returning hop counts, kUnreached for unreachable or beyond limit.
std::vector<std::size_t> bfs_hops(const Graph& g, Vertex source, std::size_t limit) {
  std::vector<std::size_t> hops(g.size(), kUnreached);
  std::deque<Vertex> frontier;
  hops[source] = 0;
  frontier.push_back(source);
  while (!frontier.empty()) {
    const Vertex u = frontier.front();
    frontier.pop_front();
    if (hops[u] == limit) continue;
    for (Vertex w : g.neighbors(u)) {
      if (hops[w] == kUnreached) {
        hops[w] = hops[u] + 1;
        frontier.push_back(w);
      }
    }
  }
  return hops;
}

}  // namespace

Graph::Graph(std::vector<NodeId> ids, std::span<const std::pair<NodeId, NodeId>> edges)
    : ids_(std::move(ids)), adj_(ids_.size()) {
  index_.reserve(ids_.size());
  for (Vertex v = 0; v < ids_.size(); ++v) {
    if (!index_.emplace(ids_[v], v).second) {
      throw InputError("duplicate node id " + std::to_string(ids_[v]));
    }
  }
  for (const auto& [a, b] : edges) {
    const Vertex u = vertex(a);
    const Vertex v = vertex(b);
    if (u == v) throw InputError("self-loop at node " + std::to_string(a));
    adj_[u].push_back(v);
    adj_[v].push_back(u);
  }
  for (auto& list : adj_) {
    std::sort(list.begin(), list.end());
    if (std::adjacent_find(list.begin(), list.end()) != list.end()) {
      throw InputError("parallel edge in graph");
    }
    edge_count_ += list.size();
  }
  edge_count_ /= 2;
}

Graph Graph::with_indices(std::size_t n, std::span<const std::pair<Vertex, Vertex>> edges) {
  std::vector<NodeId> ids(n);
  std::iota(ids.begin(), ids.end(), NodeId{0});
  std::vector<std::pair<NodeId, NodeId>> e(edges.begin(), edges.end());
  return Graph(std::move(ids), e);
}

Vertex Graph::vertex(NodeId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw InputError("unknown node id " + std::to_string(id));
  return it->second;
}

void Graph::check_vertex(Vertex v) const {
  if (v >= size()) throw InputError("vertex index " + std::to_string(v) + " out of range");
}

std::size_t Graph::max_degree() const {
  std::size_t d = 0;
  for (const auto& list : adj_) d = std::max(d, list.size());
  return d;
}

bool Graph::has_edge(Vertex u, Vertex v) const {
  const auto& list = adj_.at(u);
  return std::binary_search(list.begin(), list.end(), v);
}

std::vector<std::pair<Vertex, Vertex>> Graph::edges() const {
  std::vector<std::pair<Vertex, Vertex>> out;
  out.reserve(edge_count_);
  for (Vertex u = 0; u < size(); ++u) {
    for (Vertex v : adj_[u]) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

std::vector<Distance> distances_from(const Graph& g, Vertex source, std::size_t limit) {
  g.check_vertex(source);
  const auto hops = bfs_hops(g, source, limit);
  std::vector<Distance> out;
  out.reserve(hops.size());
  for (std::size_t h : hops) out.push_back(h == kUnreached ? Distance::infinite() : Distance(h));
  return out;
}

Distance dist(const Graph& g, Vertex u, Vertex v) {
  g.check_vertex(v);
  return distances_from(g, u)[v];
}

Distance dist_to_set(const Graph& g, Vertex v, std::span<const Vertex> targets) {
  g.check_vertex(v);
  const auto hops = bfs_hops(g, v, kUnreached);
  Distance best = Distance::infinite();
  for (Vertex s : targets) {
    g.check_vertex(s);
    if (hops[s] != kUnreached) best = std::min(best, Distance(hops[s]));
  }
  return best;
}

std::vector<Vertex> ball(const Graph& g, Vertex v, std::size_t r) {
  g.check_vertex(v);
  const auto hops = bfs_hops(g, v, r);
  std::vector<Vertex> out;
  for (Vertex u = 0; u < g.size(); ++u) {
    if (hops[u] != kUnreached) out.push_back(u);
  }
  return out;
}

std::vector<std::uint8_t> ball_mask(const Graph& g, Vertex v, std::size_t r) {
  g.check_vertex(v);
  const auto hops = bfs_hops(g, v, r);
  std::vector<std::uint8_t> mask(g.size(), 0);
  for (Vertex u = 0; u < g.size(); ++u) mask[u] = hops[u] != kUnreached;
  return mask;
}

Distance eccentricity(const Graph& g, Vertex v) {
  g.check_vertex(v);
  const auto hops = bfs_hops(g, v, kUnreached);
  std::size_t best = 0;
  for (std::size_t h : hops) {
    if (h == kUnreached) return Distance::infinite();
    best = std::max(best, h);
  }
  return Distance(best);
}

std::size_t max_component_diameter(const Graph& g) {
  std::size_t best = 0;
  for (Vertex v = 0; v < g.size(); ++v) {
    for (std::size_t h : bfs_hops(g, v, kUnreached)) {
      if (h != kUnreached) best = std::max(best, h);
    }
  }
  return best;
}

Graph power_graph(const Graph& g, std::size_t k) {
  if (k == 0) throw InputError("power_graph requires k >= 1");
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (Vertex u = 0; u < g.size(); ++u) {
    const auto hops = bfs_hops(g, u, k);
    for (Vertex v = u + 1; v < g.size(); ++v) {
      if (hops[v] != kUnreached) edges.emplace_back(g.id(u), g.id(v));
    }
  }
  return Graph(std::vector<NodeId>(g.ids().begin(), g.ids().end()), edges);
}

LineGraph line_graph(const Graph& g) {
  LineGraph out;
  out.edge_of = g.edges();
  const std::size_t m = out.edge_of.size();
  std::vector<std::vector<std::size_t>> incident(g.size());
  for (std::size_t e = 0; e < m; ++e) {
    incident[out.edge_of[e].first].push_back(e);
    incident[out.edge_of[e].second].push_back(e);
  }
  std::vector<std::pair<Vertex, Vertex>> edges;
  for (const auto& list : incident) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      for (std::size_t j = i + 1; j < list.size(); ++j) {
        edges.emplace_back(std::min(list[i], list[j]), std::max(list[i], list[j]));
      }
    }
  }
  // Two simple-graph edges share at most one endpoint, so no duplicates arise.
  out.graph = Graph::with_indices(m, edges);
  return out;
}

InducedSubgraph induced_subgraph(const Graph& g, std::span<const Vertex> vertices) {
  InducedSubgraph out;
  out.to_local.assign(g.size(), InducedSubgraph::npos);
  std::vector<NodeId> ids;
  for (Vertex v : vertices) {
    g.check_vertex(v);
    if (out.to_local[v] != InducedSubgraph::npos) throw InputError("repeated vertex in subset");
    out.to_local[v] = out.to_parent.size();
    out.to_parent.push_back(v);
    ids.push_back(g.id(v));
  }
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (Vertex v : out.to_parent) {
    for (Vertex w : g.neighbors(v)) {
      if (v < w && out.to_local[w] != InducedSubgraph::npos) edges.emplace_back(g.id(v), g.id(w));
    }
  }
  out.graph = Graph(std::move(ids), edges);
  return out;
}

Ordering::Ordering(std::vector<Vertex> order, std::size_t n)
    : order_(std::move(order)), position_(n, static_cast<std::size_t>(-1)) {
  if (order_.size() != n) throw InputError("ordering length differs from vertex count");
  for (std::size_t i = 0; i < n; ++i) {
    const Vertex v = order_[i];
    if (v >= n || position_[v] != static_cast<std::size_t>(-1)) {
      throw InputError("ordering is not a permutation");
    }
    position_[v] = i;
  }
}

Ordering Ordering::by_id(const Graph& g) {
  std::vector<Vertex> order(g.size());
  std::iota(order.begin(), order.end(), Vertex{0});
  sort_by_id(g, order);
  return Ordering(std::move(order), g.size());
}

void sort_by_id(const Graph& g, std::vector<Vertex>& vertices) {
  std::sort(vertices.begin(), vertices.end(),
            [&](Vertex a, Vertex b) { return g.id(a) < g.id(b); });
}

Graph path_graph(std::size_t n) {
  std::vector<std::pair<Vertex, Vertex>> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return Graph::with_indices(n, edges);
}

Graph cycle_graph(std::size_t n) {
  if (n < 3) throw InputError("cycle needs at least 3 vertices");
  std::vector<std::pair<Vertex, Vertex>> edges;
  for (std::size_t i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  return Graph::with_indices(n, edges);
}

Graph complete_graph(std::size_t n) {
  std::vector<std::pair<Vertex, Vertex>> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  }
  return Graph::with_indices(n, edges);
}

Graph star_graph(std::size_t leaves) {
  std::vector<std::pair<Vertex, Vertex>> edges;
  for (std::size_t i = 1; i <= leaves; ++i) edges.emplace_back(0, i);
  return Graph::with_indices(leaves + 1, edges);
}

std::vector<std::size_t> regular_tree_levels(std::size_t degree, std::size_t depth) {
  if (degree < 2) throw InputError("regular tree needs degree >= 2");
  std::vector<std::size_t> levels{0};
  std::size_t width = 1;
  for (std::size_t d = 1; d <= depth; ++d) {
    width *= (d == 1) ? degree : degree - 1;
    levels.insert(levels.end(), width, d);
  }
  return levels;
}

Graph regular_tree(std::size_t degree, std::size_t depth) {
  const auto levels = regular_tree_levels(degree, depth);
  std::vector<std::pair<Vertex, Vertex>> edges;
  std::size_t next = 1;
  for (Vertex v = 0; v < levels.size() && next < levels.size(); ++v) {
    const std::size_t children = (v == 0) ? degree : degree - 1;
    for (std::size_t c = 0; c < children && next < levels.size(); ++c) edges.emplace_back(v, next++);
  }
  return Graph::with_indices(levels.size(), edges);
}

Graph erdos_renyi(std::size_t n, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(p);
  std::vector<std::pair<Vertex, Vertex>> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (coin(rng)) edges.emplace_back(i, j);
    }
  }
  return Graph::with_indices(n, edges);
}

}  // namespace lgs
