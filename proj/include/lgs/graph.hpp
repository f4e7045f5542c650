#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

namespace lgs {

/// External node identifier. Arbitrary, unique, not necessarily contiguous.
using NodeId = std::uint64_t;

/// Dense internal vertex index in [0, n).
using Vertex = std::size_t;

/// Hop distance; infinity is a distinct state, never a large finite number.
class Distance {
 public:
  constexpr explicit Distance(std::size_t hops) : hops_(hops), finite_(true) {}
  static constexpr Distance infinite() { return Distance(); }

  constexpr bool is_finite() const { return finite_; }
  /// Only meaningful when is_finite().
  constexpr std::size_t hops() const { return hops_; }

  constexpr bool operator==(const Distance&) const = default;
  constexpr std::strong_ordering operator<=>(const Distance& o) const {
    if (finite_ != o.finite_) {
      return finite_ ? std::strong_ordering::less : std::strong_ordering::greater;
    }
    if (!finite_) return std::strong_ordering::equal;
    return hops_ <=> o.hops_;
  }
  constexpr bool within(std::size_t r) const { return finite_ && hops_ <= r; }

 private:
  constexpr Distance() : hops_(0), finite_(false) {}
  std::size_t hops_;
  bool finite_;
};

/// Simple undirected graph. Vertices are stored densely; each carries its
/// external NodeId. Adjacency lists are sorted by vertex index.
class Graph {
 public:
  Graph() = default;

  /// Builds a graph over `ids` (vertex i gets ids[i]) with edges given by id.
  /// Throws InputError on duplicate ids, unknown endpoints, self-loops or
  /// parallel edges.
  Graph(std::vector<NodeId> ids, std::span<const std::pair<NodeId, NodeId>> edges);

  /// Graph on vertices 0..n-1 whose ids equal their indices.
  static Graph with_indices(std::size_t n, std::span<const std::pair<Vertex, Vertex>> edges);

  std::size_t size() const { return ids_.size(); }
  std::size_t edge_count() const { return edge_count_; }

  NodeId id(Vertex v) const { return ids_.at(v); }
  std::span<const NodeId> ids() const { return ids_; }
  bool contains(NodeId id) const { return index_.contains(id); }
  /// Vertex carrying `id`; InputError if absent.
  Vertex vertex(NodeId id) const;
  /// InputError unless v < size().
  void check_vertex(Vertex v) const;

  std::span<const Vertex> neighbors(Vertex v) const { return adj_.at(v); }
  std::size_t degree(Vertex v) const { return adj_.at(v).size(); }
  std::size_t max_degree() const;
  bool has_edge(Vertex u, Vertex v) const;
  /// All edges as (u, v) with u < v, sorted.
  std::vector<std::pair<Vertex, Vertex>> edges() const;

  bool operator==(const Graph& o) const { return ids_ == o.ids_ && adj_ == o.adj_; }

 private:
  std::vector<NodeId> ids_;
  std::unordered_map<NodeId, Vertex> index_;
  std::vector<std::vector<Vertex>> adj_;
  std::size_t edge_count_ = 0;
};

/// BFS distances from `source` to every vertex. When `limit` is given,
/// vertices farther than `limit` are reported as infinite.
std::vector<Distance> distances_from(const Graph& g, Vertex source,
                                     std::size_t limit = static_cast<std::size_t>(-1));

Distance dist(const Graph& g, Vertex u, Vertex v);
/// min over s in `targets` of dist(v, s); infinite for an empty set.
Distance dist_to_set(const Graph& g, Vertex v, std::span<const Vertex> targets);

/// {u : dist(u, v) <= r}, sorted by vertex index.
std::vector<Vertex> ball(const Graph& g, Vertex v, std::size_t r);
/// Membership mask of ball(g, v, r).
std::vector<std::uint8_t> ball_mask(const Graph& g, Vertex v, std::size_t r);

Distance eccentricity(const Graph& g, Vertex v);
/// Largest finite distance between two vertices of one component.
std::size_t max_component_diameter(const Graph& g);

/// Edge {u,v} iff 1 <= dist_g(u,v) <= k. Ids are preserved.
Graph power_graph(const Graph& g, std::size_t k);

struct LineGraph {
  Graph graph;
  /// edge_of[i] = endpoints (by vertex index of the original graph) of the
  /// edge represented by line-graph vertex i; ids of line-graph vertices are i.
  std::vector<std::pair<Vertex, Vertex>> edge_of;
};

/// One vertex per edge (in Graph::edges() order); adjacent iff the edges share
/// an endpoint.
LineGraph line_graph(const Graph& g);

struct InducedSubgraph {
  Graph graph;                  // ids preserved
  std::vector<Vertex> to_parent;  // local index -> parent index
  std::vector<std::size_t> to_local;  // parent index -> local index or npos
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

InducedSubgraph induced_subgraph(const Graph& g, std::span<const Vertex> vertices);

/// A permutation of the vertices of a graph.
class Ordering {
 public:
  Ordering() = default;
  /// Throws InputError unless `order` is a permutation of 0..n-1.
  Ordering(std::vector<Vertex> order, std::size_t n);

  /// Increasing NodeId order, the default schedule.
  static Ordering by_id(const Graph& g);

  std::size_t size() const { return order_.size(); }
  Vertex operator[](std::size_t i) const { return order_[i]; }
  std::size_t position(Vertex v) const { return position_.at(v); }
  std::span<const Vertex> order() const { return order_; }

  auto begin() const { return order_.begin(); }
  auto end() const { return order_.end(); }

 private:
  std::vector<Vertex> order_;
  std::vector<std::size_t> position_;
};

/// Sorts vertices by their NodeId.
void sort_by_id(const Graph& g, std::vector<Vertex>& vertices);

// Small graph families used throughout tests, tools and experiments.
Graph path_graph(std::size_t n);
Graph cycle_graph(std::size_t n);
Graph complete_graph(std::size_t n);
Graph star_graph(std::size_t leaves);
/// Tree with a root of degree `degree` and every internal vertex of degree
/// `degree` (degree-1 children), truncated at `depth`. Vertex 0 is the root,
/// vertices are numbered in BFS order.
Graph regular_tree(std::size_t degree, std::size_t depth);
/// Depth of each vertex of regular_tree(degree, depth).
std::vector<std::size_t> regular_tree_levels(std::size_t degree, std::size_t depth);
/// G(n, p) with each edge present independently; deterministic in `seed`.
Graph erdos_renyi(std::size_t n, double p, std::uint64_t seed);

}  // namespace lgs
