#include "lgs/local_runtime.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <exception>
#include <limits>
#include <mutex>
#include <queue>
#include <sstream>
#include <thread>

namespace lgs {

std::size_t SampleOutcome::failure_mass() const {
  return static_cast<std::size_t>(std::count(fail.begin(), fail.end(), std::uint8_t{1}));
}

PartialConfig SampleOutcome::config() const {
  PartialConfig out(y.size());
  for (Vertex v = 0; v < y.size(); ++v) {
    if (!y[v]) throw InputError("node " + std::to_string(v) + " produced no value");
    out.set(v, *y[v]);
  }
  return out;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn, unsigned threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::size_t effective_locality(const std::vector<PassSpec>& passes) {
  std::size_t r = 0;
  for (std::size_t i = 0; i < passes.size(); ++i) {
    const std::size_t ri = passes[i].read_radius + passes[i].write_radius;
    r += (i == 0) ? ri : 2 * ri;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Decomposition

std::size_t Decomposition::failed_count() const {
  return static_cast<std::size_t>(std::count(failed.begin(), failed.end(), std::uint8_t{1}));
}

std::size_t log2_bound(double c, std::size_t n) {
  if (n <= 1) return 1;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(c * std::log2(static_cast<double>(n)))));
}

namespace {

struct Claim {
  double key;  // dist(s, x) - delta_s
  Vertex node;
  Vertex source;
  bool operator>(const Claim& o) const {
    if (key != o.key) return key > o.key;
    return source > o.source;
  }
};

}  // namespace

Decomposition network_decomposition(const Graph& g, std::uint64_t seed, const DecompositionParams& params) {
  const std::size_t n = g.size();
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  Decomposition d;
  d.color_bound = log2_bound(params.c1, n);
  d.radius_cap = log2_bound(params.c2, n);
  d.failure_budget = params.failure_budget > 0 ? params.failure_budget : 1.0 / (static_cast<double>(n) * n);
  if (n == 0) return d;
  // A cluster exceeds radius R only if its center's shift does; P = e^{-beta R}.
  // Union over C phases, n centers and clusters of size <= n gives the budget.
  const double ratio = static_cast<double>(n) * n * static_cast<double>(d.color_bound) / d.failure_budget;
  d.beta = std::log(std::max(ratio, std::exp(1.0))) / static_cast<double>(d.radius_cap);

  d.cluster.assign(n, kNone);
  d.color.assign(n, d.color_bound);
  d.failed.assign(n, 0);
  std::vector<std::uint8_t> remaining(n, 1);
  std::size_t left = n;
  RandomTape tape(derive_seed(seed, 0xdec0));

  std::vector<double> shift(n);
  std::vector<std::vector<std::pair<Vertex, double>>> best(n);
  for (std::size_t phase = 0; phase < d.color_bound && left > 0; ++phase) {
    std::priority_queue<Claim, std::vector<Claim>, std::greater<>> heap;
    for (Vertex x = 0; x < n; ++x) {
      best[x].clear();
      if (!remaining[x]) continue;
      shift[x] = tape.exponential(DrawLabel{g.id(x), streams::kDecomposition, phase}, d.beta);
      heap.push(Claim{-shift[x], x, x});
    }
    // Two nearest distinct sources per node under key dist - delta.
    while (!heap.empty()) {
      const Claim c = heap.top();
      heap.pop();
      auto& b = best[c.node];
      if (b.size() == 2 || (b.size() == 1 && b[0].first == c.source)) continue;
      b.emplace_back(c.source, c.key);
      for (Vertex y : g.neighbors(c.node)) {
        if (remaining[y] && best[y].size() < 2) heap.push(Claim{c.key + 1.0, y, c.source});
      }
    }
    std::vector<Vertex> settled;
    for (Vertex x = 0; x < n; ++x) {
      if (!remaining[x]) continue;
      const auto& b = best[x];
      const double gap = b.size() < 2 ? std::numeric_limits<double>::infinity() : b[1].second - b[0].second;
      if (gap > 1.0) {
        d.cluster[x] = b[0].first;
        d.color[x] = phase;
        settled.push_back(x);
      }
    }
    for (Vertex x : settled) {
      remaining[x] = 0;
      --left;
    }
  }
  for (Vertex x = 0; x < n; ++x) {
    if (remaining[x]) {
      d.cluster[x] = x;
      d.failed[x] = 1;
    }
  }

  // Weak radius per cluster, measured in g from the center.
  std::vector<std::vector<Vertex>> members(n);
  for (Vertex x = 0; x < n; ++x) {
    if (!d.failed[x]) members[d.cluster[x]].push_back(x);
  }
  std::size_t colors = 0;
  for (Vertex s = 0; s < n; ++s) {
    if (members[s].empty()) continue;
    const auto hops = distances_from(g, s);
    std::size_t radius = 0;
    for (Vertex x : members[s]) radius = std::max(radius, hops[x].hops());
    if (radius > d.radius_cap) {
      for (Vertex x : members[s]) d.failed[x] = 1;
      continue;
    }
    d.max_radius = std::max(d.max_radius, radius);
    colors = std::max(colors, d.color[s] + 1);
  }
  d.colors_used = colors;
  return d;
}

std::string check_decomposition(const Graph& g, const Decomposition& d) {
  const std::size_t n = g.size();
  if (d.cluster.size() != n || d.color.size() != n || d.failed.size() != n) return "size mismatch";
  for (const auto& [u, v] : g.edges()) {
    if (d.failed[u] || d.failed[v]) continue;
    if (d.color[u] == d.color[v] && d.cluster[u] != d.cluster[v]) {
      return "adjacent clusters share color " + std::to_string(d.color[u]);
    }
  }
  for (Vertex x = 0; x < n; ++x) {
    if (d.failed[x]) continue;
    if (d.color[x] >= d.color_bound) return "color beyond bound";
    const Vertex s = d.cluster[x];
    if (d.failed[s] || d.cluster[s] != s) return "cluster center not in its cluster";
    const Distance r = dist(g, s, x);
    if (!r.within(d.radius_cap)) return "cluster radius beyond cap at node " + std::to_string(g.id(x));
    if (d.color[s] != d.color[x]) return "cluster with two colors";
  }
  if (d.colors_used > d.color_bound) return "too many colors";
  return {};
}

std::string decomposition_csv(const Graph& g, const Decomposition& d) {
  std::ostringstream out;
  out << "node_id,cluster,color,failed\n";
  for (Vertex x = 0; x < g.size(); ++x) {
    out << g.id(x) << ',' << g.id(d.cluster[x]) << ',' << d.color[x] << ',' << int(d.failed[x]) << '\n';
  }
  return out.str();
}

Ordering chromatic_order(const Graph& g, const Decomposition& d) {
  std::vector<Vertex> order(g.size());
  for (Vertex v = 0; v < g.size(); ++v) order[v] = v;
  std::sort(order.begin(), order.end(), [&](Vertex a, Vertex b) {
    const auto ka = std::make_tuple(d.failed[a], d.failed[a] ? 0 : d.color[a], g.id(a));
    const auto kb = std::make_tuple(d.failed[b], d.failed[b] ? 0 : d.color[b], g.id(b));
    return ka < kb;
  });
  return Ordering(std::move(order), g.size());
}

std::vector<std::uint8_t> decomposition_failures(const Graph& g, const Decomposition& d, std::size_t r) {
  const std::size_t n = g.size();
  std::vector<std::size_t> hops(n, static_cast<std::size_t>(-1));
  std::deque<Vertex> frontier;
  for (Vertex v = 0; v < n; ++v) {
    if (d.failed[v]) {
      hops[v] = 0;
      frontier.push_back(v);
    }
  }
  while (!frontier.empty()) {
    const Vertex u = frontier.front();
    frontier.pop_front();
    if (hops[u] == r) continue;
    for (Vertex w : g.neighbors(u)) {
      if (hops[w] == static_cast<std::size_t>(-1)) {
        hops[w] = hops[u] + 1;
        frontier.push_back(w);
      }
    }
  }
  std::vector<std::uint8_t> out(n);
  for (Vertex v = 0; v < n; ++v) out[v] = hops[v] != static_cast<std::size_t>(-1);
  return out;
}

LocalityReport locality_report(std::size_t r, const Decomposition& d) {
  LocalityReport rep;
  rep.slocal_locality = r;
  rep.colors_used = d.colors_used;
  rep.color_bound = d.color_bound;
  rep.max_cluster_radius = d.max_radius;
  rep.radius_cap = d.radius_cap;
  rep.local_rounds = d.colors_used * (r + 1) * (2 * d.max_radius + 1);
  rep.round_bound = d.color_bound * (r + 1) * (2 * d.radius_cap + 1);
  return rep;
}

}  // namespace lgs
