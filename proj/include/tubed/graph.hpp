#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tubed/errors.hpp"
#include "tubed/net.hpp"
#include "tubed/rng.hpp"

namespace tubed {

using Vertex = std::uint32_t;
inline constexpr int kUnreached = -1;

/// Undirected simple graph in compressed adjacency form. Neighbor lists are sorted.
class Graph {
 public:
  Graph() : offsets_{0} {}

  static Graph from_edges(std::size_t n, std::vector<std::pair<Vertex, Vertex>> edges) {
    for (auto& [a, b] : edges) {
      if (a >= n || b >= n) throw DomainError("net-graph", "edge endpoint out of range");
      if (a > b) std::swap(a, b);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    Graph g;
    g.offsets_.assign(n + 1, 0);
    for (const auto& [a, b] : edges) {
      if (a == b) continue;
      ++g.offsets_[a + 1];
      ++g.offsets_[b + 1];
    }
    for (std::size_t i = 0; i < n; ++i) g.offsets_[i + 1] += g.offsets_[i];
    g.targets_.resize(g.offsets_[n]);
    std::vector<std::size_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
    for (const auto& [a, b] : edges) {
      if (a == b) continue;
      g.targets_[fill[a]++] = b;
      g.targets_[fill[b]++] = a;
    }
    for (std::size_t v = 0; v < n; ++v)
      std::sort(g.targets_.begin() + g.offsets_[v], g.targets_.begin() + g.offsets_[v + 1]);
    return g;
  }

  static Graph path(std::size_t n) {
    std::vector<std::pair<Vertex, Vertex>> edges;
    for (Vertex i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
    return from_edges(n, std::move(edges));
  }

  static Graph complete(std::size_t n) {
    std::vector<std::pair<Vertex, Vertex>> edges;
    for (Vertex i = 0; i < n; ++i)
      for (Vertex j = i + 1; j < n; ++j) edges.emplace_back(i, j);
    return from_edges(n, std::move(edges));
  }

  std::size_t size() const { return offsets_.size() - 1; }
  std::size_t edge_count() const { return targets_.size() / 2; }
  std::size_t degree(Vertex v) const { return offsets_[v + 1] - offsets_[v]; }

  std::size_t max_degree() const {
    std::size_t best = 0;
    for (Vertex v = 0; v < size(); ++v) best = std::max(best, degree(v));
    return best;
  }

  struct Range {
    const Vertex* first;
    const Vertex* last;
    const Vertex* begin() const { return first; }
    const Vertex* end() const { return last; }
    std::size_t size() const { return static_cast<std::size_t>(last - first); }
  };

  Range neighbors(Vertex v) const { return {targets_.data() + offsets_[v], targets_.data() + offsets_[v + 1]}; }

  bool adjacent(Vertex a, Vertex b) const {
    const Range r = neighbors(a);
    return std::binary_search(r.begin(), r.end(), b);
  }

  /// Edges (a, b) with a < b in lexicographic order.
  std::vector<std::pair<Vertex, Vertex>> edges() const {
    std::vector<std::pair<Vertex, Vertex>> out;
    out.reserve(edge_count());
    for (Vertex a = 0; a < size(); ++a)
      for (Vertex b : neighbors(a))
        if (a < b) out.emplace_back(a, b);
    return out;
  }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<Vertex> targets_;
};

/// Hop distances from `source`, kUnreached beyond `max_depth` or outside the component.
inline std::vector<int> bfs_distances(const Graph& g, Vertex source, int max_depth = std::numeric_limits<int>::max()) {
  std::vector<int> dist(g.size(), kUnreached);
  std::vector<Vertex> frontier{source}, next;
  dist[source] = 0;
  for (int depth = 0; !frontier.empty() && depth < max_depth; ++depth) {
    next.clear();
    for (Vertex u : frontier)
      for (Vertex w : g.neighbors(u))
        if (dist[w] == kUnreached) {
          dist[w] = depth + 1;
          next.push_back(w);
        }
    frontier.swap(next);
  }
  return dist;
}

/// Closed-ball sizes |B(source, R)| for R = 0..max_depth. `exhausted_at` is the
/// first radius at which the component was already fully reached (or -1).
struct BallCounts {
  std::vector<std::size_t> counts;
  int exhausted_at = -1;
};

inline BallCounts bfs_ball_counts(const Graph& g, Vertex source, int max_depth, std::vector<int>& scratch) {
  scratch.assign(g.size(), kUnreached);
  BallCounts out;
  out.counts.assign(static_cast<std::size_t>(max_depth) + 1, 0);
  std::vector<Vertex> frontier{source}, next;
  scratch[source] = 0;
  std::size_t total = 1;
  out.counts[0] = 1;
  for (int depth = 0; depth < max_depth; ++depth) {
    next.clear();
    for (Vertex u : frontier)
      for (Vertex w : g.neighbors(u))
        if (scratch[w] == kUnreached) {
          scratch[w] = depth + 1;
          next.push_back(w);
        }
    total += next.size();
    out.counts[depth + 1] = total;
    if (next.empty() && out.exhausted_at < 0) out.exhausted_at = depth + 1;
    frontier.swap(next);
  }
  return out;
}

/// Γ_λ over a net: v ~ w iff d(v, w) < 2 λ r.
struct IntersectionGraph {
  std::shared_ptr<const Net> net;
  double lambda = 1.0;
  Graph graph;

  double edge_length() const { return 2.0 * lambda * net->r; }

  /// BFS distances from `source`, memoized for the most recent sources.
  const std::vector<int>& distances_from(Vertex source) const {
    auto it = cache_.find(source);
    if (it != cache_.end()) return it->second;
    if (cache_.size() >= kCacheLimit) cache_.clear();
    return cache_.emplace(source, bfs_distances(graph, source)).first->second;
  }

 private:
  static constexpr std::size_t kCacheLimit = 64;
  mutable std::unordered_map<Vertex, std::vector<int>> cache_;
};

inline IntersectionGraph intersection_graph(std::shared_ptr<const Net> net, double lambda) {
  if (!(lambda >= 1.0)) throw DomainError("net-graph", "intersection_graph: lambda must be >= 1");
  const double reach = 2.0 * lambda * net->r;
  const NeighborIndex index = net->make_index(reach);
  const ManifoldModel& model = net->model();
  std::vector<std::pair<Vertex, Vertex>> edges;
  for (Vertex v = 0; v < net->size(); ++v) {
    const Point p = net->vertices[v];
    index.for_each_candidate(p, reach, [&](Vertex w) {
      if (w > v && model.distance_unchecked(p, net->vertices[w]) < reach) edges.emplace_back(v, w);
    });
  }
  IntersectionGraph out;
  out.graph = Graph::from_edges(net->size(), std::move(edges));
  out.net = std::move(net);
  out.lambda = lambda;
  return out;
}

inline IntersectionGraph intersection_graph(const Net& net, double lambda) {
  return intersection_graph(std::make_shared<const Net>(net), lambda);
}

struct DistanceComparison {
  /// max over checked pairs of |v-w|_M - 2 λ r |v-w|_Γ; must be <= 0.
  double max_violation = -std::numeric_limits<double>::infinity();
  std::size_t pairs_checked = 0;
  std::size_t disconnected_skipped = 0;
};

/// Checks |v-w|_M <= 2 λ r |v-w|_Γ on `pairs` random pairs. Pairs are drawn as
/// ~sqrt(pairs) random sources with random targets each, so one BFS serves many pairs.
inline DistanceComparison check_distance_comparison(const IntersectionGraph& g, std::size_t pairs = 10'000,
                                                    std::uint64_t seed = 1) {
  DistanceComparison out;
  const std::size_t n = g.graph.size();
  if (n == 0 || pairs == 0) return out;
  Rng rng(seed);
  const auto sources = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(pairs))));
  const std::size_t per_source = (pairs + sources - 1) / sources;
  const ManifoldModel& model = g.net->model();
  const double edge = g.edge_length();
  std::size_t done = 0;
  for (std::size_t s = 0; s < sources && done < pairs; ++s) {
    const auto v = static_cast<Vertex>(rng.below(n));
    const std::vector<int> dist = bfs_distances(g.graph, v);
    const Point pv = g.net->vertices[v];
    for (std::size_t k = 0; k < per_source && done < pairs; ++k, ++done) {
      const auto w = static_cast<Vertex>(rng.below(n));
      if (dist[w] == kUnreached) {
        ++out.disconnected_skipped;
        continue;
      }
      const double violation = model.distance_unchecked(pv, g.net->vertices[w]) - edge * dist[w];
      out.max_violation = std::max(out.max_violation, violation);
      ++out.pairs_checked;
    }
  }
  return out;
}

}  // namespace tubed
