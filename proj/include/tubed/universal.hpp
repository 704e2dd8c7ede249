#pragma once

// Regular maps between graphs (fibers of size <= K, adjacent vertices land
// within distance K) and the recursive obstruction graphs Delta_k: a path
// 1 ~ 2 ~ ... ~ S_k with one perfect matching of diagonals per level, built
// so that no regular map with K = k and f(1) = n_k exists.
//
// Vertex labels in this header are 0-based: the 1-based vertex i is vertex i - 1.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <queue>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "tubed/errors.hpp"
#include "tubed/graph.hpp"
#include "tubed/rng.hpp"

namespace tubed {

using BigInt = boost::multiprecision::cpp_int;

/// 1, 2, 1, 3, 1, 2, 1, 4, ...: the 2-adic valuation of k plus one.
inline int ruler_sequence(std::uint64_t k) {
  if (k == 0) throw DomainError("universal-obstruction", "ruler_sequence is indexed from 1");
  return std::countr_zero(k) + 1;
}

/// Radius-K balls of a target graph, computed on demand and kept sorted.
class TargetBalls {
 public:
  TargetBalls(const Graph& gamma, int K) : gamma_(gamma), K_(K), stamp_(gamma.size(), 0) {
    if (K < 1) throw DomainError("universal-obstruction", "K must be a positive integer");
  }

  const std::vector<Vertex>& ball(Vertex h) {
    auto it = cache_.find(h);
    if (it != cache_.end()) return it->second;
    // Stamped BFS touches only the ball itself.
    ++epoch_;
    std::vector<Vertex> out{h}, frontier{h}, next;
    stamp_[h] = epoch_;
    for (int depth = 0; depth < K_ && !frontier.empty(); ++depth) {
      next.clear();
      for (Vertex u : frontier)
        for (Vertex w : gamma_.neighbors(u))
          if (stamp_[w] != epoch_) {
            stamp_[w] = epoch_;
            next.push_back(w);
            out.push_back(w);
          }
      frontier.swap(next);
    }
    std::sort(out.begin(), out.end());
    return cache_.emplace(h, std::move(out)).first->second;
  }

  bool within(Vertex a, Vertex b) {
    const auto& B = ball(a);
    return std::binary_search(B.begin(), B.end(), b);
  }

  int K() const { return K_; }

 private:
  const Graph& gamma_;
  int K_;
  std::vector<std::uint32_t> stamp_;
  std::uint32_t epoch_ = 0;
  std::unordered_map<Vertex, std::vector<Vertex>> cache_;
};

struct RegularMapCheck {
  bool ok = true;
  /// Target vertices with more than K preimages.
  std::vector<Vertex> multiplicity;
  /// Source edges whose endpoints land more than K apart.
  std::vector<std::pair<Vertex, Vertex>> displacement;
};

inline RegularMapCheck regular_map_check(const Graph& delta, const Graph& gamma, int K, const std::vector<Vertex>& f) {
  if (f.size() != delta.size())
    throw InputError("universal-obstruction", "assignment has " + std::to_string(f.size()) + " entries for " +
                                                  std::to_string(delta.size()) + " source vertices");
  for (std::size_t v = 0; v < f.size(); ++v)
    if (f[v] >= gamma.size())
      throw InputError("universal-obstruction", "vertex " + std::to_string(v) + " maps to " + std::to_string(f[v]) +
                                                    ", outside the target's " + std::to_string(gamma.size()) +
                                                    " vertices");
  TargetBalls balls(gamma, K);
  RegularMapCheck out;
  std::vector<std::size_t> count(gamma.size(), 0);
  for (Vertex h : f) ++count[h];
  for (Vertex h = 0; h < gamma.size(); ++h)
    if (count[h] > static_cast<std::size_t>(K)) out.multiplicity.push_back(h);
  for (const auto& [a, b] : delta.edges())
    if (!balls.within(f[a], f[b])) out.displacement.emplace_back(a, b);
  out.ok = out.multiplicity.empty() && out.displacement.empty();
  return out;
}

struct SearchOptions {
  Vertex root = 0;
  /// Pinned image of the root; every target vertex is tried when unset.
  std::optional<Vertex> root_image;
  /// Assignments explored before giving up with a ResourceError.
  std::uint64_t node_budget = 50'000'000;
};

struct SearchResult {
  bool found = false;
  /// Witness indexed by source vertex (empty when none).
  std::vector<Vertex> assignment;
  /// Partial assignments made, root included.
  std::uint64_t nodes = 0;
  /// True when the whole tree was searched without a witness.
  bool exhausted = false;
};

/// log10 of d^(K S), d = max degree of the target + 1: the size estimate of
/// the path-map search space quoted when a budget runs out.
inline double search_space_log10(const Graph& gamma, int K, std::size_t S) {
  const double d = static_cast<double>(gamma.max_degree() + 1);
  return static_cast<double>(K) * static_cast<double>(S) * std::log10(std::max(d, 2.0));
}

/// Depth-first backtracking over the source in BFS order from the root.
/// Candidates for a vertex are the radius-K ball around its BFS parent's
/// image, in increasing order, pruned by fiber counters and by distance to
/// every earlier neighbor. Images therefore stay within K |Delta| of the root
/// image, so infinite targets may be truncated to that ball losslessly.
inline SearchResult exists_regular_map(const Graph& delta, const Graph& gamma, int K, const SearchOptions& opts = {}) {
  const std::size_t n = delta.size();
  if (n == 0) throw PreconditionError("universal-obstruction", "source graph is empty");
  if (gamma.size() == 0) throw PreconditionError("universal-obstruction", "target graph is empty");
  if (opts.root >= n) throw PreconditionError("universal-obstruction", "root outside the source graph");
  if (opts.root_image && *opts.root_image >= gamma.size())
    throw InputError("universal-obstruction", "pinned root image outside the target graph");
  TargetBalls balls(gamma, K);

  std::vector<Vertex> order{opts.root}, parent(n, 0);
  std::vector<std::size_t> pos(n, n);
  pos[opts.root] = 0;
  for (std::size_t i = 0; i < order.size(); ++i)
    for (Vertex w : delta.neighbors(order[i]))
      if (pos[w] == n) {
        pos[w] = order.size();
        parent[w] = order[i];
        order.push_back(w);
      }
  if (order.size() != n) throw PreconditionError("universal-obstruction", "source graph is not connected");

  SearchResult res;
  // Pigeonhole: fibers of size <= K cannot absorb more than K |Gamma| vertices.
  if (n > static_cast<std::size_t>(K) * gamma.size()) {
    res.exhausted = true;
    return res;
  }

  // Earlier neighbors of each vertex in search order.
  std::vector<std::vector<Vertex>> back(n);
  for (std::size_t i = 0; i < n; ++i)
    for (Vertex w : delta.neighbors(order[i]))
      if (pos[w] < i) back[i].push_back(w);

  std::vector<Vertex> root_candidates;
  if (opts.root_image) {
    root_candidates.push_back(*opts.root_image);
  } else {
    root_candidates.resize(gamma.size());
    for (Vertex h = 0; h < gamma.size(); ++h) root_candidates[h] = h;
  }

  std::vector<Vertex> f(n, 0);
  std::vector<std::uint32_t> fiber(gamma.size(), 0);
  std::vector<std::size_t> cursor(n, 0);
  const auto candidates = [&](std::size_t i) -> const std::vector<Vertex>& {
    return i == 0 ? root_candidates : balls.ball(f[parent[order[i]]]);
  };

  std::size_t depth = 0;
  cursor[0] = 0;
  while (true) {
    const std::vector<Vertex>& cand = candidates(depth);
    const Vertex v = order[depth];
    bool placed = false;
    while (cursor[depth] < cand.size()) {
      const Vertex h = cand[cursor[depth]++];
      if (fiber[h] >= static_cast<std::uint32_t>(K)) continue;
      bool fits = true;
      for (Vertex w : back[depth])
        if (!balls.within(f[w], h)) {
          fits = false;
          break;
        }
      if (!fits) continue;
      if (++res.nodes > opts.node_budget) {
        throw ResourceError("universal-obstruction",
                            "regular-map search exceeded node budget " + std::to_string(opts.node_budget) +
                                "; count_bound-style estimate d^(K S) = 1e" +
                                std::to_string(search_space_log10(gamma, K, n)),
                            search_space_log10(gamma, K, n));
      }
      f[v] = h;
      ++fiber[h];
      placed = true;
      break;
    }
    if (placed) {
      if (depth + 1 == n) {
        res.found = true;
        res.assignment = f;
        return res;
      }
      cursor[++depth] = 0;
      continue;
    }
    if (depth == 0) break;
    --depth;
    --fiber[f[order[depth]]];
  }
  res.exhausted = true;
  return res;
}

struct CountBound {
  /// d^(k S) (k d^k)^S: path maps times diagonal choices.
  BigInt maps_upper;
  /// L!: labeled graphs from one level's matchings.
  BigInt graphs_count;
};

inline BigInt factorial(std::uint64_t L) {
  BigInt out = 1;
  for (std::uint64_t i = 2; i <= L; ++i) out *= i;
  return out;
}

inline BigInt maps_upper_bound(std::uint64_t d, std::uint64_t k, std::uint64_t S) {
  if (d < 2 || k < 1 || S < 1) throw PreconditionError("universal-obstruction", "count_bound needs d >= 2, k >= 1, S >= 1");
  const BigInt dk = boost::multiprecision::pow(BigInt(d), static_cast<unsigned>(k));
  return boost::multiprecision::pow(dk, static_cast<unsigned>(S)) *
         boost::multiprecision::pow(BigInt(k) * dk, static_cast<unsigned>(S));
}

inline CountBound count_bound(std::uint64_t d, std::uint64_t k, std::uint64_t S, std::uint64_t L) {
  if (L < 1) throw PreconditionError("universal-obstruction", "count_bound needs L >= 1");
  return {maps_upper_bound(d, k, S), factorial(L)};
}

/// Smallest L with L! > bound.
inline std::uint64_t factorial_crossover(const BigInt& bound) {
  BigInt f = 1;
  std::uint64_t L = 1;
  while (f <= bound) f *= ++L;
  return L;
}

/// Smallest S <= S_max with floor(S/4)! > d^(kS) (k d^k)^S, by exact
/// incremental products.
inline std::optional<std::uint64_t> quarter_crossover(std::uint64_t d, std::uint64_t k, std::uint64_t S_max) {
  const BigInt step = maps_upper_bound(d, k, 1);
  BigInt maps = 1, fact = 1;
  for (std::uint64_t S = 1; S <= S_max; ++S) {
    maps *= step;
    if (S % 4 == 0) fact *= S / 4;
    if (fact > maps) return S;
  }
  return std::nullopt;
}

/// One level of Delta: vertices [S_prev, S) of the path, diagonals
/// {S_prev + a, S - L + matching[a]} for a < L.
struct DeltaLevel {
  std::uint64_t S_prev = 0;
  std::uint64_t S = 0;
  std::uint64_t L = 0;
  std::vector<std::uint64_t> matching;

  // Certificate.
  int K = 0;
  /// Pinned root image, or unset when every root image was excluded.
  std::optional<Vertex> root_image;
  /// Index of the target (interleaved construction) the level was certified against.
  std::size_t target = 0;
  std::uint64_t search_nodes = 0;
  bool exhausted = false;
  std::uint64_t candidates_tried = 0;
  std::uint64_t spans_tried = 0;
  std::uint64_t seed = 0;
  std::uint64_t node_budget = 0;
};

struct DeltaGraph {
  /// Levels in order; Delta_0 has none and S_0 = 0.
  std::vector<DeltaLevel> levels;

  std::uint64_t size() const { return levels.empty() ? 0 : levels.back().S; }

  /// {S_0 = 0, S_1, ..., S_k}.
  std::vector<std::uint64_t> boundaries() const {
    std::vector<std::uint64_t> out{0};
    for (const auto& l : levels) out.push_back(l.S);
    return out;
  }

  std::vector<std::pair<Vertex, Vertex>> diagonals() const {
    std::vector<std::pair<Vertex, Vertex>> out;
    for (const auto& l : levels)
      for (std::uint64_t a = 0; a < l.L; ++a)
        out.emplace_back(static_cast<Vertex>(l.S_prev + a), static_cast<Vertex>(l.S - l.L + l.matching[a]));
    return out;
  }

  Graph graph() const { return with_level_graph(std::nullopt); }

  /// Graph with an extra tentative level appended.
  Graph with_level_graph(const std::optional<DeltaLevel>& extra) const {
    const std::uint64_t S = extra ? extra->S : size();
    std::vector<std::pair<Vertex, Vertex>> edges;
    for (std::uint64_t i = 0; i + 1 < S; ++i) edges.emplace_back(static_cast<Vertex>(i), static_cast<Vertex>(i + 1));
    for (const auto& e : diagonals()) edges.push_back(e);
    if (extra)
      for (std::uint64_t a = 0; a < extra->L; ++a)
        edges.emplace_back(static_cast<Vertex>(extra->S_prev + a),
                           static_cast<Vertex>(extra->S - extra->L + extra->matching[a]));
    return Graph::from_edges(S, std::move(edges));
  }
};

/// Structural invariants: degree <= 3, every non-path edge inside one level
/// interval, and each level's diagonals a bijection between its first L and
/// last L vertices with 4 L <= S - S_prev. Returns the violations found.
inline std::vector<std::string> delta_invariant_violations(const DeltaGraph& delta) {
  std::vector<std::string> bad;
  std::uint64_t prev = 0;
  for (std::size_t m = 0; m < delta.levels.size(); ++m) {
    const DeltaLevel& l = delta.levels[m];
    const std::string tag = "level " + std::to_string(m + 1) + ": ";
    if (l.S_prev != prev || l.S <= l.S_prev) bad.push_back(tag + "boundaries not increasing");
    if (l.L < 1 || 4 * l.L > l.S - l.S_prev) bad.push_back(tag + "L outside 1..(S_k - S_{k-1})/4");
    std::vector<std::uint64_t> sorted = l.matching;
    std::sort(sorted.begin(), sorted.end());
    bool perm = sorted.size() == l.L;
    for (std::uint64_t i = 0; perm && i < l.L; ++i) perm = sorted[i] == i;
    if (!perm) bad.push_back(tag + "matching is not a bijection A <-> B");
    prev = l.S;
  }
  if (!bad.empty()) return bad;
  const Graph g = delta.graph();
  if (g.max_degree() > 3) bad.push_back("max degree " + std::to_string(g.max_degree()) + " exceeds 3");
  const auto bounds = delta.boundaries();
  for (const auto& [i, j] : g.edges()) {
    if (j - i == 1) continue;
    // Level m holds labels S_m < label <= S_{m+1}, i.e. indices [S_m, S_{m+1}).
    const auto m = static_cast<std::size_t>(std::upper_bound(bounds.begin(), bounds.end(), i) - bounds.begin()) - 1;
    if (m + 1 >= bounds.size() || j >= bounds[m + 1])
      bad.push_back("diagonal {" + std::to_string(i) + ", " + std::to_string(j) + "} crosses a level boundary");
  }
  if (g.edge_count() != (g.size() ? g.size() - 1 : 0) + delta.diagonals().size())
    bad.push_back("a diagonal duplicates a path edge");
  return bad;
}

struct DeltaOptions {
  /// First candidate S_k - S_{k-1}; later candidates multiply it by `growth`.
  std::uint64_t initial_span = 8;
  double growth = 2.0;
  /// Largest S_k tried.
  std::uint64_t max_sk = 4096;
  /// Matchings tried per candidate S_k.
  std::uint64_t max_candidates = 64;
  /// Leading matchings taken in lexicographic order before seeded sampling.
  std::uint64_t lex_candidates = 8;
  std::uint64_t node_budget = 5'000'000;
  std::uint64_t seed = 1;
  /// Pin the root image to n_k - 1; otherwise every root image is excluded.
  bool pin_root = true;
};

/// Appends level k = delta.levels.size() + 1 certified against gamma. Throws
/// ResourceError (largest S_k tried) when no candidate is certified within
/// the budgets. Candidates whose search exceeds the node budget are skipped.
inline DeltaGraph build_delta_level(const Graph& gamma, const DeltaGraph& prev, const DeltaOptions& opts = {},
                                    std::size_t target = 0) {
  const std::uint64_t k = prev.levels.size() + 1;
  if (gamma.size() == 0) throw PreconditionError("universal-obstruction", "target graph is empty");
  if (opts.initial_span < 4 || !(opts.growth > 1.0))
    throw ConfigurationError("universal-obstruction", "initial_span must be >= 4 and growth > 1");
  std::optional<Vertex> root_image;
  if (opts.pin_root) {
    const auto label = static_cast<std::uint64_t>(ruler_sequence(k));
    if (label > gamma.size())
      throw PreconditionError("universal-obstruction",
                              "root label n_k = " + std::to_string(label) + " outside the target graph");
    root_image = static_cast<Vertex>(label - 1);
  }
  SearchOptions so;
  so.root = 0;
  so.root_image = root_image;
  so.node_budget = opts.node_budget;

  const std::uint64_t S_prev = prev.size();
  std::uint64_t candidates_tried = 0, spans_tried = 0, largest = 0;
  for (double span = static_cast<double>(opts.initial_span);; span *= opts.growth) {
    const std::uint64_t S = S_prev + static_cast<std::uint64_t>(std::floor(span));
    if (S > opts.max_sk) break;
    ++spans_tried;
    largest = S;
    DeltaLevel lvl;
    lvl.S_prev = S_prev;
    lvl.S = S;
    lvl.L = (S - S_prev) / 4;
    std::vector<std::uint64_t> perm(lvl.L);
    for (std::uint64_t i = 0; i < lvl.L; ++i) perm[i] = i;
    Rng rng(derive_seed(opts.seed, "delta-level-" + std::to_string(k) + "-S-" + std::to_string(S)));
    for (std::uint64_t c = 0; c < opts.max_candidates; ++c) {
      if (c >= opts.lex_candidates) {
        rng.shuffle(perm);
      } else if (c > 0 && !std::next_permutation(perm.begin(), perm.end())) {
        break;  // all L! matchings tried
      }
      lvl.matching = perm;
      ++candidates_tried;
      SearchResult sr;
      try {
        sr = exists_regular_map(prev.with_level_graph(lvl), gamma, static_cast<int>(k), so);
      } catch (const ResourceError&) {
        continue;
      }
      if (sr.found) continue;
      lvl.K = static_cast<int>(k);
      lvl.root_image = root_image;
      lvl.target = target;
      lvl.search_nodes = sr.nodes;
      lvl.exhausted = sr.exhausted;
      lvl.candidates_tried = candidates_tried;
      lvl.spans_tried = spans_tried;
      lvl.seed = opts.seed;
      lvl.node_budget = opts.node_budget;
      DeltaGraph out = prev;
      out.levels.push_back(std::move(lvl));
      return out;
    }
  }
  throw ResourceError("universal-obstruction",
                      "no level-" + std::to_string(k) + " candidate certified; largest S_k tried = " +
                          std::to_string(largest) + " (" + std::to_string(candidates_tried) + " candidates)",
                      static_cast<double>(largest));
}

/// Delta_1, ..., Delta_{k_max} against a single target.
inline DeltaGraph build_delta(const Graph& gamma, std::uint64_t k_max, const DeltaOptions& opts = {}) {
  DeltaGraph d;
  for (std::uint64_t k = 1; k <= k_max; ++k) d = build_delta_level(gamma, d, opts);
  return d;
}

/// Sequence-of-targets variant: level k is certified against
/// targets[n_k - 1] with every root image excluded, so each target is hit
/// at levels k = 2^(i) (2j + 1) with K growing along them.
inline DeltaGraph build_delta_interleaved(const std::vector<Graph>& targets, std::uint64_t k_max,
                                          DeltaOptions opts = {}) {
  opts.pin_root = false;
  DeltaGraph d;
  for (std::uint64_t k = 1; k <= k_max; ++k) {
    const auto t = static_cast<std::size_t>(ruler_sequence(k) - 1);
    if (t >= targets.size())
      throw PreconditionError("universal-obstruction", "level " + std::to_string(k) + " needs target " +
                                                           std::to_string(t + 1) + " of " +
                                                           std::to_string(targets.size()));
    d = build_delta_level(targets[t], d, opts, t);
  }
  return d;
}

/// Reruns the search recorded in level m's certificate on the stored graph.
inline SearchResult replay_certificate(const DeltaGraph& delta, std::size_t m, const Graph& gamma) {
  if (m >= delta.levels.size()) throw PreconditionError("universal-obstruction", "no such level");
  DeltaGraph prefix;
  prefix.levels.assign(delta.levels.begin(), delta.levels.begin() + static_cast<std::ptrdiff_t>(m) + 1);
  const DeltaLevel& l = delta.levels[m];
  SearchOptions so;
  so.root_image = l.root_image;
  so.node_budget = l.node_budget;
  return exists_regular_map(prefix.graph(), gamma, l.K, so);
}

/// Weighted graph: edges (a, b, length).
struct MetricGraph {
  std::size_t nodes = 0;
  /// Nodes [0, sphere_nodes) are spheres; the rest are tube midpoints.
  std::size_t sphere_nodes = 0;
  std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> edges;

  std::vector<double> distances_from(std::uint32_t source) const {
    std::vector<std::vector<std::pair<std::uint32_t, double>>> adj(nodes);
    for (const auto& [a, b, w] : edges) {
      adj[a].emplace_back(b, w);
      adj[b].emplace_back(a, w);
    }
    std::vector<double> dist(nodes, std::numeric_limits<double>::infinity());
    using Item = std::pair<double, std::uint32_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[source] = 0.0;
    pq.emplace(0.0, source);
    while (!pq.empty()) {
      const auto [d, u] = pq.top();
      pq.pop();
      if (d > dist[u]) continue;
      for (const auto& [w, len] : adj[u])
        if (d + len < dist[w]) {
          dist[w] = d + len;
          pq.emplace(dist[w], w);
        }
    }
    return dist;
  }
};

/// Coarse model of the manifold glued from unit spheres (one per vertex) and
/// unit-length tubes (one per edge). A sphere node lies at distance pi/2
/// from each attachment circle, so crossing a sphere costs pi and adjacent
/// sphere nodes are pi/2 + 1 + pi/2 apart.
inline MetricGraph sphere_tube_graph(const Graph& delta) {
  if (delta.max_degree() > 3) throw PreconditionError("universal-obstruction", "sphere_tube_graph needs degree <= 3");
  MetricGraph g;
  g.sphere_nodes = delta.size();
  const auto E = delta.edges();
  g.nodes = delta.size() + E.size();
  const double half = std::numbers::pi / 2.0 + 0.5;
  for (std::size_t e = 0; e < E.size(); ++e) {
    const auto tube = static_cast<std::uint32_t>(delta.size() + e);
    g.edges.emplace_back(E[e].first, tube, half);
    g.edges.emplace_back(E[e].second, tube, half);
  }
  return g;
}

}  // namespace tubed
