#pragma once

// Independent oracles shared by the unit suites and the acceptance gate.
// None of them calls the routine it is used to check.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "tubed/graph.hpp"
#include "tubed/rng.hpp"
#include "tubed/universal.hpp"

namespace tubed::test {

/// Every total map delta -> gamma, counted in base |gamma| (root optionally
/// pinned), judged by the direct condition check.
inline std::optional<std::vector<Vertex>> brute_force_regular_map(const Graph& delta, const Graph& gamma, int K,
                                                                  std::optional<Vertex> root_image,
                                                                  std::size_t* total = nullptr) {
  const std::size_t n = delta.size(), m = gamma.size();
  std::vector<Vertex> f(n, 0);
  if (root_image) f[0] = *root_image;
  std::size_t count = 0;
  std::optional<std::vector<Vertex>> witness;
  const std::size_t first = root_image ? 1 : 0;
  while (true) {
    ++count;
    if (!witness && regular_map_check(delta, gamma, K, f).ok) witness = f;
    std::size_t i = first;
    while (i < n && ++f[i] == m) f[i++] = 0;
    if (i == n) break;
  }
  if (total) *total = count;
  return witness;
}

/// Random spanning tree plus up to `extra` chords, degrees capped.
inline Graph random_connected_graph(Rng& rng, std::size_t n, std::size_t extra, std::size_t max_degree) {
  std::vector<std::pair<Vertex, Vertex>> e;
  std::vector<std::size_t> deg(n, 0);
  for (Vertex v = 1; v < n; ++v) {
    Vertex p;
    do p = static_cast<Vertex>(rng.below(v));
    while (deg[p] >= max_degree - 1 && v > 1);
    e.emplace_back(p, v);
    ++deg[p];
    ++deg[v];
  }
  for (std::size_t t = 0; t < extra; ++t) {
    const auto a = static_cast<Vertex>(rng.below(n)), b = static_cast<Vertex>(rng.below(n));
    if (a == b || deg[a] >= max_degree || deg[b] >= max_degree) continue;
    e.emplace_back(a, b);
    ++deg[a];
    ++deg[b];
  }
  return Graph::from_edges(n, e);
}

/// Distance between conv(cols A) and conv(cols B) by pattern search on a
/// 5-point-per-axis grid over barycentric coordinates (the last weight of
/// each hull is implied). The window stays while the best point moves and
/// halves when the center wins.
inline double grid_hull_distance(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double tol = 1e-12) {
  const int ka = static_cast<int>(A.cols()) - 1, kb = static_cast<int>(B.cols()) - 1, D = ka + kb;
  auto value = [&](const std::vector<double>& p) {
    double sa = 0.0, sb = 0.0;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(A.rows());
    for (int i = 0; i < ka; ++i) sa += p[i], x += p[i] * A.col(i);
    for (int i = 0; i < kb; ++i) sb += p[ka + i], x -= p[ka + i] * B.col(i);
    if (sa > 1.0 + 1e-15 || sb > 1.0 + 1e-15) return std::numeric_limits<double>::infinity();
    x += (1.0 - sa) * A.col(ka) - (1.0 - sb) * B.col(kb);
    return x.norm();
  };
  if (D == 0) return value({});
  std::vector<double> best(D, 0.0);
  for (int i = 0; i < ka; ++i) best[i] = 1.0 / (ka + 1);
  for (int i = 0; i < kb; ++i) best[ka + i] = 1.0 / (kb + 1);
  double fbest = value(best), w = 0.5;
  std::vector<double> p(D);
  std::vector<int> idx(D);
  while (w > tol) {
    std::vector<double> center = best;
    bool moved = false;
    std::fill(idx.begin(), idx.end(), -2);
    while (true) {
      for (int d = 0; d < D; ++d) p[d] = std::clamp(center[d] + idx[d] * (w / 2.0), 0.0, 1.0);
      const double f = value(p);
      if (f < fbest) {
        fbest = f;
        best = p;
        moved = true;
      }
      int d = 0;
      while (d < D && ++idx[d] > 2) idx[d++] = -2;
      if (d == D) break;
    }
    if (!moved) w /= 2.0;
  }
  return fbest;
}

}  // namespace tubed::test
