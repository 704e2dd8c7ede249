#pragma once

// Maximal r-separated nets built greedily over a PointSet, with the checks of
// separation, covering and the sampled Lebesgue-number test for {2 B_v}.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "tubed/errors.hpp"
#include "tubed/manifold.hpp"
#include "tubed/neighbor_index.hpp"
#include "tubed/point_set.hpp"
#include "tubed/rng.hpp"

namespace tubed {

struct Net {
  double r = 0.0;
  PointSet vertices;
  /// Index of each vertex in the source PointSet.
  std::vector<std::uint32_t> source_index;
  std::string source_id;

  const ManifoldModel& model() const { return vertices.model(); }
  std::size_t size() const { return vertices.size(); }

  NeighborIndex make_index(double cell) const {
    NeighborIndex index(model(), cell);
    for (std::uint32_t i = 0; i < size(); ++i) index.insert(i, vertices[i]);
    return index;
  }
};

/// Greedy pass in PointSet order: a point joins the net iff it is at distance
/// >= r from every vertex chosen so far.
inline Net build_net(const PointSet& points, double r, std::string source_id = {}) {
  if (!(r > 0.0)) throw DomainError("net-graph", "build_net: r must be positive");
  if (points.empty()) throw PreconditionError("net-graph", "build_net: empty point set");
  const ManifoldModel& model = points.model();
  Net net{r, PointSet(model, points.seed()), {}, std::move(source_id)};
  NeighborIndex index(model, r);
  for (std::uint32_t i = 0; i < points.size(); ++i) {
    const Point p = points[i];
    bool separated = true;
    index.for_each_candidate(p, r, [&](std::uint32_t v) {
      if (separated && model.distance_unchecked(p, net.vertices[v]) < r) separated = false;
    });
    if (!separated) continue;
    const auto id = static_cast<std::uint32_t>(net.size());
    net.vertices.push_back_unchecked(p);
    net.source_index.push_back(i);
    index.insert(id, p);
  }
  return net;
}

struct NetReport {
  bool separation_ok = true;
  double min_separation = std::numeric_limits<double>::infinity();
  /// Max over sample points of the distance to the nearest vertex.
  double cover_radius = 0.0;
  bool cover_ok = true;
  std::size_t uncovered = 0;
  bool lebesgue_ok = true;
  std::size_t lebesgue_centers = 0;
  std::size_t lebesgue_failures = 0;
};

/// Distance from p to the nearest vertex of the net (exhaustive fallback when
/// no vertex lies within `search_radius`).
inline std::pair<double, std::uint32_t> nearest_vertex(const Net& net, const NeighborIndex& index, const Point& p,
                                                       double search_radius) {
  const ManifoldModel& model = net.model();
  double best = std::numeric_limits<double>::infinity();
  std::uint32_t arg = std::numeric_limits<std::uint32_t>::max();
  index.for_each_candidate(p, search_radius, [&](std::uint32_t v) {
    const double d = model.distance_unchecked(p, net.vertices[v]);
    if (d < best || (d == best && v < arg)) {
      best = d;
      arg = v;
    }
  });
  if (best < search_radius) return {best, arg};
  for (std::uint32_t v = 0; v < net.size(); ++v) {
    const double d = model.distance_unchecked(p, net.vertices[v]);
    if (d < best || (d == best && v < arg)) {
      best = d;
      arg = v;
    }
  }
  return {best, arg};
}

struct VerifyOptions {
  std::size_t lebesgue_centers = 1000;
  /// Points sampled inside each tested r-ball for the direct inclusion test.
  std::size_t points_per_ball = 32;
  std::uint64_t seed = 1;
};

inline NetReport verify_net(const Net& net, const PointSet& points, const VerifyOptions& opts = {}) {
  const ManifoldModel& model = net.model();
  const double r = net.r;
  NetReport report;
  const NeighborIndex index = net.make_index(r);

  for (std::uint32_t v = 0; v < net.size(); ++v) {
    const Point p = net.vertices[v];
    index.for_each_candidate(p, r, [&](std::uint32_t w) {
      if (w == v) return;
      const double d = model.distance_unchecked(p, net.vertices[w]);
      report.min_separation = std::min(report.min_separation, d);
      if (d < r) report.separation_ok = false;
    });
  }

  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto [d, v] = nearest_vertex(net, index, points[i], r);
    report.cover_radius = std::max(report.cover_radius, d);
    if (!(d < r)) ++report.uncovered;
  }
  report.cover_ok = report.uncovered == 0;

  // Lebesgue number r for {2 B_v}: each sampled ball B(x, r) must lie inside
  // B(v, 2r) for the nearest vertex v, tested directly on random points of B(x, r).
  Rng rng(opts.seed);
  const std::size_t centers = std::min(opts.lebesgue_centers, points.size());
  const int n = model.dimension();
  for (std::size_t c = 0; c < centers; ++c) {
    const Point x = points[rng.below(points.size())];
    const auto [dx, v] = nearest_vertex(net, index, x, r);
    const Point vertex = net.vertices[v];
    bool inside = dx <= r;
    for (std::size_t k = 0; inside && k < opts.points_per_ball; ++k) {
      Tangent w(n);
      for (int i = 0; i < n; ++i) w(i) = rng.normal();
      const double len = w.norm();
      if (len == 0.0) continue;
      const double radius = r * std::pow(rng.uniform(), 1.0 / n);
      w *= radius / len;
      Point y;
      try {
        y = model.exp_map(x, w);
      } catch (const Error&) {
        continue;
      }
      if (!(model.distance_unchecked(y, vertex) < 2.0 * r)) inside = false;
    }
    ++report.lebesgue_centers;
    if (!inside) ++report.lebesgue_failures;
  }
  report.lebesgue_ok = report.lebesgue_failures == 0;
  return report;
}

/// Empirical N_lambda: max over the centers of |V ∩ B(x, lambda r)| (open ball).
inline std::size_t count_n_lambda(const Net& net, double lambda, const PointSet& centers) {
  if (!(lambda > 0.0)) throw DomainError("net-graph", "count_N_lambda: lambda must be positive");
  if (net.size() == 0) return 0;
  const double radius = lambda * net.r;
  const NeighborIndex index = net.make_index(std::max(radius, net.r));
  const ManifoldModel& model = net.model();
  std::size_t best = 0;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const Point x = centers[i];
    std::size_t count = 0;
    index.for_each_candidate(x, radius, [&](std::uint32_t v) {
      if (model.distance_unchecked(x, net.vertices[v]) < radius) ++count;
    });
    best = std::max(best, count);
  }
  return best;
}

/// N_lambda with the net vertices themselves as centers.
inline std::size_t count_n_lambda(const Net& net, double lambda) { return count_n_lambda(net, lambda, net.vertices); }

}  // namespace tubed
