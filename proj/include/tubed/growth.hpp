#pragma once

// Volume growth of a graph from BFS ball counts, and the polynomial versus
// exponential classification by least-squares residuals.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "tubed/errors.hpp"
#include "tubed/graph.hpp"

namespace tubed {

enum class GrowthClass { Polynomial, Exponential, Inconclusive };

inline const char* growth_class_name(GrowthClass c) {
  switch (c) {
    case GrowthClass::Polynomial: return "polynomial";
    case GrowthClass::Exponential: return "exponential";
    default: return "inconclusive";
  }
}

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  /// Root mean square residual.
  double residual = 0.0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit fit;
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (fit.intercept + fit.slope * x[i]);
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

struct GrowthOptions {
  /// A hypothesis wins when its residual is below margin times the other's.
  double margin = 0.5;
};

struct GrowthFit {
  /// counts[R] = max over centers of |B(x, R)|, R = 0..R_max.
  std::vector<std::size_t> counts;
  int window_lo = 0;
  int window_hi = -1;
  /// First radius at which every center's component was exhausted (or -1).
  int saturated_at = -1;
  /// log|B| = log a + exponent * log R.
  LineFit polynomial;
  /// log|B| = log b + rate * R.
  LineFit exponential;
  GrowthClass classification = GrowthClass::Inconclusive;
  int degree = 0;

  double exponent() const { return polynomial.slope; }
};

/// Fit window is the top half [ceil(R_max/2), R_max] of the radius range,
/// cut before saturation; fewer than 3 radii leaves the result Inconclusive.
inline GrowthFit graph_growth(const Graph& g, const std::vector<Vertex>& centers, int R_max,
                              const GrowthOptions& opts = {}) {
  if (R_max < 1) throw DomainError("net-graph", "graph_growth: R_max must be >= 1");
  if (centers.empty()) throw PreconditionError("net-graph", "graph_growth: no centers");
  GrowthFit fit;
  fit.counts.assign(static_cast<std::size_t>(R_max) + 1, 0);
  std::vector<int> scratch;
  int saturated = 0;
  for (Vertex c : centers) {
    if (c >= g.size()) throw PreconditionError("net-graph", "graph_growth: center is not a vertex");
    const BallCounts b = bfs_ball_counts(g, c, R_max, scratch);
    for (int R = 0; R <= R_max; ++R) fit.counts[R] = std::max(fit.counts[R], b.counts[R]);
    saturated = (saturated < 0 || b.exhausted_at < 0) ? -1 : std::max(saturated, b.exhausted_at);
  }
  fit.saturated_at = saturated;

  fit.window_lo = std::max(1, (R_max + 1) / 2);
  fit.window_hi = saturated < 0 ? R_max : std::min(R_max, saturated - 1);
  std::vector<double> logR, R, logB;
  for (int r = fit.window_lo; r <= fit.window_hi; ++r) {
    logR.push_back(std::log(static_cast<double>(r)));
    R.push_back(static_cast<double>(r));
    logB.push_back(std::log(static_cast<double>(fit.counts[r])));
  }
  if (logR.size() < 3) return fit;
  fit.polynomial = fit_line(logR, logB);
  fit.exponential = fit_line(R, logB);
  if (fit.exponential.residual < opts.margin * fit.polynomial.residual) {
    fit.classification = GrowthClass::Exponential;
  } else if (fit.polynomial.residual < opts.margin * fit.exponential.residual) {
    fit.classification = GrowthClass::Polynomial;
    fit.degree = static_cast<int>(std::lround(fit.polynomial.slope));
  }
  return fit;
}

/// Net vertices closest to the model origin, used as growth centers away from
/// the region boundary.
inline std::vector<Vertex> central_vertices(const Net& net, std::size_t count) {
  std::vector<std::pair<double, Vertex>> order;
  const Point o = net.model().origin();
  for (Vertex v = 0; v < net.size(); ++v) order.emplace_back(net.model().distance_unchecked(o, net.vertices[v]), v);
  count = std::min(count, order.size());
  std::partial_sort(order.begin(), order.begin() + count, order.end());
  std::vector<Vertex> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(order[i].second);
  return out;
}

}  // namespace tubed
