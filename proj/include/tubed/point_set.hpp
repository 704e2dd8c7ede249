#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "tubed/errors.hpp"
#include "tubed/manifold.hpp"
#include "tubed/rng.hpp"

namespace tubed {

/// Points of one model, stored contiguously (coord_dimension() doubles each).
class PointSet {
 public:
  PointSet(ManifoldModel model, std::uint64_t seed = 0) : model_(std::move(model)), seed_(seed) {}

  const ManifoldModel& model() const { return model_; }
  std::uint64_t seed() const { return seed_; }
  int stride() const { return model_.coord_dimension(); }
  std::size_t size() const { return data_.size() / stride(); }
  bool empty() const { return data_.empty(); }

  Point operator[](std::size_t i) const {
    const int d = stride();
    Point p(d);
    for (int k = 0; k < d; ++k) p(k) = data_[i * d + k];
    return p;
  }

  void push_back(const Point& p) {
    model_.validate(p);
    push_back_unchecked(p);
  }

  void push_back_unchecked(const Point& p) {
    for (int k = 0; k < p.size(); ++k) data_.push_back(p(k));
  }

  void reserve(std::size_t n) { data_.reserve(n * stride()); }
  const std::vector<double>& raw() const { return data_; }

  /// Reorders points by `order` (a permutation of indices).
  void permute(const std::vector<std::uint32_t>& order) {
    const int d = stride();
    std::vector<double> out(data_.size());
    for (std::size_t i = 0; i < order.size(); ++i)
      for (int k = 0; k < d; ++k) out[i * d + k] = data_[order[i] * d + k];
    data_ = std::move(out);
  }

 private:
  ManifoldModel model_;
  std::uint64_t seed_;
  std::vector<double> data_;
};

struct SampleOptions {
  /// Upper bound on the number of generated points.
  std::size_t max_points = 20'000'000;
};

namespace detail {

inline void sample_flat(const ManifoldModel& model, const Point& center, double R, double spacing, PointSet& out,
                        const SampleOptions& opts) {
  const int n = model.dimension();
  std::vector<double> pitch(n, spacing);
  if (model.kind() == ModelKind::FlatTorus)
    for (int i = 0; i < n; ++i) pitch[i] = model.periods()[i] / std::ceil(model.periods()[i] / spacing);
  double half_diag = 0.0;
  for (double h : pitch) half_diag += h * h;
  half_diag = std::sqrt(half_diag) / 2.0;
  const double reach = R + half_diag;

  std::vector<long long> lo(n), hi(n);
  double estimate = 1.0;
  for (int i = 0; i < n; ++i) {
    double extent = reach;
    if (model.kind() == ModelKind::FlatTorus) extent = std::min(extent, model.periods()[i] / 2.0);
    hi[i] = static_cast<long long>(std::floor(extent / pitch[i]));
    lo[i] = -hi[i];
    if (model.kind() == ModelKind::FlatTorus) {
      const long long cells = static_cast<long long>(std::llround(model.periods()[i] / pitch[i]));
      hi[i] = std::min(hi[i], lo[i] + cells - 1);
    }
    estimate *= static_cast<double>(hi[i] - lo[i] + 1);
  }
  if (estimate > static_cast<double>(opts.max_points) * 2.0)
    throw ResourceError("manifold-models",
                        "sample_region: spacing too small, about " + std::to_string(static_cast<long long>(estimate)) +
                            " grid points required",
                        estimate);

  std::vector<long long> idx(lo);
  while (true) {
    Tangent offset(n);
    for (int i = 0; i < n; ++i) offset(i) = static_cast<double>(idx[i]) * pitch[i];
    if (offset.norm() <= reach) {
      const Point p = model.exp_map(center, offset);
      if (model.kind() != ModelKind::FlatTorus || model.distance_unchecked(center, p) <= reach) {
        out.push_back_unchecked(p);
        if (out.size() > opts.max_points)
          throw ResourceError("manifold-models", "sample_region: point budget exceeded", estimate);
      }
    }
    int axis = 0;
    while (axis < n && ++idx[axis] > hi[axis]) {
      idx[axis] = lo[axis];
      ++axis;
    }
    if (axis == n) break;
  }
}

// Geodesic polar rings around the center: ring spacing h and arc spacing at
// most h on each ring, giving covering radius <= h.
inline void sample_polar(const ManifoldModel& model, const Point& center, double R, double spacing, PointSet& out,
                         const SampleOptions& opts) {
  const double h = spacing;
  double max_rho = R;
  if (model.kind() == ModelKind::Sphere) max_rho = std::min(R, std::numbers::pi * model.radius());
  const long long rings = static_cast<long long>(std::ceil(max_rho / h));
  const double estimate = model.ball_volume(max_rho + h) / (h * h);
  if (estimate > static_cast<double>(opts.max_points))
    throw ResourceError("manifold-models",
                        "sample_region: spacing too small, about " + std::to_string(static_cast<long long>(estimate)) +
                            " points required",
                        estimate);
  out.push_back_unchecked(center);
  for (long long k = 1; k <= rings; ++k) {
    const double rho = std::min(static_cast<double>(k) * h, max_rho);
    const double circumference = 2.0 * std::numbers::pi * model.circle_factor(rho);
    const long long m = std::max<long long>(1, static_cast<long long>(std::ceil(circumference / h)));
    for (long long j = 0; j < m; ++j) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(m);
      Tangent v(2);
      v << rho * std::cos(angle), rho * std::sin(angle);
      if (model.kind() == ModelKind::Sphere && rho >= std::numbers::pi * model.radius() * (1.0 - 1e-12)) {
        out.push_back_unchecked(-center);
        break;
      }
      out.push_back_unchecked(model.exp_map(center, v));
    }
    if (out.size() > opts.max_points)
      throw ResourceError("manifold-models", "sample_region: point budget exceeded", estimate);
  }
}

}  // namespace detail

/// Deterministic sample of the ball B(center, R): every point of the ball lies
/// within `spacing` of a sample. Flat models use a grid of pitch <= spacing,
/// curved models geodesic polar rings. The result is shuffled with `seed`.
inline PointSet sample_region(const ManifoldModel& model, const Point& center, double R, double spacing,
                              std::uint64_t seed, const SampleOptions& opts = {}) {
  model.validate(center);
  if (R < 0.0) throw DomainError("manifold-models", "sample_region: radius must be nonnegative");
  PointSet out(model, seed);
  if (R == 0.0) {
    out.push_back(center);
    return out;
  }
  if (!(spacing > 0.0)) throw DomainError("manifold-models", "sample_region: spacing must be positive");
  if (model.is_flat())
    detail::sample_flat(model, center, R, spacing, out, opts);
  else
    detail::sample_polar(model, center, R, spacing, out, opts);

  std::vector<std::uint32_t> order(out.size());
  for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  out.permute(order);
  return out;
}

// ---- CSV serialization -----------------------------------------------------

inline std::string format_double(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

/// `# model=<kind> seed=<n>` header followed by one comma-separated point per row.
inline std::string point_set_to_csv(const PointSet& points) {
  std::ostringstream os;
  os << "# model=" << points.model().kind_name() << " seed=" << points.seed() << "\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Point p = points[i];
    for (int k = 0; k < p.size(); ++k) os << (k ? "," : "") << format_double(p(k));
    os << "\n";
  }
  return os.str();
}

inline PointSet point_set_from_csv(const ManifoldModel& model, std::istream& in) {
  std::string line;
  std::uint64_t seed = 0;
  PointSet out(model);
  bool header_seen = false;
  std::size_t line_no = 0;
  std::vector<Point> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto model_pos = line.find("model=");
      if (model_pos != std::string::npos) {
        const auto end = line.find(' ', model_pos);
        const std::string kind = line.substr(model_pos + 6, end == std::string::npos ? std::string::npos : end - model_pos - 6);
        if (kind != model.kind_name())
          throw InputError("manifold-models", "point CSV was written for model '" + kind + "'");
      }
      const auto seed_pos = line.find("seed=");
      if (seed_pos != std::string::npos) seed = std::stoull(line.substr(seed_pos + 5));
      header_seen = true;
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    Point p(model.coord_dimension());
    int k = 0;
    while (std::getline(ss, cell, ',')) {
      if (k >= model.coord_dimension())
        throw InputError("manifold-models", "too many coordinates on line " + std::to_string(line_no));
      p(k++) = std::stod(cell);
    }
    if (k != model.coord_dimension())
      throw InputError("manifold-models", "too few coordinates on line " + std::to_string(line_no));
    rows.push_back(p);
  }
  if (!header_seen) throw InputError("manifold-models", "point CSV is missing the '# model=' header");
  PointSet result(model, seed);
  result.reserve(rows.size());
  for (const Point& p : rows) result.push_back(p);
  return result;
}

}  // namespace tubed
