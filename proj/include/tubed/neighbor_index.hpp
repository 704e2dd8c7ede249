#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <unordered_map>
#include <vector>

#include "tubed/errors.hpp"
#include "tubed/manifold.hpp"

namespace tubed {

/// Bucket index answering "which stored points may lie within distance
/// `radius` of p". Candidates are a superset; callers filter by the exact
/// model distance. Flat models and the sphere (via chordal distance in R^3)
/// use a coordinate grid; the hyperbolic plane uses geodesic polar bins
/// around a fixed center.
class NeighborIndex {
 public:
  NeighborIndex(const ManifoldModel& model, double cell) : NeighborIndex(model, cell, model.origin()) {}

  NeighborIndex(const ManifoldModel& model, double cell, const Point& polar_center)
      : model_(model), cell_(cell), center_(polar_center) {
    if (!(cell > 0.0)) throw DomainError("net-graph", "neighbor index cell size must be positive");
    polar_ = model.kind() == ModelKind::HyperbolicPlane;
    // Rings wider than ~1/2 make bins far wider at their outer edge than at
    // the inner one (circumference grows like e^rho), so cap the ring width.
    if (polar_) cell_ = std::min(cell, 0.5);
    center_is_origin_ = polar_ && polar_center.isZero();
    dims_ = model.coord_dimension();
    cell_size_.assign(dims_, cell);
    if (model.kind() == ModelKind::FlatTorus) {
      for (int i = 0; i < dims_; ++i) {
        const double period = model.periods()[i];
        const long long m = std::max<long long>(1, static_cast<long long>(std::floor(period / cell)));
        wrap_cells_.push_back(m);
        cell_size_[i] = period / static_cast<double>(m);
      }
    }
  }

  void insert(std::uint32_t id, const Point& p) {
    std::uint32_t* head;
    if (polar_) {
      const auto [ring, bin] = polar_slot(p);
      head = &ring_heads(ring)[bin];
    } else {
      head = &head_.try_emplace(grid_key(grid_cell(p)), kNone).first->second;
    }
    ids_.push_back(id);
    next_.push_back(*head);
    *head = static_cast<std::uint32_t>(ids_.size() - 1);
  }

  std::size_t size() const { return ids_.size(); }

  template <class F>
  void for_each_candidate(const Point& p, double radius, F&& visit) const {
    if (polar_)
      visit_polar(p, radius, visit);
    else
      visit_grid(p, radius, visit);
  }

 private:
  static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
  using Cell = std::array<long long, kMaxCoordDim>;

  template <class F>
  void visit_bucket(std::uint64_t key, F& visit) const {
    const auto it = head_.find(key);
    if (it != head_.end()) visit_chain(it->second, visit);
  }

  Cell grid_cell(const Point& p) const {
    Cell c{};
    for (int i = 0; i < dims_; ++i) {
      c[i] = static_cast<long long>(std::floor(p(i) / cell_size_[i]));
      if (!wrap_cells_.empty()) c[i] = std::clamp<long long>(c[i], 0, wrap_cells_[i] - 1);
    }
    return c;
  }

  std::uint64_t grid_key(const Cell& c) const {
    std::uint64_t key = 0;
    for (int i = 0; i < dims_; ++i) {
      const long long shifted = c[i] + 32768;
      if (shifted < 0 || shifted >= 65536)
        throw ResourceError("net-graph", "neighbor index: coordinates out of the indexable range");
      key = (key << 16) | static_cast<std::uint64_t>(shifted);
    }
    return key;
  }

  template <class F>
  void visit_grid(const Point& p, double radius, F& visit) const {
    const Cell base = grid_cell(p);
    std::array<long long, kMaxCoordDim> lo{}, hi{};
    for (int i = 0; i < dims_; ++i) {
      const long long span = static_cast<long long>(std::ceil(radius / cell_size_[i] + 1e-9));
      if (!wrap_cells_.empty() && 2 * span + 1 >= wrap_cells_[i]) {
        lo[i] = 0;
        hi[i] = wrap_cells_[i] - 1;
      } else {
        lo[i] = base[i] - span;
        hi[i] = base[i] + span;
      }
    }
    Cell c = lo;
    while (true) {
      Cell wrapped = c;
      if (!wrap_cells_.empty())
        for (int i = 0; i < dims_; ++i) wrapped[i] = ((c[i] % wrap_cells_[i]) + wrap_cells_[i]) % wrap_cells_[i];
      visit_bucket(grid_key(wrapped), visit);
      int axis = 0;
      while (axis < dims_ && ++c[axis] > hi[axis]) {
        c[axis] = lo[axis];
        ++axis;
      }
      if (axis == dims_) break;
    }
  }

  // ---- polar bins (hyperbolic plane) ----

  long long bins_in_ring(long long ring) const {
    const double inner = static_cast<double>(ring) * cell_;
    const double m = std::floor(2.0 * std::numbers::pi * model_.circle_factor(inner) / cell_);
    return static_cast<long long>(std::clamp(m, 1.0, 0x1.0p43));
  }

  std::pair<double, double> polar(const Point& p) const {
    double rho, theta;
    if (center_is_origin_) {
      rho = 2.0 * model_.radius() * std::atanh(std::min(std::hypot(p(0), p(1)), std::nextafter(1.0, 0.0)));
      theta = std::atan2(p(1), p(0));
    } else {
      const Tangent v = model_.log_map(center_, p);
      rho = v.norm();
      theta = std::atan2(v(1), v(0));
    }
    if (theta < 0.0) theta += 2.0 * std::numbers::pi;
    return {rho, theta};
  }

  std::pair<long long, long long> polar_slot(const Point& p) const {
    const auto [rho, theta] = polar(p);
    const long long ring = static_cast<long long>(std::floor(rho / cell_));
    const long long m = bins_in_ring(ring);
    const long long bin = std::min(m - 1, static_cast<long long>(std::floor(theta / (2.0 * std::numbers::pi) * m)));
    return {ring, bin};
  }

  std::vector<std::uint32_t>& ring_heads(long long ring) {
    if (ring >= (1LL << 20)) throw ResourceError("net-graph", "neighbor index: radius out of the indexable range");
    if (static_cast<std::size_t>(ring) >= rings_.size()) rings_.resize(ring + 1);
    auto& heads = rings_[ring];
    if (heads.empty()) heads.assign(static_cast<std::size_t>(bins_in_ring(ring)), kNone);
    return heads;
  }

  template <class F>
  void visit_chain(std::uint32_t pos, F& visit) const {
    for (; pos != kNone; pos = next_[pos]) visit(ids_[pos]);
  }

  template <class F>
  void visit_polar(const Point& p, double radius, F& visit) const {
    const auto [rho, theta] = polar(p);
    // B(p, radius) is seen from the center under half-angle alpha with
    // sin(alpha) = sinh(radius / a) / sinh(rho / a), a the curvature radius.
    double alpha = std::numbers::pi;
    if (rho > radius) {
      const double a = model_.radius();
      const double s = std::sinh(radius / a) / std::sinh(rho / a);
      if (s < 1.0) alpha = std::asin(s) * (1.0 + 1e-9) + 1e-12;
    }
    const long long ring_lo = std::max(0LL, static_cast<long long>(std::floor((rho - radius) / cell_ - 1e-9)));
    const long long ring_hi = std::min(static_cast<long long>(rings_.size()) - 1,
                                       static_cast<long long>(std::floor((rho + radius) / cell_ + 1e-9)));
    for (long long ring = ring_lo; ring <= ring_hi; ++ring) {
      const auto& heads = rings_[ring];
      if (heads.empty()) continue;
      const long long m = static_cast<long long>(heads.size());
      const double scale = static_cast<double>(m) / (2.0 * std::numbers::pi);
      long long first = static_cast<long long>(std::floor((theta - alpha) * scale));
      long long last = static_cast<long long>(std::floor((theta + alpha) * scale));
      if (alpha >= std::numbers::pi || last - first + 1 >= m) {
        first = 0;
        last = m - 1;
      }
      for (long long b = first; b <= last; ++b) visit_chain(heads[((b % m) + m) % m], visit);
    }
  }

  ManifoldModel model_;
  double cell_;
  Point center_;
  bool polar_ = false;
  bool center_is_origin_ = false;
  int dims_ = 0;
  std::vector<double> cell_size_;
  std::vector<long long> wrap_cells_;
  std::unordered_map<std::uint64_t, std::uint32_t> head_;
  std::vector<std::vector<std::uint32_t>> rings_;
  std::vector<std::uint32_t> ids_;
  std::vector<std::uint32_t> next_;
};

}  // namespace tubed
