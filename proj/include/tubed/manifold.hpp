#pragma once

// Closed-form model manifolds: Euclidean space, flat torus, round 2-sphere and
// the hyperbolic plane (Poincare disk). Tangent vectors are always expressed
// in the model's orthonormal frame at the base point, so the Euclidean norm of
// a Tangent is its Riemannian length.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tubed/errors.hpp"

namespace tubed {

inline constexpr int kMaxCoordDim = 4;

using Point = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxCoordDim, 1>;
using Tangent = Point;

enum class ModelKind { Euclidean, FlatTorus, Sphere, HyperbolicPlane };

struct CurvatureBounds {
  double lower;
  double upper;
};

namespace detail {

inline double torus_ball_volume(double radius, std::span<const double> periods) {
  const std::size_t n = periods.size();
  if (radius <= 0.0) return 0.0;
  const double half_last = periods[n - 1] / 2.0;
  if (n == 1) return std::min(2.0 * radius, periods[0]);
  if (n == 2) {
    // Area of the disk intersected with the centered fundamental rectangle.
    const double a = periods[0] / 2.0;
    const double b = periods[1] / 2.0;
    const double r2 = radius * radius;
    auto arc = [&](double x) { return 0.5 * (x * std::sqrt(std::max(0.0, r2 - x * x)) + r2 * std::asin(std::min(1.0, x / radius))); };
    const double x_end = std::min(a, radius);
    const double x_flat = std::min(x_end, std::sqrt(std::max(0.0, r2 - b * b)));
    const double quadrant = b * x_flat + (arc(x_end) - arc(x_flat));
    return 4.0 * quadrant;
  }
  const double z_end = std::min(radius, half_last);
  auto slice = [&](double z) { return torus_ball_volume(std::sqrt(std::max(0.0, radius * radius - z * z)), periods.first(n - 1)); };
  return 2.0 * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(slice, 0.0, z_end, 15, 1e-13);
}

}  // namespace detail

class ManifoldModel {
 public:
  static ManifoldModel euclidean(int n) {
    if (n < 1 || n > kMaxCoordDim) throw DomainError("manifold-models", "euclidean dimension must be in [1, 4]");
    ManifoldModel m;
    m.kind_ = ModelKind::Euclidean;
    m.dim_ = n;
    return m;
  }

  static ManifoldModel flat_torus(std::vector<double> periods) {
    if (periods.empty() || periods.size() > static_cast<std::size_t>(kMaxCoordDim))
      throw DomainError("manifold-models", "flat torus dimension must be in [1, 4]");
    for (double l : periods)
      if (!(l > 0.0) || !std::isfinite(l)) throw DomainError("manifold-models", "torus periods must be positive");
    ManifoldModel m;
    m.kind_ = ModelKind::FlatTorus;
    m.dim_ = static_cast<int>(periods.size());
    m.periods_ = std::move(periods);
    return m;
  }

  static ManifoldModel sphere(double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius)) throw DomainError("manifold-models", "sphere radius must be positive");
    ManifoldModel m;
    m.kind_ = ModelKind::Sphere;
    m.dim_ = 2;
    m.radius_ = radius;
    return m;
  }

  /// Hyperbolic plane with curvature -1/scale^2 (Poincare disk coordinates;
  /// all lengths are scale times the unit-curvature ones).
  static ManifoldModel hyperbolic_plane(double scale = 1.0) {
    if (!(scale > 0.0) || !std::isfinite(scale)) throw DomainError("manifold-models", "hyperbolic scale must be positive");
    ManifoldModel m;
    m.kind_ = ModelKind::HyperbolicPlane;
    m.dim_ = 2;
    m.radius_ = scale;
    return m;
  }

  /// The same manifold with its metric multiplied by k^2 (lengths times k).
  ManifoldModel rescaled(double k) const {
    if (!(k > 0.0) || !std::isfinite(k)) throw DomainError("manifold-models", "rescale factor must be positive");
    switch (kind_) {
      case ModelKind::FlatTorus: {
        std::vector<double> p(periods_);
        for (double& l : p) l *= k;
        return flat_torus(std::move(p));
      }
      case ModelKind::Sphere: return sphere(radius_ * k);
      case ModelKind::HyperbolicPlane: return hyperbolic_plane(radius_ * k);
      default: return *this;
    }
  }

  /// Smallest k >= 1 with |sec| <= 1/100 and inj >= 10 after rescaling by k.
  double normalization_factor() const {
    const CurvatureBounds b = curvature_bounds();
    const double sec = std::max(std::abs(b.lower), std::abs(b.upper));
    double k = 1.0;
    if (sec > 0.01) k = std::max(k, std::sqrt(sec / 0.01));
    const double inj = injectivity_radius();
    if (inj < 10.0) k = std::max(k, 10.0 / inj);
    return k;
  }

  ModelKind kind() const { return kind_; }

  std::string_view kind_name() const {
    switch (kind_) {
      case ModelKind::Euclidean: return "euclidean";
      case ModelKind::FlatTorus: return "flat_torus";
      case ModelKind::Sphere: return "sphere";
      case ModelKind::HyperbolicPlane: return "hyperbolic_plane";
    }
    return "unknown";
  }

  /// Intrinsic dimension n (length of a Tangent).
  int dimension() const { return dim_; }

  /// Number of stored coordinates per point (3 for the sphere, which is kept
  /// in ambient coordinates of R^3).
  int coord_dimension() const { return kind_ == ModelKind::Sphere ? 3 : dim_; }

  const std::vector<double>& periods() const { return periods_; }
  /// Sphere radius, or the curvature radius of the hyperbolic plane.
  double radius() const { return radius_; }

  /// True for models whose coordinates are Euclidean up to translations.
  bool is_flat() const { return kind_ == ModelKind::Euclidean || kind_ == ModelKind::FlatTorus; }

  CurvatureBounds curvature_bounds() const {
    switch (kind_) {
      case ModelKind::Sphere: return {1.0 / (radius_ * radius_), 1.0 / (radius_ * radius_)};
      case ModelKind::HyperbolicPlane: return {-1.0 / (radius_ * radius_), -1.0 / (radius_ * radius_)};
      default: return {0.0, 0.0};
    }
  }

  double injectivity_radius() const {
    switch (kind_) {
      case ModelKind::Sphere: return std::numbers::pi * radius_;
      case ModelKind::FlatTorus: return *std::min_element(periods_.begin(), periods_.end()) / 2.0;
      default: return std::numeric_limits<double>::infinity();
    }
  }

  /// Canonical base point: the coordinate origin, or the north pole.
  Point origin() const {
    Point p = Point::Zero(coord_dimension());
    if (kind_ == ModelKind::Sphere) p(2) = radius_;
    return p;
  }

  bool is_valid(const Point& p) const {
    if (p.size() != coord_dimension() || !p.allFinite()) return false;
    switch (kind_) {
      case ModelKind::FlatTorus:
        for (int i = 0; i < dim_; ++i)
          if (p(i) < 0.0 || p(i) >= periods_[i]) return false;
        return true;
      case ModelKind::Sphere: return std::abs(p.norm() - radius_) <= 1e-9 * radius_;
      case ModelKind::HyperbolicPlane: return p.squaredNorm() < 1.0;
      default: return true;
    }
  }

  void validate(const Point& p) const {
    if (!is_valid(p)) throw DomainError("manifold-models", "invalid coordinates for model " + std::string(kind_name()));
  }

  double distance(const Point& p, const Point& q) const {
    validate(p);
    validate(q);
    return distance_unchecked(p, q);
  }

  /// Distance without coordinate validation; for inner loops over points
  /// that were validated on construction.
  double distance_unchecked(const Point& p, const Point& q) const {
    switch (kind_) {
      case ModelKind::Euclidean: return (p - q).norm();
      case ModelKind::FlatTorus: {
        // Minimum over the 3^n lattice shifts; the squared norm separates per
        // axis so the minimum is taken coordinatewise.
        double s = 0.0;
        for (int i = 0; i < dim_; ++i) {
          const double d = wrapped_delta(q(i) - p(i), periods_[i]);
          s += d * d;
        }
        return std::sqrt(s);
      }
      case ModelKind::Sphere: {
        const Eigen::Vector3d u = p.head<3>();
        const Eigen::Vector3d v = q.head<3>();
        return radius_ * std::atan2(u.cross(v).norm(), u.dot(v));
      }
      case ModelKind::HyperbolicPlane: {
        const std::complex<double> a(p(0), p(1));
        const std::complex<double> b(q(0), q(1));
        const double num = std::abs(a - b);
        if (num == 0.0) return 0.0;
        const double den = std::abs(1.0 - std::conj(a) * b);
        return 2.0 * radius_ * std::atanh(std::min(num / den, std::nextafter(1.0, 0.0)));
      }
    }
    return 0.0;
  }

  /// Orthonormal tangent frame at p as columns in coordinate space.
  Eigen::Matrix<double, 3, 2> sphere_frame(const Point& p) const {
    const Eigen::Vector3d u = p.head<3>().normalized();
    int order[3] = {0, 1, 2};
    std::sort(order, order + 3, [&](int a, int b) {
      return std::abs(u(a)) < std::abs(u(b)) || (std::abs(u(a)) == std::abs(u(b)) && a < b);
    });
    Eigen::Vector3d e1 = Eigen::Vector3d::Unit(order[0]);
    e1 -= e1.dot(u) * u;
    e1.normalize();
    Eigen::Vector3d e2 = u.cross(e1);
    Eigen::Matrix<double, 3, 2> frame;
    frame.col(0) = e1;
    frame.col(1) = e2;
    return frame;
  }

  Point exp_map(const Point& p, const Tangent& v) const {
    validate(p);
    if (v.size() != dim_ || !v.allFinite()) throw DomainError("manifold-models", "tangent vector has wrong size");
    switch (kind_) {
      case ModelKind::Euclidean: return p + v;
      case ModelKind::FlatTorus: {
        Point q = p + v;
        for (int i = 0; i < dim_; ++i) q(i) = wrap(q(i), periods_[i]);
        return q;
      }
      case ModelKind::Sphere: {
        const double len = v.norm();
        if (len == 0.0) return p;
        const Eigen::Vector3d t = sphere_frame(p) * v.head<2>();
        const double angle = len / radius_;
        Eigen::Vector3d q = std::cos(angle) * p.head<3>() + radius_ * std::sin(angle) * t / len;
        q *= radius_ / q.norm();
        return Point(q);
      }
      case ModelKind::HyperbolicPlane: {
        const double len = v.norm() / radius_;
        if (len == 0.0) return p;
        const std::complex<double> a(p(0), p(1));
        const double norm = v.norm();
        const std::complex<double> z = std::tanh(len / 2.0) * std::complex<double>(v(0) / norm, v(1) / norm);
        const std::complex<double> w = (z + a) / (1.0 + std::conj(a) * z);
        Point q(2);
        q << w.real(), w.imag();
        if (q.squaredNorm() >= 1.0) q *= std::nextafter(1.0, 0.0) / q.norm();
        return q;
      }
    }
    return p;
  }

  Tangent log_map(const Point& p, const Point& q) const {
    validate(p);
    validate(q);
    switch (kind_) {
      case ModelKind::Euclidean: return q - p;
      case ModelKind::FlatTorus: {
        Tangent v(dim_);
        for (int i = 0; i < dim_; ++i) v(i) = wrapped_delta(q(i) - p(i), periods_[i]);
        if (v.norm() >= injectivity_radius())
          throw RangeError("manifold-models", "log_map: point beyond the injectivity radius of the torus");
        return v;
      }
      case ModelKind::Sphere: {
        const Eigen::Vector3d u = p.head<3>() / radius_;
        const Eigen::Vector3d w = q.head<3>() / radius_;
        const double s = u.cross(w).norm();
        const double c = u.dot(w);
        const double angle = std::atan2(s, c);
        if (angle >= std::numbers::pi * (1.0 - 1e-12))
          throw RangeError("manifold-models", "log_map: antipodal point on the sphere");
        Tangent v = Tangent::Zero(2);
        if (s == 0.0) return v;
        const Eigen::Vector3d dir = (w - c * u) / s;
        v = sphere_frame(p).transpose() * (radius_ * angle * dir);
        return v;
      }
      case ModelKind::HyperbolicPlane: {
        const std::complex<double> a(p(0), p(1));
        const std::complex<double> b(q(0), q(1));
        const std::complex<double> z = (b - a) / (1.0 - std::conj(a) * b);
        const double m = std::abs(z);
        Tangent v = Tangent::Zero(2);
        if (m == 0.0) return v;
        const double len = 2.0 * radius_ * std::atanh(std::min(m, std::nextafter(1.0, 0.0)));
        v << len * z.real() / m, len * z.imag() / m;
        return v;
      }
    }
    return Tangent::Zero(dim_);
  }

  /// Volume of the open metric ball of radius R.
  double ball_volume(double R) const {
    if (R < 0.0) throw DomainError("manifold-models", "ball radius must be nonnegative");
    switch (kind_) {
      case ModelKind::Euclidean:
        return std::pow(std::numbers::pi, dim_ / 2.0) / std::tgamma(dim_ / 2.0 + 1.0) * std::pow(R, dim_);
      case ModelKind::FlatTorus: return detail::torus_ball_volume(R, periods_);
      case ModelKind::Sphere: {
        const double angle = std::min(R / radius_, std::numbers::pi);
        return 2.0 * std::numbers::pi * radius_ * radius_ * (1.0 - std::cos(angle));
      }
      case ModelKind::HyperbolicPlane: return 2.0 * std::numbers::pi * radius_ * radius_ * (std::cosh(R / radius_) - 1.0);
    }
    return 0.0;
  }

  /// Length factor of geodesic circles in 2-dimensional models: a circle of
  /// radius rho has length 2*pi*circle_factor(rho).
  double circle_factor(double rho) const {
    switch (kind_) {
      case ModelKind::Sphere: return radius_ * std::sin(std::min(rho / radius_, std::numbers::pi));
      case ModelKind::HyperbolicPlane: return radius_ * std::sinh(rho / radius_);
      default: return rho;
    }
  }

  friend bool operator==(const ManifoldModel& a, const ManifoldModel& b) {
    return a.kind_ == b.kind_ && a.dim_ == b.dim_ && a.periods_ == b.periods_ && a.radius_ == b.radius_;
  }

 private:
  ManifoldModel() = default;

  static double wrap(double x, double period) {
    double y = x - period * std::floor(x / period);
    if (y >= period) y = 0.0;
    return y;
  }

  static double wrapped_delta(double d, double period) {
    const double candidates[3] = {d - period, d, d + period};
    double best = candidates[1];
    for (double c : candidates)
      if (std::abs(c) < std::abs(best)) best = c;
    return best;
  }

  ModelKind kind_ = ModelKind::Euclidean;
  int dim_ = 0;
  std::vector<double> periods_;
  double radius_ = 0.0;
};

}  // namespace tubed
