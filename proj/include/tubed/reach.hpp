#pragma once

// Reach of an embedded sample from Federer's quotient
//   q(x, y) = |y - x|^2 / (2 dist(y - x, T_x)),
// minimized over ordered pairs. The minimum over a finite sample bounds the
// true infimum from above, so the estimate is biased high on sparse samples.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tubed/errors.hpp"
#include "tubed/point_set.hpp"
#include "tubed/rng.hpp"
#include "tubed/smooth_maps.hpp"

namespace tubed {

struct ReachOptions {
  /// Pairs with |y - x|^2 below this are skipped.
  double numerator_floor = 1e-6;
  /// Pairs closer than this also feed the normal-curvature estimate.
  double local_scale = std::numeric_limits<double>::infinity();
};

struct ReachReport {
  /// +inf when no pair has a finite quotient.
  double reach_estimate = std::numeric_limits<double>::infinity();
  /// max over local pairs of 2 dist(y - x, T_x) / |y - x|^2.
  double max_normal_curvature = 0.0;
  std::size_t witness_i = 0;
  std::size_t witness_j = 0;
  std::size_t n_pairs = 0;
  std::uint64_t seed = 0;
  /// Positive reach estimate and no far-pair image closer than `scale`: the
  /// closest-point projection is unique on a neighborhood as far as the
  /// sample can tell.
  bool projection_injective = false;
  double scale = 0.0;

  // Far-pair separation (tubedness_check only).
  std::size_t far_pairs = 0;
  double far_min_image = std::numeric_limits<double>::infinity();
  std::size_t far_violations = 0;
};

/// `frames[i]` holds an orthonormal basis of T_{x_i} as columns.
inline ReachReport reach_estimate(const std::vector<Eigen::VectorXd>& points, const std::vector<Eigen::MatrixXd>& frames,
                                  const ReachOptions& opts = {}) {
  if (points.size() < 2) throw PreconditionError("geometry-checks", "reach_estimate needs at least 2 points");
  if (frames.size() != points.size()) throw PreconditionError("geometry-checks", "one tangent frame per point required");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const Eigen::MatrixXd& F = frames[i];
    if (F.rows() != points[i].size() || F.cols() == 0 ||
        !((F.transpose() * F - Eigen::MatrixXd::Identity(F.cols(), F.cols())).cwiseAbs().maxCoeff() <= 1e-9))
      throw PreconditionError("geometry-checks", "tangent frame " + std::to_string(i) + " is not orthonormal");
  }
  const auto N = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd P(points[0].size(), N);
  for (Eigen::Index j = 0; j < N; ++j) P.col(j) = points[static_cast<std::size_t>(j)];
  ReachReport rep;
  for (Eigen::Index i = 0; i < N; ++i) {
    const Eigen::MatrixXd& F = frames[static_cast<std::size_t>(i)];
    const Eigen::MatrixXd D = P.colwise() - P.col(i);
    const Eigen::MatrixXd R = D - F * (F.transpose() * D);
    for (Eigen::Index j = 0; j < N; ++j) {
      if (i == j) continue;
      const double num = D.col(j).squaredNorm();
      if (num < opts.numerator_floor) continue;
      ++rep.n_pairs;
      // Normal components at rounding level count as tangent.
      const double normal = R.col(j).norm();
      if (!(normal > 1e-12 * std::sqrt(num))) continue;
      const double q = num / (2.0 * normal);
      if (q < rep.reach_estimate) {
        rep.reach_estimate = q;
        rep.witness_i = static_cast<std::size_t>(i);
        rep.witness_j = static_cast<std::size_t>(j);
      }
      if (std::sqrt(num) <= opts.local_scale) rep.max_normal_curvature = std::max(rep.max_normal_curvature, 1.0 / q);
    }
  }
  rep.projection_injective = rep.reach_estimate > 0.0;
  return rep;
}

struct TubednessOptions {
  /// Sample points; each gets a companion at geodesic distance `probe`.
  std::size_t points = 1500;
  double probe = 0.1;
  /// Tangent frames by central differences with this step.
  double frame_step = 2.5e-5;
  std::size_t far_pairs = 10'000;
  double local_scale = 0.5;
  std::uint64_t seed = 1;
};

/// Orthonormal tangent frame of f at x from central differences along the
/// model's canonical frame. Rank deficiency is a NumericError.
inline Eigen::MatrixXd pushforward_frame(const PointMap& f, const ManifoldModel& model, const Point& x, double step,
                                         std::size_t index) {
  const int n = model.dimension();
  Eigen::MatrixXd J;
  for (int k = 0; k < n; ++k) {
    Tangent e = Tangent::Zero(n);
    e(k) = step;
    const Eigen::VectorXd d = (f(model.exp_map(x, e)) - f(model.exp_map(x, -e))) / (2.0 * step);
    if (k == 0) J.resize(d.size(), n);
    J.col(k) = d;
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  if (!(sv(n - 1) > 1e-8 * std::max(sv(0), 1e-300)))
    throw NumericError("geometry-checks", "tangent frame estimation failed at sample point " + std::to_string(index) +
                                              ": differential is rank deficient");
  return svd.matrixU().leftCols(n);
}

/// Evaluates f on a region sample, estimates its reach, and checks that no
/// pair with d_M >= 1 has image distance below min_far_image.
inline ReachReport tubedness_check(const PointMap& f, const PointSet& region, double min_far_image,
                                   const TubednessOptions& opts = {}) {
  const ManifoldModel& model = region.model();
  if (region.size() < 2) throw PreconditionError("geometry-checks", "tubedness_check needs a region sample");
  Rng rng(opts.seed);
  std::vector<Point> domain;
  for (std::size_t k = 0; k < opts.points; ++k) {
    const Point x = region[rng.below(region.size())];
    domain.push_back(x);
    domain.push_back(model.exp_map(x, opts.probe * random_unit_tangent(model, rng)));
  }
  std::vector<Eigen::VectorXd> images;
  std::vector<Eigen::MatrixXd> frames;
  for (std::size_t i = 0; i < domain.size(); ++i) {
    images.push_back(f(domain[i]));
    frames.push_back(pushforward_frame(f, model, domain[i], opts.frame_step, i));
  }
  ReachOptions ro;
  ro.local_scale = opts.local_scale;
  ReachReport rep = reach_estimate(images, frames, ro);
  rep.seed = opts.seed;
  rep.scale = min_far_image;

  std::size_t tries = 0;
  while (rep.far_pairs < opts.far_pairs && tries < 100 * opts.far_pairs) {
    ++tries;
    const Point x = region[rng.below(region.size())], y = region[rng.below(region.size())];
    if (model.distance_unchecked(x, y) < 1.0) continue;
    const double d = (f(x) - f(y)).norm();
    rep.far_min_image = std::min(rep.far_min_image, d);
    if (d < min_far_image) ++rep.far_violations;
    ++rep.far_pairs;
  }
  rep.projection_injective = rep.reach_estimate > 0.0 && rep.far_violations == 0;
  return rep;
}

}  // namespace tubed
