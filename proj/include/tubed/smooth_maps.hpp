#pragma once

// The separating map f1, the locally bi-Lipschitz map f2, their scaled sum,
// and the empirical certificates attached to them (epsilon selection,
// derivative bounds along geodesics, distortion on unit balls).

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tubed/bump.hpp"
#include "tubed/errors.hpp"
#include "tubed/graph.hpp"
#include "tubed/lattice.hpp"
#include "tubed/net.hpp"
#include "tubed/partition.hpp"
#include "tubed/rng.hpp"

namespace tubed {

using PointMap = std::function<Eigen::VectorXd(const Point&)>;

// ---- f1 ---------------------------------------------------------------------

/// Lattice coordinates of net vertices by grid snapping; the pitch must be
/// small enough that no two vertices share a cell.
inline LatticeCoords grid_lattice_coords(const Net& net, double pitch) {
  if (!net.model().is_flat()) throw PreconditionError("smooth-maps", "grid lattice coords need a flat model");
  if (!(pitch > 0.0)) throw DomainError("smooth-maps", "grid pitch must be positive");
  LatticeCoords out;
  out.n = net.model().dimension();
  std::map<LatticePoint, std::uint32_t> owner;
  for (std::uint32_t v = 0; v < net.size(); ++v) {
    out.coords.push_back(GridSnapEmbedder::snap(net.vertices[v], pitch));
    auto [it, inserted] = owner.emplace(out.coords.back(), v);
    if (!inserted)
      throw ConfigurationError("smooth-maps", "grid snap maps vertices " + std::to_string(it->second) + " and " +
                                                  std::to_string(v) + " to " + lattice_point_str(out.coords.back()));
  }
  return out;
}

/// f1(x) = sum_v phi_v(x) Phi(c_v), a barycenter of lattice images.
class F1Map {
 public:
  F1Map(std::shared_ptr<const PartitionOfUnity> partition, const LatticeCoords& coords, const PhiMap& phi)
      : partition_(std::move(partition)), phi_(phi), available_(coords.coords.size()) {
    if (coords.n != phi.n())
      throw ConfigurationError("smooth-maps", "lattice coords of dimension " + std::to_string(coords.n) +
                                                  " do not match Phi for n = " + std::to_string(phi.n()));
    images_.resize(phi.target_dimension(), static_cast<Eigen::Index>(available_));
    for (std::size_t v = 0; v < available_; ++v) images_.col(static_cast<Eigen::Index>(v)) = phi(coords.coords[v]);
  }

  int dimension() const { return phi_.target_dimension(); }
  const PartitionOfUnity& partition() const { return *partition_; }
  const PhiMap& phi() const { return phi_; }

  /// Phi(c_v).
  Eigen::VectorXd image(std::uint32_t v) const {
    require(v);
    return images_.col(v);
  }

  Eigen::VectorXd eval(const PartitionSample& s) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(dimension());
    for (std::size_t i = 0; i < s.support.size(); ++i) {
      require(s.support[i]);
      out += s.weights[i] * images_.col(s.support[i]);
    }
    return out;
  }

  Eigen::VectorXd operator()(const Point& x) const { return eval(partition_->eval(x)); }

 private:
  void require(std::uint32_t v) const {
    if (v >= available_)
      throw ConfigurationError("smooth-maps", "f1: net vertex " + std::to_string(v) + " has no lattice coordinates");
  }

  std::shared_ptr<const PartitionOfUnity> partition_;
  PhiMap phi_;
  std::size_t available_;
  Eigen::MatrixXd images_;
};

// ---- f2 ---------------------------------------------------------------------

struct Coloring {
  std::vector<std::uint32_t> color;
  std::uint32_t classes = 0;
};

/// First-fit coloring in vertex order.
inline Coloring greedy_coloring(const Graph& g) {
  Coloring c;
  c.color.assign(g.size(), 0);
  std::vector<std::uint32_t> seen(g.max_degree() + 2, std::numeric_limits<std::uint32_t>::max());
  for (Vertex v = 0; v < g.size(); ++v) {
    for (Vertex w : g.neighbors(v))
      if (w < v) seen[c.color[w]] = v;
    std::uint32_t k = 0;
    while (seen[k] == v) ++k;
    c.color[v] = k;
    c.classes = std::max(c.classes, k + 1);
  }
  return c;
}

struct ColorClassReport {
  bool ok = true;
  /// Same-colored pairs closer than the required separation.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> conflicts;
};

/// Exact check that same-colored vertices are at distance >= separation.
/// separation = 4r is the statement that the balls 2B_v of a class are
/// pairwise disjoint.
inline ColorClassReport check_color_classes(const Net& net, const Coloring& coloring, double separation) {
  ColorClassReport rep;
  const NeighborIndex index = net.make_index(separation);
  for (std::uint32_t v = 0; v < net.size(); ++v) {
    const Point p = net.vertices[v];
    index.for_each_candidate(p, separation, [&](std::uint32_t w) {
      if (w > v && coloring.color[w] == coloring.color[v] &&
          net.model().distance_unchecked(p, net.vertices[w]) < separation)
        rep.conflicts.emplace_back(v, w);
    });
  }
  std::sort(rep.conflicts.begin(), rep.conflicts.end());
  rep.ok = rep.conflicts.empty();
  return rep;
}

struct F2Options {
  /// s_v = iota_v o log_v on B(v, plateau r); support is B(v, 2 plateau r).
  double plateau = 2.0;
  /// Classes are colors of Gamma_lambda, so same-class vertices sit at
  /// distance >= 2 lambda r. Needs 2 lambda >= 3 plateau, which keeps every
  /// other class member's support off the plateau of v.
  double lambda = 3.0;

  /// sigma(2|x|) with classes from Gamma_2, read verbatim; its plateau is
  /// only B(v, r/2).
  static F2Options verbatim() { return {0.5, 2.0}; }
};

/// f2 = (S_1, ..., S_m), S_i = sum over class i of s_v, and
/// s_v(x) = sigma(|log_v x| / (plateau r)) iota_v(log_v x). iota_v is the
/// model's canonical tangent frame at v.
class F2Map {
 public:
  F2Map(std::shared_ptr<const Net> net, Coloring coloring, const F2Options& opts = {})
      : net_(std::move(net)),
        coloring_(std::move(coloring)),
        opts_(opts),
        support_(2.0 * opts.plateau * net_->r),
        index_(net_->make_index(support_)) {
    if (coloring_.color.size() != net_->size())
      throw ConfigurationError("smooth-maps", "f2: coloring does not cover the net");
    if (!(opts.plateau > 0.0) || opts.lambda < 1.0 || 2.0 * opts.lambda < 3.0 * opts.plateau)
      throw ConfigurationError("smooth-maps", "f2: need plateau > 0, lambda >= 1 and 2 lambda >= 3 plateau");
    n_ = net_->model().dimension();
  }

  int dimension() const { return static_cast<int>(coloring_.classes) * n_; }
  const Net& net() const { return *net_; }
  const Coloring& coloring() const { return coloring_; }
  const F2Options& options() const { return opts_; }

  /// s_v(x) in R^n.
  Eigen::VectorXd local(std::uint32_t v, const Point& x) const {
    const Point c = net_->vertices[v];
    if (!(net_->model().distance_unchecked(c, x) < support_)) return Eigen::VectorXd::Zero(n_);
    const Tangent t = net_->model().log_map(c, x);
    return bump(t.norm() / (opts_.plateau * net_->r)) * Eigen::VectorXd(t);
  }

  Eigen::VectorXd operator()(const Point& x) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(dimension());
    const double scale = opts_.plateau * net_->r;
    index_.for_each_candidate(x, support_, [&](std::uint32_t v) {
      const Point c = net_->vertices[v];
      if (!(net_->model().distance_unchecked(c, x) < support_)) return;
      const Tangent t = net_->model().log_map(c, x);
      const double w = bump(t.norm() / scale);
      if (w > 0.0) out.segment(static_cast<Eigen::Index>(coloring_.color[v]) * n_, n_) += w * Eigen::VectorXd(t);
    });
    return out;
  }

 private:
  std::shared_ptr<const Net> net_;
  Coloring coloring_;
  F2Options opts_;
  double support_;
  NeighborIndex index_;
  int n_ = 0;
};

/// Colors Gamma_lambda greedily and builds f2 on it.
inline F2Map make_f2(std::shared_ptr<const Net> net, const F2Options& opts = {}) {
  const IntersectionGraph g = intersection_graph(*net, opts.lambda);
  return F2Map(std::move(net), greedy_coloring(g.graph), opts);
}

// ---- combined map -----------------------------------------------------------

/// x -> (eps f1(x), eps f2(x)).
class CombinedMap {
 public:
  CombinedMap(std::shared_ptr<const F1Map> f1, std::shared_ptr<const F2Map> f2, double epsilon)
      : f1_(std::move(f1)), f2_(std::move(f2)), epsilon_(epsilon) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
      throw PreconditionError("smooth-maps", "combined map: epsilon must be positive");
  }

  double epsilon() const { return epsilon_; }
  int dimension() const { return f1_->dimension() + f2_->dimension(); }
  const F1Map& f1() const { return *f1_; }
  const F2Map& f2() const { return *f2_; }

  /// f1 (+) f2 without the epsilon factor.
  Eigen::VectorXd unscaled(const Point& x) const {
    Eigen::VectorXd out(dimension());
    out << (*f1_)(x), (*f2_)(x);
    return out;
  }

  Eigen::VectorXd operator()(const Point& x) const { return epsilon_ * unscaled(x); }

 private:
  std::shared_ptr<const F1Map> f1_;
  std::shared_ptr<const F2Map> f2_;
  double epsilon_;
};

// ---- sampling helpers -------------------------------------------------------

inline Tangent random_unit_tangent(const ManifoldModel& model, Rng& rng) {
  Tangent u(model.dimension());
  do {
    for (int i = 0; i < u.size(); ++i) u(i) = rng.normal();
  } while (u.norm() < 1e-12);
  return u / u.norm();
}

/// exp_c of a tangent vector uniform in the radius-R tangent ball.
inline Point random_point_in_ball(const ManifoldModel& model, const Point& c, double R, Rng& rng) {
  const Tangent u = random_unit_tangent(model, rng);
  const double rho = R * std::pow(rng.uniform(), 1.0 / model.dimension());
  return model.exp_map(c, rho * u);
}

// ---- epsilon ----------------------------------------------------------------

struct EpsilonOptions {
  /// Random orthonormal tangent frames per sample point.
  std::size_t frames_per_point = 1;
  double step = 1e-4;
  double margin = 1.25;
  std::uint64_t seed = 1;
};

struct EpsilonEstimate {
  double epsilon = 0.0;
  /// sup over sampled x of max_{|u| = 1} |df_x(u)|^2.
  double sup_ratio = 0.0;
  std::size_t directions = 0;
  std::size_t worst_sample = 0;
};

/// Random orthonormal basis of the tangent space (Gram-Schmidt on normals).
inline Eigen::MatrixXd random_tangent_frame(const ManifoldModel& model, Rng& rng) {
  const int n = model.dimension();
  Eigen::MatrixXd Q(n, n);
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd u;
    do {
      u = Eigen::VectorXd(random_unit_tangent(model, rng));
      for (int i = 0; i < j; ++i) u -= Q.col(i).dot(u) * Q.col(i);
    } while (u.norm() < 1e-6);
    Q.col(j) = u.normalized();
  }
  return Q;
}

/// The pullback metric ratio at x is the top singular value squared of the
/// differential, read off central differences along a random frame.
/// eps = min(1, 1 / sqrt(2 margin sup_ratio)) then gives eps^2 h < g / 2 on
/// the samples with slack `margin`.
inline EpsilonEstimate choose_epsilon(const PointMap& f, const PointSet& samples, const EpsilonOptions& opts = {}) {
  const ManifoldModel& model = samples.model();
  if (!(opts.step > 0.0)) throw DomainError("smooth-maps", "choose_epsilon: step must be positive");
  Rng rng(opts.seed);
  EpsilonEstimate est;
  const int n = model.dimension();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Point x = samples[i];
    for (std::size_t k = 0; k < opts.frames_per_point; ++k) {
      const Eigen::MatrixXd Q = random_tangent_frame(model, rng);
      Eigen::MatrixXd J;
      for (int j = 0; j < n; ++j) {
        const Tangent u = Q.col(j);
        const Eigen::VectorXd d =
            (f(model.exp_map(x, opts.step * u)) - f(model.exp_map(x, -opts.step * u))) / (2.0 * opts.step);
        if (j == 0) J.resize(d.size(), n);
        J.col(j) = d;
      }
      const double top = J.rows() == 0 ? 0.0 : Eigen::JacobiSVD<Eigen::MatrixXd>(J).singularValues()(0);
      if (top * top > est.sup_ratio) {
        est.sup_ratio = top * top;
        est.worst_sample = i;
      }
      est.directions += static_cast<std::size_t>(n);
    }
  }
  if (est.directions == 0 || !(est.sup_ratio > 0.0) || !std::isfinite(est.sup_ratio))
    throw NumericError("smooth-maps", "choose_epsilon: degenerate metric ratio estimate");
  est.epsilon = std::min(1.0, 1.0 / std::sqrt(2.0 * opts.margin * est.sup_ratio));
  return est;
}

// ---- derivative bounds ------------------------------------------------------

struct DerivativeOptions {
  int k_max = 4;
  std::size_t geodesics = 100;
  double step = 0.02;
  /// Grid t in [-span, span] along each geodesic.
  double span = 0.5;
  int grid = 11;
  std::uint64_t seed = 1;
};

struct DerivativeBounds {
  /// C[k] = max |d^k/dt^k f(gamma(t))|, k = 1..k_max; C[0] unused.
  std::array<double, 5> C{};
  int k_max = 0;
  std::size_t geodesics = 0;
};

/// Central differences of f(exp_x(t u)) with stencil -2h..2h.
inline DerivativeBounds derivative_bounds(const PointMap& f, const PointSet& starts, const DerivativeOptions& opts = {}) {
  if (opts.k_max < 1 || opts.k_max > 4) throw DomainError("smooth-maps", "derivative_bounds: k_max must be in 1..4");
  if (!(opts.step >= 1e-6)) throw NumericError("smooth-maps", "derivative_bounds: step size below 1e-6");
  if (starts.empty()) throw PreconditionError("smooth-maps", "derivative_bounds: no start points");
  const ManifoldModel& model = starts.model();
  const double h = opts.step;
  Rng rng(opts.seed);
  DerivativeBounds out;
  out.k_max = opts.k_max;
  for (std::size_t g = 0; g < opts.geodesics; ++g) {
    const Point x = starts[rng.below(starts.size())];
    const Tangent u = random_unit_tangent(model, rng);
    for (int j = 0; j < opts.grid; ++j) {
      const double t =
          opts.grid == 1 ? 0.0 : -opts.span + 2.0 * opts.span * static_cast<double>(j) / (opts.grid - 1);
      std::array<Eigen::VectorXd, 5> v;
      for (int m = -2; m <= 2; ++m) v[m + 2] = f(model.exp_map(x, (t + m * h) * u));
      const std::array<Eigen::VectorXd, 5> d = {
          Eigen::VectorXd(),
          (v[3] - v[1]) / (2.0 * h),
          (v[3] - 2.0 * v[2] + v[1]) / (h * h),
          (v[4] - 2.0 * v[3] + 2.0 * v[1] - v[0]) / (2.0 * h * h * h),
          (v[4] - 4.0 * v[3] + 6.0 * v[2] - 4.0 * v[1] + v[0]) / (h * h * h * h),
      };
      for (int k = 1; k <= opts.k_max; ++k) out.C[k] = std::max(out.C[k], d[k].norm());
    }
    ++out.geodesics;
  }
  return out;
}

// ---- distortion -------------------------------------------------------------

struct DistortionOptions {
  std::size_t pairs_per_ball = 10'000;
  double ball_radius = 1.0;
  std::uint64_t seed = 1;
};

struct DistortionReport {
  /// min and max of |f(x) - f(y)| / d(x, y) over all balls.
  double lower = std::numeric_limits<double>::infinity();
  double upper = 0.0;
  std::vector<std::pair<double, double>> per_ball;
  std::size_t pairs = 0;
  /// Histogram of log10 ratio over [-3, 1) in 40 bins; clamps at the ends.
  std::vector<std::size_t> histogram = std::vector<std::size_t>(40, 0);
};

/// Pairs alternate between two independent points of the ball and a point
/// with a partner at log-uniform distance in [1e-3, 1] along a geodesic, so
/// small scales are represented.
inline DistortionReport distortion_scan(const PointMap& f, const PointSet& centers, const DistortionOptions& opts = {}) {
  const ManifoldModel& model = centers.model();
  DistortionReport rep;
  Rng rng(opts.seed);
  for (std::size_t b = 0; b < centers.size(); ++b) {
    const Point c = centers[b];
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t k = 0; k < opts.pairs_per_ball; ++k) {
      const Point x = random_point_in_ball(model, c, opts.ball_radius, rng);
      Point y;
      if (k % 2 == 0) {
        y = random_point_in_ball(model, c, opts.ball_radius, rng);
      } else {
        const double t = std::pow(10.0, rng.uniform(-3.0, 0.0));
        y = model.exp_map(x, t * random_unit_tangent(model, rng));
        if (model.distance_unchecked(c, y) > opts.ball_radius) y = random_point_in_ball(model, c, opts.ball_radius, rng);
      }
      const double d = model.distance_unchecked(x, y);
      if (!(d > 1e-9)) continue;
      const double ratio = (f(x) - f(y)).norm() / d;
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
      const double bin = std::floor((std::log10(std::max(ratio, 1e-300)) + 3.0) * 10.0);
      rep.histogram[static_cast<std::size_t>(std::clamp(bin, 0.0, 39.0))]++;
      ++rep.pairs;
    }
    rep.per_ball.emplace_back(lo, hi);
    rep.lower = std::min(rep.lower, lo);
    rep.upper = std::max(rep.upper, hi);
  }
  return rep;
}

// ---- separation and normalization scans -------------------------------------

struct SeparationReport {
  /// min |f(x) - f(y)| over tested pairs with d(x, y) >= min_distance.
  double min_image = std::numeric_limits<double>::infinity();
  std::size_t pairs = 0;
  std::size_t below_threshold = 0;
};

/// Pairs from `region`: half uniform, half with the partner pushed just past
/// min_distance along a geodesic, where separation is tightest. Partners
/// leaving B(center, max_radius) are redrawn.
inline SeparationReport separation_scan(const PointMap& f, const PointSet& region, const Point& center,
                                        double max_radius, double min_distance, double threshold, std::size_t pairs,
                                        std::uint64_t seed) {
  const ManifoldModel& model = region.model();
  if (region.empty()) throw PreconditionError("smooth-maps", "separation_scan: empty region");
  Rng rng(seed);
  SeparationReport rep;
  std::size_t tries = 0;
  while (rep.pairs < pairs && tries < 100 * pairs + 100) {
    ++tries;
    const Point x = region[rng.below(region.size())];
    Point y;
    if (rep.pairs % 2) {
      y = region[rng.below(region.size())];
    } else {
      y = model.exp_map(x, rng.uniform(min_distance, 1.05 * min_distance) * random_unit_tangent(model, rng));
      if (!(model.distance_unchecked(center, y) <= max_radius)) continue;
    }
    if (model.distance_unchecked(x, y) < min_distance) continue;
    const double d = (f(x) - f(y)).norm();
    rep.min_image = std::min(rep.min_image, d);
    if (d < threshold) ++rep.below_threshold;
    ++rep.pairs;
  }
  return rep;
}

struct PartitionScan {
  /// max |sum_v phi_v(x) - 1|.
  double normalization_error = 0.0;
  double psi_min = std::numeric_limits<double>::infinity();
  double psi_max = 0.0;
  std::size_t max_support = 0;
  std::size_t points = 0;
};

inline PartitionScan partition_scan(const PartitionOfUnity& partition, const PointSet& points) {
  PartitionScan rep;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const PartitionSample s = partition.eval(points[i]);
    double sum = 0.0;
    for (double w : s.weights) sum += w;
    rep.normalization_error = std::max(rep.normalization_error, std::abs(sum - 1.0));
    rep.psi_min = std::min(rep.psi_min, s.psi_sum);
    rep.psi_max = std::max(rep.psi_max, s.psi_sum);
    rep.max_support = std::max(rep.max_support, s.support.size());
    ++rep.points;
  }
  return rep;
}

}  // namespace tubed
