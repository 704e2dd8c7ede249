#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <numbers>

#include "tubed/reach.hpp"
#include "tubed/sff.hpp"

using namespace tubed;

namespace {

Eigen::Matrix2d sym(double a, double b, double c) {
  Eigen::Matrix2d m;
  m << a, b, b, c;
  return m;
}

SffSample random_sff(Rng& rng, int m, double bound) {
  SffSample s;
  for (int k = 0; k < m; ++k) s.s.push_back(sym(rng.uniform(-bound, bound), rng.uniform(-bound, bound), rng.uniform(-bound, bound)));
  return s;
}

// Gauss equation in an orthonormal normal frame: K = sum_k det s_k.
double gauss_equation(const SffSample& s) {
  double K = 0.0;
  for (const auto& m : s.s) K += m.determinant();
  return K;
}

double dense_grid_max(const SffSample& s, int N) {
  double best = 0.0;
  for (int i = 0; i < N; ++i) best = std::max(best, s.normal_at(std::numbers::pi * i / N).norm());
  return best;
}

// Fibonacci lattice on the sphere of radius R, with exact tangent frames.
void sphere_sample(std::size_t n, double R, std::vector<Eigen::VectorXd>& pts, std::vector<Eigen::MatrixXd>& frames) {
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / n, rho = std::sqrt(1.0 - z * z), t = golden * i;
    const Eigen::Vector3d u(rho * std::cos(t), rho * std::sin(t), z);
    pts.push_back(R * u);
    const Eigen::Vector3d a = std::abs(u.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
    const Eigen::Vector3d e1 = (a - a.dot(u) * u).normalized(), e2 = u.cross(e1);
    Eigen::MatrixXd F(3, 2);
    F << e1, e2;
    frames.push_back(F);
  }
}

Eigen::Matrix3d random_rotation(Rng& rng) {
  Eigen::Matrix3d A;
  for (int i = 0; i < 9; ++i) A(i / 3, i % 3) = rng.normal();
  Eigen::HouseholderQR<Eigen::Matrix3d> qr(A);
  return qr.householderQ();
}

}  // namespace

// ---- Gauss formula -------------------------------------------------------------

TEST(GaussCurvature, Witnesses) {
  const SffSample umbilic{{Eigen::Matrix2d::Identity()}};
  const SffSample saddle{{sym(1, 0, -1)}};
  const SffSample twisted{{sym(1, 0, -1), sym(0, 1, 0)}};
  const GaussTerms u = gauss_terms(umbilic), s = gauss_terms(saddle), t = gauss_terms(twisted);
  EXPECT_EQ(u.h(0), 1.0);
  EXPECT_EQ(u.h_hat, 1.0);
  EXPECT_EQ(u.K, 1.0);
  EXPECT_EQ(s.h(0), 0.0);
  EXPECT_EQ(s.h_hat, 0.5);
  EXPECT_EQ(s.K, -1.0);
  EXPECT_EQ(t.h.norm(), 0.0);
  EXPECT_EQ(t.h_hat, 1.0);
  EXPECT_EQ(t.K, -2.0);
  for (const auto* x : {&umbilic, &saddle, &twisted}) {
    const GaussTerms q = gauss_terms_quadrature(*x);
    EXPECT_NEAR(q.K, gauss_curvature(*x), 1e-12);
  }
  // s(u,u) = (cos 2t, sin 2t) for the codimension-2 witness.
  for (double a = 0; a < 3; a += 0.37) {
    const Eigen::VectorXd v = twisted.normal_at(a);
    EXPECT_NEAR(v(0), std::cos(2 * a), 1e-15);
    EXPECT_NEAR(v(1), std::sin(2 * a), 1e-15);
  }
}

TEST(GaussCurvature, ClosedFormMatchesQuadratureAndGaussEquation) {
  Rng rng(2);
  for (int i = 0; i < 2000; ++i) {
    const SffSample s = random_sff(rng, 1 + static_cast<int>(rng.below(4)), 3.0);
    const GaussTerms c = gauss_terms(s), q = gauss_terms_quadrature(s);
    ASSERT_LE((c.h - q.h).cwiseAbs().maxCoeff(), 1e-10);
    ASSERT_NEAR(c.h_hat, q.h_hat, 1e-10);
    ASSERT_NEAR(c.K, q.K, 1e-10);
    ASSERT_NEAR(c.K, gauss_equation(s), 1e-12);
  }
}

TEST(GaussCurvature, AsymmetricInputRejected) {
  Eigen::Matrix2d m;
  m << 1, 0.5, 0.25, 1;
  EXPECT_THROW(gauss_curvature(SffSample{{m}}), PreconditionError);
  EXPECT_THROW(gauss_curvature(SffSample{}), PreconditionError);
}

TEST(MaxNormalCurvature, ExamplesAndDenseGridOracle) {
  EXPECT_NEAR(max_normal_curvature(SffSample{{Eigen::Matrix2d::Identity()}}), 1.0, 1e-12);
  EXPECT_EQ(max_normal_curvature(SffSample{{Eigen::Matrix2d::Zero()}}), 0.0);
  EXPECT_NEAR(max_normal_curvature(SffSample{{sym(2, 0, 1)}}), 2.0, 1e-12);
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const SffSample s = random_sff(rng, 1 + static_cast<int>(rng.below(3)), 1.5);
    const double fast = max_normal_curvature(s), grid = dense_grid_max(s, 400'000);
    EXPECT_GE(fast, grid - 1e-12);
    EXPECT_NEAR(fast, grid, 1e-9);
  }
}

TEST(LemmaCheck, BoundaryWitnessesAndInapplicableCase) {
  const LemmaResult u = lemma_check(SffSample{{Eigen::Matrix2d::Identity()}});
  EXPECT_TRUE(u.applicable);
  EXPECT_TRUE(u.passes);
  EXPECT_EQ(u.K, 1.0);
  const LemmaResult t = lemma_check(SffSample{{sym(1, 0, -1), sym(0, 1, 0)}});
  EXPECT_TRUE(t.applicable);
  EXPECT_TRUE(t.passes);
  EXPECT_EQ(t.K, -2.0);
  const LemmaResult big = lemma_check(SffSample{{2.0 * Eigen::Matrix2d::Identity()}});
  EXPECT_FALSE(big.applicable);
  EXPECT_TRUE(big.passes);
  EXPECT_EQ(big.K, 4.0);
}

TEST(LemmaSweep, TenThousandAdmissibleSamples) {
  const auto t0 = std::chrono::steady_clock::now();
  const SweepReport rep = lemma_sweep({10'000, 3, 1.5, 7});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_EQ(rep.samples, 10'000u);
  EXPECT_EQ(rep.violations, 0u);
  EXPECT_GE(rep.K_min, -2.0 - 1e-9);
  EXPECT_LE(rep.K_max, 1.0 + 1e-9);
  EXPECT_LE(rep.quadrature_gap, 1e-10);
  EXPECT_LT(secs, 10.0);
}

// ---- reach ---------------------------------------------------------------------

TEST(Reach, UnitSphereControl) {
  std::vector<Eigen::VectorXd> pts;
  std::vector<Eigen::MatrixXd> frames;
  sphere_sample(5000, 1.0, pts, frames);
  const ReachReport r = reach_estimate(pts, frames);
  EXPECT_GE(r.reach_estimate, 0.95);
  EXPECT_LE(r.reach_estimate, 1.0 + 1e-9);
  EXPECT_LE(r.reach_estimate, 1.0 / r.max_normal_curvature + 1e-6);
  EXPECT_NE(r.witness_i, r.witness_j);
}

TEST(Reach, AffinePlaneIsInfinite) {
  Rng rng(4);
  const Eigen::Matrix3d Q = random_rotation(rng);
  std::vector<Eigen::VectorXd> pts;
  std::vector<Eigen::MatrixXd> frames;
  for (int i = 0; i < 400; ++i) {
    pts.push_back(Q * Eigen::Vector3d(rng.uniform(-2, 2), rng.uniform(-2, 2), 0.0) + Eigen::Vector3d(1, 2, 3));
    frames.push_back(Q.leftCols(2));
  }
  const ReachReport r = reach_estimate(pts, frames);
  EXPECT_TRUE(std::isinf(r.reach_estimate));
  EXPECT_EQ(r.max_normal_curvature, 0.0);
}

TEST(Reach, ParallelPlanes) {
  const double delta = 0.3;
  Rng rng(5);
  std::vector<Eigen::VectorXd> pts;
  std::vector<Eigen::MatrixXd> frames;
  Eigen::MatrixXd F(3, 2);
  F << 1, 0, 0, 1, 0, 0;
  for (int i = 0; i < 500; ++i) {
    const double z = i % 2 ? delta : -delta;
    pts.push_back(Eigen::Vector3d(rng.uniform(-1, 1), rng.uniform(-1, 1), z));
    frames.push_back(F);
  }
  const ReachReport r = reach_estimate(pts, frames);
  EXPECT_LE(r.reach_estimate, delta * (1.0 + 1e-2));
  EXPECT_GE(r.reach_estimate, delta);
}

TEST(Reach, TorusOfRevolutionBoundedByNormalCurvature) {
  // Tube radius a around a circle of radius b: reach = a.
  const double a = 0.5, b = 2.0;
  std::vector<Eigen::VectorXd> pts;
  std::vector<Eigen::MatrixXd> frames;
  const int m = 60;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const double u = 2 * std::numbers::pi * i / m, v = 2 * std::numbers::pi * j / m;
      pts.push_back(Eigen::Vector3d((b + a * std::cos(v)) * std::cos(u), (b + a * std::cos(v)) * std::sin(u),
                                    a * std::sin(v)));
      Eigen::MatrixXd F(3, 2);
      F << -std::sin(u), -std::sin(v) * std::cos(u), std::cos(u), -std::sin(v) * std::sin(u), 0, std::cos(v);
      frames.push_back(F);
    }
  ReachOptions o;
  o.local_scale = 0.3;
  const ReachReport r = reach_estimate(pts, frames, o);
  EXPECT_NEAR(r.reach_estimate, a, 0.02 * a);
  EXPECT_LE(r.reach_estimate, 1.0 / r.max_normal_curvature + 1e-6);
}

TEST(Reach, RigidMotionInvariance) {
  std::vector<Eigen::VectorXd> pts;
  std::vector<Eigen::MatrixXd> frames;
  sphere_sample(800, 1.7, pts, frames);
  Rng rng(6);
  const Eigen::Matrix3d Q = random_rotation(rng);
  const Eigen::Vector3d t(rng.normal(), rng.normal(), rng.normal());
  std::vector<Eigen::VectorXd> moved;
  std::vector<Eigen::MatrixXd> moved_frames;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    moved.push_back(Q * pts[i] + t);
    moved_frames.push_back(Q * frames[i]);
  }
  const ReachReport a = reach_estimate(pts, frames), b = reach_estimate(moved, moved_frames);
  EXPECT_NEAR(a.reach_estimate, b.reach_estimate, 1e-9);
}

TEST(Reach, Preconditions) {
  std::vector<Eigen::VectorXd> pts{Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 0, 0)};
  Eigen::MatrixXd F(3, 2);
  F << 1, 1, 0, 0, 0, 0;
  EXPECT_THROW(reach_estimate(pts, {F, F}), PreconditionError);
  EXPECT_THROW(reach_estimate({pts[0]}, {F}), PreconditionError);
}

// ---- tubedness -----------------------------------------------------------------

TEST(Tubedness, IdentityIsFlatAndSeparated) {
  const auto M = ManifoldModel::euclidean(2);
  const PointSet region = sample_region(M, M.origin(), 4.0, 0.1, 1);
  TubednessOptions o;
  o.points = 300;
  o.far_pairs = 2000;
  const ReachReport r = tubedness_check([](const Point& p) { return Eigen::VectorXd(p); }, region, 1.0 - 1e-6, o);
  EXPECT_TRUE(std::isinf(r.reach_estimate));
  EXPECT_EQ(r.far_violations, 0u);
  EXPECT_GE(r.far_min_image, 1.0);
  EXPECT_TRUE(r.projection_injective);
}

TEST(Tubedness, ConstructedCollisionIsFlagged) {
  // Wrapping the plane onto a cylinder of circumference 2 identifies far points.
  const auto M = ManifoldModel::euclidean(2);
  const PointSet region = sample_region(M, M.origin(), 4.0, 0.1, 1);
  const double c = 2.0 / (2.0 * std::numbers::pi);
  const PointMap wrap = [c](const Point& p) {
    Eigen::VectorXd v(3);
    v << c * std::cos(p(0) / c), c * std::sin(p(0) / c), p(1);
    return v;
  };
  TubednessOptions o;
  o.points = 200;
  o.far_pairs = 5000;
  const ReachReport r = tubedness_check(wrap, region, 0.1, o);
  EXPECT_GT(r.far_violations, 0u);
  EXPECT_FALSE(r.projection_injective);
  EXPECT_NEAR(r.reach_estimate, c, 0.05 * c);
}

TEST(Tubedness, RankDeficientMapRaisesNumericError) {
  const auto M = ManifoldModel::euclidean(2);
  const PointSet region = sample_region(M, M.origin(), 2.0, 0.2, 1);
  TubednessOptions o;
  o.points = 10;
  EXPECT_THROW(tubedness_check([](const Point& p) { return Eigen::VectorXd::Constant(2, p(0)).eval(); }, region, 0.1, o),
               NumericError);
}
