#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "tubed/manifold.hpp"
#include "tubed/point_set.hpp"
#include "test_support.hpp"

using namespace tubed;
using tubed::test::random_point;
using tubed::test::simpson;

namespace {

std::vector<ManifoldModel> all_models() {
  return {ManifoldModel::euclidean(2), ManifoldModel::euclidean(3), ManifoldModel::flat_torus({1.0, 2.5}),
          ManifoldModel::flat_torus({3.0, 2.0, 4.0}), ManifoldModel::sphere(1.0), ManifoldModel::sphere(2.5),
          ManifoldModel::hyperbolic_plane(), ManifoldModel::hyperbolic_plane(3.0)};
}

Point pt(std::initializer_list<double> xs) {
  Point p(static_cast<int>(xs.size()));
  int i = 0;
  for (double x : xs) p(i++) = x;
  return p;
}

}  // namespace

TEST(Distance, Examples) {
  EXPECT_DOUBLE_EQ(ManifoldModel::euclidean(2).distance(pt({0, 0}), pt({3, 4})), 5.0);
  EXPECT_NEAR(ManifoldModel::flat_torus({1.0}).distance(pt({0.1}), pt({0.9})), 0.2, 1e-15);
  EXPECT_NEAR(ManifoldModel::hyperbolic_plane().distance(pt({0, 0}), pt({0.5, 0})), 2.0 * std::atanh(0.5), 1e-15);
}

TEST(Distance, HyperbolicMatchesMetricIntegral) {
  // Length of the diameter segment [0, x] under ds = 2|dx| / (1 - x^2).
  const auto H = ManifoldModel::hyperbolic_plane();
  for (double x : {0.1, 0.5, 0.9, 0.99}) {
    const double oracle = simpson([](double t) { return 2.0 / (1.0 - t * t); }, 0.0, x, 20000);
    EXPECT_NEAR(H.distance(pt({0, 0}), pt({x, 0})), oracle, 1e-9) << x;
  }
  EXPECT_NEAR(H.distance(pt({0, 0}), pt({0.5, 0})), 1.0986122886681098, 1e-12);
}

TEST(Distance, InvalidCoordinatesRaiseDomainError) {
  EXPECT_THROW(ManifoldModel::hyperbolic_plane().distance(pt({0, 0}), pt({1.0, 0})), DomainError);
  EXPECT_THROW(ManifoldModel::flat_torus({1.0}).distance(pt({0.1}), pt({1.2})), DomainError);
  EXPECT_THROW(ManifoldModel::sphere(1.0).distance(pt({0, 0, 1}), pt({0, 0, 2})), DomainError);
  EXPECT_THROW(ManifoldModel::euclidean(2).distance(pt({0, 0}), pt({0, 0, 0})), DomainError);
}

TEST(ManifoldModel, ClosedFormInvariants) {
  const auto inf = std::numeric_limits<double>::infinity();
  EXPECT_EQ(ManifoldModel::euclidean(3).injectivity_radius(), inf);
  EXPECT_EQ(ManifoldModel::hyperbolic_plane().injectivity_radius(), inf);
  EXPECT_EQ(ManifoldModel::hyperbolic_plane().curvature_bounds().lower, -1.0);
  EXPECT_DOUBLE_EQ(ManifoldModel::sphere(2.0).injectivity_radius(), 2.0 * std::numbers::pi);
  EXPECT_DOUBLE_EQ(ManifoldModel::sphere(2.0).curvature_bounds().upper, 0.25);
  EXPECT_DOUBLE_EQ(ManifoldModel::flat_torus({3.0, 1.0}).injectivity_radius(), 0.5);
}

TEST(ManifoldModel, RescalingMultipliesDistances) {
  tubed::Rng rng(23);
  for (const auto& M : all_models()) {
    const double k = 7.5;
    const ManifoldModel S = M.rescaled(k);
    for (int i = 0; i < 200; ++i) {
      const Point a = random_point(M, rng), b = random_point(M, rng);
      if (M.is_flat() && M.kind() == ModelKind::Euclidean) continue;
      // Rescaling acts on coordinates by k except in the disk model, which is scale free.
      Point sa = a, sb = b;
      if (M.kind() == ModelKind::FlatTorus || M.kind() == ModelKind::Sphere) {
        sa *= k;
        sb *= k;
      }
      ASSERT_NEAR(S.distance(sa, sb), k * M.distance(a, b), 1e-9 * (1.0 + k * M.distance(a, b))) << M.kind_name();
    }
  }
  EXPECT_THROW(ManifoldModel::sphere(1.0).rescaled(0.0), DomainError);
}

TEST(ManifoldModel, NormalizationMeetsCurvatureAndInjectivityBounds) {
  for (const auto& M : all_models()) {
    const ManifoldModel N = M.rescaled(M.normalization_factor());
    const CurvatureBounds b = N.curvature_bounds();
    EXPECT_LE(std::max(std::abs(b.lower), std::abs(b.upper)), 0.01 * (1.0 + 1e-12)) << M.kind_name();
    EXPECT_GE(N.injectivity_radius(), 10.0 * (1.0 - 1e-12)) << M.kind_name();
  }
  EXPECT_DOUBLE_EQ(ManifoldModel::sphere(1.0).normalization_factor(), 10.0);
  EXPECT_DOUBLE_EQ(ManifoldModel::hyperbolic_plane().normalization_factor(), 10.0);
  EXPECT_DOUBLE_EQ(ManifoldModel::flat_torus({1.0, 2.5}).normalization_factor(), 20.0);
  EXPECT_DOUBLE_EQ(ManifoldModel::euclidean(2).normalization_factor(), 1.0);
}

TEST(MetricAxioms, RandomTriples) {
  for (const auto& M : all_models()) {
    tubed::Rng rng(17);
    double worst_triangle = 0.0, worst_symmetry = 0.0;
    for (int k = 0; k < 10'000; ++k) {
      const Point a = random_point(M, rng), b = random_point(M, rng), c = random_point(M, rng);
      const double ab = M.distance(a, b), bc = M.distance(b, c), ac = M.distance(a, c);
      ASSERT_GE(ab, 0.0);
      worst_symmetry = std::max(worst_symmetry, std::abs(ab - M.distance(b, a)));
      worst_triangle = std::max(worst_triangle, ac - ab - bc);
      ASSERT_EQ(M.distance(a, a), 0.0);
    }
    EXPECT_LE(worst_symmetry, 1e-12) << M.kind_name();
    EXPECT_LE(worst_triangle, 1e-9) << M.kind_name();
  }
}

TEST(ExpLog, RoundTripWithinInjectivityRadius) {
  for (const auto& M : all_models()) {
    tubed::Rng rng(5);
    double worst = 0.0, worst_len = 0.0;
    int tested = 0;
    while (tested < 10'000) {
      const Point p = random_point(M, rng), q = random_point(M, rng);
      const double d = M.distance(p, q);
      if (!(d < 0.999 * M.injectivity_radius())) continue;
      const Tangent v = M.log_map(p, q);
      worst_len = std::max(worst_len, std::abs(v.norm() - d));
      worst = std::max(worst, M.distance(M.exp_map(p, v), q));
      ++tested;
    }
    EXPECT_LT(worst, 1e-9) << M.kind_name();
    EXPECT_LT(worst_len, 1e-9) << M.kind_name();
  }
}

TEST(ExpLog, Examples) {
  const auto S = ManifoldModel::sphere(1.0);
  const Point north = S.origin();
  Tangent v(2);
  v << std::numbers::pi / 2.0, 0.0;
  EXPECT_NEAR(S.exp_map(north, v)(2), 0.0, 1e-15);
  EXPECT_NEAR(S.distance(north, S.exp_map(north, v)), std::numbers::pi / 2.0, 1e-15);

  const auto E = ManifoldModel::euclidean(3);
  Tangent w(3);
  w << 1.0, -2.0, 0.5;
  EXPECT_EQ(E.exp_map(pt({1, 1, 1}), w), pt({2, -1, 1.5}));

  const auto H = ManifoldModel::hyperbolic_plane();
  EXPECT_NEAR(H.log_map(pt({0, 0}), pt({0.5, 0})).norm(), H.distance(pt({0, 0}), pt({0.5, 0})), 1e-15);
}

TEST(ExpLog, OutsideInjectivityDomainRaisesRangeError) {
  const auto S = ManifoldModel::sphere(1.0);
  EXPECT_THROW(S.log_map(pt({0, 0, 1}), pt({0, 0, -1})), RangeError);
  const auto T = ManifoldModel::flat_torus({1.0, 1.0});
  EXPECT_THROW(T.log_map(pt({0, 0}), pt({0.5, 0.0})), RangeError);
}

TEST(BallVolume, Examples) {
  EXPECT_DOUBLE_EQ(ManifoldModel::euclidean(2).ball_volume(1.0), std::numbers::pi);
  EXPECT_NEAR(ManifoldModel::sphere(1.0).ball_volume(std::numbers::pi), 4.0 * std::numbers::pi, 1e-14);
  // Area element sinh(r) dr dtheta.
  const double oracle = 2.0 * std::numbers::pi * simpson([](double r) { return std::sinh(r); }, 0.0, 1.0, 2000);
  EXPECT_NEAR(ManifoldModel::hyperbolic_plane().ball_volume(1.0), oracle, 1e-12);
  EXPECT_NEAR(ManifoldModel::hyperbolic_plane().ball_volume(1.0), 3.4122762652849, 1e-12);
  EXPECT_NEAR(ManifoldModel::hyperbolic_plane(3.0).ball_volume(3.0), 9.0 * 3.4122762652849, 1e-11);
}

TEST(BallVolume, TorusAgreesWithEuclideanBelowHalfPeriodAndSaturates) {
  const auto T2 = ManifoldModel::flat_torus({2.0, 3.0});
  EXPECT_NEAR(T2.ball_volume(0.9), std::numbers::pi * 0.81, 1e-12);
  EXPECT_NEAR(T2.ball_volume(10.0), 6.0, 1e-12);
  const auto T3 = ManifoldModel::flat_torus({2.0, 3.0, 2.5});
  EXPECT_NEAR(T3.ball_volume(0.8), 4.0 / 3.0 * std::numbers::pi * 0.512, 1e-10);
  EXPECT_NEAR(T3.ball_volume(10.0), 15.0, 1e-9);
  // Monte Carlo oracle in the regime where the ball wraps.
  tubed::Rng rng(3);
  const double R = 1.3;
  std::size_t inside = 0;
  const std::size_t trials = 400'000;
  for (std::size_t k = 0; k < trials; ++k) {
    const double x = rng.uniform(-1.0, 1.0), y = rng.uniform(-1.5, 1.5), z = rng.uniform(-1.25, 1.25);
    if (x * x + y * y + z * z < R * R) ++inside;
  }
  EXPECT_NEAR(T3.ball_volume(R), 15.0 * inside / trials, 0.05);
}

TEST(BallVolume, MonotoneAndHyperbolicRatioApproachesPi) {
  for (const auto& M : all_models()) {
    double prev = -1.0;
    for (double R = 0.05; R < 6.0; R += 0.05) {
      const double v = M.ball_volume(R);
      const bool saturated = M.kind() == ModelKind::Sphere ? R >= std::numbers::pi * M.radius()
                                                            : M.kind() == ModelKind::FlatTorus && v == prev;
      if (!saturated) EXPECT_GT(v, prev) << M.kind_name() << " R=" << R;
      prev = v;
    }
  }
  const auto H = ManifoldModel::hyperbolic_plane();
  double prev_gap = std::numeric_limits<double>::infinity();
  for (double R = 2.0; R <= 30.0; R += 1.0) {
    const double gap = std::abs(H.ball_volume(R) / std::exp(R) - std::numbers::pi);
    EXPECT_LT(gap, prev_gap);
    prev_gap = gap;
  }
  EXPECT_LT(prev_gap, 1e-6);
}

TEST(SampleRegion, EuclideanCountAndCoverage) {
  const auto E = ManifoldModel::euclidean(2);
  const PointSet s = sample_region(E, E.origin(), 10.0, 0.1, 1);
  EXPECT_NEAR(static_cast<double>(s.size()), std::numbers::pi * 100.0 / 0.01, 0.02 * 31400.0);
  // Spot-check grid: every point of the ball has a sample within the spacing.
  NeighborIndex index(E, 0.1);
  for (std::uint32_t i = 0; i < s.size(); ++i) index.insert(i, s[i]);
  double worst = 0.0;
  for (double x = -10.0; x <= 10.0; x += 0.37)
    for (double y = -10.0; y <= 10.0; y += 0.41) {
      if (x * x + y * y > 100.0) continue;
      double best = 1e9;
      index.for_each_candidate(pt({x, y}), 0.2, [&](std::uint32_t v) { best = std::min(best, E.distance(pt({x, y}), s[v])); });
      worst = std::max(worst, best);
    }
  EXPECT_LE(worst, 0.1);
}

TEST(SampleRegion, CurvedModelsCoverTheBall) {
  for (const auto& M : {ManifoldModel::hyperbolic_plane(), ManifoldModel::sphere(1.0)}) {
    const double R = 2.0, h = 0.1;
    const PointSet s = sample_region(M, M.origin(), R, h, 9);
    tubed::Rng rng(4);
    double worst = 0.0;
    for (int k = 0; k < 300; ++k) {
      Tangent v(2);
      const double ang = rng.uniform(0.0, 2.0 * std::numbers::pi), rad = R * std::sqrt(rng.uniform());
      v << rad * std::cos(ang), rad * std::sin(ang);
      const Point x = M.exp_map(M.origin(), v);
      double best = 1e9;
      for (std::size_t i = 0; i < s.size(); ++i) best = std::min(best, M.distance(x, s[i]));
      worst = std::max(worst, best);
    }
    EXPECT_LE(worst, h) << M.kind_name();
  }
}

TEST(SampleRegion, HyperbolicCountTracksBallVolume) {
  const auto H = ManifoldModel::hyperbolic_plane();
  const PointSet s = sample_region(H, H.origin(), 8.0, 0.2, 1);
  const double ratio = static_cast<double>(s.size()) / (H.ball_volume(8.0) / 0.04);
  EXPECT_GT(ratio, 0.8);
  EXPECT_LT(ratio, 1.3);
  const PointSet t = sample_region(H, H.origin(), 6.0, 0.2, 1);
  EXPECT_NEAR(static_cast<double>(s.size()) / t.size(), (std::cosh(8.0) - 1.0) / (std::cosh(6.0) - 1.0), 0.3);
}

TEST(SampleRegion, DeterministicAndDegenerate) {
  const auto E = ManifoldModel::euclidean(2);
  EXPECT_EQ(sample_region(E, pt({1, 2}), 0.0, 0.1, 1).size(), 1u);
  EXPECT_EQ(sample_region(E, E.origin(), 3.0, 0.1, 7).raw(), sample_region(E, E.origin(), 3.0, 0.1, 7).raw());
  EXPECT_NE(sample_region(E, E.origin(), 3.0, 0.1, 7).raw(), sample_region(E, E.origin(), 3.0, 0.1, 8).raw());
  EXPECT_THROW(sample_region(E, E.origin(), 100.0, 1e-4, 1), ResourceError);
  try {
    sample_region(E, E.origin(), 100.0, 1e-4, 1);
  } catch (const ResourceError& e) {
    EXPECT_GT(e.required(), 1e9);
  }
}

TEST(PointSetCsv, RoundTrip) {
  const auto H = ManifoldModel::hyperbolic_plane();
  const PointSet s = sample_region(H, H.origin(), 1.0, 0.3, 11);
  std::istringstream in(point_set_to_csv(s));
  const PointSet back = point_set_from_csv(H, in);
  EXPECT_EQ(back.seed(), 11u);
  EXPECT_EQ(back.raw(), s.raw());
  std::istringstream wrong(point_set_to_csv(s));
  EXPECT_THROW(point_set_from_csv(ManifoldModel::euclidean(2), wrong), InputError);
}
