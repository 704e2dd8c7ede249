#pragma once

// Hand-rolled generators and numeric oracles shared by the test suites.

#include <cmath>
#include <numbers>

#include "tubed/manifold.hpp"
#include "tubed/neighbor_index.hpp"
#include "tubed/rng.hpp"

namespace tubed::test {

/// Composite Simpson rule with `n` (even) panels.
template <class F>
double simpson(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

/// Random valid point: a box for Euclidean space, the fundamental domain of a
/// torus, uniform on the sphere, hyperbolic radius <= 6 in the disk.
inline Point random_point(const ManifoldModel& M, Rng& rng) {
  const int d = M.coord_dimension();
  Point p(d);
  switch (M.kind()) {
    case ModelKind::Euclidean:
      for (int i = 0; i < d; ++i) p(i) = rng.uniform(-5.0, 5.0);
      return p;
    case ModelKind::FlatTorus:
      for (int i = 0; i < d; ++i) p(i) = rng.uniform(0.0, M.periods()[i]);
      return p;
    case ModelKind::Sphere:
      for (int i = 0; i < d; ++i) p(i) = rng.normal();
      return p * (M.radius() / p.norm());
    case ModelKind::HyperbolicPlane: {
      const double rho = 6.0 * std::sqrt(rng.uniform());
      const double ang = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double t = std::tanh(rho / 2.0);
      p << t * std::cos(ang), t * std::sin(ang);
      return p;
    }
  }
  return p;
}

}  // namespace tubed::test
