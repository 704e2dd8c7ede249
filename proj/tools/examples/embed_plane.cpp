// Library walk-through: net, lattice coordinates, f1 + f2, epsilon, reach.

#include <iostream>
#include <memory>

#include "tubed/lattice.hpp"
#include "tubed/net.hpp"
#include "tubed/reach.hpp"
#include "tubed/smooth_maps.hpp"

int main() {
  using namespace tubed;
  const ManifoldModel plane = ManifoldModel::euclidean(2);
  const PointSet region = sample_region(plane, plane.origin(), 6.0, 0.05, 1);
  auto net = std::make_shared<const Net>(build_net(region, 0.25));

  // Flat model: an injective snap at pitch r / sqrt 2 gives lattice coordinates.
  auto partition = std::make_shared<const PartitionOfUnity>(net);
  auto f1 = std::make_shared<const F1Map>(partition, grid_lattice_coords(*net, 0.25 / std::sqrt(2.0)),
                                          PhiMap(2, calibrate_scale(2, 3).scale));
  auto f2 = std::make_shared<const F2Map>(make_f2(net));

  const PointSet probe = sample_region(plane, plane.origin(), 2.0, 0.025, 2);
  const CombinedMap unscaled(f1, f2, 1.0);
  const double eps = choose_epsilon([&](const Point& x) { return unscaled.unscaled(x); }, probe).epsilon;
  const CombinedMap f(f1, f2, eps);

  TubednessOptions opts;
  opts.points = 500;
  opts.far_pairs = 2000;
  const PointSet inner = sample_region(plane, plane.origin(), 3.0, 0.05, 3);
  const ReachReport rep = tubedness_check([&f](const Point& x) { return f(x); }, inner, eps * (1.0 - 1e-6), opts);

  std::cout << "net vertices " << net->size() << ", target dimension " << f.dimension() << "\n"
            << "epsilon " << eps << ", reach estimate " << rep.reach_estimate << ", far-pair violations "
            << rep.far_violations << "\n";
  return rep.projection_injective ? 0 : 1;
}
