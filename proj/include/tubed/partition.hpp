#pragma once

// Partition of unity subordinate to the doubled net balls:
// psi_v = sigma(d(v, .) / r), Psi = sum_v psi_v, phi_v = psi_v / Psi.

#include <algorithm>
#include <memory>
#include <vector>

#include "tubed/bump.hpp"
#include "tubed/errors.hpp"
#include "tubed/net.hpp"

namespace tubed {

struct PartitionSample {
  /// V_x: vertices with psi_v(x) > 0, increasing ids.
  std::vector<std::uint32_t> support;
  /// phi_v(x) for v in support, same order.
  std::vector<double> weights;
  /// Psi(x) >= 1 whenever x lies within r of a vertex.
  double psi_sum = 0.0;
};

class PartitionOfUnity {
 public:
  explicit PartitionOfUnity(std::shared_ptr<const Net> net)
      : net_(std::move(net)), index_(net_->make_index(2.0 * net_->r)) {}

  const Net& net() const { return *net_; }
  std::shared_ptr<const Net> net_ptr() const { return net_; }
  double r() const { return net_->r; }

  PartitionSample eval(const Point& x) const {
    PartitionSample s;
    const double r = net_->r;
    const ManifoldModel& model = net_->model();
    std::vector<std::pair<std::uint32_t, double>> hits;
    index_.for_each_candidate(x, 2.0 * r, [&](std::uint32_t v) {
      const double psi = bump(model.distance_unchecked(x, net_->vertices[v]) / r);
      if (psi > 0.0) hits.emplace_back(v, psi);
    });
    if (hits.empty()) throw CoverageError("smooth-maps", "partition: point outside every doubled net ball");
    std::sort(hits.begin(), hits.end());
    for (const auto& h : hits) s.psi_sum += h.second;
    for (const auto& [v, psi] : hits) {
      s.support.push_back(v);
      s.weights.push_back(psi / s.psi_sum);
    }
    return s;
  }

 private:
  std::shared_ptr<const Net> net_;
  NeighborIndex index_;
};

}  // namespace tubed
