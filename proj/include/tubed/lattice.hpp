#pragma once

// The graph Z^n_inf, its parity coloring and the map Phi: v -> scale (v + e_color(v))
// into R^{n + 2^n}; minimal distance between hulls of clique images; and
// lattice coordinates for graphs behind a pluggable embedder interface.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tubed/errors.hpp"
#include "tubed/graph.hpp"
#include "tubed/point_set.hpp"

namespace tubed {

using LatticePoint = std::vector<long long>;

inline long long linf_distance(const LatticePoint& a, const LatticePoint& b) {
  long long d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::llabs(a[i] - b[i]));
  return d;
}

inline std::string lattice_point_str(const LatticePoint& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + ")";
}

/// Bit i of the color is v_i mod 2; l_inf-adjacent points differ in some bit.
inline unsigned parity_coloring(const LatticePoint& v) {
  unsigned c = 0;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (((v[i] % 2) + 2) % 2) c |= 1u << i;
  return c;
}

class PhiMap {
 public:
  PhiMap(int n, double scale) : n_(n), scale_(scale) {
    if (n < 1 || n > 6) throw DomainError("lattice-embed", "Phi: n must be in [1, 6]");
    if (!(scale > 0.0)) throw DomainError("lattice-embed", "Phi: scale must be positive");
  }

  int n() const { return n_; }
  double scale() const { return scale_; }
  int colors() const { return 1 << n_; }
  int target_dimension() const { return n_ + colors(); }

  Eigen::VectorXd operator()(const LatticePoint& v) const {
    if (static_cast<int>(v.size()) != n_) throw DomainError("lattice-embed", "Phi: lattice point has wrong dimension");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(target_dimension());
    for (int i = 0; i < n_; ++i) out(i) = static_cast<double>(v[i]);
    out(n_ + static_cast<int>(parity_coloring(v))) = 1.0;
    return scale_ * out;
  }

 private:
  int n_;
  double scale_;
};

/// Minimum-norm point of the convex hull of the columns of P (Wolfe's
/// algorithm). Returns the point; `weights` receives barycentric weights.
inline Eigen::VectorXd min_norm_point(const Eigen::MatrixXd& P, Eigen::VectorXd* weights = nullptr) {
  const int m = static_cast<int>(P.cols());
  const double scale2 = P.colwise().squaredNorm().maxCoeff();
  const double tol = 1e-15 * std::max(scale2, 1e-300);
  int first = 0;
  P.colwise().squaredNorm().minCoeff(&first);
  std::vector<int> S{first};
  std::vector<double> lambda{1.0};
  Eigen::VectorXd x = P.col(first);

  for (int major = 0; major < 10 * m + 10; ++major) {
    Eigen::VectorXd dots = P.transpose() * x;
    int j = 0;
    dots.minCoeff(&j);
    if (dots(j) >= x.squaredNorm() - 1e-12 * scale2) break;
    if (std::find(S.begin(), S.end(), j) != S.end()) break;
    S.push_back(j);
    lambda.push_back(0.0);

    for (int minor = 0; minor < 10 * m + 10; ++minor) {
      // Affine minimizer over S: [G 1; 1^T 0] [mu; t] = [0; 1].
      const int k = static_cast<int>(S.size());
      Eigen::MatrixXd K = Eigen::MatrixXd::Zero(k + 1, k + 1);
      for (int a = 0; a < k; ++a) {
        for (int b = 0; b < k; ++b) K(a, b) = P.col(S[a]).dot(P.col(S[b]));
        K(a, k) = K(k, a) = 1.0;
      }
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
      rhs(k) = 1.0;
      const Eigen::VectorXd sol = K.fullPivLu().solve(rhs);
      const Eigen::VectorXd mu = sol.head(k);
      if ((mu.array() > tol).all()) {
        for (int a = 0; a < k; ++a) lambda[a] = mu(a);
        break;
      }
      double theta = 1.0;
      for (int a = 0; a < k; ++a)
        if (mu(a) <= tol) theta = std::min(theta, lambda[a] / (lambda[a] - mu(a)));
      std::vector<int> S2;
      std::vector<double> l2;
      for (int a = 0; a < k; ++a) {
        const double v = lambda[a] + theta * (mu(a) - lambda[a]);
        if (v > tol) {
          S2.push_back(S[a]);
          l2.push_back(v);
        }
      }
      if (S2.empty()) {
        S2.push_back(S.back());
        l2.push_back(1.0);
      }
      S = std::move(S2);
      lambda = std::move(l2);
    }
    double total = 0.0;
    for (double l : lambda) total += l;
    x.setZero(P.rows());
    for (std::size_t a = 0; a < S.size(); ++a) x += (lambda[a] / total) * P.col(S[a]);
  }
  if (weights) {
    weights->setZero(m);
    double total = 0.0;
    for (double l : lambda) total += l;
    for (std::size_t a = 0; a < S.size(); ++a) (*weights)(S[a]) = lambda[a] / total;
  }
  return x;
}

/// Euclidean distance between the convex hulls of two point families (columns).
inline double hull_distance(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  Eigen::MatrixXd diff(A.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.cols(); ++i)
    for (Eigen::Index j = 0; j < B.cols(); ++j) diff.col(i * B.cols() + j) = A.col(i) - B.col(j);
  return min_norm_point(diff).norm();
}

inline void require_clique(const std::vector<LatticePoint>& C, const char* name) {
  if (C.empty()) throw PreconditionError("lattice-embed", std::string("clique ") + name + " is empty");
  for (std::size_t i = 0; i < C.size(); ++i)
    for (std::size_t j = i + 1; j < C.size(); ++j)
      if (linf_distance(C[i], C[j]) != 1)
        throw PreconditionError("lattice-embed", std::string("clique ") + name + " is not a clique: " +
                                                     lattice_point_str(C[i]) + " and " + lattice_point_str(C[j]));
}

inline Eigen::MatrixXd phi_columns(const std::vector<LatticePoint>& C, const PhiMap& phi) {
  Eigen::MatrixXd M(phi.target_dimension(), static_cast<Eigen::Index>(C.size()));
  for (std::size_t i = 0; i < C.size(); ++i) M.col(static_cast<Eigen::Index>(i)) = phi(C[i]);
  return M;
}

/// Minimal distance between Conv Phi(A) and Conv Phi(B) for disjoint cliques.
inline double clique_hull_distance(const std::vector<LatticePoint>& A, const std::vector<LatticePoint>& B,
                                   const PhiMap& phi) {
  require_clique(A, "A");
  require_clique(B, "B");
  for (const auto& a : A)
    for (const auto& b : B)
      if (a == b) throw PreconditionError("lattice-embed", "cliques share the vertex " + lattice_point_str(a));
  return hull_distance(phi_columns(A, phi), phi_columns(B, phi));
}

// ---- calibration ------------------------------------------------------------

/// All cliques of Z^n_inf inside [0, box]^n: every clique lies in a unit cube,
/// so these are the nonempty subsets of the unit cubes, deduplicated.
inline std::vector<std::vector<LatticePoint>> enumerate_cliques(int n, int box) {
  std::set<std::vector<LatticePoint>> seen;
  std::vector<long long> corner(n, 0);
  const unsigned cube = 1u << n;
  while (true) {
    for (unsigned mask = 1; mask < (1u << cube); ++mask) {
      std::vector<LatticePoint> clique;
      for (unsigned vtx = 0; vtx < cube; ++vtx) {
        if (!(mask >> vtx & 1u)) continue;
        LatticePoint p(corner);
        for (int i = 0; i < n; ++i) p[i] += (vtx >> i) & 1u;
        clique.push_back(std::move(p));
      }
      std::sort(clique.begin(), clique.end());
      seen.insert(std::move(clique));
    }
    int axis = 0;
    while (axis < n && ++corner[axis] > box - 1) corner[axis++] = 0;
    if (axis == n) break;
  }
  return {seen.begin(), seen.end()};
}

struct CalibrationReport {
  int n = 0;
  int box = 0;
  double scale = 0.0;
  double rho = 0.0;
  /// Minimal hull distance over disjoint clique pairs at scale 1.
  double unit_min_distance = 0.0;
  /// Minimal hull distance at the returned scale.
  double min_distance = 0.0;
  std::vector<LatticePoint> extremal_a, extremal_b;
  std::size_t cliques = 0;
  std::size_t pairs = 0;
};

struct CalibrationOptions {
  double tolerance = 1e-3;
  std::size_t max_pairs = 50'000'000;
};

/// Smallest scale (binary search to `tolerance`) at which every pair of
/// disjoint cliques in the box has hull distance >= 1, and rho = the largest
/// |Phi(v) - Phi(w)| over adjacent v, w in the box at that scale.
inline CalibrationReport calibrate_scale(int n, int box, const CalibrationOptions& opts = {}) {
  if (n < 1) throw DomainError("lattice-embed", "calibrate_scale: n must be >= 1");
  if (box < 2) throw DomainError("lattice-embed", "calibrate_scale: box must be >= 2");
  const double subsets = std::pow(2.0, std::pow(2.0, n)) - 1.0;
  const double estimate = std::pow(static_cast<double>(box), n) * subsets;
  if (n > 4 || estimate * estimate / 2.0 > static_cast<double>(opts.max_pairs))
    throw ResourceError("lattice-embed",
                        "calibrate_scale: about " + std::to_string(static_cast<long long>(estimate * estimate / 2.0)) +
                            " clique pairs to enumerate",
                        estimate * estimate / 2.0);

  const auto cliques = enumerate_cliques(n, box);
  CalibrationReport rep;
  rep.n = n;
  rep.box = box;
  rep.cliques = cliques.size();

  const PhiMap unit(n, 1.0);
  std::vector<Eigen::MatrixXd> images;
  images.reserve(cliques.size());
  for (const auto& c : cliques) images.push_back(phi_columns(c, unit));
  auto disjoint = [](const std::vector<LatticePoint>& a, const std::vector<LatticePoint>& b) {
    for (const auto& p : a)
      if (std::binary_search(b.begin(), b.end(), p)) return false;
    return true;
  };

  // One exhaustive sweep at scale 1 orders the pairs; each binary-search step
  // re-checks every pair at the trial scale, nearest pairs first.
  struct Pair {
    double d;
    std::uint32_t a, b;
  };
  std::vector<Pair> pairs;
  for (std::uint32_t i = 0; i < cliques.size(); ++i)
    for (std::uint32_t j = i + 1; j < cliques.size(); ++j)
      if (disjoint(cliques[i], cliques[j])) pairs.push_back({hull_distance(images[i], images[j]), i, j});
  rep.pairs = pairs.size();
  std::sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) {
    return x.d < y.d || (x.d == y.d && (x.a < y.a || (x.a == y.a && x.b < y.b)));
  });
  rep.unit_min_distance = pairs.front().d;
  rep.extremal_a = cliques[pairs.front().a];
  rep.extremal_b = cliques[pairs.front().b];

  auto feasible = [&](double s) {
    const PhiMap phi(n, s);
    for (const Pair& p : pairs)
      if (hull_distance(phi_columns(cliques[p.a], phi), phi_columns(cliques[p.b], phi)) < 1.0) return false;
    return true;
  };
  double lo = 0.0, hi = 1.0;
  while (!feasible(hi)) {
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > opts.tolerance) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  rep.scale = hi;
  rep.min_distance = hull_distance(phi_columns(rep.extremal_a, PhiMap(n, hi)), phi_columns(rep.extremal_b, PhiMap(n, hi)));

  const PhiMap phi(n, rep.scale);
  std::vector<long long> v(n, 0);
  while (true) {
    for (unsigned mask = 1; mask < static_cast<unsigned>(std::pow(3, n)); ++mask) {
      LatticePoint w(v);
      unsigned code = mask;
      bool inside = true;
      for (int i = 0; i < n; ++i) {
        w[i] += static_cast<long long>(code % 3) - 1;
        code /= 3;
        inside = inside && w[i] >= 0 && w[i] <= box;
      }
      if (inside && w != v) rep.rho = std::max(rep.rho, (phi(v) - phi(w)).norm());
    }
    int axis = 0;
    while (axis < n && ++v[axis] > box) v[axis++] = 0;
    if (axis == n) break;
  }
  return rep;
}

// ---- lattice coordinates ----------------------------------------------------

struct LatticeCoords {
  int n = 0;
  std::vector<LatticePoint> coords;
};

struct LatticeEmbedResult {
  bool success = false;
  LatticeCoords coords;
  /// Edges whose endpoints are not at l_inf distance exactly 1.
  std::vector<std::pair<Vertex, Vertex>> violating_edges;
  /// Vertex pairs mapped to the same lattice point.
  std::vector<std::pair<Vertex, Vertex>> collisions;
  std::string reason;
};

/// Exhaustive check of the subgraph condition: injective, and every edge has
/// l_inf length exactly 1.
inline void verify_lattice_coords(const Graph& g, LatticeEmbedResult& res) {
  res.violating_edges.clear();
  res.collisions.clear();
  for (const auto& [a, b] : g.edges())
    if (linf_distance(res.coords.coords[a], res.coords.coords[b]) != 1) res.violating_edges.emplace_back(a, b);
  std::map<LatticePoint, Vertex> owner;
  for (Vertex v = 0; v < res.coords.coords.size(); ++v) {
    auto [it, inserted] = owner.emplace(res.coords.coords[v], v);
    if (!inserted) res.collisions.emplace_back(it->second, v);
  }
  res.success = res.violating_edges.empty() && res.collisions.empty();
}

class LatticeEmbedder {
 public:
  virtual ~LatticeEmbedder() = default;
  virtual std::string name() const = 0;
  /// `positions` carries the net coordinates when the graph comes from a net.
  virtual LatticeEmbedResult embed(const Graph& g, const PointSet* positions) const = 0;
};

/// Rounds flat-model coordinates to the grid of the given pitch:
/// coords = floor(x / pitch + 1/2).
class GridSnapEmbedder : public LatticeEmbedder {
 public:
  explicit GridSnapEmbedder(double pitch) : pitch_(pitch) {
    if (!(pitch > 0.0)) throw DomainError("lattice-embed", "grid pitch must be positive");
  }
  std::string name() const override { return "grid-snap"; }
  double pitch() const { return pitch_; }

  static LatticePoint snap(const Point& p, double pitch) {
    LatticePoint v(p.size());
    for (int i = 0; i < p.size(); ++i) v[i] = static_cast<long long>(std::floor(p(i) / pitch + 0.5));
    return v;
  }

  LatticeEmbedResult embed(const Graph& g, const PointSet* positions) const override {
    if (!positions || positions->size() != g.size())
      throw PreconditionError("lattice-embed", "grid-snap needs one position per vertex");
    if (!positions->model().is_flat())
      throw PreconditionError("lattice-embed", "grid-snap only applies to flat models");
    LatticeEmbedResult res;
    res.coords.n = positions->model().dimension();
    for (std::size_t v = 0; v < g.size(); ++v) res.coords.coords.push_back(snap((*positions)[v], pitch_));
    verify_lattice_coords(g, res);
    if (!res.success)
      res.reason = std::to_string(res.violating_edges.size()) + " edges off l_inf length 1, " +
                   std::to_string(res.collisions.size()) + " collisions";
    return res;
  }

 private:
  double pitch_;
};

/// Backtracking search for a subgraph embedding into Z^n_inf, vertices placed
/// in BFS order next to an already placed neighbor. A clique larger than 2^n
/// is rejected up front (a clique of Z^n_inf lies in a unit cube).
class SearchEmbedder : public LatticeEmbedder {
 public:
  SearchEmbedder(int n, std::size_t node_budget = 1'000'000) : n_(n), budget_(node_budget) {}
  std::string name() const override { return "search"; }

  LatticeEmbedResult embed(const Graph& g, const PointSet*) const override {
    LatticeEmbedResult res;
    res.coords.n = n_;
    if (g.size() == 0) {
      res.success = true;
      return res;
    }
    const std::vector<Vertex> clique = greedy_clique(g);
    if (clique.size() > (std::size_t{1} << n_)) {
      for (std::size_t i = 0; i < clique.size(); ++i)
        for (std::size_t j = i + 1; j < clique.size(); ++j)
          res.violating_edges.emplace_back(std::min(clique[i], clique[j]), std::max(clique[i], clique[j]));
      res.reason = "clique of size " + std::to_string(clique.size()) + " exceeds 2^n = " + std::to_string(1 << n_);
      return res;
    }
    std::vector<Vertex> order;
    std::vector<int> parent(g.size(), -1);
    std::vector<bool> seen(g.size(), false);
    for (Vertex s = 0; s < g.size(); ++s) {
      if (seen[s]) continue;
      seen[s] = true;
      order.push_back(s);
      for (std::size_t k = order.size() - 1; k < order.size(); ++k)
        for (Vertex w : g.neighbors(order[k]))
          if (!seen[w]) {
            seen[w] = true;
            parent[w] = static_cast<int>(order[k]);
            order.push_back(w);
          }
    }
    std::vector<LatticePoint> coords(g.size());
    std::vector<bool> placed(g.size(), false);
    std::set<LatticePoint> used;
    std::size_t nodes = 0;
    long long component_offset = 0;

    std::function<bool(std::size_t)> place = [&](std::size_t k) -> bool {
      if (k == order.size()) return true;
      if (++nodes > budget_) return false;
      const Vertex v = order[k];
      std::vector<LatticePoint> candidates;
      if (parent[v] < 0) {
        // Components are laid out far apart along the first axis.
        LatticePoint p(n_, 0);
        p[0] = component_offset;
        component_offset += 2 * static_cast<long long>(g.size()) + 2;
        candidates.push_back(p);
      } else {
        const LatticePoint& base = coords[parent[v]];
        for (int code = 0; code < static_cast<int>(std::pow(3, n_)); ++code) {
          LatticePoint p(base);
          int c = code;
          for (int i = 0; i < n_; ++i, c /= 3) p[i] += c % 3 - 1;
          if (p != base) candidates.push_back(p);
        }
      }
      for (const auto& p : candidates) {
        if (used.count(p)) continue;
        bool ok = true;
        for (Vertex w : g.neighbors(v))
          if (placed[w] && linf_distance(coords[w], p) != 1) {
            ok = false;
            break;
          }
        if (!ok) continue;
        coords[v] = p;
        placed[v] = true;
        used.insert(p);
        if (place(k + 1)) return true;
        placed[v] = false;
        used.erase(p);
      }
      return false;
    };
    if (!place(0)) {
      res.reason = nodes > budget_ ? "search budget exhausted" : "no subgraph embedding exists";
      res.violating_edges = g.edges();
      return res;
    }
    res.coords.coords = std::move(coords);
    verify_lattice_coords(g, res);
    return res;
  }

 private:
  static std::vector<Vertex> greedy_clique(const Graph& g) {
    std::vector<Vertex> best;
    for (Vertex s = 0; s < g.size(); ++s) {
      std::vector<Vertex> c{s};
      for (Vertex w : g.neighbors(s)) {
        bool all = true;
        for (Vertex u : c)
          if (u != s && !g.adjacent(u, w)) all = false;
        if (all) c.push_back(w);
      }
      if (c.size() > best.size()) best = c;
    }
    return best;
  }

  int n_;
  std::size_t budget_;
};

/// Default lattice-coordinate heuristic: grid snapping for nets of flat
/// models, backtracking search otherwise.
inline LatticeEmbedResult heuristic_lattice_coords(const Graph& g, const PointSet* positions, int n, double pitch) {
  if (positions && positions->model().is_flat()) return GridSnapEmbedder(pitch).embed(g, positions);
  return SearchEmbedder(n).embed(g, positions);
}

}  // namespace tubed
