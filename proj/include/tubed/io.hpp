#pragma once

// Artifact formats: model descriptors, nets, graphs, lattice coordinates,
// reports and DeltaGraphs as JSON; point sets and growth tables as CSV.
// Writes are atomic (temp file + rename) and hashed with FNV-1a.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tubed/errors.hpp"
#include "tubed/graph.hpp"
#include "tubed/growth.hpp"
#include "tubed/lattice.hpp"
#include "tubed/manifold.hpp"
#include "tubed/net.hpp"
#include "tubed/point_set.hpp"
#include "tubed/reach.hpp"
#include "tubed/rng.hpp"
#include "tubed/sff.hpp"
#include "tubed/smooth_maps.hpp"
#include "tubed/universal.hpp"

namespace tubed {

using json = nlohmann::ordered_json;

/// Non-finite doubles become the strings "inf", "-inf", "nan".
inline json num(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

inline double num_from(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw InputError("cli", "expected a number, got \"" + s + "\"");
  }
  return j.get<double>();
}

inline std::string hash_hex(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return std::string("fnv1a64:") + buf;
}

/// Writes `content` to a sibling temp file and renames it over `path`.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cli", "cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw InputError("cli", "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cli", "cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline json read_json(const std::filesystem::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw InputError("cli", path.string() + ": " + e.what());
  }
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---- model descriptors ------------------------------------------------------

inline json model_to_json(const ManifoldModel& m) {
  json params = json::object();
  switch (m.kind()) {
    case ModelKind::Euclidean: params["n"] = m.dimension(); break;
    case ModelKind::FlatTorus: params["periods"] = m.periods(); break;
    case ModelKind::Sphere: params["radius"] = m.radius(); break;
    case ModelKind::HyperbolicPlane: params["scale"] = m.radius(); break;
  }
  return json{{"kind", m.kind_name()}, {"params", params}};
}

inline ManifoldModel model_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind")) throw InputError("manifold-models", "model descriptor needs a 'kind'");
  const std::string kind = j["kind"].get<std::string>();
  const json p = j.value("params", json::object());
  if (kind == "euclidean") return ManifoldModel::euclidean(p.value("n", 2));
  if (kind == "flat_torus") {
    if (!p.contains("periods")) throw InputError("manifold-models", "params.periods is required for flat_torus");
    return ManifoldModel::flat_torus(p["periods"].get<std::vector<double>>());
  }
  if (kind == "sphere") return ManifoldModel::sphere(p.value("radius", 1.0));
  if (kind == "hyperbolic_plane") return ManifoldModel::hyperbolic_plane(p.value("scale", 1.0));
  throw InputError("manifold-models", "unknown model kind '" + kind + "'");
}

/// Shorthands: euclidean<n>, hyperbolic[:scale], sphere[:radius],
/// torus:<p1>,<p2>,...; or an inline JSON descriptor.
inline ManifoldModel parse_model(const std::string& text) {
  if (!text.empty() && text.front() == '{') return model_from_json(json::parse(text));
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  try {
    if (head.rfind("euclidean", 0) == 0) return ManifoldModel::euclidean(head.size() > 9 ? std::stoi(head.substr(9)) : 2);
    if (head == "hyperbolic") return ManifoldModel::hyperbolic_plane(arg.empty() ? 1.0 : std::stod(arg));
    if (head == "sphere") return ManifoldModel::sphere(arg.empty() ? 1.0 : std::stod(arg));
    if (head == "torus") {
      std::vector<double> periods;
      std::stringstream ss(arg);
      std::string cell;
      while (std::getline(ss, cell, ',')) periods.push_back(std::stod(cell));
      return ManifoldModel::flat_torus(periods);
    }
  } catch (const std::logic_error&) {
    throw InputError("manifold-models", "malformed model descriptor '" + text + "'");
  }
  throw InputError("manifold-models", "unknown model descriptor '" + text + "'");
}

inline json point_to_json(const Point& p) {
  json a = json::array();
  for (int k = 0; k < p.size(); ++k) a.push_back(p(k));
  return a;
}

inline Point point_from_json(const json& j, const ManifoldModel& model) {
  const auto v = j.get<std::vector<double>>();
  if (static_cast<int>(v.size()) != model.coord_dimension())
    throw InputError("manifold-models", "point has " + std::to_string(v.size()) + " coordinates, model needs " +
                                            std::to_string(model.coord_dimension()));
  Point p(model.coord_dimension());
  for (std::size_t k = 0; k < v.size(); ++k) p(static_cast<Eigen::Index>(k)) = v[k];
  model.validate(p);
  return p;
}

inline PointSet read_point_csv(const ManifoldModel& model, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cli", "cannot read " + path.string());
  return point_set_from_csv(model, in);
}

// ---- nets and graphs --------------------------------------------------------

inline json net_report_to_json(const NetReport& r) {
  return json{{"separation_ok", r.separation_ok},   {"min_separation", num(r.min_separation)},
              {"cover_radius", num(r.cover_radius)}, {"cover_ok", r.cover_ok},
              {"uncovered", r.uncovered},            {"lebesgue_ok", r.lebesgue_ok},
              {"lebesgue_centers", r.lebesgue_centers}, {"lebesgue_failures", r.lebesgue_failures}};
}

inline json vertices_to_json(const Net& net) {
  json vs = json::array();
  for (std::uint32_t v = 0; v < net.size(); ++v) vs.push_back(json{{"id", v}, {"coords", point_to_json(net.vertices[v])}});
  return vs;
}

inline json net_to_json(const Net& net) {
  return json{{"model", model_to_json(net.model())}, {"r", net.r},       {"seed", net.vertices.seed()},
              {"source", net.source_id},             {"vertices", vertices_to_json(net)}};
}

inline Net net_from_json(const json& j) {
  const ManifoldModel model = model_from_json(j.at("model"));
  Net net{j.at("r").get<double>(), PointSet(model, j.value("seed", std::uint64_t{0})), {}, j.value("source", "")};
  const json& vs = j.at("vertices");
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (vs[i].at("id").get<std::size_t>() != i) throw InputError("net-graph", "vertex ids must be 0..n-1 in order");
    net.vertices.push_back(point_from_json(vs[i].at("coords"), model));
    net.source_index.push_back(static_cast<std::uint32_t>(i));
  }
  return net;
}

/// {vertices:[{id, coords}], edges:[[i,j]], r, lambda} plus the model.
inline json graph_to_json(const IntersectionGraph& g) {
  json edges = json::array();
  for (const auto& [a, b] : g.graph.edges()) edges.push_back(json::array({a, b}));
  return json{{"model", model_to_json(g.net->model())},
              {"r", g.net->r},
              {"lambda", g.lambda},
              {"vertices", vertices_to_json(*g.net)},
              {"edges", edges}};
}

inline IntersectionGraph graph_from_json(const json& j) {
  IntersectionGraph g;
  g.net = std::make_shared<const Net>(net_from_json(j));
  g.lambda = j.at("lambda").get<double>();
  std::vector<std::pair<Vertex, Vertex>> edges;
  for (const auto& e : j.at("edges")) edges.emplace_back(e.at(0).get<Vertex>(), e.at(1).get<Vertex>());
  try {
    g.graph = Graph::from_edges(g.net->size(), std::move(edges));
  } catch (const DomainError& e) {
    throw InputError("net-graph", e.what());
  }
  return g;
}

inline std::string growth_to_csv(const GrowthFit& fit) {
  std::ostringstream os;
  os << "R,count\n";
  for (std::size_t R = 0; R < fit.counts.size(); ++R) os << R << "," << fit.counts[R] << "\n";
  return os.str();
}

inline json growth_to_json(const GrowthFit& fit) {
  auto line = [](const LineFit& l) {
    return json{{"intercept", num(l.intercept)}, {"slope", num(l.slope)}, {"residual", num(l.residual)}};
  };
  return json{{"classification", growth_class_name(fit.classification)},
              {"degree", fit.degree},
              {"exponent", num(fit.exponent())},
              {"window", json::array({fit.window_lo, fit.window_hi})},
              {"saturated_at", fit.saturated_at},
              {"polynomial", line(fit.polynomial)},
              {"exponential", line(fit.exponential)}};
}

// ---- lattice ----------------------------------------------------------------

inline json lattice_coords_to_json(const LatticeCoords& c) {
  json coords = json::object();
  for (std::size_t v = 0; v < c.coords.size(); ++v) coords[std::to_string(v)] = c.coords[v];
  return json{{"n", c.n}, {"coords", coords}};
}

inline LatticeCoords lattice_coords_from_json(const json& j) {
  LatticeCoords c;
  c.n = j.at("n").get<int>();
  const json& coords = j.at("coords");
  c.coords.resize(coords.size());
  for (const auto& [key, value] : coords.items()) {
    std::size_t v = 0;
    try {
      v = std::stoul(key);
    } catch (const std::logic_error&) {
      throw InputError("lattice-embed", "vertex id '" + key + "' is not an integer");
    }
    if (v >= c.coords.size()) throw InputError("lattice-embed", "vertex ids must be 0..n-1");
    c.coords[v] = value.get<LatticePoint>();
    if (static_cast<int>(c.coords[v].size()) != c.n) throw InputError("lattice-embed", "coordinate length differs from n");
  }
  return c;
}

inline json calibration_to_json(const CalibrationReport& r) {
  return json{{"n", r.n},
              {"box", r.box},
              {"scale", r.scale},
              {"rho", r.rho},
              {"unit_min_distance", r.unit_min_distance},
              {"min_distance", r.min_distance},
              {"extremal_pair", json::array({r.extremal_a, r.extremal_b})},
              {"cliques", r.cliques},
              {"pairs", r.pairs}};
}

// ---- map and geometry reports -----------------------------------------------

inline json reach_to_json(const ReachReport& r) {
  return json{{"reach_estimate", num(r.reach_estimate)},
              {"max_normal_curvature", num(r.max_normal_curvature)},
              {"witness", json{{"i", r.witness_i}, {"j", r.witness_j}}},
              {"n_pairs", r.n_pairs},
              {"seed", r.seed},
              {"projection_injective", r.projection_injective},
              {"scale", num(r.scale)},
              {"far_pairs", r.far_pairs},
              {"far_min_image", num(r.far_min_image)},
              {"far_violations", r.far_violations}};
}

inline json sweep_to_json(const SweepReport& r) {
  return json{{"samples", r.samples},        {"rejected", r.rejected}, {"violations", r.violations},
              {"K_min", num(r.K_min)},       {"K_max", num(r.K_max)},  {"quadrature_gap", num(r.quadrature_gap)},
              {"seed", r.seed}};
}

inline json distortion_to_json(const DistortionReport& r) {
  json balls = json::array();
  for (const auto& [lo, hi] : r.per_ball) balls.push_back(json::array({num(lo), num(hi)}));
  return json{{"lower", num(r.lower)},
              {"upper", num(r.upper)},
              {"pairs", r.pairs},
              {"per_ball", balls},
              {"histogram", json{{"log10_lo", -3.0}, {"log10_hi", 1.0}, {"counts", r.histogram}}}};
}

inline json derivative_bounds_to_json(const DerivativeBounds& b) {
  json c = json::array();
  for (int k = 1; k <= b.k_max; ++k) c.push_back(num(b.C[k]));
  return json{{"C", c}, {"k_max", b.k_max}, {"geodesics", b.geodesics}};
}

// ---- universal obstruction --------------------------------------------------

inline json delta_to_json(const DeltaGraph& d) {
  json levels = json::array(), matchings = json::array(), certs = json::array();
  for (const auto& l : d.levels) {
    levels.push_back(l.S);
    json m = json::array();
    for (std::uint64_t a = 0; a < l.L; ++a) m.push_back(json::array({l.S_prev + a, l.S - l.L + l.matching[a]}));
    matchings.push_back(m);
    certs.push_back(json{{"K", l.K},
                         {"root_image", l.root_image ? json(*l.root_image) : json(nullptr)},
                         {"target", l.target},
                         {"L", l.L},
                         {"search_nodes", l.search_nodes},
                         {"exhausted", l.exhausted},
                         {"candidates_tried", l.candidates_tried},
                         {"spans_tried", l.spans_tried},
                         {"seed", l.seed},
                         {"node_budget", l.node_budget}});
  }
  json edges = json::array();
  for (const auto& [a, b] : d.graph().edges()) edges.push_back(json::array({a, b}));
  return json{{"vertices", d.size()},
              {"edges", edges},
              {"levels", levels},
              {"matchings", matchings},
              {"certificates", certs}};
}

}  // namespace tubed
