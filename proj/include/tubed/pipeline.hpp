#pragma once

// End-to-end run: sample -> net -> graphs -> growth -> lattice coords ->
// calibration -> f1, f2 -> combined map -> reach. Every stage writes its
// artifact atomically and the summary records each artifact's hash. Stage
// seeds are derive_seed(root, "<stage>"), so stages are independent of each
// other's sample counts.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "tubed/growth.hpp"
#include "tubed/io.hpp"
#include "tubed/lattice.hpp"
#include "tubed/net.hpp"
#include "tubed/partition.hpp"
#include "tubed/reach.hpp"
#include "tubed/smooth_maps.hpp"
#include "tubed/svg.hpp"

namespace tubed {

struct PipelineConfig {
  std::string model = "euclidean2";
  /// Empty means the model origin.
  std::vector<double> center;
  double region_radius = 12.0;
  double r = 0.25;
  std::vector<double> lambdas{1.0, 2.0, 4.0};
  /// Region sampling spacing; 0 means r/5.
  double spacing = 0.0;
  std::uint64_t seed = 1;
  int calibration_box = 3;
  double epsilon_margin = 1.25;
  /// Epsilon is estimated on a ball of this radius sampled at this spacing
  /// (0 means r/10: the peaks of |df1| are about r/10 wide).
  double epsilon_radius = 4.0;
  double epsilon_spacing = 0.0;
  double f2_plateau = 2.0;
  double f2_lambda = 3.0;
  /// Checks stay this far inside the region so every probe is covered.
  double interior_margin = 2.0;
  std::size_t graph_pairs = 10'000;
  std::size_t growth_centers = 8;
  std::size_t lebesgue_centers = 1'000;
  std::size_t separation_pairs = 10'000;
  std::size_t distortion_balls = 50;
  std::size_t distortion_pairs = 10'000;
  std::size_t geodesics = 100;
  std::size_t reach_points = 1'500;
  std::size_t far_pairs = 10'000;
  std::string output_dir = "out";

  double region_spacing() const { return spacing > 0.0 ? spacing : r / 5.0; }
  double eps_spacing() const { return epsilon_spacing > 0.0 ? epsilon_spacing : r / 10.0; }

  json to_json() const {
    return json{{"model", model},
                {"center", center},
                {"region_radius", region_radius},
                {"r", r},
                {"lambdas", lambdas},
                {"spacing", region_spacing()},
                {"seed", seed},
                {"calibration_box", calibration_box},
                {"epsilon_margin", epsilon_margin},
                {"epsilon_radius", epsilon_radius},
                {"epsilon_spacing", eps_spacing()},
                {"f2_plateau", f2_plateau},
                {"f2_lambda", f2_lambda},
                {"interior_margin", interior_margin},
                {"graph_pairs", graph_pairs},
                {"growth_centers", growth_centers},
                {"lebesgue_centers", lebesgue_centers},
                {"separation_pairs", separation_pairs},
                {"distortion_balls", distortion_balls},
                {"distortion_pairs", distortion_pairs},
                {"geodesics", geodesics},
                {"reach_points", reach_points},
                {"far_pairs", far_pairs}};
  }

  /// Reads known fields; unknown fields and type errors name the field path.
  static PipelineConfig from_json(const json& j) {
    if (!j.is_object()) throw ConfigurationError("cli", "config: expected a JSON object");
    PipelineConfig c;
    const auto field = [&](const char* key, auto& slot) {
      if (!j.contains(key)) return;
      try {
        slot = j.at(key).get<std::decay_t<decltype(slot)>>();
      } catch (const json::exception&) {
        throw ConfigurationError("cli", std::string("config.") + key + ": wrong type");
      }
    };
    static const std::vector<std::string> known{
        "model",          "center",          "region_radius",    "r",
        "lambdas",        "spacing",         "seed",             "calibration_box",
        "epsilon_margin", "epsilon_radius",  "epsilon_spacing",  "f2_plateau",
        "f2_lambda",      "interior_margin", "graph_pairs",      "growth_centers",
        "lebesgue_centers", "separation_pairs", "distortion_balls", "distortion_pairs",
        "geodesics",      "reach_points",    "far_pairs",        "output_dir"};
    for (const auto& [key, value] : j.items())
      if (std::find(known.begin(), known.end(), key) == known.end())
        throw ConfigurationError("cli", "config." + key + ": unknown field");
    if (j.contains("model") && j["model"].is_object()) {
      c.model = j["model"].dump();
    } else {
      field("model", c.model);
    }
    field("center", c.center);
    field("region_radius", c.region_radius);
    field("r", c.r);
    field("lambdas", c.lambdas);
    field("spacing", c.spacing);
    field("seed", c.seed);
    field("calibration_box", c.calibration_box);
    field("epsilon_margin", c.epsilon_margin);
    field("epsilon_radius", c.epsilon_radius);
    field("epsilon_spacing", c.epsilon_spacing);
    field("f2_plateau", c.f2_plateau);
    field("f2_lambda", c.f2_lambda);
    field("interior_margin", c.interior_margin);
    field("graph_pairs", c.graph_pairs);
    field("growth_centers", c.growth_centers);
    field("lebesgue_centers", c.lebesgue_centers);
    field("separation_pairs", c.separation_pairs);
    field("distortion_balls", c.distortion_balls);
    field("distortion_pairs", c.distortion_pairs);
    field("geodesics", c.geodesics);
    field("reach_points", c.reach_points);
    field("far_pairs", c.far_pairs);
    field("output_dir", c.output_dir);
    c.validate();
    return c;
  }

  void validate() const {
    const auto positive = [](const char* name, double v) {
      if (!(v > 0.0) || !std::isfinite(v)) throw ConfigurationError("cli", std::string("config.") + name + ": must be positive");
    };
    positive("region_radius", region_radius);
    positive("r", r);
    positive("epsilon_margin", epsilon_margin);
    positive("epsilon_radius", epsilon_radius);
    positive("f2_plateau", f2_plateau);
    positive("f2_lambda", f2_lambda);
    if (spacing < 0.0) throw ConfigurationError("cli", "config.spacing: must be positive (or 0 for r/5)");
    if (epsilon_spacing < 0.0) throw ConfigurationError("cli", "config.epsilon_spacing: must be positive (or 0 for r/10)");
    if (!(interior_margin >= 0.0) || interior_margin >= region_radius)
      throw ConfigurationError("cli", "config.interior_margin: must lie in [0, region_radius)");
    if (lambdas.empty()) throw ConfigurationError("cli", "config.lambdas: must be non-empty");
    for (std::size_t i = 0; i < lambdas.size(); ++i)
      if (!(lambdas[i] >= 1.0)) throw ConfigurationError("cli", "config.lambdas[" + std::to_string(i) + "]: must be >= 1");
    if (calibration_box < 2) throw ConfigurationError("cli", "config.calibration_box: must be >= 2");
    for (const auto& [name, v] : {std::pair{"graph_pairs", graph_pairs}, {"growth_centers", growth_centers},
                                   {"separation_pairs", separation_pairs}, {"distortion_balls", distortion_balls},
                                   {"distortion_pairs", distortion_pairs}, {"geodesics", geodesics},
                                   {"reach_points", reach_points}, {"far_pairs", far_pairs}})
      if (v == 0) throw ConfigurationError("cli", std::string("config.") + name + ": must be positive");
  }
};

/// Receives each artifact; the default writes into the output directory.
using ArtifactSink = std::function<void(const std::string& name, const std::string& content)>;

inline ArtifactSink directory_sink(const std::filesystem::path& dir) {
  return [dir](const std::string& name, const std::string& content) { write_atomic(dir / name, content); };
}

namespace detail {

class StageLog {
 public:
  explicit StageLog(std::ostream* log) : log_(log), start_(std::chrono::steady_clock::now()) {}
  void operator()(const std::string& stage) {
    if (!log_) return;
    const auto now = std::chrono::steady_clock::now();
    *log_ << "[pipeline] " << stage << " ("
          << std::chrono::duration_cast<std::chrono::milliseconds>(now - start_).count() << " ms)\n";
    start_ = now;
  }

 private:
  std::ostream* log_;
  std::chrono::steady_clock::time_point start_;
};

inline PointSet interior_subset(const PointSet& points, const Point& center, double radius) {
  PointSet out(points.model(), points.seed());
  for (std::size_t i = 0; i < points.size(); ++i)
    if (points.model().distance_unchecked(center, points[i]) <= radius) out.push_back_unchecked(points[i]);
  return out;
}

inline std::string lambda_tag(double lambda) {
  std::string s = format_double(lambda);
  for (char& ch : s)
    if (ch == '.') ch = 'p';
  return s;
}

}  // namespace detail

/// Runs every stage and returns the summary (also emitted as summary.json).
/// Text written to `log` carries timings and is not part of any artifact.
inline json run_pipeline(const PipelineConfig& cfg, const ArtifactSink& sink, std::ostream* log = nullptr) {
  cfg.validate();
  detail::StageLog stage(log);
  const ManifoldModel model = parse_model(cfg.model);
  Point center = model.origin();
  if (!cfg.center.empty()) center = point_from_json(json(cfg.center), model);
  const std::uint64_t root = cfg.seed;
  const auto seed_of = [root](const char* label) { return derive_seed(root, label); };

  json summary{{"schema", "v1"}, {"config", cfg.to_json()}, {"model", model_to_json(model)}};
  json artifacts = json::object();
  json stages = json::object();
  const auto emit = [&](const std::string& name, const std::string& content) {
    sink(name, content);
    artifacts[name] = hash_hex(content);
  };

  // sample
  const PointSet points = sample_region(model, center, cfg.region_radius, cfg.region_spacing(), seed_of("sample"));
  emit("points.csv", point_set_to_csv(points));
  stages["sample"] = json{{"points", points.size()}, {"spacing", cfg.region_spacing()}, {"seed", points.seed()}};
  stage("sample");

  // net
  VerifyOptions vo;
  vo.lebesgue_centers = cfg.lebesgue_centers;
  vo.seed = seed_of("net-verify");
  auto net = std::make_shared<const Net>(build_net(points, cfg.r, "points.csv"));
  const NetReport net_report = verify_net(*net, points, vo);
  {
    json j = net_to_json(*net);
    j["report"] = net_report_to_json(net_report);
    emit("net.json", dump(j));
  }
  stages["net"] = json{{"vertices", net->size()}, {"report", net_report_to_json(net_report)}};
  stage("net");

  // graphs
  json graphs = json::array();
  std::shared_ptr<IntersectionGraph> gamma1;
  for (double lambda : cfg.lambdas) {
    auto g = std::make_shared<IntersectionGraph>(intersection_graph(net, lambda));
    const DistanceComparison dc =
        check_distance_comparison(*g, cfg.graph_pairs, derive_seed(root, "graph-compare-" + detail::lambda_tag(lambda)));
    const std::string name = "graph_lambda" + detail::lambda_tag(lambda) + ".json";
    emit(name, dump(graph_to_json(*g)));
    graphs.push_back(json{{"lambda", lambda},
                          {"artifact", name},
                          {"edges", g->graph.edge_count()},
                          {"max_degree", g->graph.max_degree()},
                          {"pairs_checked", dc.pairs_checked},
                          {"disconnected_skipped", dc.disconnected_skipped},
                          {"max_violation", num(dc.max_violation)},
                          {"violations_ok", !(dc.max_violation > 0.0)}});
    if (!gamma1 || lambda < gamma1->lambda) gamma1 = g;
  }
  stages["graphs"] = graphs;
  stage("graphs");

  // growth on the smallest-lambda graph, radii kept inside the region
  {
    const int R_max = std::max(
        3, static_cast<int>(std::floor((cfg.region_radius - cfg.interior_margin) / (2.0 * gamma1->lambda * cfg.r))));
    const GrowthFit fit = graph_growth(gamma1->graph, central_vertices(*net, cfg.growth_centers), R_max);
    emit("growth.csv", growth_to_csv(fit));
    json gj = growth_to_json(fit);
    gj["lambda"] = gamma1->lambda;
    gj["R_max"] = R_max;
    emit("growth.json", dump(gj));
    PlotSeries s{std::string(model.kind_name()) + " lambda=" + format_double(gamma1->lambda), {}};
    for (std::size_t R = 1; R < fit.counts.size(); ++R)
      s.points.emplace_back(static_cast<double>(R), static_cast<double>(fit.counts[R]));
    sink("growth.svg", growth_curve_svg({s}));
    stages["growth"] = gj;
  }
  stage("growth");

  // lattice coordinates and calibration
  const int n = model.dimension();
  const double pitch = cfg.r / std::sqrt(2.0);
  LatticeCoords coords;
  json lattice_stage;
  if (model.is_flat()) {
    coords = grid_lattice_coords(*net, pitch);
    LatticeEmbedResult check;
    check.coords = coords;
    verify_lattice_coords(gamma1->graph, check);
    lattice_stage = json{{"method", "grid-snap"}, {"pitch", pitch}, {"injective", check.collisions.empty()},
                         {"gamma_edges_off_unit_length", check.violating_edges.size()}};
  } else {
    const LatticeEmbedResult res = SearchEmbedder(n).embed(gamma1->graph, &net->vertices);
    if (!res.success) {
      stages["lattice"] = json{{"method", "search"}, {"success", false}, {"reason", res.reason}};
      summary["stages"] = stages;
      summary["artifacts"] = artifacts;
      summary["completed"] = false;
      sink("summary.json", dump(summary));
      return summary;
    }
    coords = res.coords;
    lattice_stage = json{{"method", "search"}, {"success", true}};
  }
  emit("lattice.json", dump(lattice_coords_to_json(coords)));
  const CalibrationReport calib = calibrate_scale(n, cfg.calibration_box);
  emit("calibration.json", dump(calibration_to_json(calib)));
  stages["lattice"] = lattice_stage;
  stages["calibration"] = json{{"scale", calib.scale}, {"rho", calib.rho}, {"min_distance", calib.min_distance}};
  stage("lattice + calibration");

  // f1
  const Point c0 = center;
  const double interior = cfg.region_radius - cfg.interior_margin;
  auto partition = std::make_shared<const PartitionOfUnity>(net);
  auto f1 = std::make_shared<const F1Map>(partition, coords, PhiMap(n, calib.scale));
  const PointMap f1_map = [f1](const Point& x) { return (*f1)(x); };
  const PartitionScan pscan = partition_scan(*partition, points);
  const std::size_t N2 = count_n_lambda(*net, 2.0, points);
  const SeparationReport sep = separation_scan(f1_map, points, c0, cfg.region_radius, 1.0, 1.0, cfg.separation_pairs,
                                               seed_of("f1-separation"));
  {
    json j{{"dimension", f1->dimension()},
           {"phi_scale", calib.scale},
           {"separation", json{{"min_image", num(sep.min_image)}, {"pairs", sep.pairs}, {"below_one", sep.below_threshold}}},
           {"partition", json{{"points", pscan.points},
                              {"normalization_error", num(pscan.normalization_error)},
                              {"psi_min", num(pscan.psi_min)},
                              {"psi_max", num(pscan.psi_max)},
                              {"max_support", pscan.max_support},
                              {"N2", N2}}}};
    emit("f1.json", dump(j));
    stages["f1"] = j;
    std::vector<std::pair<double, double>> proj;
    for (std::uint32_t v = 0; v < net->size(); ++v) {
      const Eigen::VectorXd y = f1->image(v);
      proj.emplace_back(y(0), y(1));
    }
    sink("embedding.svg", scatter_svg(proj, "f1 lattice images, first two coordinates", "y0", "y1"));
  }
  stage("f1");

  // f2
  const F2Options f2opts{cfg.f2_plateau, cfg.f2_lambda};
  auto f2 = std::make_shared<const F2Map>(make_f2(net, f2opts));
  const PointMap f2_map = [f2](const Point& x) { return (*f2)(x); };
  {
    const ColorClassReport cc = check_color_classes(*net, f2->coloring(), 2.0 * cfg.f2_lambda * cfg.r);
    const std::size_t N6 = count_n_lambda(*net, 2.0 * cfg.f2_lambda);
    PointSet centers(model, seed_of("distortion-centers"));
    Rng crng(centers.seed());
    for (std::size_t b = 0; b < cfg.distortion_balls; ++b)
      centers.push_back(random_point_in_ball(model, c0, interior, crng));
    DistortionOptions dopt;
    dopt.pairs_per_ball = cfg.distortion_pairs;
    dopt.seed = seed_of("distortion");
    const DistortionReport dist = distortion_scan(f2_map, centers, dopt);
    json j{{"dimension", f2->dimension()},
           {"plateau", cfg.f2_plateau},
           {"coloring_lambda", cfg.f2_lambda},
           {"classes", f2->coloring().classes},
           {"class_bound", N6},
           {"classes_separated", cc.ok},
           {"distortion", distortion_to_json(dist)}};
    emit("f2.json", dump(j));
    stages["f2"] = j;
    sink("distortion.svg", histogram_svg(dist.histogram, -3.0, 1.0, "f2 distortion |f(x)-f(y)|/d(x,y)"));
  }
  stage("f2");

  // combine
  auto unscaled = std::make_shared<const CombinedMap>(f1, f2, 1.0);
  EpsilonOptions eo;
  eo.margin = cfg.epsilon_margin;
  eo.seed = seed_of("epsilon");
  const PointSet eps_samples = sample_region(model, center, std::min(cfg.epsilon_radius, interior), cfg.eps_spacing(),
                                             seed_of("epsilon-samples"));
  const EpsilonEstimate eps =
      choose_epsilon([unscaled](const Point& x) { return unscaled->unscaled(x); }, eps_samples, eo);
  auto combined = std::make_shared<const CombinedMap>(f1, f2, eps.epsilon);
  const PointMap f_map = [combined](const Point& x) { return (*combined)(x); };
  const PointSet interior_points = detail::interior_subset(points, c0, interior);
  DerivativeOptions dopt;
  dopt.geodesics = cfg.geodesics;
  dopt.seed = seed_of("derivatives");
  const DerivativeBounds db = derivative_bounds(f_map, interior_points, dopt);
  {
    json j{{"epsilon", eps.epsilon},
           {"sup_ratio", eps.sup_ratio},
           {"epsilon_samples", eps_samples.size()},
           {"directions", eps.directions},
           {"dimension", combined->dimension()},
           {"derivative_bounds", derivative_bounds_to_json(db)}};
    emit("combine.json", dump(j));
    stages["combine"] = j;
  }
  stage("combine");

  // reach
  TubednessOptions to;
  to.points = cfg.reach_points;
  to.far_pairs = cfg.far_pairs;
  to.seed = seed_of("tubedness");
  const ReachReport reach = tubedness_check(f_map, interior_points, eps.epsilon * (1.0 - 1e-6), to);
  emit("reach.json", dump(reach_to_json(reach)));
  stages["reach"] = reach_to_json(reach);
  stage("reach");

  summary["stages"] = stages;
  summary["artifacts"] = artifacts;
  summary["completed"] = true;
  sink("summary.json", dump(summary));
  return summary;
}

}  // namespace tubed
