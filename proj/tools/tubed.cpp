// Command-line front end. Exit status: 0 success, 1 module error (JSON
// payload on stderr), 2 usage or configuration error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tubed/growth.hpp"
#include "tubed/io.hpp"
#include "tubed/lattice.hpp"
#include "tubed/net.hpp"
#include "tubed/partition.hpp"
#include "tubed/pipeline.hpp"
#include "tubed/reach.hpp"
#include "tubed/sff.hpp"
#include "tubed/smooth_maps.hpp"
#include "tubed/svg.hpp"
#include "tubed/universal.hpp"

namespace fs = std::filesystem;
using namespace tubed;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// --out, else $TUBED_OUTPUT_DIR, else "out".
fs::path output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("TUBED_OUTPUT_DIR"); env && *env) return env;
  return "out";
}

void emit(const fs::path& dir, const std::string& name, const std::string& content) {
  write_atomic(dir / name, content);
  std::cout << (dir / name).string() << "  " << hash_hex(content) << "\n";
}

Point parse_point(const std::string& text, const ManifoldModel& model) {
  if (text.empty()) return model.origin();
  std::vector<double> v;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
  return point_from_json(json(v), model);
}

Graph parse_target(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  if (colon != std::string::npos && (kind == "path" || kind == "complete" || kind == "cycle")) {
    const auto n = static_cast<std::size_t>(std::stoul(text.substr(colon + 1)));
    if (n == 0) throw UsageError("--target: size must be positive");
    if (kind == "path") return Graph::path(n);
    if (kind == "complete") return Graph::complete(n);
    std::vector<std::pair<Vertex, Vertex>> e;
    for (Vertex i = 0; i < n; ++i) e.emplace_back(i, static_cast<Vertex>((i + 1) % n));
    return Graph::from_edges(n, e);
  }
  return graph_from_json(read_json(text)).graph;
}

double scale_from(const std::string& calibration, double scale, int n) {
  if (scale > 0.0) return scale;
  if (!calibration.empty()) return read_json(calibration).at("scale").get<double>();
  return calibrate_scale(n, 3).scale;
}

std::string images_csv(const std::function<Eigen::VectorXd(const Point&)>& f, const PointSet& pts,
                       const std::string& header) {
  std::ostringstream os;
  os << header << "\n";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Eigen::VectorXd y = f(pts[i]);
    for (Eigen::Index k = 0; k < y.size(); ++k) os << (k ? "," : "") << format_double(y(k));
    os << "\n";
  }
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tubed: nets, lattice maps, smooth embeddings and reach checks for manifolds of bounded geometry"};
  app.require_subcommand(1, 1);
  std::string out_flag;
  app.add_option("--out", out_flag, "Output directory (default $TUBED_OUTPUT_DIR, else ./out)");

  // sample
  auto* sample = app.add_subcommand("sample", "Sample a geodesic ball of a model");
  std::string s_model = "euclidean2", s_center;
  double s_radius = 12.0, s_spacing = 0.05;
  std::uint64_t s_seed = 1;
  sample->add_option("--model", s_model, "Model descriptor (euclidean2, hyperbolic[:a], sphere[:R], torus:p1,p2, JSON)");
  sample->add_option("--center", s_center, "Comma-separated center coordinates (default origin)");
  sample->add_option("--radius", s_radius)->check(CLI::NonNegativeNumber);
  sample->add_option("--spacing", s_spacing)->check(CLI::PositiveNumber);
  sample->add_option("--seed", s_seed);

  // net
  auto* net_cmd = app.add_subcommand("net", "Greedy r-net of a point CSV, with verification report");
  std::string n_model = "euclidean2", n_points;
  double n_r = 0.25;
  std::size_t n_lebesgue = 1000;
  std::uint64_t n_seed = 1;
  net_cmd->add_option("--model", n_model);
  net_cmd->add_option("--points", n_points, "Point CSV from `sample`")->required();
  net_cmd->add_option("--r", n_r)->check(CLI::PositiveNumber);
  net_cmd->add_option("--lebesgue-centers", n_lebesgue);
  net_cmd->add_option("--seed", n_seed);

  // graph
  auto* graph_cmd = app.add_subcommand("graph", "Intersection graph Gamma_lambda of a net");
  std::string g_net;
  double g_lambda = 1.0;
  std::size_t g_pairs = 10'000;
  std::uint64_t g_seed = 1;
  graph_cmd->add_option("--net", g_net)->required();
  graph_cmd->add_option("--lambda", g_lambda)->check(CLI::Range(1.0, 1e9));
  graph_cmd->add_option("--pairs", g_pairs, "Random pairs for the metric comparison");
  graph_cmd->add_option("--seed", g_seed);

  // growth
  auto* growth_cmd = app.add_subcommand("growth", "Ball growth and classification of one or more graphs");
  std::vector<std::string> gr_graphs;
  int gr_rmax = 12;
  std::size_t gr_centers = 8;
  growth_cmd->add_option("--graph", gr_graphs, "Graph JSON (repeatable; one curve each)")->required();
  growth_cmd->add_option("--rmax", gr_rmax)->check(CLI::PositiveNumber);
  growth_cmd->add_option("--centers", gr_centers)->check(CLI::PositiveNumber);

  // lattice
  auto* lattice_cmd = app.add_subcommand("lattice", "Lattice coordinates for the vertices of a graph");
  std::string l_graph, l_method = "auto";
  double l_pitch = 0.0;
  lattice_cmd->add_option("--graph", l_graph)->required();
  lattice_cmd->add_option("--method", l_method)->check(CLI::IsMember({"auto", "grid", "search", "snap"}));
  lattice_cmd->add_option("--pitch", l_pitch, "Grid pitch (default r/sqrt 2)");

  // calibrate
  auto* calib_cmd = app.add_subcommand("calibrate", "Scale of the lattice map Phi by exhaustive clique pairs");
  int c_n = 2, c_box = 3;
  calib_cmd->add_option("--n", c_n)->check(CLI::Range(1, 4));
  calib_cmd->add_option("--box", c_box)->check(CLI::Range(2, 64));

  // f1
  auto* f1_cmd = app.add_subcommand("f1", "Separating map f1 = sum phi_v Phi(c_v)");
  std::string f1_net, f1_lattice, f1_calibration, f1_points;
  double f1_scale = 0.0;
  std::size_t f1_pairs = 10'000;
  std::uint64_t f1_seed = 1;
  f1_cmd->add_option("--net", f1_net)->required();
  f1_cmd->add_option("--lattice", f1_lattice)->required();
  f1_cmd->add_option("--calibration", f1_calibration);
  f1_cmd->add_option("--scale", f1_scale);
  f1_cmd->add_option("--points", f1_points, "Point CSV: separation region, and images written to f1_images.csv");
  f1_cmd->add_option("--pairs", f1_pairs);
  f1_cmd->add_option("--seed", f1_seed);

  // f2
  auto* f2_cmd = app.add_subcommand("f2", "Locally bi-Lipschitz map f2 and its distortion on unit balls");
  std::string f2_net;
  double f2_plateau = 2.0, f2_lambda = 3.0, f2_margin = 2.0;
  std::size_t f2_balls = 50, f2_pairs = 10'000;
  std::uint64_t f2_seed = 1;
  bool f2_verbatim = false;
  f2_cmd->add_option("--net", f2_net)->required();
  f2_cmd->add_option("--plateau", f2_plateau)->check(CLI::PositiveNumber);
  f2_cmd->add_option("--lambda", f2_lambda)->check(CLI::Range(1.0, 1e9));
  f2_cmd->add_flag("--verbatim", f2_verbatim, "sigma(2|x|) with Gamma_2 classes");
  f2_cmd->add_option("--balls", f2_balls);
  f2_cmd->add_option("--pairs", f2_pairs);
  f2_cmd->add_option("--margin", f2_margin, "Ball centers stay this far inside the net's region");
  f2_cmd->add_option("--seed", f2_seed);

  // combine
  auto* comb_cmd = app.add_subcommand("combine", "epsilon (f1 + f2): choose epsilon, derivative bounds");
  std::string cb_net, cb_lattice, cb_calibration, cb_eval;
  double cb_scale = 0.0, cb_eps_radius = 4.0, cb_eps_spacing = 0.0, cb_margin = 1.25;
  std::uint64_t cb_seed = 1;
  std::size_t cb_geodesics = 100;
  comb_cmd->add_option("--net", cb_net)->required();
  comb_cmd->add_option("--lattice", cb_lattice)->required();
  comb_cmd->add_option("--calibration", cb_calibration);
  comb_cmd->add_option("--scale", cb_scale);
  comb_cmd->add_option("--eps-radius", cb_eps_radius)->check(CLI::PositiveNumber);
  comb_cmd->add_option("--eps-spacing", cb_eps_spacing, "Default r/10");
  comb_cmd->add_option("--margin", cb_margin)->check(CLI::PositiveNumber);
  comb_cmd->add_option("--geodesics", cb_geodesics);
  comb_cmd->add_option("--eval", cb_eval, "Point CSV to map; images written to combined_images.csv");
  comb_cmd->add_option("--seed", cb_seed);

  // reach
  auto* reach_cmd = app.add_subcommand("reach", "Reach and far-pair separation of an embedding");
  std::string rc_net, rc_lattice, rc_calibration, rc_points;
  double rc_scale = 0.0, rc_eps = 0.0, rc_margin = 2.0;
  std::size_t rc_n = 1500, rc_far = 10'000, rc_sphere = 0;
  std::uint64_t rc_seed = 1;
  reach_cmd->add_option("--net", rc_net);
  reach_cmd->add_option("--lattice", rc_lattice);
  reach_cmd->add_option("--calibration", rc_calibration);
  reach_cmd->add_option("--scale", rc_scale);
  reach_cmd->add_option("--epsilon", rc_eps, "Combined-map epsilon (from `combine`)");
  reach_cmd->add_option("--points", rc_points, "Region point CSV");
  reach_cmd->add_option("--margin", rc_margin);
  reach_cmd->add_option("--samples", rc_n);
  reach_cmd->add_option("--far-pairs", rc_far);
  reach_cmd->add_option("--sphere", rc_sphere, "Control run: unit sphere sampled at this many points per side");
  reach_cmd->add_option("--seed", rc_seed);

  // gauss
  auto* gauss_cmd = app.add_subcommand("gauss", "Gauss-formula bound sweep over admissible second fundamental forms");
  std::size_t ga_sweep = 10'000;
  std::uint64_t ga_seed = 1;
  int ga_codim = 3;
  gauss_cmd->add_option("--sweep", ga_sweep)->check(CLI::PositiveNumber);
  gauss_cmd->add_option("--seed", ga_seed);
  gauss_cmd->add_option("--max-codim", ga_codim)->check(CLI::Range(1, 16));

  // universal
  auto* uni_cmd = app.add_subcommand("universal", "Obstruction graphs Delta_k with certified regular-map search");
  std::vector<std::string> u_targets;
  std::uint64_t u_levels = 1, u_max_sk = 4096, u_max_candidates = 64, u_budget = 5'000'000, u_seed = 1;
  uni_cmd->add_option("--target", u_targets, "path:N, cycle:N, complete:N or graph JSON (repeat for interleaving)")
      ->required();
  uni_cmd->add_option("--levels", u_levels)->check(CLI::PositiveNumber);
  uni_cmd->add_option("--max-sk", u_max_sk)->check(CLI::PositiveNumber);
  uni_cmd->add_option("--max-candidates", u_max_candidates)->check(CLI::PositiveNumber);
  uni_cmd->add_option("--search-node-budget", u_budget)->check(CLI::PositiveNumber);
  uni_cmd->add_option("--seed", u_seed);

  // pipeline
  auto* pipe_cmd = app.add_subcommand("pipeline", "Run every stage and write a v1 summary");
  std::string p_config, p_model;
  double p_radius = 0.0, p_r = 0.0;
  std::uint64_t p_seed = 0;
  pipe_cmd->add_option("--config", p_config, "PipelineConfig JSON");
  pipe_cmd->add_option("--model", p_model);
  pipe_cmd->add_option("--region-radius", p_radius);
  pipe_cmd->add_option("--r", p_r);
  pipe_cmd->add_option("--seed", p_seed);

  if (argc <= 1) {
    std::cerr << app.help();
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const fs::path out = output_dir(out_flag);

    if (*sample) {
      const ManifoldModel model = parse_model(s_model);
      const PointSet pts = sample_region(model, parse_point(s_center, model), s_radius, s_spacing, s_seed);
      emit(out, "points.csv", point_set_to_csv(pts));
    } else if (*net_cmd) {
      const ManifoldModel model = parse_model(n_model);
      const PointSet pts = read_point_csv(model, n_points);
      const Net net = build_net(pts, n_r, fs::path(n_points).filename().string());
      VerifyOptions vo;
      vo.lebesgue_centers = n_lebesgue;
      vo.seed = n_seed;
      json j = net_to_json(net);
      j["report"] = net_report_to_json(verify_net(net, pts, vo));
      emit(out, "net.json", dump(j));
    } else if (*graph_cmd) {
      auto net = std::make_shared<const Net>(net_from_json(read_json(g_net)));
      const IntersectionGraph g = intersection_graph(net, g_lambda);
      const DistanceComparison dc = check_distance_comparison(g, g_pairs, g_seed);
      json j = graph_to_json(g);
      j["distance_comparison"] = json{{"pairs_checked", dc.pairs_checked},
                                      {"disconnected_skipped", dc.disconnected_skipped},
                                      {"max_violation", num(dc.max_violation)}};
      emit(out, "graph_lambda" + detail::lambda_tag(g_lambda) + ".json", dump(j));
    } else if (*growth_cmd) {
      std::vector<PlotSeries> series;
      for (const auto& path : gr_graphs) {
        const IntersectionGraph g = graph_from_json(read_json(path));
        const GrowthFit fit = graph_growth(g.graph, central_vertices(*g.net, gr_centers), gr_rmax);
        const std::string stem = fs::path(path).stem().string();
        emit(out, stem + ".growth.csv", growth_to_csv(fit));
        emit(out, stem + ".growth.json", dump(growth_to_json(fit)));
        PlotSeries s{std::string(g.net->model().kind_name()) + " (" + stem + ")", {}};
        for (std::size_t R = 1; R < fit.counts.size(); ++R)
          s.points.emplace_back(static_cast<double>(R), static_cast<double>(fit.counts[R]));
        series.push_back(std::move(s));
      }
      emit(out, "growth.svg", growth_curve_svg(series));
    } else if (*lattice_cmd) {
      const IntersectionGraph g = graph_from_json(read_json(l_graph));
      const double pitch = l_pitch > 0.0 ? l_pitch : g.net->r / std::sqrt(2.0);
      const int n = g.net->model().dimension();
      json j;
      if (l_method == "snap" || (l_method == "auto" && g.net->model().is_flat())) {
        // Injective snap used by f1; edges need not have unit length.
        j = lattice_coords_to_json(grid_lattice_coords(*g.net, pitch));
        j["method"] = "snap";
      } else {
        const LatticeEmbedResult res = l_method == "grid" ? GridSnapEmbedder(pitch).embed(g.graph, &g.net->vertices)
                                                          : SearchEmbedder(n).embed(g.graph, &g.net->vertices);
        if (!res.success) throw PreconditionError("lattice-embed", "no lattice coordinates: " + res.reason);
        j = lattice_coords_to_json(res.coords);
        j["method"] = l_method == "grid" ? "grid" : "search";
      }
      emit(out, "lattice.json", dump(j));
    } else if (*calib_cmd) {
      emit(out, "calibration.json", dump(calibration_to_json(calibrate_scale(c_n, c_box))));
    } else if (*f1_cmd) {
      auto net = std::make_shared<const Net>(net_from_json(read_json(f1_net)));
      const LatticeCoords coords = lattice_coords_from_json(read_json(f1_lattice));
      const int n = net->model().dimension();
      auto partition = std::make_shared<const PartitionOfUnity>(net);
      const F1Map f1(partition, coords, PhiMap(n, scale_from(f1_calibration, f1_scale, n)));
      const PointMap f = [&f1](const Point& x) { return f1(x); };
      json j{{"dimension", f1.dimension()}, {"phi_scale", f1.phi().scale()}};
      if (!f1_points.empty()) {
        const PointSet pts = read_point_csv(net->model(), f1_points);
        double R = 0.0;
        const Point c = net->model().origin();
        for (std::size_t i = 0; i < pts.size(); ++i) R = std::max(R, net->model().distance_unchecked(c, pts[i]));
        const SeparationReport sep = separation_scan(f, pts, c, R, 1.0, 1.0, f1_pairs, f1_seed);
        const PartitionScan ps = partition_scan(*partition, pts);
        j["separation"] = json{{"min_image", num(sep.min_image)}, {"pairs", sep.pairs}, {"below_one", sep.below_threshold}};
        j["partition"] = json{{"points", ps.points},
                              {"normalization_error", num(ps.normalization_error)},
                              {"psi_min", num(ps.psi_min)},
                              {"psi_max", num(ps.psi_max)},
                              {"N2", count_n_lambda(*net, 2.0, pts)}};
        emit(out, "f1_images.csv",
             images_csv(f, pts, "# map=f1 d1=" + std::to_string(f1.dimension()) + " seed=" + std::to_string(pts.seed())));
      }
      emit(out, "f1.json", dump(j));
    } else if (*f2_cmd) {
      auto net = std::make_shared<const Net>(net_from_json(read_json(f2_net)));
      const F2Options opts = f2_verbatim ? F2Options::verbatim() : F2Options{f2_plateau, f2_lambda};
      const F2Map f2 = make_f2(net, opts);
      const ManifoldModel& model = net->model();
      const Point c = model.origin();
      double R = 0.0;
      for (std::uint32_t v = 0; v < net->size(); ++v) R = std::max(R, model.distance_unchecked(c, net->vertices[v]));
      PointSet centers(model, f2_seed);
      Rng rng(derive_seed(f2_seed, "distortion-centers"));
      for (std::size_t b = 0; b < f2_balls; ++b) centers.push_back(random_point_in_ball(model, c, std::max(0.0, R - f2_margin), rng));
      DistortionOptions dopt;
      dopt.pairs_per_ball = f2_pairs;
      dopt.seed = f2_seed;
      const DistortionReport dist = distortion_scan([&f2](const Point& x) { return f2(x); }, centers, dopt);
      const json j{{"dimension", f2.dimension()},
                   {"plateau", opts.plateau},
                   {"coloring_lambda", opts.lambda},
                   {"classes", f2.coloring().classes},
                   {"classes_separated", check_color_classes(*net, f2.coloring(), 2.0 * opts.lambda * net->r).ok},
                   {"distortion", distortion_to_json(dist)}};
      emit(out, "f2.json", dump(j));
      emit(out, "distortion.svg", histogram_svg(dist.histogram, -3.0, 1.0));
    } else if (*comb_cmd) {
      auto net = std::make_shared<const Net>(net_from_json(read_json(cb_net)));
      const ManifoldModel& model = net->model();
      const int n = model.dimension();
      auto partition = std::make_shared<const PartitionOfUnity>(net);
      auto f1 = std::make_shared<const F1Map>(partition, lattice_coords_from_json(read_json(cb_lattice)),
                                              PhiMap(n, scale_from(cb_calibration, cb_scale, n)));
      auto f2 = std::make_shared<const F2Map>(make_f2(net));
      const CombinedMap unscaled(f1, f2, 1.0);
      const double spacing = cb_eps_spacing > 0.0 ? cb_eps_spacing : net->r / 10.0;
      const PointSet samples = sample_region(model, model.origin(), cb_eps_radius, spacing, derive_seed(cb_seed, "epsilon-samples"));
      EpsilonOptions eo;
      eo.margin = cb_margin;
      eo.seed = cb_seed;
      const EpsilonEstimate eps = choose_epsilon([&](const Point& x) { return unscaled.unscaled(x); }, samples, eo);
      const CombinedMap f(f1, f2, eps.epsilon);
      DerivativeOptions dopt;
      dopt.geodesics = cb_geodesics;
      dopt.seed = cb_seed;
      const DerivativeBounds db = derivative_bounds([&f](const Point& x) { return f(x); }, samples, dopt);
      emit(out, "combine.json",
           dump(json{{"epsilon", eps.epsilon},
                     {"sup_ratio", eps.sup_ratio},
                     {"epsilon_samples", samples.size()},
                     {"dimension", f.dimension()},
                     {"derivative_bounds", derivative_bounds_to_json(db)}}));
      if (!cb_eval.empty()) {
        const PointSet pts = read_point_csv(model, cb_eval);
        std::ostringstream h;
        h << "# map=combined epsilon=" << format_double(eps.epsilon) << " d1=" << f1->dimension()
          << " d2=" << f2->dimension() << " seed=" << cb_seed << " points_seed=" << pts.seed();
        emit(out, "combined_images.csv", images_csv([&f](const Point& x) { return f(x); }, pts, h.str()));
      }
    } else if (*reach_cmd) {
      TubednessOptions to;
      to.points = rc_n;
      to.far_pairs = rc_far;
      to.seed = rc_seed;
      ReachReport rep;
      if (rc_sphere > 0) {
        const ManifoldModel S2 = ManifoldModel::sphere(1.0);
        const PointSet region = sample_region(S2, S2.origin(), std::numbers::pi, std::numbers::pi / static_cast<double>(rc_sphere), rc_seed);
        rep = tubedness_check([](const Point& x) { return Eigen::VectorXd(x); }, region, 0.0, to);
      } else {
        if (rc_net.empty() || rc_lattice.empty() || rc_points.empty() || !(rc_eps > 0.0))
          throw UsageError("reach: --net, --lattice, --points and --epsilon are required (or --sphere N)");
        auto net = std::make_shared<const Net>(net_from_json(read_json(rc_net)));
        const ManifoldModel& model = net->model();
        const int n = model.dimension();
        auto partition = std::make_shared<const PartitionOfUnity>(net);
        auto f1 = std::make_shared<const F1Map>(partition, lattice_coords_from_json(read_json(rc_lattice)),
                                                PhiMap(n, scale_from(rc_calibration, rc_scale, n)));
        auto f2 = std::make_shared<const F2Map>(make_f2(net));
        const CombinedMap f(f1, f2, rc_eps);
        const PointSet pts = read_point_csv(model, rc_points);
        double R = 0.0;
        const Point c = model.origin();
        for (std::size_t i = 0; i < pts.size(); ++i) R = std::max(R, model.distance_unchecked(c, pts[i]));
        PointSet inner(model, pts.seed());
        for (std::size_t i = 0; i < pts.size(); ++i)
          if (model.distance_unchecked(c, pts[i]) <= R - rc_margin) inner.push_back_unchecked(pts[i]);
        rep = tubedness_check([&f](const Point& x) { return f(x); }, inner, rc_eps * (1.0 - 1e-6), to);
      }
      emit(out, "reach.json", dump(reach_to_json(rep)));
    } else if (*gauss_cmd) {
      SweepOptions so;
      so.samples = ga_sweep;
      so.seed = ga_seed;
      so.max_codim = ga_codim;
      const SweepReport rep = lemma_sweep(so);
      json j = sweep_to_json(rep);
      // Extremal witnesses: umbilic unit sphere and the minimal pair in codimension 2.
      SffSample top{{Eigen::Matrix2d::Identity()}};
      Eigen::Matrix2d a, b;
      a << 1, 0, 0, -1;
      b << 0, 1, 1, 0;
      SffSample bottom{{a, b}};
      j["witness_K_max"] = gauss_curvature(top);
      j["witness_K_min"] = gauss_curvature(bottom);
      emit(out, "gauss.json", dump(j));
      std::cout << "violations: " << rep.violations << "\n";
    } else if (*uni_cmd) {
      std::vector<Graph> targets;
      for (const auto& t : u_targets) targets.push_back(parse_target(t));
      DeltaOptions opts;
      opts.max_sk = u_max_sk;
      opts.max_candidates = u_max_candidates;
      opts.node_budget = u_budget;
      opts.seed = u_seed;
      const DeltaGraph d = targets.size() == 1 ? build_delta(targets[0], u_levels, opts)
                                               : build_delta_interleaved(targets, u_levels, opts);
      json j = delta_to_json(d);
      j["targets"] = u_targets;
      j["invariant_violations"] = delta_invariant_violations(d);
      emit(out, "delta.json", dump(j));
      const MetricGraph m = sphere_tube_graph(d.graph());
      json edges = json::array();
      for (const auto& [x, y, w] : m.edges) edges.push_back(json::array({x, y, w}));
      emit(out, "sphere_tube.json", dump(json{{"nodes", m.nodes}, {"sphere_nodes", m.sphere_nodes}, {"edges", edges}}));
    } else if (*pipe_cmd) {
      PipelineConfig cfg;
      if (!p_config.empty()) cfg = PipelineConfig::from_json(read_json(p_config));
      if (!p_model.empty()) cfg.model = p_model;
      if (p_radius > 0.0) cfg.region_radius = p_radius;
      if (p_r > 0.0) cfg.r = p_r;
      if (p_seed > 0) cfg.seed = p_seed;
      const fs::path dir = out_flag.empty() && std::getenv("TUBED_OUTPUT_DIR") == nullptr && !p_config.empty()
                               ? fs::path(cfg.output_dir)
                               : out;
      cfg.validate();
      const json summary = run_pipeline(cfg, directory_sink(dir), &std::cerr);
      for (const auto& [name, hash] : summary["artifacts"].items())
        std::cout << (dir / name).string() << "  " << hash.get<std::string>() << "\n";
      std::cout << (dir / "summary.json").string() << "\n";
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigurationError& e) {
    if (e.module() == "cli") {
      std::cerr << "usage error: " << e.what() << "\n";
      return 2;
    }
    std::cerr << json{{"error", {{"module", e.module()}, {"kind", e.kind()}, {"message", e.what()}}}}.dump() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << json{{"error", {{"module", e.module()}, {"kind", e.kind()}, {"message", e.what()}}}}.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"module", "cli"}, {"kind", "internal"}, {"message", e.what()}}}}.dump() << "\n";
    return 1;
  }
  return 0;
}
