// Headless front end: fixture generation, batch optimization, clustering,
// projection and the protocol server.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "voyager/aco.hpp"
#include "voyager/dataset.hpp"
#include "voyager/serialize.hpp"
#include "voyager/server.hpp"
#include "voyager/session.hpp"
#include "voyager/subspace_gen.hpp"
#include "voyager/view_quality.hpp"

namespace {

using voyager::Error;
using voyager::ErrorCode;
using json = nlohmann::json;

constexpr const char* kBasisFormat = "voyager-basis/1";

struct DataFlags {
  std::string input;
  std::string class_column;
  std::string normalization = "minmax";

  void add_to(CLI::App* app) {
    app->add_option("-i,--input", input, "CSV file with a header row")->required()->check(CLI::ExistingFile);
    app->add_option("--class_column", class_column, "name of the class column, if any");
    app->add_option("--normalization", normalization, "minmax or center")->check(CLI::IsMember({"minmax", "center"}));
  }

  voyager::Dataset load() const {
    voyager::CsvOptions opt;
    if (!class_column.empty()) opt.class_column = class_column;
    opt.normalization = voyager::parse_normalization(normalization);
    voyager::Dataset d = voyager::load_csv(input, opt);
    for (const auto& w : d.warnings) std::cerr << "warning: " << w << "\n";
    return d;
  }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out << text;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

// Accepts a bare basis object, a basis file written by `optimize`, or a
// session state object.
voyager::TrackballState read_state(const std::string& path, const voyager::Dataset& d) {
  const json j = read_json(path);
  voyager::TrackballState s;
  if (j.contains("rotation") && j.contains("basis")) {
    s = voyager::io::state_from(j);
  } else if (j.contains("basis")) {
    s = voyager::TrackballState::from_basis(voyager::io::basis_from(j["basis"]));
  } else {
    s = voyager::TrackballState::from_basis(voyager::io::basis_from(j));
  }
  if (s.basis.dims() != d.dims()) throw Error(ErrorCode::InvalidArgument, "basis dimension does not match the data");
  if (!j.contains("origin") && !(j.contains("basis") && j["basis"].contains("origin"))) {
    s.basis.origin = d.normalized.colwise().mean().transpose();
  }
  return s;
}

voyager::TrackballState initial_state(const std::string& initial, const voyager::Dataset& d, std::uint64_t seed) {
  const voyager::VecND mean = d.normalized.colwise().mean().transpose();
  if (initial == "identity") return voyager::TrackballState::from_basis(voyager::ProjectionBasis::identity(d.dims(), mean));
  if (initial == "random") return voyager::TrackballState::from_basis(voyager::random_subspace(d.dims(), seed, mean));
  if (initial == "pca") {
    const voyager::PcaResult p = voyager::pca(d.normalized, 3);
    return voyager::TrackballState::from_basis(
        voyager::make_basis(p.component(0), p.component(1), voyager::ThirdPc{p.component(2)}, p.mean));
  }
  return read_state(initial, d);
}

std::vector<int> labels_of(const voyager::Dataset& d, voyager::MetricKind kind) {
  if (!voyager::needs_labels(kind)) return {};
  if (!d.classes) {
    throw Error(ErrorCode::MissingLabels,
                std::string(voyager::to_string(kind)) + " needs --class_column");
  }
  return *d.classes;
}

// Best score over all pairs of coordinate axes.
double best_axis_pair(const voyager::Dataset& d, const voyager::QualityMetric& metric, std::span<const int> labels) {
  const voyager::ViewScorer scorer(metric, d.normalized, labels);
  double best = voyager::kWorstScore;
  for (Eigen::Index a = 0; a < d.dims(); ++a) {
    for (Eigen::Index b = a + 1; b < d.dims(); ++b) {
      Eigen::MatrixX2d xy(d.size(), 2);
      xy.col(0) = d.normalized.col(a);
      xy.col(1) = d.normalized.col(b);
      best = std::max(best, scorer(xy));
    }
  }
  return best;
}

int run(int argc, char** argv) {
  CLI::App app{"voyager: interactive subspace exploration engine"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "write a synthetic fixture as CSV");
  gen->require_subcommand(1);
  std::string gen_out;
  std::uint64_t gen_seed = 7;
  long gen_dims = 0;

  auto* tube = gen->add_subcommand("tube-stick", "hollow tube with a stick along its axis");
  voyager::TubeStickOptions tube_opt;
  tube->add_option("--seed", gen_seed, "random seed");
  tube->add_option("--dims", gen_dims, "embedding dimension N (default 6)");
  tube->add_option("--n_tube", tube_opt.n_tube, "points on the tube");
  tube->add_option("--n_stick", tube_opt.n_stick, "points on the stick");
  tube->add_flag("--axis_aligned", tube_opt.axis_aligned, "no rotation; tube axis along the third coordinate");
  tube->add_option("-o,--out", gen_out, "output CSV")->required();

  auto* three = gen->add_subcommand("three-clusters", "three Gaussians stretched along their own dimensions");
  voyager::ThreeClusterOptions three_opt;
  three->add_option("--seed", gen_seed, "random seed");
  three->add_option("--dims", gen_dims, "dimension N (default 10)");
  three->add_option("--n_per", three_opt.n_per, "points per cluster");
  three->add_option("-o,--out", gen_out, "output CSV")->required();

  // optimize
  auto* opt = app.add_subcommand("optimize", "ant-colony projection pursuit from an initial view");
  DataFlags opt_data;
  opt_data.add_to(opt);
  std::string metric_name = "holes", scope_name = "narrow", initial = "pca";
  std::string out_basis = "basis.json", out_score = "score.txt", out_trace = "trace.txt";
  voyager::AcoConfig aco;
  voyager::QualityMetric metric;
  std::optional<int> half_width;
  opt->add_option("--metric", metric_name, "stress, distance_consistency, distribution_consistency, class_separation, holes, central_mass");
  opt->add_option("--scope", scope_name, "within_view, narrow, expanded or global");
  opt->add_option("--initial", initial, "pca, identity, random, or a basis JSON file");
  opt->add_option("--seed", aco.seed, "ACO seed");
  opt->add_option("--levels", aco.levels, "levels per parameter");
  opt->add_option("--ants", aco.ants, "ants per generation");
  opt->add_option("--generations", aco.generations, "generations");
  opt->add_option("--evaporation", aco.evaporation, "pheromone evaporation rate");
  opt->add_option("--init_boost", aco.init_boost, "extra pheromone on the initial view's levels");
  opt->add_option("--elite", aco.elite, "depositing ants per generation");
  opt->add_option("--half_width", half_width, "search window in levels (overrides the scope's window)");
  opt->add_option("--workers", aco.workers, "evaluation threads (0: all cores)");
  opt->add_option("--grid_size", metric.grid_size, "distribution_consistency grid");
  opt->add_option("--sample_size", metric.sample_size, "stress pair sample");
  opt->add_option("--out_basis", out_basis, "basis JSON output");
  opt->add_option("--out_score", out_score, "score output");
  opt->add_option("--out_trace", out_trace, "two-column trace output (generation best_score)");

  // score
  auto* sc = app.add_subcommand("score", "score a basis, or the best pair of coordinate axes");
  DataFlags sc_data;
  sc_data.add_to(sc);
  std::string sc_metric = "holes", sc_basis;
  bool sc_axis_pairs = false;
  sc->add_option("--metric", sc_metric, "quality metric");
  sc->add_option("--basis", sc_basis, "basis JSON file");
  sc->add_flag("--best_axis_pair", sc_axis_pairs, "score every pair of coordinate axes and report the best");

  // cluster
  auto* cl = app.add_subcommand("cluster", "k-means subspace clusters");
  DataFlags cl_data;
  cl_data.add_to(cl);
  int k = 3;
  std::uint64_t cl_seed = 1;
  std::string out_assign = "assignments.csv", out_bases = "bases.json";
  cl->add_option("-k,--k", k, "number of clusters")->required();
  cl->add_option("--seed", cl_seed, "k-means++ seed");
  cl->add_option("--out_assignments", out_assign, "CSV of point id and cluster tag");
  cl->add_option("--out_bases", out_bases, "JSON list of per-cluster bases");

  // project
  auto* pr = app.add_subcommand("project", "project data through a basis to 2D coordinates");
  DataFlags pr_data;
  pr_data.add_to(pr);
  std::string pr_basis, pr_out;
  pr->add_option("--basis", pr_basis, "basis JSON file")->required()->check(CLI::ExistingFile);
  pr->add_option("-o,--out", pr_out, "output CSV (x,y)")->required();

  // serve
  auto* sv = app.add_subcommand("serve", "run the protocol server on 127.0.0.1");
  int port = voyager::default_port();
  std::string sv_input, sv_class;
  sv->add_option("--port", port, "TCP port (default $VOYAGER_PORT or 7117; 0 picks a free port)");
  sv->add_option("-i,--input", sv_input, "CSV to load at startup");
  sv->add_option("--class_column", sv_class, "class column of --input");

  CLI11_PARSE(app, argc, argv);

  if (*gen) {
    voyager::Dataset d;
    if (*tube) {
      tube_opt.seed = gen_seed;
      if (gen_dims) tube_opt.dims = gen_dims;
      d = voyager::gen_tube_stick(tube_opt).data;
    } else {
      three_opt.seed = gen_seed;
      if (gen_dims) three_opt.dims = gen_dims;
      d = voyager::gen_three_clusters(three_opt).data;
    }
    std::ofstream out(gen_out);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + gen_out + "'");
    voyager::write_csv(out, d);
    return 0;
  }

  if (*opt) {
    const voyager::Dataset d = opt_data.load();
    metric.kind = voyager::parse_metric_kind(metric_name);
    const auto scope = voyager::parse_optimize_scope(scope_name);
    const std::vector<int> labels = labels_of(d, metric.kind);
    const voyager::TrackballState start = initial_state(initial, d, aco.seed);
    voyager::OptimizeOutcome out;
    if (half_width) {
      aco.range = voyager::SearchRange::window(*half_width);
      const voyager::TrackballState baked = voyager::bake_rotation(start);
      const voyager::AcoResult r = voyager::run(d.normalized, labels, metric, baked.basis.x(), baked.basis.y(), aco);
      out.trace = r.trace;
      out.incoming_score = voyager::score(metric, voyager::project(start, d.normalized), d.normalized, labels);
      out.state = baked;
      out.state.basis = voyager::ProjectionBasis::from_axes(
          r.x, r.y, voyager::detail::complete_z(r.x, r.y, baked.basis.z()), baked.basis.origin);
      out.score = voyager::score(metric, voyager::project(out.state, d.normalized), d.normalized, labels);
      if (!(out.score > out.incoming_score)) {
        out.state = start;
        out.score = out.incoming_score;
      }
    } else {
      out = voyager::optimize_view(start, d.normalized, labels, metric, scope, aco);
    }
    json basis_file = voyager::io::state(out.state);
    basis_file["format"] = kBasisFormat;
    basis_file["metric"] = voyager::io::metric(metric);
    basis_file["score"] = voyager::io::real(out.score);
    basis_file["incoming_score"] = voyager::io::real(out.incoming_score);
    write_text(out_basis, basis_file.dump(2) + "\n");
    write_text(out_score, voyager::format_real(out.score) + "\n");
    std::string trace = "# generation best_score\n";
    for (std::size_t g = 0; g < out.trace.size(); ++g) {
      trace += std::to_string(g + 1) + " " + voyager::format_real(out.trace[g]) + "\n";
    }
    write_text(out_trace, trace);
    std::cout << voyager::to_string(metric.kind) << " " << voyager::format_real(out.incoming_score) << " -> "
              << voyager::format_real(out.score) << "\n";
    return 0;
  }

  if (*sc) {
    const voyager::Dataset d = sc_data.load();
    voyager::QualityMetric m;
    m.kind = voyager::parse_metric_kind(sc_metric);
    const std::vector<int> labels = labels_of(d, m.kind);
    if (sc_axis_pairs) {
      std::cout << voyager::format_real(best_axis_pair(d, m, labels)) << "\n";
      return 0;
    }
    if (sc_basis.empty()) throw Error(ErrorCode::InvalidArgument, "score needs --basis or --best_axis_pair");
    const voyager::TrackballState s = read_state(sc_basis, d);
    std::cout << voyager::format_real(voyager::score(m, voyager::project(s, d.normalized), d.normalized, labels)) << "\n";
    return 0;
  }

  if (*cl) {
    const voyager::Dataset d = cl_data.load();
    const auto clusters = voyager::kmeans_subspaces(d.normalized, k, cl_seed);
    const auto tags = voyager::cluster_labels(clusters, static_cast<std::size_t>(d.size()));
    std::string csv = "id,cluster\n";
    for (std::size_t i = 0; i < tags.size(); ++i) csv += std::to_string(i) + "," + std::to_string(tags[i]) + "\n";
    write_text(out_assign, csv);
    json bases = json::array();
    for (const auto& c : clusters) {
      bases.push_back({{"color_tag", c.color_tag},
                       {"size", c.member_ids.size()},
                       {"centroid", voyager::io::vec(c.centroid)},
                       {"basis", voyager::io::basis(c.basis)}});
    }
    write_text(out_bases, bases.dump(2) + "\n");
    return 0;
  }

  if (*pr) {
    const voyager::Dataset d = pr_data.load();
    const voyager::TrackballState s = read_state(pr_basis, d);
    const voyager::ProjectedCloud cloud = voyager::project(s, d.normalized);
    std::string csv = "x,y\n";
    for (Eigen::Index i = 0; i < cloud.xy.rows(); ++i) {
      csv += voyager::format_real(cloud.xy(i, 0)) + "," + voyager::format_real(cloud.xy(i, 1)) + "\n";
    }
    write_text(pr_out, csv);
    return 0;
  }

  if (*sv) {
    voyager::Session session;
    if (!sv_input.empty()) {
      voyager::CsvOptions o;
      if (!sv_class.empty()) o.class_column = sv_class;
      session.load(voyager::load_csv(sv_input, o));
    }
    voyager::Server server(session, port);
    std::cout << "listening on 127.0.0.1:" << server.port() << std::endl;
    server.run();
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
