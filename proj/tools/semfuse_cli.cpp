// Copyright 2026 The semfuse Authors
// SPDX-License-Identifier: Apache-2.0
//
// semfuse command line: integrate, render, query, eval, make-synthetic, plot.
// Exit codes: 0 success or help, 2 invalid input, 1 runtime failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "semfuse/bench.hpp"
#include "semfuse/eval.hpp"
#include "semfuse/io/embeddings.hpp"
#include "semfuse/io/manifest.hpp"
#include "semfuse/io/palette.hpp"
#include "semfuse/io/poses.hpp"
#include "semfuse/mesh.hpp"
#include "semfuse/render.hpp"
#include "semfuse/semantic_map.hpp"
#include "semfuse/synthetic.hpp"

namespace fs = std::filesystem;
using namespace semfuse;

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("semfuse");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("SEMFUSE_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off
    if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
  }
}

template <typename T>
void write_text(const fs::path& path, const T& writer) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  writer(os);
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

std::optional<EmbeddingSet> maybe_embeddings(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return io::load_embeddings(path);
}

std::optional<io::Palette> maybe_palette(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return io::load_palette(path);
}

// ---- integrate ---------------------------------------------------------------

struct IntegrateArgs {
  std::string manifest;
  std::string output;
  std::string mode;
  std::optional<double> voxel_size;
  std::optional<double> truncation;
  std::uint32_t stride = 0;
  std::size_t threads = 1;
  bool deterministic = false;
  std::size_t render_every = 0;
  std::string render_dir;
  std::string report;
  std::string csv;
  std::string mesh;
};

int cmd_integrate(const IntegrateArgs& a) {
  io::SequenceManifest m = io::load_manifest(a.manifest);
  if (!a.mode.empty()) m.map.mode = parse_semantic_mode(a.mode);
  if (a.voxel_size) m.map.fusion.voxel_size = *a.voxel_size;
  if (a.truncation) m.map.fusion.truncation_distance = *a.truncation;
  BenchOptions opt;
  opt.threads = a.deterministic ? 1 : std::max<std::size_t>(a.threads, 1);
  opt.stride = a.stride;
  opt.render_every = a.render_every;
  opt.render_dir = a.render_dir.empty() && a.render_every > 0 ? fs::path(a.output).parent_path() / "renders"
                                                              : fs::path(a.render_dir);
  spdlog::info("integrating {} frames ({} mode, {} m voxels, {} worker(s))", m.frames.size(),
               to_string(m.map.mode), m.map.fusion.voxel_size, opt.threads);
  const BenchResult r = run_benchmark(m, opt);
  save_map(a.output, r.map);
  const fs::path report = a.report.empty() ? fs::path(a.output + ".report.txt") : fs::path(a.report);
  const fs::path csv = a.csv.empty() ? fs::path(a.output + ".timings.csv") : fs::path(a.csv);
  write_text(report, [&](std::ostream& os) { write_report(os, r.report); });
  write_text(csv, [&](std::ostream& os) { write_timings_csv(os, r.report); });
  if (!a.mesh.empty()) {
    const auto emb = maybe_embeddings(m.embeddings.string());
    const auto pal = maybe_palette(m.palette.string());
    MeshOptions mo;
    mo.workers = opt.threads;
    save_ply(a.mesh, extract_mesh(r.map, mo, emb ? &*emb : nullptr, pal ? &*pal : nullptr));
  }
  const auto& s = r.report.final_stats;
  spdlog::info("{} points, {} active voxels, {} bytes, {:.1f} fps; wrote {}", r.report.integration.points,
               s.active_voxels, s.bytes_estimate, r.report.fps(), a.output);
  if (r.report.integration.skipped_nonfinite + r.report.integration.dropped_features > 0) {
    spdlog::warn("skipped {} non-finite points and {} points with non-finite features",
                 r.report.integration.skipped_nonfinite, r.report.integration.dropped_features);
  }
  return 0;
}

// ---- render ------------------------------------------------------------------

struct RenderArgs {
  std::string map;
  std::vector<double> pose;  // x y z qx qy qz qw
  std::string pose_file;
  std::size_t pose_index = 0;
  std::string mode = "depth";
  std::string output;
  std::uint32_t width = 320;
  std::uint32_t height = 240;
  double hfov = 60.0;
  double near = 0.05;
  double far = 50.0;
  double min_weight = 0.5;
  std::size_t threads = 1;
  std::string embeddings;
  std::string palette;
};

Pose pose_from_vector(const std::vector<double>& v) {
  if (v.size() != 7) throw std::invalid_argument("--pose expects 7 numbers: x y z qx qy qz qw");
  Eigen::Quaterniond q(v[6], v[3], v[4], v[5]);
  if (!(q.norm() > 1e-9)) throw std::invalid_argument("--pose quaternion has zero length");
  q.normalize();
  Pose p = Pose::Identity();
  p.topLeftCorner<3, 3>() = q.toRotationMatrix();
  p.topRightCorner<3, 1>() = Vec3d(v[0], v[1], v[2]);
  return p;
}

int cmd_render(const RenderArgs& a) {
  const RenderMode mode = parse_render_mode(a.mode);
  RenderCamera cam;
  if (!a.pose.empty()) {
    cam.pose = pose_from_vector(a.pose);
  } else if (!a.pose_file.empty()) {
    const auto poses = io::load_poses(a.pose_file);
    if (a.pose_index >= poses.size()) {
      throw std::invalid_argument("pose index " + std::to_string(a.pose_index) + " out of range (" +
                                  std::to_string(poses.size()) + " poses)");
    }
    cam.pose = poses[a.pose_index];
  } else {
    throw std::invalid_argument("render needs --pose or --pose-file");
  }
  cam.intrinsics = synth::pinhole(a.width, a.height, a.hfov);
  cam.near = a.near;
  cam.far = a.far;
  const SemanticMap map = load_map(a.map);
  const auto emb = maybe_embeddings(a.embeddings);
  const auto pal = maybe_palette(a.palette);
  const io::Raster img = render(map, cam, mode, {a.min_weight, std::max<std::size_t>(a.threads, 1)},
                                emb ? &*emb : nullptr, pal ? &*pal : nullptr);
  if (fs::path(a.output).extension() == ".ppm") {
    io::save_ppm(a.output, to_rgb(img));
  } else {
    io::save_raster(a.output, img);
  }
  spdlog::info("rendered {}x{} {} image to {}", img.width, img.height, to_string(mode), a.output);
  return 0;
}

// ---- query -------------------------------------------------------------------

struct QueryArgs {
  std::string map;
  std::string embeddings;
  std::string label;
  std::string vector_file;
  std::string output;
  std::string mesh;
  double threshold = 0.9;
  double min_weight = 0.5;
};

std::vector<float> read_vector(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open query vector " + path.string());
  std::vector<float> v;
  for (std::string tok; is >> tok;) {
    try {
      std::size_t used = 0;
      v.push_back(std::stof(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw std::invalid_argument(path.string() + ": not a number: '" + tok + "'");
    }
  }
  if (v.empty()) throw std::invalid_argument(path.string() + ": empty query vector");
  return v;
}

int cmd_query(const QueryArgs& a) {
  const SemanticMap map = load_map(a.map);
  if (map.mode() != SemanticMode::open) throw std::invalid_argument("query needs an open-set map; " + a.map + " is closed-set");
  std::vector<float> query;
  if (!a.label.empty()) {
    if (a.embeddings.empty()) throw std::invalid_argument("--label needs --embeddings");
    const EmbeddingSet set = io::load_embeddings(a.embeddings);
    const auto idx = set.index_of(a.label);
    if (!idx) {
      std::string names;
      for (const auto& n : set.names) names += (names.empty() ? "" : ", ") + n;
      throw std::invalid_argument("unknown label '" + a.label + "'; available: " + names);
    }
    const auto row = set.row(*idx);
    query.assign(row.begin(), row.end());
  } else if (!a.vector_file.empty()) {
    query = read_vector(a.vector_file);
  } else {
    throw std::invalid_argument("query needs --label or --vector");
  }
  const auto l = static_cast<std::size_t>(map.config().open.feature_dim);
  if (query.size() != l) {
    throw std::invalid_argument("query has dimension " + std::to_string(query.size()) + " but the map stores " +
                                std::to_string(l));
  }
  const double vs = map.tsdf().voxel_size();
  std::unordered_map<Coord, double, CoordHash> similarity;
  auto sem = map.semantics().const_accessor();
  std::size_t rows = 0, hits = 0;
  write_text(a.output, [&](std::ostream& os) {
    os << "i,j,k,x,y,z,weight,similarity\n";
    os.precision(9);
    map.tsdf().for_each_value([&](const Coord& c, const TsdfVoxel& v) {
      if (!(v.weight > 0.0) || v.weight < a.min_weight) return;
      const float* s = sem.find(c);
      if (!s) return;
      const std::span<const float> mean(s, l);
      if (std::all_of(mean.begin(), mean.end(), [](float x) { return x == 0.0f; })) return;
      const double sim = cosine_similarity(mean, std::span<const float>(query));
      similarity[c] = sim;
      const Vec3d p = coord_to_world_center(c, vs);
      os << c[0] << "," << c[1] << "," << c[2] << "," << p.x() << "," << p.y() << "," << p.z() << "," << v.weight
         << "," << sim << "\n";
      ++rows;
      hits += sim >= a.threshold;
    });
  });
  if (!a.mesh.empty()) {
    MeshOptions mo;
    mo.min_weight = a.min_weight;
    auto mesh = extract_surface(map.tsdf(), mo, [&](const Coord& c) -> ClassId {
      const auto it = similarity.find(c);
      return it != similarity.end() && it->second >= a.threshold ? 1 : kUnlabeled;
    });
    for (ClassId z : mesh.labels) mesh.colors.push_back(z == 1 ? io::Rgb{255, 0, 0} : io::kUncertainColor);
    save_ply(a.mesh, mesh);
  }
  spdlog::info("{} voxels scored, {} at similarity >= {}", rows, hits, a.threshold);
  return 0;
}

// ---- eval --------------------------------------------------------------------

struct EvalArgs {
  std::string prediction;
  std::string truth;
  std::string scene;
  std::string embeddings;
  std::string truth_embeddings;
  std::string output;
  double min_weight = 0.5;
};

int cmd_eval(const EvalArgs& a) {
  if (a.truth.empty() == a.scene.empty()) throw std::invalid_argument("eval needs exactly one of --truth or --scene");
  std::optional<synth::Sequence> seq;
  if (!a.scene.empty()) seq = synth::make_sequence(a.scene);
  const SemanticMap pred = load_map(a.prediction);
  const auto emb = maybe_embeddings(a.embeddings);
  const SparseGrid<ClassId> pred_labels = pred.label_grid(emb ? &*emb : nullptr, a.min_weight);
  MeshOptions mo;
  mo.min_weight = a.min_weight;
  const SemanticMesh pred_mesh = extract_surface(pred.tsdf(), mo, nullptr);
  std::optional<SparseGrid<ClassId>> truth_labels;
  std::optional<double> chamfer, rms;
  int k = pred.mode() == SemanticMode::closed ? pred.config().closed.num_classes
                                              : static_cast<int>(emb ? emb->size() : 0);
  if (seq) {
    truth_labels = synth::truth_labels(pred_labels, seq->scene);
    k = std::max(k, seq->scene.num_classes());
    if (!pred_mesh.vertices.empty()) {
      double se = 0.0;
      for (const Vec3d& v : pred_mesh.vertices) se += std::pow(seq->scene.distance(v), 2);
      rms = std::sqrt(se / static_cast<double>(pred_mesh.vertices.size()));
    }
  } else {
    const SemanticMap truth = load_map(a.truth);
    const auto temb = maybe_embeddings(a.truth_embeddings.empty() ? a.embeddings : a.truth_embeddings);
    truth_labels = truth.label_grid(temb ? &*temb : nullptr, a.min_weight);
    const SemanticMesh truth_mesh = extract_surface(truth.tsdf(), mo, nullptr);
    if (!pred_mesh.vertices.empty() && !truth_mesh.vertices.empty()) {
      chamfer = chamfer_l2(pred_mesh.vertices, truth_mesh.vertices);
    }
  }
  const ConfusionMatrix cm = miou(pred_labels, *truth_labels, std::max(k, 1));
  auto emit = [&](std::ostream& os) {
    os << "voxels=" << cm.total() << "\n";
    os << "miou=" << cm.miou() << "\n";
    for (int c = 1; c <= cm.num_classes(); ++c) {
      if (const auto v = cm.iou(static_cast<ClassId>(c))) os << "iou_" << c << "=" << *v << "\n";
    }
    os << "mesh_vertices=" << pred_mesh.vertices.size() << "\n";
    if (chamfer) os << "chamfer_l2=" << *chamfer << "\n";
    if (rms) os << "surface_rms=" << *rms << "\n";
  };
  emit(std::cout);
  if (!a.output.empty()) write_text(a.output, emit);
  return 0;
}

// ---- make-synthetic ----------------------------------------------------------

struct SyntheticArgs {
  std::string scene;
  std::string output;
  std::string mode = "closed";
  std::string layout = "points";
  double noise = 0.0;
  std::uint64_t seed = 1;
  std::size_t frames = 0;
};

int cmd_make_synthetic(const SyntheticArgs& a) {
  const synth::Sequence seq = synth::make_sequence(a.scene);
  if (!(a.noise >= 0.0 && a.noise <= 1.0)) throw std::invalid_argument("--noise must be in [0, 1]");
  io::SequenceKind layout;
  if (a.layout == "points") {
    layout = io::SequenceKind::points;
  } else if (a.layout == "rgbd") {
    layout = io::SequenceKind::rgbd;
  } else {
    throw std::invalid_argument("--layout must be points or rgbd");
  }
  const auto manifest =
      synth::write_sequence(a.output, seq, parse_semantic_mode(a.mode), {a.noise, 0.0, a.seed}, a.frames, layout);
  spdlog::info("wrote {} scene to {}", a.scene, manifest.string());
  return 0;
}

// ---- plot --------------------------------------------------------------------

int cmd_plot(const std::string& csv, const std::string& output) {
  std::ifstream is(csv);
  if (!is) throw std::runtime_error("cannot open " + csv);
  io::save_ppm(output, plot_timings(read_timings_csv(is, csv)));
  spdlog::info("wrote {}", output);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"semfuse: semantic TSDF mapping with closed- and open-set Bayesian fusion"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  IntegrateArgs ia;
  auto* integrate = app.add_subcommand("integrate", "Fuse a manifest sequence into a map snapshot");
  integrate->add_option("manifest", ia.manifest, "Sequence manifest (INI)")->required();
  integrate->add_option("output", ia.output, "Output map snapshot")->required();
  integrate->add_option("--mode", ia.mode, "Semantic mode override")->check(CLI::IsMember({"closed", "open"}));
  integrate->add_option("--voxel-size", ia.voxel_size, "Voxel size override (m)")->check(CLI::PositiveNumber);
  integrate->add_option("--trunc", ia.truncation, "Truncation distance override (m)")->check(CLI::PositiveNumber);
  integrate->add_option("--stride", ia.stride, "Depth pixel stride override")->check(CLI::PositiveNumber);
  integrate->add_option("--threads", ia.threads, "Integration workers")->check(CLI::PositiveNumber);
  integrate->add_flag("--deterministic", ia.deterministic, "Sequential integration");
  integrate->add_option("--render-every", ia.render_every, "Dump a rendered view every N frames");
  integrate->add_option("--render-dir", ia.render_dir, "Directory for rendered views");
  integrate->add_option("--report", ia.report, "Report path (default <output>.report.txt)");
  integrate->add_option("--csv", ia.csv, "Per-frame timing CSV (default <output>.timings.csv)");
  integrate->add_option("--mesh", ia.mesh, "Also export a labeled PLY mesh");

  RenderArgs ra;
  auto* render_cmd = app.add_subcommand("render", "Ray-march a depth, semantic or normal image");
  render_cmd->add_option("map", ra.map, "Map snapshot")->required();
  render_cmd->add_option("output", ra.output, "Output image (.ppm for 8-bit view, otherwise SLIM)")->required();
  auto* pose_opt = render_cmd->add_option("--pose", ra.pose, "Camera position and quaternion: x y z qx qy qz qw")
                       ->expected(7);
  auto* pose_file_opt = render_cmd->add_option("--pose-file", ra.pose_file, "Pose file (12 numbers per row)");
  pose_opt->excludes(pose_file_opt);
  render_cmd->add_option("--pose-index", ra.pose_index, "Row of --pose-file");
  render_cmd->add_option("--mode", ra.mode, "depth, semantic or normal")
      ->check(CLI::IsMember({"depth", "semantic", "normal"}));
  render_cmd->add_option("--width", ra.width, "Image width")->check(CLI::PositiveNumber);
  render_cmd->add_option("--height", ra.height, "Image height")->check(CLI::PositiveNumber);
  render_cmd->add_option("--hfov", ra.hfov, "Horizontal field of view (degrees)")->check(CLI::Range(1.0, 179.0));
  render_cmd->add_option("--near", ra.near, "Near plane (m)");
  render_cmd->add_option("--far", ra.far, "Far plane (m)");
  render_cmd->add_option("--min-weight", ra.min_weight, "Ignore voxels below this weight");
  render_cmd->add_option("--threads", ra.threads, "Render workers")->check(CLI::PositiveNumber);
  render_cmd->add_option("--embeddings", ra.embeddings, "Label embeddings for open-set maps");
  render_cmd->add_option("--palette", ra.palette, "Class palette");

  QueryArgs qa;
  auto* query = app.add_subcommand("query", "Score open-set voxels against a label or vector");
  query->add_option("map", qa.map, "Open-set map snapshot")->required();
  query->add_option("output", qa.output, "Per-voxel similarity CSV")->required();
  query->add_option("--embeddings", qa.embeddings, "Label embedding file");
  auto* label_opt = query->add_option("--label", qa.label, "Label name in the embedding file");
  auto* vector_opt = query->add_option("--vector", qa.vector_file, "Text file with the raw query vector");
  label_opt->excludes(vector_opt);
  query->add_option("--mesh", qa.mesh, "Highlight mesh (PLY, red above threshold)");
  query->add_option("--threshold", qa.threshold, "Highlight similarity threshold");
  query->add_option("--min-weight", qa.min_weight, "Ignore voxels below this weight");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Voxel mIoU and surface metrics");
  eval->add_option("prediction", ea.prediction, "Predicted map snapshot")->required();
  eval->add_option("--truth", ea.truth, "Ground-truth map snapshot");
  eval->add_option("--scene", ea.scene, "Analytic synthetic scene (sphere, plane, room)");
  eval->add_option("--embeddings", ea.embeddings, "Label embeddings for open-set maps");
  eval->add_option("--truth-embeddings", ea.truth_embeddings, "Label embeddings for an open-set truth map");
  eval->add_option("--min-weight", ea.min_weight, "Ignore voxels below this weight");
  eval->add_option("--output", ea.output, "Also write the metrics to this file");

  SyntheticArgs sa;
  auto* synthetic = app.add_subcommand("make-synthetic", "Write a synthetic labeled sequence and manifest");
  synthetic->add_option("scene", sa.scene, "sphere, plane or room")->required();
  synthetic->add_option("output", sa.output, "Output directory")->required();
  synthetic->add_option("--mode", sa.mode, "closed (class ids) or open (one-hot features)")
      ->check(CLI::IsMember({"closed", "open"}));
  synthetic->add_option("--layout", sa.layout, "points (SLFR frames) or rgbd (depth and payload rasters)")
      ->check(CLI::IsMember({"points", "rgbd"}));
  synthetic->add_option("--noise", sa.noise, "Label-flip probability");
  synthetic->add_option("--seed", sa.seed, "Noise seed");
  synthetic->add_option("--frames", sa.frames, "Keep only the first N frames");

  std::string plot_csv, plot_out;
  auto* plot = app.add_subcommand("plot", "Stacked per-frame timing bars from an integrate CSV");
  plot->add_option("csv", plot_csv, "Timing CSV")->required();
  plot->add_option("output", plot_out, "Output PPM")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*integrate) return cmd_integrate(ia);
    if (*render_cmd) return cmd_render(ra);
    if (*query) return cmd_query(qa);
    if (*eval) return cmd_eval(ea);
    if (*synthetic) return cmd_make_synthetic(sa);
    if (*plot) return cmd_plot(plot_csv, plot_out);
  } catch (const std::logic_error& e) {
    // invalid_argument, domain_error, out_of_range: bad input or configuration
    spdlog::error("{}", e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
