// Copyright 2026 The semfuse Authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite. Prints one PASS/FAIL line per criterion.
//   acceptance            run every criterion
//   acceptance NAME...    run the named criteria
//   acceptance --list     list criterion names
// Exit status is 0 only when every selected criterion passes.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "semfuse/dirichlet.hpp"
#include "semfuse/eval.hpp"
#include "semfuse/gaussian.hpp"
#include "semfuse/mesh.hpp"
#include "semfuse/raycast.hpp"
#include "semfuse/render.hpp"
#include "semfuse/semantic_map.hpp"
#include "semfuse/synthetic.hpp"

using namespace semfuse;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

// ---- shared scenes -------------------------------------------------------------

SemanticMap fuse(const synth::Sequence& seq, SemanticMode mode, const synth::NoiseSpec& noise,
                 UpdateRule rule = UpdateRule::bayesian) {
  MapConfig cfg = seq.map;
  cfg.mode = mode;
  cfg.closed.update_rule = rule;
  cfg.fusion.max_range = seq.max_range + 1.0;
  SemanticMap map(cfg);
  const PayloadKind kind = mode == SemanticMode::closed ? PayloadKind::class_id : PayloadKind::feature;
  for (std::size_t i = 0; i < seq.poses.size(); ++i) map.integrate(synth::simulate_frame(seq, i, kind, noise));
  return map;
}

double room_miou(const SemanticMap& map, const synth::Scene& scene) {
  const EmbeddingSet labels = EmbeddingSet::standard_basis(scene.class_names);
  const auto pred = map.label_grid(map.mode() == SemanticMode::open ? &labels : nullptr);
  return miou(pred, synth::truth_labels(pred, scene), scene.num_classes()).miou();
}

// ---- criteria ------------------------------------------------------------------

Outcome conjugacy_closed() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> prior_d(0.5, 3.0);
  double worst = 0.0;
  for (int set = 0; set < 20; ++set) {
    const std::size_t k = set % 2 == 0 ? 2 : 3;
    std::vector<double> prior(k);
    for (double& a : prior) a = prior_d(rng);
    std::uniform_int_distribution<int> cls(1, static_cast<int>(k));
    std::vector<ClassId> obs(static_cast<std::size_t>(1 + set));
    for (auto& z : obs) z = static_cast<ClassId>(cls(rng));
    std::vector<double> post = prior;
    for (ClassId z : obs) absorb(std::span<double>(post), z);
    const auto closed_form = predictive(post);
    const auto quad = oracle::dirichlet_posterior_mean_quadrature(prior, obs, 1e-3);
    for (std::size_t j = 0; j < k; ++j) worst = std::max(worst, std::abs(closed_form[j] - quad[j]));
  }
  const double secs = seconds_since(t0);
  return {worst < 2e-3 && secs < 10.0,
          fmt("max |predictive - quadrature| = %.2e (tol 2e-3)", worst) + fmt(", %.2f s (limit 10 s)", secs)};
}

Outcome conjugacy_open() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(77);
  std::normal_distribution<double> noise(0.0, 0.8);
  std::uniform_real_distribution<double> center(-2.0, 2.0);
  double worst = 0.0;
  for (int set = 0; set < 5; ++set) {
    const NigParams prior{center(rng), 0.5 + set, 2.0, 1.0};
    std::vector<double> data(static_cast<std::size_t>(2 + 3 * set));
    const double truth = center(rng);
    for (double& z : data) z = truth + noise(rng);
    std::vector<double> m{prior.m};
    std::vector<double> b{prior.beta};
    std::vector<std::vector<double>> batch;
    for (double z : data) batch.push_back({z});
    (void)absorb_features(std::span<double>(m), std::span<double>(b), prior.lambda, batch);
    const auto q = oracle::nig_posterior_mean_quadrature(prior, data, m[0] - 8.0, m[0] + 8.0, 1e-5, 30.0, 800, 1500);
    worst = std::max(worst, std::abs(q.mean_mu - m[0]));
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-2 && secs < 10.0,
          fmt("max |posterior mean - quadrature| = %.2e (tol 1e-2)", worst) + fmt(", %.2f s (limit 10 s)", secs)};
}

Outcome sphere_geometry() {
  const auto t0 = Clock::now();
  const auto seq = synth::sphere_sequence();
  const SemanticMap map = fuse(seq, SemanticMode::closed, {});
  const SemanticMesh mesh = extract_mesh(map);
  if (mesh.vertices.empty()) return {false, "empty mesh"};
  double se = 0.0;
  for (const Vec3d& v : mesh.vertices) se += (v.norm() - 1.0) * (v.norm() - 1.0);
  const double rms = std::sqrt(se / static_cast<double>(mesh.vertices.size()));
  const double chamfer = chamfer_l2(mesh.vertices, synth::fibonacci_sphere(200000));
  const double secs = seconds_since(t0);
  return {rms < 0.01 && chamfer < 1e-4 && secs < 60.0,
          fmt("vertex radius RMS = %.2e m (tol 1e-2)", rms) + fmt(", chamfer = %.2e m^2 (tol 1e-4)", chamfer) +
              fmt(", %.1f s (limit 60 s)", secs)};
}

Outcome room_noiseless() {
  const auto seq = synth::room_sequence();
  const double closed = room_miou(fuse(seq, SemanticMode::closed, {}), seq.scene);
  const double open = room_miou(fuse(seq, SemanticMode::open, {}), seq.scene);
  return {closed >= 0.95 && open >= 0.95,
          fmt("mIoU closed = %.4f", closed) + fmt(", open = %.4f (min 0.95)", open)};
}

Outcome bayes_vs_last() {
  const auto seq = synth::room_sequence();
  const synth::NoiseSpec noise{0.2, 0.0, 7};
  const double bayes = room_miou(fuse(seq, SemanticMode::closed, noise), seq.scene);
  const double last = room_miou(fuse(seq, SemanticMode::closed, noise, UpdateRule::last_measurement), seq.scene);
  return {bayes - last >= 0.05,
          fmt("20%% flips: Bayesian mIoU = %.4f", bayes) + fmt(", last-measurement = %.4f", last) +
              fmt(", gain = %.4f (min 0.05)", bayes - last)};
}

Outcome bridge() {
  const auto seq = synth::room_sequence();
  const auto clean = one_hot_bridge_check(fuse(seq, SemanticMode::closed, {}), fuse(seq, SemanticMode::open, {}));
  const synth::NoiseSpec noise{0.1, 0.0, 11};
  const auto noisy =
      one_hot_bridge_check(fuse(seq, SemanticMode::closed, noise), fuse(seq, SemanticMode::open, noise));
  return {clean.ratio == 1.0 && noisy.ratio >= 0.98,
          fmt("agreement noiseless = %.6f (need 1)", clean.ratio) +
              fmt(", 10%% flips = %.6f (min 0.98)", noisy.ratio) +
              fmt(", %.0f co-active voxels", static_cast<double>(clean.co_active))};
}

Outcome sparsity() {
  const auto seq = synth::room_sequence();
  const SemanticMap map = fuse(seq, SemanticMode::closed, {});
  Coord lo{1 << 30, 1 << 30, 1 << 30}, hi{-(1 << 30), -(1 << 30), -(1 << 30)};
  map.tsdf().for_each_value([&](const Coord& c, const TsdfVoxel&) {
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], c[a]);
      hi[a] = std::max(hi[a], c[a]);
    }
  });
  double volume = 1.0;
  for (int a = 0; a < 3; ++a) volume *= static_cast<double>(hi[a] - lo[a] + 1);
  const double dense = volume * (sizeof(TsdfVoxel) + map.semantics().channels() * sizeof(float));
  const double sparse = static_cast<double>(map.memory_stats().bytes_estimate);
  // 256^3 voxel cube centered on the origin
  const std::int32_t half = 128;
  auto inside = [&](const Coord& origin, std::int32_t span) {
    for (int a = 0; a < 3; ++a) {
      if (origin[a] + span <= -half || origin[a] >= half) return false;
    }
    return true;
  };
  const std::int32_t leaf_span = map.tsdf().config().leaf_dim();
  const std::int32_t internal_span = leaf_span << map.tsdf().config().internal_log2;
  std::size_t nodes = 0;
  for (const Coord& o : map.tsdf().internal_origins()) nodes += inside(o, internal_span);
  for (const Coord& o : map.semantics().internal_origins()) nodes += inside(o, internal_span);
  map.tsdf().for_each_leaf([&](const auto& leaf) { nodes += inside(leaf.origin(), leaf_span); });
  map.semantics().for_each_leaf([&](const auto& leaf) { nodes += inside(leaf.origin(), leaf_span); });
  const double ratio = sparse / dense;
  return {ratio < 0.05 && nodes == 0,
          fmt("bytes_estimate / dense bounding box = %.4f (max 0.05)", ratio) +
              fmt(", nodes in empty 256^3 interior = %.0f (need 0)", static_cast<double>(nodes))};
}

Outcome order_robustness() {
  auto seq = synth::room_sequence();
  seq.poses.resize(30);
  const synth::NoiseSpec noise{0.2, 0.0, 5};
  MapConfig cfg = seq.map;
  cfg.fusion.max_range = seq.max_range + 1.0;
  std::vector<Frame> frames;
  for (std::size_t i = 0; i < seq.poses.size(); ++i) {
    frames.push_back(synth::simulate_frame(seq, i, PayloadKind::class_id, noise));
  }
  std::vector<std::size_t> order(frames.size());
  std::iota(order.begin(), order.end(), 0);
  SemanticMap forward(cfg), permuted(cfg);
  for (std::size_t i : order) forward.integrate(frames[i]);
  std::shuffle(order.begin(), order.end(), std::mt19937_64(31));
  for (std::size_t i : order) permuted.integrate(frames[i]);

  double worst = 0.0;
  std::size_t evidence_diffs = 0, missing = 0;
  auto sem = permuted.semantics().const_accessor();
  forward.tsdf().for_each_value([&](const Coord& c, const TsdfVoxel& v) {
    const TsdfVoxel* o = permuted.tsdf().find(c);
    if (!o) {
      ++missing;
      return;
    }
    worst = std::max(worst, std::abs(v.distance - o->distance) / std::max(std::abs(v.distance), 1e-6));
  });
  forward.semantics().for_each([&](const Coord& c, std::span<const float> a) {
    const float* b = sem.find(c);
    if (!b || !std::equal(a.begin(), a.end(), b)) ++evidence_diffs;
  });
  const bool same_support =
      forward.tsdf().active_voxel_count() == permuted.tsdf().active_voxel_count() && missing == 0;
  return {same_support && worst < 1e-9 && evidence_diffs == 0,
          fmt("max relative |dD| = %.2e (tol 1e-9)", worst) +
              fmt(", voxels with different class evidence = %.0f (need 0)", static_cast<double>(evidence_diffs)) +
              (same_support ? "" : ", active sets differ")};
}

Outcome raycast_oracle() {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> pos(-4.0, 4.0);
  std::uniform_real_distribution<double> vs_d(0.05, 0.5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t mismatches = 0;
  for (int n = 0; n < 1000; ++n) {
    const Vec3d o(pos(rng), pos(rng), pos(rng));
    const Vec3d e(pos(rng), pos(rng), pos(rng));
    const double vs = vs_d(rng);
    const double trunc = vs * (1.0 + 3.0 * unit(rng));
    const bool carve = n % 4 == 0;
    if (raycast_band(o, e, RayBand{vs, trunc, carve}) != oracle::sampled_band(o, e, vs, trunc, carve)) ++mismatches;
  }
  return {mismatches == 0, fmt("rays differing from sampling oracle = %.0f of 1000 (need 0)",
                               static_cast<double>(mismatches))};
}

Frame throughput_frame() {
  auto seq = synth::room_sequence();
  seq.camera = synth::pinhole(400, 250, 90.0);
  return synth::simulate_frame(seq, 0, PayloadKind::class_id, {});
}

MapConfig throughput_config() {
  MapConfig cfg;
  cfg.fusion.voxel_size = 0.1;
  cfg.fusion.truncation_distance = 0.3;
  cfg.fusion.max_range = 100.0;
  cfg.closed.num_classes = 5;
  return cfg;
}

double time_integration(const Frame& frame, std::size_t workers) {
  std::vector<double> runs;
  for (int r = 0; r < 3; ++r) {
    SemanticMap map(throughput_config());
    const auto t0 = Clock::now();
    map.integrate(frame, workers);
    runs.push_back(seconds_since(t0));
  }
  std::sort(runs.begin(), runs.end());
  return runs[1];
}

Outcome throughput_sequential() {
  const Frame frame = throughput_frame();
  const double t = time_integration(frame, 1);
  return {frame.size() >= 100000 && t < 1.0,
          fmt("%.0f points at 10 cm: ", static_cast<double>(frame.size())) + fmt("%.3f s single-threaded (limit 1 s)", t)};
}

Outcome throughput_parallel() {
  const Frame frame = throughput_frame();
  const double t1 = time_integration(frame, 1);
  const double t4 = time_integration(frame, 4);
  const double speedup = t1 / t4;
  return {speedup >= 2.0, fmt("speedup on 4 workers = %.2fx (min 2x)", speedup) + fmt(", %.3f s", t1) +
                              fmt(" -> %.3f s", t4) +
                              fmt(", host reports %.0f hardware threads", std::thread::hardware_concurrency())};
}

Outcome render_consistency() {
  const auto seq = synth::sphere_sequence();
  const SemanticMap map = fuse(seq, SemanticMode::closed, {});
  const double vs = map.tsdf().voxel_size();
  std::size_t hit_pixels = 0, agree = 0;
  const std::vector<Vec3d> eyes{{0.3, -2.9, 0.7}, {2.5, 1.2, -1.0}, {-1.0, 0.4, 2.8}, {-2.0, -2.0, -0.5}};
  for (const Vec3d& e : eyes) {
    RenderCamera cam;
    cam.intrinsics = synth::pinhole(128, 128, 50.0);
    cam.pose = look_at(3.0 * e.normalized(), Vec3d::Zero());
    const io::Raster depth = render(map, cam, RenderMode::depth);
    const auto& k = cam.intrinsics;
    const Eigen::Matrix3d rot = cam.pose.topLeftCorner<3, 3>();
    const Vec3d origin = cam.pose.topRightCorner<3, 1>();
    for (std::uint32_t v = 0; v < k.height; ++v) {
      for (std::uint32_t u = 0; u < k.width; ++u) {
        const Vec3d dc = Vec3d((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0).normalized();
        const auto truth = seq.scene.cast(origin, rot * dc);
        const float d = depth.f32[depth.index(u, v)];
        if (!truth && d == 0.0f) continue;
        ++hit_pixels;
        if (truth && d > 0.0f && std::abs(truth->t * dc.z() - d) <= 1.5 * vs) ++agree;
      }
    }
  }
  const double frac = hit_pixels ? static_cast<double>(agree) / static_cast<double>(hit_pixels) : 0.0;
  return {frac >= 0.99, fmt("pixels within 1.5 voxel of analytic depth = %.4f", frac) +
                            fmt(" of %.0f hit pixels (min 0.99)", static_cast<double>(hit_pixels))};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>>& criteria() {
  static const std::vector<std::pair<std::string, std::function<Outcome()>>> list{
      {"conjugacy_closed", conjugacy_closed},
      {"conjugacy_open", conjugacy_open},
      {"sphere_geometry", sphere_geometry},
      {"room_semantics_noiseless", room_noiseless},
      {"bayesian_beats_last_measurement", bayes_vs_last},
      {"closed_open_bridge", bridge},
      {"sparsity", sparsity},
      {"order_robustness", order_robustness},
      {"raycast_oracle", raycast_oracle},
      {"throughput_sequential", throughput_sequential},
      {"throughput_parallel", throughput_parallel},
      {"render_consistency", render_consistency},
  };
  return list;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> selected(argv + 1, argv + argc);
  if (selected.size() == 1 && selected[0] == "--list") {
    for (const auto& [name, f] : criteria()) std::printf("%s\n", name.c_str());
    return 0;
  }
  for (const auto& s : selected) {
    const bool known = std::any_of(criteria().begin(), criteria().end(), [&](const auto& c) { return c.first == s; });
    if (!known) {
      std::fprintf(stderr, "unknown criterion '%s' (see --list)\n", s.c_str());
      return 2;
    }
  }
  int failures = 0;
  for (const auto& [name, run] : criteria()) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), name) == selected.end()) continue;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %-32s %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
