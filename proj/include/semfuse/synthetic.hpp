// Copyright 2026 The semfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "semfuse/frame.hpp"
#include "semfuse/gaussian.hpp"
#include "semfuse/io/depth.hpp"
#include "semfuse/io/embeddings.hpp"
#include "semfuse/io/frame_file.hpp"
#include "semfuse/io/manifest.hpp"
#include "semfuse/io/palette.hpp"
#include "semfuse/io/poses.hpp"
#include "semfuse/io/raster.hpp"
#include "semfuse/semantic_map.hpp"

namespace semfuse::synth {

/// Analytic labeled primitive. A room is the inside of an axis-aligned box.
/// `lower_label`, when set, labels the lower half of a sphere or the floor of
/// a room.
struct Shape {
  enum class Kind { sphere, box, cylinder, room };
  Kind kind = Kind::sphere;
  Vec3d center = Vec3d::Zero();
  Vec3d half = Vec3d::Ones();  // box and room half extents; cylinder (r, r, half height)
  double radius = 1.0;
  ClassId label = 1;
  ClassId lower_label = kUnlabeled;

  static Shape sphere(const Vec3d& c, double r, ClassId label, ClassId lower = kUnlabeled) {
    return {Kind::sphere, c, Vec3d::Constant(r), r, label, lower};
  }
  static Shape box(const Vec3d& c, const Vec3d& half, ClassId label) { return {Kind::box, c, half, 0.0, label, 0}; }
  static Shape cylinder(const Vec3d& c, double r, double half_height, ClassId label) {
    return {Kind::cylinder, c, Vec3d(r, r, half_height), r, label, 0};
  }
  static Shape room(const Vec3d& c, const Vec3d& half, ClassId wall, ClassId floor) {
    return {Kind::room, c, half, 0.0, wall, floor};
  }

  /// First intersection with t > t_min along a unit-direction ray.
  [[nodiscard]] std::optional<double> intersect(const Vec3d& o, const Vec3d& d, double t_min = 1e-9) const {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    const Vec3d p = o - center;
    switch (kind) {
      case Kind::sphere: {
        const double b = p.dot(d);
        const double disc = b * b - (p.squaredNorm() - radius * radius);
        if (disc < 0.0) return std::nullopt;
        const double s = std::sqrt(disc);
        if (-b - s > t_min) return -b - s;
        if (-b + s > t_min) return -b + s;
        return std::nullopt;
      }
      case Kind::box: {
        double lo = -kInf, hi = kInf;
        for (int a = 0; a < 3; ++a) {
          if (d[a] == 0.0) {
            if (std::abs(p[a]) > half[a]) return std::nullopt;
            continue;
          }
          double t0 = (-half[a] - p[a]) / d[a], t1 = (half[a] - p[a]) / d[a];
          if (t0 > t1) std::swap(t0, t1);
          lo = std::max(lo, t0);
          hi = std::min(hi, t1);
        }
        if (lo > hi) return std::nullopt;
        if (lo > t_min) return lo;
        if (hi > t_min) return hi;
        return std::nullopt;
      }
      case Kind::cylinder: {
        double best = kInf;
        const double a = d.x() * d.x() + d.y() * d.y();
        if (a > 0.0) {
          const double b = p.x() * d.x() + p.y() * d.y();
          const double c = p.x() * p.x() + p.y() * p.y() - radius * radius;
          const double disc = b * b - a * c;
          if (disc >= 0.0) {
            for (double t : {(-b - std::sqrt(disc)) / a, (-b + std::sqrt(disc)) / a}) {
              if (t > t_min && std::abs(p.z() + t * d.z()) <= half.z()) best = std::min(best, t);
            }
          }
        }
        if (d.z() != 0.0) {
          for (double z : {-half.z(), half.z()}) {
            const double t = (z - p.z()) / d.z();
            const Vec3d q = p + t * d;
            if (t > t_min && q.x() * q.x() + q.y() * q.y() <= radius * radius) best = std::min(best, t);
          }
        }
        if (best == kInf) return std::nullopt;
        return best;
      }
      case Kind::room: {
        double best = kInf;
        for (int a = 0; a < 3; ++a) {
          if (d[a] == 0.0) continue;
          const double t = ((d[a] > 0.0 ? half[a] : -half[a]) - p[a]) / d[a];
          if (t > t_min) best = std::min(best, t);
        }
        if (best == kInf) return std::nullopt;
        return best;
      }
    }
    return std::nullopt;
  }

  /// Unsigned distance from p to the surface.
  [[nodiscard]] double distance(const Vec3d& x) const {
    const Vec3d p = x - center;
    switch (kind) {
      case Kind::sphere: return std::abs(p.norm() - radius);
      case Kind::box:
      case Kind::room: {
        const Vec3d q = p.cwiseAbs() - half;
        return std::abs(q.cwiseMax(0.0).norm() + std::min(q.maxCoeff(), 0.0));
      }
      case Kind::cylinder: {
        const double dr = std::hypot(p.x(), p.y()) - radius;
        const double dz = std::abs(p.z()) - half.z();
        return std::abs(std::min(std::max(dr, dz), 0.0) + std::hypot(std::max(dr, 0.0), std::max(dz, 0.0)));
      }
    }
    return 0.0;
  }

  /// Label of the surface point nearest to x.
  [[nodiscard]] ClassId label_at(const Vec3d& x) const {
    if (lower_label == kUnlabeled) return label;
    const Vec3d p = x - center;
    if (kind == Kind::sphere) return p.z() < 0.0 ? lower_label : label;
    if (kind == Kind::room) {
      // nearest face; the floor is the -z face
      int face_axis = 0;
      double best = std::numeric_limits<double>::infinity();
      bool low = false;
      for (int a = 0; a < 3; ++a) {
        for (int s : {-1, 1}) {
          const double dist = std::abs(p[a] - s * half[a]);
          if (dist < best) {
            best = dist;
            face_axis = a;
            low = s < 0;
          }
        }
      }
      return face_axis == 2 && low ? lower_label : label;
    }
    return label;
  }
};

struct Hit {
  double t;
  ClassId label;
};

struct Scene {
  std::string name;
  std::vector<Shape> shapes;
  std::vector<std::string> class_names;  // index i names class i + 1

  [[nodiscard]] int num_classes() const { return static_cast<int>(class_names.size()); }

  [[nodiscard]] std::optional<Hit> cast(const Vec3d& o, const Vec3d& d) const {
    std::optional<Hit> best;
    for (const Shape& s : shapes) {
      if (auto t = s.intersect(o, d); t && (!best || *t < best->t)) best = Hit{*t, s.label_at(o + *t * d)};
    }
    return best;
  }

  [[nodiscard]] double distance(const Vec3d& p) const {
    double best = std::numeric_limits<double>::infinity();
    for (const Shape& s : shapes) best = std::min(best, s.distance(p));
    return best;
  }

  /// Analytic truth: the label of the nearest surface.
  [[nodiscard]] ClassId nearest_label(const Vec3d& p) const {
    double best = std::numeric_limits<double>::infinity();
    ClassId label = kUnlabeled;
    for (const Shape& s : shapes) {
      if (const double d = s.distance(p); d < best) {
        best = d;
        label = s.label_at(p);
      }
    }
    return label;
  }
};

struct NoiseSpec {
  double label_flip = 0.0;  // probability of replacing a label with a different class
  double depth_sigma = 0.0;
  std::uint64_t seed = 1;
};

struct Sequence {
  Scene scene;
  io::CameraIntrinsics camera;
  std::vector<Pose> poses;
  MapConfig map;
  double max_range = 50.0;
};

/// Ray-casts one sensor frame. Points are in sensor coordinates. Open frames
/// carry one-hot features of the (possibly flipped) label.
[[nodiscard]] inline Frame simulate_frame(const Sequence& seq, std::size_t index, PayloadKind kind,
                                          const NoiseSpec& noise) {
  const Pose& pose = seq.poses.at(index);
  const int k = seq.scene.num_classes();
  std::mt19937_64 rng(noise.seed * 0x9E3779B97F4A7C15ull + index);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> other(1, std::max(k - 1, 1));
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Eigen::Matrix3d rot = pose.block<3, 3>(0, 0);
  const Vec3d origin = pose.block<3, 1>(0, 3);
  Frame f;
  f.kind = kind;
  f.pose = pose;
  if (kind == PayloadKind::feature) f.feature_dim = static_cast<std::uint32_t>(k);
  const auto& cam = seq.camera;
  for (std::uint32_t v = 0; v < cam.height; ++v) {
    for (std::uint32_t u = 0; u < cam.width; ++u) {
      const Vec3d dir_cam = Vec3d((u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0).normalized();
      const auto hit = seq.scene.cast(origin, rot * dir_cam);
      if (!hit || hit->t > seq.max_range) continue;
      double t = hit->t;
      if (noise.depth_sigma > 0.0) t += noise.depth_sigma * gauss(rng);
      ClassId label = hit->label;
      if (noise.label_flip > 0.0 && unit(rng) < noise.label_flip) {
        const int r = other(rng);
        label = static_cast<ClassId>(r >= label ? r + 1 : r);
      }
      f.points.push_back((t * dir_cam).cast<float>());
      if (kind == PayloadKind::class_id) {
        f.classes.push_back(label);
      } else {
        for (int c = 1; c <= k; ++c) f.features.push_back(c == label ? 1.0f : 0.0f);
      }
    }
  }
  return f;
}

/// Depth (f32 meters along the optical axis, 0 for no return) and payload
/// (u16 class ids, or f32 one-hot features) rasters of one frame.
[[nodiscard]] inline std::pair<io::Raster, io::Raster> simulate_rgbd(const Sequence& seq, std::size_t index,
                                                                    PayloadKind kind, const NoiseSpec& noise) {
  const Frame f = simulate_frame(seq, index, kind, noise);
  const auto& cam = seq.camera;
  const int k = seq.scene.num_classes();
  io::Raster depth = io::Raster::make(cam.width, cam.height, 1, io::PixelType::f32);
  io::Raster payload = kind == PayloadKind::class_id
                           ? io::Raster::make(cam.width, cam.height, 1, io::PixelType::u16)
                           : io::Raster::make(cam.width, cam.height, static_cast<std::uint32_t>(k), io::PixelType::f32);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Vec3d p = f.points[i].cast<double>();
    const Eigen::Vector2d px = cam.project(p);
    const auto u = static_cast<std::uint32_t>(std::lround(px.x()));
    const auto v = static_cast<std::uint32_t>(std::lround(px.y()));
    if (u >= cam.width || v >= cam.height) continue;
    depth.f32[depth.index(u, v)] = static_cast<float>(p.z());
    if (kind == PayloadKind::class_id) {
      payload.u16[payload.index(u, v)] = f.classes[i];
    } else {
      const auto row = f.feature(i);
      std::copy(row.begin(), row.end(), payload.f32.begin() + static_cast<std::ptrdiff_t>(payload.index(u, v)));
    }
  }
  return {std::move(depth), std::move(payload)};
}

/// Points on the unit sphere, nearly uniform.
[[nodiscard]] inline std::vector<Vec3d> fibonacci_sphere(std::size_t n) {
  std::vector<Vec3d> out;
  out.reserve(n);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
    const double r = std::sqrt(1.0 - z * z);
    const double phi = golden * static_cast<double>(i);
    out.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
  }
  return out;
}

[[nodiscard]] inline io::CameraIntrinsics pinhole(std::uint32_t width, std::uint32_t height, double hfov_deg) {
  io::CameraIntrinsics cam;
  cam.width = width;
  cam.height = height;
  cam.cx = (width - 1) / 2.0;
  cam.cy = (height - 1) / 2.0;
  cam.fx = cam.fy = (width / 2.0) / std::tan(hfov_deg * std::numbers::pi / 360.0);
  return cam;
}

/// Unit sphere at the origin, upper half class 1 and lower half class 2,
/// seen from 64 Fibonacci directions at radius 3. 2 cm voxels.
[[nodiscard]] inline Sequence sphere_sequence() {
  Sequence s;
  s.scene = {"sphere", {Shape::sphere(Vec3d::Zero(), 1.0, 1, 2)}, {"upper", "lower"}};
  s.camera = pinhole(128, 128, 50.0);
  for (const Vec3d& d : fibonacci_sphere(64)) {
    const Vec3d up = std::abs(d.z()) > 0.9 ? Vec3d::UnitX() : Vec3d::UnitZ();
    s.poses.push_back(look_at(3.0 * d, Vec3d::Zero(), up));
  }
  s.map.fusion.voxel_size = 0.02;
  s.map.fusion.truncation_distance = 0.06;
  s.map.closed.num_classes = 2;
  s.map.open.feature_dim = 2;
  s.max_range = 10.0;
  return s;
}

/// Two abutting slabs whose top faces form the plane z = 0, class 1 for
/// x < 0 and class 2 for x >= 0, seen from above.
[[nodiscard]] inline Sequence plane_sequence() {
  Sequence s;
  s.scene = {"plane",
             {Shape::box(Vec3d(-2.0, 0.0, -0.5), Vec3d(2.0, 2.0, 0.5), 1),
              Shape::box(Vec3d(2.0, 0.0, -0.5), Vec3d(2.0, 2.0, 0.5), 2)},
             {"left", "right"}};
  s.camera = pinhole(96, 72, 70.0);
  for (int i = 0; i < 10; ++i) {
    const double x = -1.5 + 0.3 * i;
    s.poses.push_back(look_at(Vec3d(x, -0.5, 2.0), Vec3d(x, 0.2, 0.0)));
  }
  s.map.fusion.voxel_size = 0.05;
  s.map.fusion.truncation_distance = 0.15;
  s.map.closed.num_classes = 2;
  s.map.open.feature_dim = 2;
  s.max_range = 10.0;
  return s;
}

/// Labeled hall: floor (1), walls and ceiling (2), box (3), ball (4) and
/// pillar (5). Every surface lies outside the central 12.8 m cube, which the
/// camera circles. 100 frames, 5 cm voxels.
[[nodiscard]] inline Sequence room_sequence() {
  Sequence s;
  const double floor_z = -7.0;
  s.scene = {"room",
             {Shape::room(Vec3d(0.0, 0.0, 1.0), Vec3d(16.0, 16.0, 8.0), 2, 1),
              Shape::box(Vec3d(10.0, 3.0, floor_z + 0.6), Vec3d(0.8, 1.2, 0.6), 3),
              Shape::sphere(Vec3d(-9.0, 8.0, floor_z + 1.0), 1.0, 4),
              Shape::cylinder(Vec3d(2.0, -10.0, floor_z + 1.5), 0.7, 1.5, 5)},
             {"floor", "wall", "box", "ball", "pillar"}};
  s.camera = pinhole(160, 120, 90.0);
  const int n = 100;
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * std::numbers::pi * i / n;
    const Vec3d eye(3.0 * std::cos(a), 3.0 * std::sin(a), floor_z + 1.6);
    const double look = a + 0.6 * std::sin(3.0 * a);
    const Vec3d target = eye + Vec3d(std::cos(look), std::sin(look), -0.35);
    s.poses.push_back(look_at(eye, target));
  }
  s.map.fusion.voxel_size = 0.05;
  s.map.fusion.truncation_distance = 0.1;
  s.map.closed.num_classes = 5;
  s.map.open.feature_dim = 5;
  s.max_range = 40.0;
  return s;
}

[[nodiscard]] inline std::vector<std::string> sequence_names() { return {"sphere", "plane", "room"}; }

[[nodiscard]] inline Sequence make_sequence(const std::string& name) {
  if (name == "sphere") return sphere_sequence();
  if (name == "plane") return plane_sequence();
  if (name == "room") return room_sequence();
  throw std::invalid_argument("unknown scene '" + name + "' (expected sphere, plane or room)");
}

/// Writes frames, poses, palette, label embeddings and a manifest into `dir`;
/// returns the manifest path.
inline std::filesystem::path write_sequence(const std::filesystem::path& dir, const Sequence& seq, SemanticMode mode,
                                            const NoiseSpec& noise, std::size_t max_frames = 0,
                                            io::SequenceKind layout = io::SequenceKind::points) {
  std::filesystem::create_directories(dir / "frames");
  const std::size_t n = max_frames > 0 ? std::min(max_frames, seq.poses.size()) : seq.poses.size();
  const PayloadKind kind = mode == SemanticMode::closed ? PayloadKind::class_id : PayloadKind::feature;
  std::ofstream list(dir / "frames.txt");
  if (!list) throw std::runtime_error("cannot write " + (dir / "frames.txt").string());
  for (std::size_t i = 0; i < n; ++i) {
    char name[40];
    if (layout == io::SequenceKind::points) {
      std::snprintf(name, sizeof(name), "frames/%06zu.slfr", i);
      io::save_frame(dir / name, simulate_frame(seq, i, kind, noise));
      list << name << "\n";
    } else {
      const auto [depth, payload] = simulate_rgbd(seq, i, kind, noise);
      std::snprintf(name, sizeof(name), "frames/%06zu_depth.slim", i);
      io::save_raster(dir / name, depth);
      list << name << " ";
      std::snprintf(name, sizeof(name), "frames/%06zu_label.slim", i);
      io::save_raster(dir / name, payload);
      list << name << "\n";
    }
  }
  list.close();
  io::save_poses(dir / "poses.txt", std::vector<Pose>(seq.poses.begin(), seq.poses.begin() + static_cast<std::ptrdiff_t>(n)));
  io::save_palette(dir / "palette.csv", io::Palette::generated(seq.scene.class_names));
  io::save_embeddings(dir / "labels.slem", EmbeddingSet::standard_basis(seq.scene.class_names));
  io::SequenceManifest m;
  m.kind = layout;
  if (layout == io::SequenceKind::rgbd) {
    m.camera = seq.camera;
    m.camera->depth_scale = 1.0;
  }
  m.poses = "poses.txt";
  m.map = seq.map;
  m.map.mode = mode;
  m.map.fusion.max_range = seq.max_range + 1.0;
  m.palette = "palette.csv";
  m.embeddings = "labels.slem";
  const auto path = dir / "manifest.ini";
  io::save_manifest(path, m, "frames.txt");
  return path;
}

/// Fills a TSDF grid from an analytic signed distance over a box, setting
/// every voxel with |D| < truncation to (D, weight 1).
template <typename Sdf>
void fill_analytic(SparseGrid<TsdfVoxel>& grid, Sdf&& sdf, const Vec3d& lo, const Vec3d& hi, double truncation) {
  const double vs = grid.voxel_size();
  const Coord a = world_to_coord(lo, vs);
  const Coord b = world_to_coord(hi, vs);
  auto acc = grid.accessor();
  for (std::int32_t z = a[2]; z <= b[2]; ++z) {
    for (std::int32_t y = a[1]; y <= b[1]; ++y) {
      for (std::int32_t x = a[0]; x <= b[0]; ++x) {
        const Coord c{x, y, z};
        const double d = sdf(coord_to_world_center(c, vs));
        if (std::abs(d) < truncation) acc.set(c, TsdfVoxel{d, 1.0});
      }
    }
  }
}

/// Analytic truth on the lattice and support of `lattice`: every active voxel
/// gets the label of the scene surface nearest to its center.
[[nodiscard]] inline SparseGrid<ClassId> truth_labels(const SparseGrid<ClassId>& lattice, const Scene& scene) {
  SparseGrid<ClassId> out(lattice.config(), kUnlabeled);
  auto acc = out.accessor();
  const double vs = lattice.voxel_size();
  lattice.for_each_value([&](const Coord& c, ClassId) { acc.set(c, scene.nearest_label(coord_to_world_center(c, vs))); });
  return out;
}

}  // namespace semfuse::synth
