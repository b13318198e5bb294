// Copyright 2026 The semfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "semfuse/frame.hpp"
#include "semfuse/io/depth.hpp"
#include "semfuse/io/palette.hpp"
#include "semfuse/io/raster.hpp"
#include "semfuse/mesh.hpp"
#include "semfuse/parallel.hpp"
#include "semfuse/semantic_map.hpp"

namespace semfuse {

enum class RenderMode { depth, semantic, normal };

[[nodiscard]] inline std::string to_string(RenderMode m) {
  switch (m) {
    case RenderMode::depth: return "depth";
    case RenderMode::semantic: return "semantic";
    case RenderMode::normal: return "normal";
  }
  return "?";
}

[[nodiscard]] inline RenderMode parse_render_mode(const std::string& s) {
  if (s == "depth") return RenderMode::depth;
  if (s == "semantic") return RenderMode::semantic;
  if (s == "normal") return RenderMode::normal;
  throw std::invalid_argument("unknown render mode '" + s + "' (expected depth, semantic or normal)");
}

struct RenderCamera {
  Pose pose = Pose::Identity();  // camera to world
  io::CameraIntrinsics intrinsics;
  double near = 0.05;
  double far = 20.0;

  void validate() const {
    validate_pose(pose);
    intrinsics.validate();
    if (!(near > 0.0)) throw std::invalid_argument("camera near must be positive");
    if (!(far > near)) throw std::invalid_argument("camera far must exceed near");
  }
};

struct RenderOptions {
  double min_weight = 0.5;
  std::size_t workers = 1;
};

/// Trilinear TSDF lookup over the 8 voxel centers around `p`; empty when any
/// of them is unobserved or below min_weight. Optionally returns the gradient.
template <typename Accessor>
[[nodiscard]] std::optional<double> sample_tsdf(Accessor& acc, const Vec3d& p, double voxel_size, double min_weight,
                                                Vec3d* gradient = nullptr) {
  const Vec3d g = p / voxel_size - Vec3d::Constant(0.5);
  const Vec3d base = g.array().floor();
  const Vec3d f = g - base;
  const Coord c0{static_cast<std::int32_t>(base.x()), static_cast<std::int32_t>(base.y()),
                 static_cast<std::int32_t>(base.z())};
  std::array<double, 8> d;
  for (int n = 0; n < 8; ++n) {
    const TsdfVoxel* v = acc.find(c0 + Coord{n & 1, (n >> 1) & 1, (n >> 2) & 1});
    if (!v || !(v->weight > 0.0) || !(v->weight >= min_weight)) return std::nullopt;
    d[static_cast<std::size_t>(n)] = v->distance;
  }
  auto lerp = [](double a, double b, double t) { return a + (b - a) * t; };
  const double x00 = lerp(d[0], d[1], f.x()), x10 = lerp(d[2], d[3], f.x());
  const double x01 = lerp(d[4], d[5], f.x()), x11 = lerp(d[6], d[7], f.x());
  const double y0 = lerp(x00, x10, f.y()), y1 = lerp(x01, x11, f.y());
  if (gradient) {
    const double dx0 = lerp(d[1] - d[0], d[3] - d[2], f.y());
    const double dx1 = lerp(d[5] - d[4], d[7] - d[6], f.y());
    const double dy0 = lerp(d[2] - d[0], d[3] - d[1], f.x());
    const double dy1 = lerp(d[6] - d[4], d[7] - d[5], f.x());
    *gradient = Vec3d(lerp(dx0, dx1, f.z()), lerp(dy0, dy1, f.z()), y1 - y0) / voxel_size;
  }
  return lerp(y0, y1, f.z());
}

struct RayHit {
  double t = 0.0;  // metric distance along the unit ray
  Vec3d point = Vec3d::Zero();
  Vec3d normal = Vec3d::Zero();
};

/**
 * @brief Marches a unit-direction ray through observed space in steps of half
 * a voxel, skipping unallocated leaves, and refines the first positive to
 * non-positive crossing by regula falsi until |D| < 1e-4 * truncation.
 */
template <typename Accessor>
[[nodiscard]] std::optional<RayHit> march_ray(const SparseGrid<TsdfVoxel>& grid, Accessor& acc, const Vec3d& origin,
                                              const Vec3d& dir, double t_min, double t_max, double truncation,
                                              double min_weight) {
  const double vs = grid.voxel_size();
  const double step = 0.5 * vs;
  const double tolerance = 1e-4 * truncation;
  const double extent = grid.config().leaf_extent();
  auto sample = [&](double t) { return sample_tsdf(acc, origin + t * dir, vs, min_weight); };

  bool have_prev = false;
  double prev = 0.0;
  double t_prev = t_min;
  for (double t = t_min; t <= t_max;) {
    const Vec3d p = origin + t * dir;
    const Coord c = world_to_coord(p, vs);
    if (!grid.find_leaf(c)) {
      // the voxel containing p is one of the trilinear corners, so the whole leaf is unusable
      const Coord lo = grid.leaf_origin(c);
      double exit = std::numeric_limits<double>::infinity();
      for (int a = 0; a < 3; ++a) {
        if (dir[a] == 0.0) continue;
        const double plane = (static_cast<double>(lo[a]) * vs) + (dir[a] > 0.0 ? extent : 0.0);
        exit = std::min(exit, (plane - origin[a]) / dir[a]);
      }
      have_prev = false;
      t = std::max(t + 1e-6 * vs, exit + 1e-6 * vs);
      continue;
    }
    const auto d = sample(t);
    if (d && have_prev && prev > 0.0 && *d <= 0.0) {
      double a = t_prev, da = prev, b = t, db = *d;
      double best = b;
      double best_abs = std::abs(db);
      for (int it = 0; it < 60 && best_abs >= tolerance; ++it) {
        double m = a + (b - a) * da / (da - db);
        if (!(m > a && m < b)) m = 0.5 * (a + b);
        auto dm = sample(m);
        if (!dm) {
          m = 0.5 * (a + b);
          dm = sample(m);
          if (!dm) break;
        }
        if (std::abs(*dm) < best_abs) {
          best = m;
          best_abs = std::abs(*dm);
        }
        if (*dm > 0.0) {
          a = m;
          da = *dm;
        } else {
          b = m;
          db = *dm;
        }
      }
      RayHit hit;
      hit.t = best;
      hit.point = origin + best * dir;
      Vec3d grad = Vec3d::Zero();
      if (sample_tsdf(acc, hit.point, vs, min_weight, &grad) && grad.norm() > 0.0) hit.normal = grad.normalized();
      return hit;
    }
    have_prev = d.has_value();
    prev = d.value_or(0.0);
    t_prev = t;
    t += step;
  }
  return std::nullopt;
}

/**
 * @brief Renders a depth (f32, z-depth in meters), semantic (u8 RGB) or
 * normal (f32 xyz, world frame) image by ray marching. Background pixels are
 * 0. Pixels are independent; rows are interleaved across workers. The map is
 * only read.
 */
[[nodiscard]] inline io::Raster render(const SemanticMap& map, const RenderCamera& camera, RenderMode mode,
                                       const RenderOptions& opt = {}, const EmbeddingSet* embeddings = nullptr,
                                       const io::Palette* palette = nullptr) {
  camera.validate();
  const auto& cam = camera.intrinsics;
  io::Raster out = mode == RenderMode::depth
                       ? io::Raster::make(cam.width, cam.height, 1, io::PixelType::f32)
                       : (mode == RenderMode::semantic ? io::Raster::make(cam.width, cam.height, 3, io::PixelType::u8)
                                                       : io::Raster::make(cam.width, cam.height, 3, io::PixelType::f32));
  const VoxelLabeler labeler(map, embeddings);
  io::Palette fallback;
  if (!palette && mode == RenderMode::semantic) {
    const std::size_t k = map.mode() == SemanticMode::closed ? static_cast<std::size_t>(map.config().closed.num_classes)
                                                            : (embeddings ? embeddings->size() : 0);
    fallback = io::Palette::generated(std::vector<std::string>(k, ""));
  }
  const io::Palette& pal = palette ? *palette : fallback;
  const Eigen::Matrix3d rot = camera.pose.block<3, 3>(0, 0);
  const Vec3d origin = camera.pose.block<3, 1>(0, 3);
  const double trunc = map.config().fusion.truncation_distance;
  const std::size_t workers = std::max<std::size_t>(opt.workers, 1);
  // bounds of allocated leaves, padded by one voxel for trilinear neighbors
  Vec3d box_lo = Vec3d::Constant(std::numeric_limits<double>::infinity());
  Vec3d box_hi = -box_lo;
  const double vs = map.tsdf().voxel_size();
  const double extent = map.tsdf().config().leaf_extent();
  map.tsdf().for_each_leaf([&](const SparseGrid<TsdfVoxel>::Leaf& leaf) {
    const Vec3d o(leaf.origin()[0] * vs, leaf.origin()[1] * vs, leaf.origin()[2] * vs);
    box_lo = box_lo.cwiseMin(o);
    box_hi = box_hi.cwiseMax(o + Vec3d::Constant(extent));
  });
  box_lo -= Vec3d::Constant(vs);
  box_hi += Vec3d::Constant(vs);

  run_workers(workers, [&](std::size_t w) {
    auto acc = map.tsdf().const_accessor();
    for (std::uint32_t v = static_cast<std::uint32_t>(w); v < cam.height; v += static_cast<std::uint32_t>(workers)) {
      for (std::uint32_t u = 0; u < cam.width; ++u) {
        const Vec3d ray_cam = Vec3d((u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0).normalized();
        const Vec3d dir = rot * ray_cam;
        // near/far bound z-depth
        double t0 = camera.near / ray_cam.z();
        double t1 = camera.far / ray_cam.z();
        for (int a = 0; a < 3; ++a) {
          if (dir[a] == 0.0) {
            if (origin[a] < box_lo[a] || origin[a] > box_hi[a]) t1 = -1.0;
            continue;
          }
          double ta = (box_lo[a] - origin[a]) / dir[a], tb = (box_hi[a] - origin[a]) / dir[a];
          if (ta > tb) std::swap(ta, tb);
          t0 = std::max(t0, ta);
          t1 = std::min(t1, tb);
        }
        if (!(t0 <= t1)) continue;
        const auto hit = march_ray(map.tsdf(), acc, origin, dir, t0, t1, trunc, opt.min_weight);
        if (!hit) continue;
        switch (mode) {
          case RenderMode::depth:
            out.f32[out.index(u, v)] = static_cast<float>(hit->t * ray_cam.z());
            break;
          case RenderMode::semantic: {
            const io::Rgb c = pal.color(labeler(world_to_coord(hit->point, map.tsdf().voxel_size())));
            for (std::uint32_t ch = 0; ch < 3; ++ch) out.u8[out.index(u, v, ch)] = c[ch];
            break;
          }
          case RenderMode::normal:
            for (std::uint32_t ch = 0; ch < 3; ++ch) out.f32[out.index(u, v, ch)] = static_cast<float>(hit->normal[ch]);
            break;
        }
      }
    }
  });
  return out;
}

/// 8-bit RGB view of a rendered image: depth as gray scaled to its maximum,
/// normals mapped from [-1, 1], RGB passed through.
[[nodiscard]] inline io::Raster to_rgb(const io::Raster& r) {
  if (r.type == io::PixelType::u8 && r.channels == 3) return r;
  if (r.type != io::PixelType::f32 || (r.channels != 1 && r.channels != 3)) {
    throw std::invalid_argument("cannot visualize this raster");
  }
  io::Raster out = io::Raster::make(r.width, r.height, 3, io::PixelType::u8);
  if (r.channels == 1) {
    float hi = 0.0f;
    for (float x : r.f32) hi = std::max(hi, x);
    for (std::size_t i = 0; i < r.f32.size(); ++i) {
      const float x = r.f32[i];
      const auto g = static_cast<std::uint8_t>(x > 0.0f && hi > 0.0f ? std::lround(255.0 - 215.0 * x / hi) : 0);
      for (int ch = 0; ch < 3; ++ch) out.u8[i * 3 + static_cast<std::size_t>(ch)] = g;
    }
  } else {
    for (std::size_t i = 0; i < r.f32.size(); i += 3) {
      const bool background = r.f32[i] == 0.0f && r.f32[i + 1] == 0.0f && r.f32[i + 2] == 0.0f;
      for (std::size_t ch = 0; ch < 3; ++ch) {
        out.u8[i + ch] = background ? 0 : static_cast<std::uint8_t>(std::lround(127.5 * (r.f32[i + ch] + 1.0f)));
      }
    }
  }
  return out;
}

}  // namespace semfuse
