// Copyright 2026 The semfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "semfuse/frame.hpp"
#include "semfuse/io/raster.hpp"

namespace semfuse::io {

struct CameraIntrinsics {
  double fx = 525.0;
  double fy = 525.0;
  double cx = 319.5;
  double cy = 239.5;
  std::uint32_t width = 640;
  std::uint32_t height = 480;
  double depth_scale = 1e-3;  // meters per stored depth unit

  void validate() const {
    if (!(fx > 0.0 && fy > 0.0)) throw std::invalid_argument("camera.fx and camera.fy must be positive");
    if (width == 0 || height == 0) throw std::invalid_argument("camera.width and camera.height must be positive");
    if (!(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height)) {
      throw std::invalid_argument("principal point lies outside the image");
    }
    if (!(depth_scale > 0.0)) throw std::invalid_argument("camera.depth_scale must be positive");
  }

  /// Sensor-frame point of pixel (u, v) at metric depth d.
  [[nodiscard]] Vec3d unproject(double u, double v, double d) const {
    return {(u - cx) * d / fx, (v - cy) * d / fy, d};
  }

  /// Pixel coordinates of a sensor-frame point (z > 0).
  [[nodiscard]] Eigen::Vector2d project(const Vec3d& p) const {
    return {fx * p.x() / p.z() + cx, fy * p.y() / p.z() + cy};
  }
};

/**
 * @brief Back-projects every stride-th pixel with valid depth into a
 * sensor-frame point cloud paired with that pixel's payload.
 *
 * The payload raster is either one u16/u8 channel of class ids (closed set)
 * or an f32 raster whose channels are the feature vector (open set). Depth 0
 * and NaN are invalid.
 */
[[nodiscard]] inline Frame project_depth(const Raster& depth, const Raster& payload, const CameraIntrinsics& cam,
                                         std::uint32_t stride = 1) {
  if (stride < 1) throw std::invalid_argument("stride must be >= 1");
  if (depth.channels != 1) throw std::invalid_argument("depth raster must have one channel");
  if (depth.type == PixelType::u8) throw std::invalid_argument("depth raster must be u16 or f32");
  if (depth.width != payload.width || depth.height != payload.height) {
    throw std::invalid_argument("depth raster is " + std::to_string(depth.width) + "x" +
                                std::to_string(depth.height) + " but payload raster is " +
                                std::to_string(payload.width) + "x" + std::to_string(payload.height));
  }
  Frame f;
  if (payload.type == PixelType::f32) {
    f.kind = PayloadKind::feature;
    f.feature_dim = payload.channels;
  } else {
    if (payload.channels != 1) throw std::invalid_argument("class raster must have one channel");
    f.kind = PayloadKind::class_id;
  }
  for (std::uint32_t v = 0; v < depth.height; v += stride) {
    for (std::uint32_t u = 0; u < depth.width; u += stride) {
      const double raw = depth.value(u, v);
      if (!(raw > 0.0) || !std::isfinite(raw)) continue;
      const double d = raw * cam.depth_scale;
      f.points.push_back(cam.unproject(u, v, d).cast<float>());
      if (f.kind == PayloadKind::class_id) {
        f.classes.push_back(static_cast<ClassId>(payload.value(u, v)));
      } else {
        const std::size_t base = payload.index(u, v);
        f.features.insert(f.features.end(), payload.f32.begin() + static_cast<std::ptrdiff_t>(base),
                          payload.f32.begin() + static_cast<std::ptrdiff_t>(base + payload.channels));
      }
    }
  }
  return f;
}

}  // namespace semfuse::io
