// Copyright 2026 The semfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "semfuse/coord.hpp"
#include "semfuse/raycast.hpp"

namespace semfuse {

/// Cumulative truncated signed distance and weight of one voxel.
struct TsdfVoxel {
  double distance = 0.0;
  double weight = 0.0;

  friend bool operator==(const TsdfVoxel&, const TsdfVoxel&) = default;
};

enum class WeightFunction : std::uint8_t {
  constant_one,
  // 1 in front of the surface, falling linearly to 0 at -truncation
  linear_dropoff,
};

struct FusionConfig {
  double voxel_size = 0.1;
  double truncation_distance = 0.3;
  WeightFunction weight_fn = WeightFunction::constant_one;
  bool space_carving = false;
  double max_range = 100.0;

  void validate() const {
    if (!(voxel_size > 0.0)) throw std::invalid_argument("fusion.voxel_size must be positive");
    if (!(truncation_distance >= voxel_size)) {
      throw std::invalid_argument("fusion.truncation_distance must be >= voxel_size");
    }
    if (!(max_range > 0.0)) throw std::invalid_argument("fusion.max_range must be positive");
  }

  [[nodiscard]] RayBand band() const { return {voxel_size, truncation_distance, space_carving}; }
};

[[nodiscard]] inline std::string to_string(WeightFunction w) {
  return w == WeightFunction::constant_one ? "constant_one" : "linear_dropoff";
}

[[nodiscard]] inline WeightFunction parse_weight_function(const std::string& s) {
  if (s == "constant_one") return WeightFunction::constant_one;
  if (s == "linear_dropoff") return WeightFunction::linear_dropoff;
  throw std::invalid_argument("unknown weight function '" + s + "'");
}

/// Background of a TSDF grid: never observed, distance at the truncation limit.
[[nodiscard]] inline TsdfVoxel tsdf_background(const FusionConfig& cfg) {
  return {cfg.truncation_distance, 0.0};
}

[[nodiscard]] inline std::vector<Coord> raycast_band(const Vec3d& origin, const Vec3d& endpoint,
                                                     const FusionConfig& cfg, bool* degenerate = nullptr) {
  return raycast_band(origin, endpoint, cfg.band(), degenerate);
}

/// Projective signed distance of a voxel center along the ray, clamped to
/// +-truncation. Positive between sensor and surface.
[[nodiscard]] inline double signed_distance(const Coord& voxel, const Vec3d& origin,
                                            const Vec3d& endpoint, const FusionConfig& cfg) {
  const Vec3d ray = endpoint - origin;
  const double range = ray.norm();
  const Vec3d center = coord_to_world_center(voxel, cfg.voxel_size);
  const double along = (center - origin).dot(ray) / range;
  return std::clamp(range - along, -cfg.truncation_distance, cfg.truncation_distance);
}

[[nodiscard]] inline double observation_weight(double sdf, const FusionConfig& cfg) {
  switch (cfg.weight_fn) {
    case WeightFunction::constant_one:
      return 1.0;
    case WeightFunction::linear_dropoff:
      return sdf >= 0.0 ? 1.0 : std::max(0.0, 1.0 + sdf / cfg.truncation_distance);
  }
  return 1.0;
}

/// Running weighted mean: W' = W + w, D' = (W D + w d) / W'.
/// A zero combined weight leaves the voxel unchanged.
[[nodiscard]] constexpr TsdfVoxel update_voxel(const TsdfVoxel& v, double sdf, double w) {
  const double w_new = v.weight + w;
  if (w_new <= 0.0) {
    return v;
  }
  return {(v.weight * v.distance + w * sdf) / w_new, w_new};
}

}  // namespace semfuse
