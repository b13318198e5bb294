// Copyright 2026 The semfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "semfuse/coord.hpp"

namespace semfuse {

/// The portion of a sensor ray that gets integrated: parameter t is metric
/// distance from the origin, and the band is the half-open interval
/// [t_begin, t_end).
struct RayBand {
  double voxel_size = 0.1;
  double truncation = 0.3;
  bool space_carving = false;
};

/**
 * @brief Grid-stepping (DDA) traversal restricted to the truncation band.
 *
 * Visits, in increasing t, every voxel whose traversal interval
 * [t_enter, t_exit) has positive overlap with [t_surf - trunc, t_surf + trunc),
 * t_surf = |endpoint - origin|. With space carving the band starts at 0.
 * The visitor is called as f(const Coord&, double t_enter, double t_exit) with
 * the interval clipped to the band. Overlaps shorter than kGrazeFraction of a
 * voxel (a ray through an edge or corner) count as zero.
 *
 * Returns false (and visits nothing) for a zero-length ray.
 */
inline constexpr double kGrazeFraction = 1e-9;

template <typename Visitor>
bool traverse_band(const Vec3d& origin, const Vec3d& endpoint, const RayBand& band, Visitor&& visit) {
  Vec3d dir = endpoint - origin;
  const double length = dir.norm();
  if (!(length > 0.0) || !std::isfinite(length)) {
    return false;
  }
  dir /= length;

  const double vs = band.voxel_size;
  const double graze = kGrazeFraction * vs;
  const double t_begin = band.space_carving ? 0.0 : std::max(0.0, length - band.truncation);
  const double t_end = length + band.truncation;
  constexpr double kInf = std::numeric_limits<double>::infinity();

  int step[3];
  double t_next[3];   // parameter of the exit boundary on each axis
  double t_entry[3];  // parameter of the entry boundary on each axis
  Coord v = world_to_coord(origin + t_begin * dir, vs);

  auto refresh_axis = [&](int a) {
    if (step[a] == 0) {
      t_next[a] = kInf;
      t_entry[a] = -kInf;
      return;
    }
    const double lower = static_cast<double>(v[a]) * vs;
    const double upper = static_cast<double>(v[a] + 1) * vs;
    const double exit_plane = step[a] > 0 ? upper : lower;
    const double entry_plane = step[a] > 0 ? lower : upper;
    t_next[a] = (exit_plane - origin[a]) / dir[a];
    t_entry[a] = (entry_plane - origin[a]) / dir[a];
  };

  for (int a = 0; a < 3; ++a) {
    step[a] = dir[a] > 0.0 ? 1 : (dir[a] < 0.0 ? -1 : 0);
    refresh_axis(a);
  }

  auto exit_time = [&] { return std::min({t_next[0], t_next[1], t_next[2]}); };
  auto entry_time = [&] { return std::max({t_entry[0], t_entry[1], t_entry[2]}); };

  // Advance across every axis whose exit plane is hit first (ties step together,
  // so a ray through an edge or corner never yields a zero-length voxel).
  auto advance = [&] {
    const double t = exit_time();
    for (int a = 0; a < 3; ++a) {
      if (t_next[a] <= t + graze) {
        v[a] += step[a];
        refresh_axis(a);
      }
    }
  };

  // The floor() of the band start can land one voxel off when the start point
  // sits on a voxel face; settle on the voxel that contains t_begin.
  for (int guard = 0; guard < 6; ++guard) {
    if (exit_time() <= t_begin) {
      advance();
      continue;
    }
    const double enter = entry_time();
    if (enter > t_begin) {
      const int a = static_cast<int>(std::max_element(t_entry, t_entry + 3) - t_entry);
      v[a] -= step[a];
      refresh_axis(a);
      continue;
    }
    break;
  }

  double t_enter = t_begin;
  const auto max_steps = static_cast<long>((t_end - t_begin) / vs * 3.0) + 8;
  for (long n = 0; n < max_steps; ++n) {
    const double t_exit = exit_time();
    const double clipped_exit = std::min(t_exit, t_end);
    if (clipped_exit - t_enter > graze) {
      visit(static_cast<const Coord&>(v), t_enter, clipped_exit);
    }
    if (t_exit >= t_end) {
      break;
    }
    advance();
    t_enter = t_exit;
  }
  return true;
}

/// Collects the band voxels of one ray. `degenerate` is set for zero-length rays.
[[nodiscard]] inline std::vector<Coord> raycast_band(const Vec3d& origin, const Vec3d& endpoint,
                                                     const RayBand& band, bool* degenerate = nullptr) {
  std::vector<Coord> out;
  const bool ok = traverse_band(origin, endpoint, band,
                                [&](const Coord& c, double, double) { out.push_back(c); });
  if (degenerate) *degenerate = !ok;
  return out;
}

}  // namespace semfuse
