// Copyright 2026 The semfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace semfuse {

using Vec3d = Eigen::Vector3d;
using Vec3f = Eigen::Vector3f;

/// Integer lattice index of a voxel. World position of the voxel center is
/// (i, j, k) + 0.5 times the voxel size.
struct Coord {
  std::int32_t i = 0;
  std::int32_t j = 0;
  std::int32_t k = 0;

  friend constexpr bool operator==(const Coord&, const Coord&) = default;

  friend constexpr bool operator<(const Coord& a, const Coord& b) {
    if (a.i != b.i) return a.i < b.i;
    if (a.j != b.j) return a.j < b.j;
    return a.k < b.k;
  }

  constexpr Coord operator+(const Coord& o) const { return {i + o.i, j + o.j, k + o.k}; }
  constexpr Coord operator-(const Coord& o) const { return {i - o.i, j - o.j, k - o.k}; }

  constexpr std::int32_t operator[](int axis) const { return axis == 0 ? i : (axis == 1 ? j : k); }
  constexpr std::int32_t& operator[](int axis) { return axis == 0 ? i : (axis == 1 ? j : k); }

  [[nodiscard]] std::string str() const {
    return "(" + std::to_string(i) + "," + std::to_string(j) + "," + std::to_string(k) + ")";
  }
};

/// Addressable index range is [-2^30, 2^30) on every axis.
inline constexpr std::int64_t kMaxCoordIndex = std::int64_t{1} << 30;

[[nodiscard]] constexpr bool in_addressable_range(const Coord& c) {
  auto ok = [](std::int64_t v) { return v >= -kMaxCoordIndex && v < kMaxCoordIndex; };
  return ok(c.i) && ok(c.j) && ok(c.k);
}

namespace detail {

// Spreads the low 21 bits of v so that two zero bits sit between consecutive bits.
constexpr std::uint64_t spread_bits_21(std::uint64_t v) {
  v &= 0x1fffff;
  v = (v | v << 32) & 0x1f00000000ffffULL;
  v = (v | v << 16) & 0x1f0000ff0000ffULL;
  v = (v | v << 8) & 0x100f00f00f00f00fULL;
  v = (v | v << 4) & 0x10c30c30c30c30c3ULL;
  v = (v | v << 2) & 0x1249249249249249ULL;
  return v;
}

}  // namespace detail

/// Morton interleave of the two's-complement low bits of a coordinate.
[[nodiscard]] constexpr std::uint64_t morton_key(const Coord& c) {
  return detail::spread_bits_21(static_cast<std::uint32_t>(c.i)) |
         detail::spread_bits_21(static_cast<std::uint32_t>(c.j)) << 1 |
         detail::spread_bits_21(static_cast<std::uint32_t>(c.k)) << 2;
}

struct CoordHash {
  std::size_t operator()(const Coord& c) const noexcept {
    // node origins have zero low bits; mix so buckets still spread
    std::uint64_t h = morton_key(c);
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
    return static_cast<std::size_t>(h);
  }
};

/// floor(p / voxel_size) per component. Throws std::out_of_range when the
/// result leaves the addressable index space.
[[nodiscard]] inline Coord world_to_coord(const Vec3d& p, double voxel_size) {
  if (!(voxel_size > 0.0)) {
    throw std::invalid_argument("voxel_size must be positive");
  }
  Coord c;
  for (int a = 0; a < 3; ++a) {
    const double f = std::floor(p[a] / voxel_size);
    if (!(f >= -static_cast<double>(kMaxCoordIndex) && f < static_cast<double>(kMaxCoordIndex))) {
      throw std::out_of_range("world point outside addressable voxel range");
    }
    c[a] = static_cast<std::int32_t>(f);
  }
  return c;
}

[[nodiscard]] inline Vec3d coord_to_world_center(const Coord& c, double voxel_size) {
  return {(c.i + 0.5) * voxel_size, (c.j + 0.5) * voxel_size, (c.k + 0.5) * voxel_size};
}

}  // namespace semfuse

template <>
struct std::hash<semfuse::Coord> {
  std::size_t operator()(const semfuse::Coord& c) const noexcept { return semfuse::CoordHash{}(c); }
};
