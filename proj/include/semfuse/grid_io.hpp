// Copyright 2026 The semfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "semfuse/binary_io.hpp"
#include "semfuse/sparse_grid.hpp"
#include "semfuse/tsdf.hpp"

namespace semfuse {

/// Payload tag stored in grid snapshots.
enum class PayloadTag : std::uint8_t {
  tsdf = 1,
  class_evidence = 2,
  feature_stats = 3,
  label = 4,
};

inline constexpr std::uint32_t kGridFormatVersion = 1;

template <typename T>
struct PayloadCodec;

template <>
struct PayloadCodec<TsdfVoxel> {
  static void write(std::ostream& os, const TsdfVoxel& v) {
    binio::write<double>(os, v.distance);
    binio::write<double>(os, v.weight);
  }
  static TsdfVoxel read(std::istream& is) {
    TsdfVoxel v;
    v.distance = binio::read<double>(is, "tsdf distance");
    v.weight = binio::read<double>(is, "tsdf weight");
    return v;
  }
};

template <typename T>
  requires std::is_arithmetic_v<T>
struct PayloadCodec<T> {
  static void write(std::ostream& os, T v) { binio::write<T>(os, v); }
  static T read(std::istream& is) { return binio::read<T>(is, "voxel payload"); }
};

/**
 * Snapshot layout (little-endian):
 *   "SLVG" | version u32 | voxel_size f64 | leaf_log2 u8 | internal_log2 u8 |
 *   payload tag u8 | active_count u64 | channels u32 | background values |
 *   leaf_count u64 | per leaf: origin 3 x i32, mask words u64, active payloads
 *   in offset order.
 */
template <typename T>
void save_grid(std::ostream& os, const SparseGrid<T>& grid, PayloadTag tag) {
  const TreeConfig& cfg = grid.config();
  binio::write_magic(os, "SLVG");
  binio::write<std::uint32_t>(os, kGridFormatVersion);
  binio::write<double>(os, cfg.voxel_size);
  binio::write<std::uint8_t>(os, static_cast<std::uint8_t>(cfg.leaf_log2));
  binio::write<std::uint8_t>(os, static_cast<std::uint8_t>(cfg.internal_log2));
  binio::write<std::uint8_t>(os, static_cast<std::uint8_t>(tag));
  binio::write<std::uint64_t>(os, grid.active_voxel_count());
  binio::write<std::uint32_t>(os, grid.channels());
  for (const T& b : grid.background()) PayloadCodec<T>::write(os, b);
  binio::write<std::uint64_t>(os, grid.leaf_count());
  grid.for_each_leaf([&](const typename SparseGrid<T>::Leaf& leaf) {
    binio::write<std::int32_t>(os, leaf.origin().i);
    binio::write<std::int32_t>(os, leaf.origin().j);
    binio::write<std::int32_t>(os, leaf.origin().k);
    for (std::uint64_t w : leaf.mask()) binio::write<std::uint64_t>(os, w);
    leaf.for_each([&](std::uint32_t, const T* p) {
      for (std::uint32_t c = 0; c < grid.channels(); ++c) PayloadCodec<T>::write(os, p[c]);
    });
  });
  if (!os) throw std::runtime_error("failed writing grid snapshot");
}

struct GridHeader {
  TreeConfig tree;
  PayloadTag tag = PayloadTag::tsdf;
  std::uint64_t active_count = 0;
  std::uint32_t channels = 1;
};

[[nodiscard]] inline GridHeader read_grid_header(std::istream& is) {
  binio::expect_magic(is, "SLVG");
  const auto version = binio::read<std::uint32_t>(is, "version");
  if (version != kGridFormatVersion) {
    throw std::runtime_error("unsupported grid snapshot version " + std::to_string(version));
  }
  GridHeader h;
  h.tree.voxel_size = binio::read<double>(is, "voxel size");
  h.tree.leaf_log2 = binio::read<std::uint8_t>(is, "leaf_log2");
  h.tree.internal_log2 = binio::read<std::uint8_t>(is, "internal_log2");
  h.tag = static_cast<PayloadTag>(binio::read<std::uint8_t>(is, "payload tag"));
  h.active_count = binio::read<std::uint64_t>(is, "active count");
  h.channels = binio::read<std::uint32_t>(is, "channels");
  try {
    h.tree.validate();
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("corrupt grid snapshot: ") + e.what());
  }
  if (h.channels == 0 || h.channels > (1u << 20)) throw std::runtime_error("corrupt grid snapshot: channels");
  return h;
}

template <typename T>
[[nodiscard]] SparseGrid<T> load_grid(std::istream& is, PayloadTag expected) {
  const GridHeader h = read_grid_header(is);
  if (h.tag != expected) {
    throw std::runtime_error("grid snapshot holds payload tag " + std::to_string(static_cast<int>(h.tag)) +
                             ", expected " + std::to_string(static_cast<int>(expected)));
  }
  std::vector<T> background(h.channels);
  for (T& b : background) b = PayloadCodec<T>::read(is);
  SparseGrid<T> grid(h.tree, std::move(background));
  const auto leaves = binio::read<std::uint64_t>(is, "leaf count");
  const std::size_t words = (h.tree.leaf_volume() + 63) / 64;
  std::vector<std::uint64_t> mask(words);
  std::vector<T> values(h.channels);
  std::uint64_t active = 0;
  for (std::uint64_t n = 0; n < leaves; ++n) {
    Coord origin;
    origin.i = binio::read<std::int32_t>(is, "leaf origin");
    origin.j = binio::read<std::int32_t>(is, "leaf origin");
    origin.k = binio::read<std::int32_t>(is, "leaf origin");
    if (!(grid.leaf_origin(origin) == origin) || !in_addressable_range(origin)) {
      throw std::runtime_error("corrupt grid snapshot: misaligned leaf origin " + origin.str());
    }
    for (auto& w : mask) w = binio::read<std::uint64_t>(is, "leaf mask");
    auto& leaf = grid.leaf_for_write(origin);
    for (std::size_t w = 0; w < words; ++w) {
      std::uint64_t bits = mask[w];
      while (bits != 0) {
        const auto b = static_cast<std::uint32_t>(std::countr_zero(bits));
        bits &= bits - 1;
        const auto offset = static_cast<std::uint32_t>(w * 64 + b);
        if (offset >= h.tree.leaf_volume()) throw std::runtime_error("corrupt grid snapshot: mask bit");
        for (T& v : values) v = PayloadCodec<T>::read(is);
        auto [p, fresh] = leaf.touch(offset, values);
        if (!fresh) throw std::runtime_error("corrupt grid snapshot: duplicate leaf");
        ++active;
      }
    }
  }
  if (active != h.active_count) {
    throw std::runtime_error("corrupt grid snapshot: header declares " + std::to_string(h.active_count) +
                             " active voxels, body holds " + std::to_string(active));
  }
  return grid;
}

}  // namespace semfuse
