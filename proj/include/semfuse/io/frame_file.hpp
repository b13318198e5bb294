// Copyright 2026 The semfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include "semfuse/binary_io.hpp"
#include "semfuse/frame.hpp"

namespace semfuse::io {

/**
 * Point-cloud frame file (little-endian):
 *   "SLFR" | kind u8 (1 class id, 2 feature) | feature_dim u32 | count u64 |
 *   count records of {x, y, z f32, class u16} or {x, y, z f32, feature_dim f32}.
 * Points are in the sensor frame; the pose comes from the sequence pose file.
 */
inline void write_frame(std::ostream& os, const Frame& f) {
  binio::write_magic(os, "SLFR");
  binio::write<std::uint8_t>(os, static_cast<std::uint8_t>(f.kind));
  binio::write<std::uint32_t>(os, f.kind == PayloadKind::feature ? f.feature_dim : 0u);
  binio::write<std::uint64_t>(os, f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    for (int a = 0; a < 3; ++a) binio::write<float>(os, f.points[i][a]);
    if (f.kind == PayloadKind::class_id) {
      binio::write<std::uint16_t>(os, f.classes[i]);
    } else {
      for (float x : f.feature(i)) binio::write<float>(os, x);
    }
  }
  if (!os) throw std::runtime_error("failed writing frame");
}

[[nodiscard]] inline Frame read_frame(std::istream& is) {
  binio::expect_magic(is, "SLFR");
  Frame f;
  const auto kind = binio::read<std::uint8_t>(is, "frame kind");
  if (kind != 1 && kind != 2) throw std::runtime_error("frame file has unknown payload kind " + std::to_string(kind));
  f.kind = static_cast<PayloadKind>(kind);
  f.feature_dim = binio::read<std::uint32_t>(is, "feature dimension");
  const auto count = binio::read<std::uint64_t>(is, "point count");
  if (f.kind == PayloadKind::feature && f.feature_dim == 0) throw std::runtime_error("feature frame with dimension 0");
  if (f.kind == PayloadKind::class_id && f.feature_dim != 0) throw std::runtime_error("class frame declares features");
  // guard allocation against a corrupt count before reading the body
  const std::uint64_t record = 12 + (f.kind == PayloadKind::class_id ? 2 : 4ull * f.feature_dim);
  if (count > (std::uint64_t{1} << 40) / record) throw std::runtime_error("frame record count out of range");
  f.points.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    Vec3f p;
    for (int a = 0; a < 3; ++a) p[a] = binio::read<float>(is, "point record");
    f.points.push_back(p);
    if (f.kind == PayloadKind::class_id) {
      f.classes.push_back(binio::read<std::uint16_t>(is, "point record"));
    } else {
      for (std::uint32_t d = 0; d < f.feature_dim; ++d) f.features.push_back(binio::read<float>(is, "point record"));
    }
  }
  if (is.peek() != std::char_traits<char>::eof()) {
    throw std::runtime_error("frame file holds more records than its header declares");
  }
  return f;
}

inline void save_frame(const std::filesystem::path& path, const Frame& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_frame(os, f);
}

[[nodiscard]] inline Frame load_frame(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open frame " + path.string());
  try {
    return read_frame(is);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace semfuse::io
