// Copyright 2026 The semfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include "semfuse/binary_io.hpp"
#include "semfuse/gaussian.hpp"

namespace semfuse::io {

/**
 * Label embedding file (little-endian):
 *   "SLEM" | dim u32 | count u32 | count x (name length u32, UTF-8 name,
 *   dim x f32).
 */
inline void write_embeddings(std::ostream& os, const EmbeddingSet& set) {
  binio::write_magic(os, "SLEM");
  binio::write<std::uint32_t>(os, set.dim);
  binio::write<std::uint32_t>(os, static_cast<std::uint32_t>(set.size()));
  for (std::size_t i = 0; i < set.size(); ++i) {
    binio::write<std::uint32_t>(os, static_cast<std::uint32_t>(set.names[i].size()));
    os.write(set.names[i].data(), static_cast<std::streamsize>(set.names[i].size()));
    for (float x : set.row(i)) binio::write<float>(os, x);
  }
  if (!os) throw std::runtime_error("failed writing embeddings");
}

[[nodiscard]] inline EmbeddingSet read_embeddings(std::istream& is) {
  binio::expect_magic(is, "SLEM");
  EmbeddingSet set;
  set.dim = binio::read<std::uint32_t>(is, "embedding dimension");
  const auto count = binio::read<std::uint32_t>(is, "embedding count");
  if (set.dim == 0) throw std::runtime_error("embedding dimension is zero");
  std::vector<float> row(set.dim);
  for (std::uint32_t n = 0; n < count; ++n) {
    const auto len = binio::read<std::uint32_t>(is, "name length");
    if (len > 4096) throw std::runtime_error("embedding name too long");
    std::string name(len, '\0');
    if (!is.read(name.data(), len)) throw std::runtime_error("truncated input while reading embedding name");
    for (float& x : row) x = binio::read<float>(is, "embedding values");
    set.add(std::move(name), row);
  }
  return set;
}

inline void save_embeddings(const std::filesystem::path& path, const EmbeddingSet& set) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_embeddings(os, set);
}

[[nodiscard]] inline EmbeddingSet load_embeddings(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open embeddings " + path.string());
  try {
    return read_embeddings(is);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace semfuse::io
