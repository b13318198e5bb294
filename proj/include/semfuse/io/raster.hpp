// Copyright 2026 The semfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "semfuse/binary_io.hpp"

namespace semfuse::io {

enum class PixelType : std::uint8_t {
  u8 = 1,
  u16 = 2,
  f32 = 3,
};

/// Uncompressed row-major raster with interleaved channels.
struct Raster {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t channels = 1;
  PixelType type = PixelType::f32;
  std::vector<std::uint8_t> u8;
  std::vector<std::uint16_t> u16;
  std::vector<float> f32;

  static Raster make(std::uint32_t w, std::uint32_t h, std::uint32_t c, PixelType t) {
    Raster r;
    r.width = w;
    r.height = h;
    r.channels = c;
    r.type = t;
    const std::size_t n = r.size();
    switch (t) {
      case PixelType::u8: r.u8.assign(n, 0); break;
      case PixelType::u16: r.u16.assign(n, 0); break;
      case PixelType::f32: r.f32.assign(n, 0.0f); break;
    }
    return r;
  }

  [[nodiscard]] std::size_t size() const { return std::size_t{width} * height * channels; }
  [[nodiscard]] std::size_t index(std::uint32_t u, std::uint32_t v, std::uint32_t c = 0) const {
    return (std::size_t{v} * width + u) * channels + c;
  }

  [[nodiscard]] double value(std::uint32_t u, std::uint32_t v, std::uint32_t c = 0) const {
    const std::size_t i = index(u, v, c);
    switch (type) {
      case PixelType::u8: return u8[i];
      case PixelType::u16: return u16[i];
      case PixelType::f32: return f32[i];
    }
    return 0.0;
  }

  friend bool operator==(const Raster&, const Raster&) = default;
};

inline void write_raster(std::ostream& os, const Raster& r) {
  binio::write_magic(os, "SLIM");
  binio::write<std::uint32_t>(os, r.width);
  binio::write<std::uint32_t>(os, r.height);
  binio::write<std::uint8_t>(os, static_cast<std::uint8_t>(r.type));
  binio::write<std::uint32_t>(os, r.channels);
  switch (r.type) {
    case PixelType::u8: for (auto x : r.u8) binio::write(os, x); break;
    case PixelType::u16: for (auto x : r.u16) binio::write(os, x); break;
    case PixelType::f32: for (auto x : r.f32) binio::write(os, x); break;
  }
  if (!os) throw std::runtime_error("failed writing raster");
}

[[nodiscard]] inline Raster read_raster(std::istream& is) {
  binio::expect_magic(is, "SLIM");
  const auto w = binio::read<std::uint32_t>(is, "raster width");
  const auto h = binio::read<std::uint32_t>(is, "raster height");
  const auto t = binio::read<std::uint8_t>(is, "raster type");
  const auto c = binio::read<std::uint32_t>(is, "raster channels");
  if (t < 1 || t > 3) throw std::runtime_error("raster has unknown pixel type " + std::to_string(t));
  if (c == 0 || std::uint64_t{w} * h * c > (std::uint64_t{1} << 32)) {
    throw std::runtime_error("raster dimensions out of range");
  }
  Raster r = Raster::make(w, h, c, static_cast<PixelType>(t));
  switch (r.type) {
    case PixelType::u8: for (auto& x : r.u8) x = binio::read<std::uint8_t>(is, "raster data"); break;
    case PixelType::u16: for (auto& x : r.u16) x = binio::read<std::uint16_t>(is, "raster data"); break;
    case PixelType::f32: for (auto& x : r.f32) x = binio::read<float>(is, "raster data"); break;
  }
  return r;
}

inline void save_raster(const std::filesystem::path& path, const Raster& r) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_raster(os, r);
}

[[nodiscard]] inline Raster load_raster(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open raster " + path.string());
  return read_raster(is);
}

/// Binary PPM (P6) of an 8-bit 3-channel raster.
inline void save_ppm(const std::filesystem::path& path, const Raster& rgb) {
  if (rgb.type != PixelType::u8 || rgb.channels != 3) {
    throw std::invalid_argument("PPM output needs an 8-bit RGB raster");
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << "P6\n" << rgb.width << " " << rgb.height << "\n255\n";
  os.write(reinterpret_cast<const char*>(rgb.u8.data()), static_cast<std::streamsize>(rgb.u8.size()));
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace semfuse::io
