// Copyright 2026 The semfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "semfuse/labels.hpp"

namespace semfuse::io {

using Rgb = std::array<std::uint8_t, 3>;

inline constexpr Rgb kBackgroundColor{0, 0, 0};
inline constexpr Rgb kUncertainColor{128, 128, 128};

struct PaletteEntry {
  ClassId id = 0;
  std::string name;
  Rgb color{};
};

/// Class palette: text lines "id,name,r,g,b"; '#' starts a comment.
class Palette {
 public:
  Palette() = default;
  explicit Palette(std::vector<PaletteEntry> entries) : entries_(std::move(entries)) {
    for (const auto& e : entries_) {
      if (e.id == kUnlabeled) throw std::invalid_argument("palette id 0 is reserved for unlabeled");
      for (const auto& o : entries_) {
        if (&o != &e && o.id == e.id) throw std::invalid_argument("duplicate palette id " + std::to_string(e.id));
      }
    }
  }

  [[nodiscard]] const std::vector<PaletteEntry>& entries() const { return entries_; }
  [[nodiscard]] std::size_t size() const { return entries_.size(); }

  /// Color of a class; unlabeled voxels are gray.
  [[nodiscard]] Rgb color(ClassId id) const {
    if (id == kUnlabeled) return kUncertainColor;
    for (const auto& e : entries_) {
      if (e.id == id) return e.color;
    }
    return kUncertainColor;
  }

  [[nodiscard]] std::string name(ClassId id) const {
    for (const auto& e : entries_) {
      if (e.id == id) return e.name;
    }
    return id == kUnlabeled ? "unlabeled" : "class_" + std::to_string(id);
  }

  /// Names ordered by id 1..max, for building standard-basis embeddings.
  [[nodiscard]] std::vector<std::string> names_by_id(std::size_t k) const {
    std::vector<std::string> out;
    for (std::size_t c = 1; c <= k; ++c) out.push_back(name(static_cast<ClassId>(c)));
    return out;
  }

  /// Evenly spread hues for k classes.
  [[nodiscard]] static Palette generated(const std::vector<std::string>& names) {
    std::vector<PaletteEntry> entries;
    for (std::size_t c = 0; c < names.size(); ++c) {
      const double h = 6.0 * static_cast<double>(c) / static_cast<double>(names.size());
      const int sector = static_cast<int>(h);
      const double f = h - sector;
      const auto up = static_cast<std::uint8_t>(40 + 215 * f);
      const auto down = static_cast<std::uint8_t>(255 - 215 * f);
      static constexpr std::uint8_t hi = 255;
      static constexpr std::uint8_t lo = 40;
      Rgb rgb;
      switch (sector % 6) {
        case 0: rgb = {hi, up, lo}; break;
        case 1: rgb = {down, hi, lo}; break;
        case 2: rgb = {lo, hi, up}; break;
        case 3: rgb = {lo, down, hi}; break;
        case 4: rgb = {up, lo, hi}; break;
        default: rgb = {hi, lo, down}; break;
      }
      entries.push_back({static_cast<ClassId>(c + 1), names[c], rgb});
    }
    return Palette(std::move(entries));
  }

 private:
  std::vector<PaletteEntry> entries_;
};

[[nodiscard]] inline Palette read_palette(std::istream& is, const std::string& source = "palette") {
  std::vector<PaletteEntry> entries;
  std::string line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    auto fail = [&](const std::string& why) {
      throw std::invalid_argument(source + ":" + std::to_string(number) + ": " + why);
    };
    if (fields.size() != 5) fail("expected id,name,r,g,b");
    auto number_in = [&](const std::string& s, long lo, long hi) {
      std::size_t used = 0;
      long v = 0;
      try {
        v = std::stol(s, &used);
      } catch (const std::exception&) {
        fail("not an integer: '" + s + "'");
      }
      if (s.find_first_not_of(" \t\r", used) != std::string::npos || v < lo || v > hi) {
        fail("value out of range: '" + s + "'");
      }
      return v;
    };
    PaletteEntry e;
    e.id = static_cast<ClassId>(number_in(fields[0], 1, 65535));
    e.name = fields[1];
    e.name.erase(0, e.name.find_first_not_of(' '));
    e.name.erase(e.name.find_last_not_of(" \r") + 1);
    for (int c = 0; c < 3; ++c) e.color[c] = static_cast<std::uint8_t>(number_in(fields[2 + c], 0, 255));
    entries.push_back(e);
  }
  try {
    return Palette(std::move(entries));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(source + ": " + e.what());
  }
}

[[nodiscard]] inline Palette load_palette(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open palette " + path.string());
  return read_palette(is, path.string());
}

inline void save_palette(const std::filesystem::path& path, const Palette& p) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (const auto& e : p.entries()) {
    os << e.id << "," << e.name << "," << int(e.color[0]) << "," << int(e.color[1]) << "," << int(e.color[2]) << "\n";
  }
}

}  // namespace semfuse::io
