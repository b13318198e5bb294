// Copyright 2026 The semfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "semfuse/io/depth.hpp"
#include "semfuse/io/embeddings.hpp"
#include "semfuse/io/frame_file.hpp"
#include "semfuse/io/palette.hpp"
#include "semfuse/io/poses.hpp"
#include "semfuse/io/raster.hpp"
#include "semfuse/semantic_map.hpp"

namespace semfuse::io {

enum class SequenceKind : std::uint8_t {
  points,
  rgbd,
};

struct FrameEntry {
  std::filesystem::path primary;  // point file, or depth raster
  std::filesystem::path payload;  // label or feature raster (rgbd only)
};

/**
 * @brief A recorded sequence and its run configuration.
 *
 * INI file with sections [sequence], [camera], [fusion], [semantics]:
 *
 *   [sequence]  frames (list file), poses, kind = points | rgbd, stride
 *   [camera]    fx fy cx cy width height depth_scale
 *   [fusion]    voxel_size truncation_distance weight_fn space_carving
 *               max_range leaf_log2 internal_log2
 *   [semantics] mode num_classes prior_alpha update_rule soft_counts
 *               feature_dim prior_beta confidence_threshold lambda_floor
 *               temperature palette embeddings
 *
 * The frame list holds one frame per line: a point file, or "depth payload"
 * raster paths. Relative paths resolve against the manifest's directory.
 */
struct SequenceManifest {
  std::filesystem::path directory;
  SequenceKind kind = SequenceKind::points;
  std::vector<FrameEntry> frames;
  std::filesystem::path poses;
  std::optional<CameraIntrinsics> camera;
  std::uint32_t stride = 1;
  MapConfig map;
  std::filesystem::path palette;
  std::filesystem::path embeddings;
};

namespace detail {

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
  std::istringstream ss(text);
  T v{};
  if constexpr (std::is_same_v<T, bool>) {
    std::string s;
    ss >> s;
    if (s == "true" || s == "1" || s == "on" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "off" || s == "no") return false;
    throw std::invalid_argument(key + ": expected a boolean, got '" + text + "'");
  } else {
    if (!(ss >> v)) throw std::invalid_argument(key + ": cannot parse '" + text + "'");
    std::string rest;
    if (ss >> rest) throw std::invalid_argument(key + ": trailing text in '" + text + "'");
    return v;
  }
}

}  // namespace detail

/// Applies one dotted "section.key" setting. Returns false for unknown keys.
inline bool apply_setting(SequenceManifest& m, const std::string& key, const std::string& value) {
  using detail::parse_value;
  MapConfig& c = m.map;
  auto cam = [&]() -> CameraIntrinsics& {
    if (!m.camera) m.camera = CameraIntrinsics{};
    return *m.camera;
  };
  if (key == "sequence.kind") {
    if (value == "points") m.kind = SequenceKind::points;
    else if (value == "rgbd") m.kind = SequenceKind::rgbd;
    else throw std::invalid_argument("sequence.kind must be points or rgbd");
  } else if (key == "sequence.stride") {
    const auto s = parse_value<long>(key, value);
    if (s < 1) throw std::invalid_argument("sequence.stride must be >= 1");
    m.stride = static_cast<std::uint32_t>(s);
  } else if (key == "sequence.poses") {
    m.poses = value;
  } else if (key == "camera.fx") cam().fx = parse_value<double>(key, value);
  else if (key == "camera.fy") cam().fy = parse_value<double>(key, value);
  else if (key == "camera.cx") cam().cx = parse_value<double>(key, value);
  else if (key == "camera.cy") cam().cy = parse_value<double>(key, value);
  else if (key == "camera.width") cam().width = parse_value<std::uint32_t>(key, value);
  else if (key == "camera.height") cam().height = parse_value<std::uint32_t>(key, value);
  else if (key == "camera.depth_scale") cam().depth_scale = parse_value<double>(key, value);
  else if (key == "fusion.voxel_size") c.fusion.voxel_size = parse_value<double>(key, value);
  else if (key == "fusion.truncation_distance") c.fusion.truncation_distance = parse_value<double>(key, value);
  else if (key == "fusion.weight_fn") c.fusion.weight_fn = parse_weight_function(value);
  else if (key == "fusion.space_carving") c.fusion.space_carving = parse_value<bool>(key, value);
  else if (key == "fusion.max_range") c.fusion.max_range = parse_value<double>(key, value);
  else if (key == "fusion.leaf_log2") c.leaf_log2 = parse_value<int>(key, value);
  else if (key == "fusion.internal_log2") c.internal_log2 = parse_value<int>(key, value);
  else if (key == "semantics.mode") c.mode = parse_semantic_mode(value);
  else if (key == "semantics.num_classes") c.closed.num_classes = parse_value<int>(key, value);
  else if (key == "semantics.prior_alpha") c.closed.prior_alpha = parse_value<double>(key, value);
  else if (key == "semantics.update_rule") c.closed.update_rule = parse_update_rule(value);
  else if (key == "semantics.soft_counts") c.closed.soft_counts = parse_value<bool>(key, value);
  else if (key == "semantics.feature_dim") c.open.feature_dim = parse_value<int>(key, value);
  else if (key == "semantics.prior_beta") c.open.prior_beta = parse_value<double>(key, value);
  else if (key == "semantics.confidence_threshold") c.open.confidence_threshold = parse_value<double>(key, value);
  else if (key == "semantics.lambda_floor") c.open.lambda_floor = parse_value<double>(key, value);
  else if (key == "semantics.temperature") c.open.temperature = parse_value<double>(key, value);
  else if (key == "semantics.palette") m.palette = value;
  else if (key == "semantics.embeddings") m.embeddings = value;
  else return false;
  return true;
}

[[nodiscard]] inline std::filesystem::path resolve(const std::filesystem::path& dir, const std::filesystem::path& p) {
  return p.empty() || p.is_absolute() ? p : dir / p;
}

[[nodiscard]] inline std::vector<FrameEntry> read_frame_list(const std::filesystem::path& path, SequenceKind kind,
                                                             const std::filesystem::path& dir) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open frame list " + path.string());
  std::vector<FrameEntry> frames;
  std::string line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::vector<std::string> fields;
    for (std::string f; ss >> f;) fields.push_back(f);
    if (fields.empty()) continue;
    const std::size_t expected = kind == SequenceKind::points ? 1 : 2;
    if (fields.size() != expected) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(number) + ": expected " +
                                  std::to_string(expected) + " path(s), found " + std::to_string(fields.size()));
    }
    FrameEntry e{resolve(dir, fields[0]), fields.size() > 1 ? resolve(dir, fields[1]) : std::filesystem::path{}};
    frames.push_back(std::move(e));
  }
  return frames;
}

/// Parses and validates a manifest: configuration ranges, file existence,
/// and that the pose file has at least one pose per frame.
[[nodiscard]] inline SequenceManifest load_manifest(const std::filesystem::path& path) {
  namespace pt = boost::property_tree;
  if (!std::filesystem::exists(path)) throw std::runtime_error("manifest not found: " + path.string());
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw std::invalid_argument(std::string("malformed manifest: ") + e.what());
  }
  SequenceManifest m;
  m.directory = std::filesystem::absolute(path).parent_path();
  std::string frame_list;
  for (const auto& [section, keys] : tree) {
    if (section != "sequence" && section != "camera" && section != "fusion" && section != "semantics") {
      throw std::invalid_argument("manifest: unknown section [" + section + "]");
    }
    for (const auto& [key, node] : keys) {
      const std::string dotted = section + "." + key;
      const std::string value = node.get_value<std::string>();
      if (dotted == "sequence.frames") {
        frame_list = value;
      } else if (!apply_setting(m, dotted, value)) {
        throw std::invalid_argument("manifest: unknown key " + dotted);
      }
    }
  }
  if (frame_list.empty()) throw std::invalid_argument("manifest: missing sequence.frames");
  if (m.poses.empty()) throw std::invalid_argument("manifest: missing sequence.poses");
  m.poses = resolve(m.directory, m.poses);
  m.palette = resolve(m.directory, m.palette);
  m.embeddings = resolve(m.directory, m.embeddings);
  m.frames = read_frame_list(resolve(m.directory, frame_list), m.kind, m.directory);
  return m;
}

/// Checks configuration and that every referenced file exists.
inline void validate_manifest(const SequenceManifest& m) {
  m.map.validate();
  if (m.kind == SequenceKind::rgbd) {
    if (!m.camera) throw std::invalid_argument("rgbd sequence needs a [camera] section");
    m.camera->validate();
  }
  auto require = [](const std::filesystem::path& p, const std::string& what) {
    if (!std::filesystem::exists(p)) throw std::runtime_error(what + " not found: " + p.string());
  };
  require(m.poses, "pose file");
  if (!m.palette.empty()) require(m.palette, "palette");
  if (!m.embeddings.empty()) require(m.embeddings, "embedding file");
  for (const auto& f : m.frames) {
    require(f.primary, "frame file");
    if (m.kind == SequenceKind::rgbd) require(f.payload, "payload raster");
  }
}

/// Loads a whole sequence's poses and checks there is one per frame.
[[nodiscard]] inline std::vector<Pose> load_sequence_poses(const SequenceManifest& m) {
  auto poses = load_poses(m.poses);
  if (poses.size() < m.frames.size()) {
    throw std::invalid_argument("pose file has " + std::to_string(poses.size()) + " poses for " +
                                std::to_string(m.frames.size()) + " frames");
  }
  return poses;
}

/// Reads frame `index` in sensor coordinates and attaches its pose.
[[nodiscard]] inline Frame load_sequence_frame(const SequenceManifest& m, std::size_t index, const Pose& pose,
                                               std::uint32_t stride) {
  const FrameEntry& e = m.frames.at(index);
  Frame f;
  if (m.kind == SequenceKind::points) {
    f = load_frame(e.primary);
  } else {
    const Raster depth = load_raster(e.primary);
    const Raster payload = load_raster(e.payload);
    f = project_depth(depth, payload, *m.camera, stride);
  }
  f.pose = pose;
  return f;
}

inline void save_manifest(const std::filesystem::path& path, const SequenceManifest& m,
                          const std::string& frame_list_name) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  const MapConfig& c = m.map;
  os << std::setprecision(17);
  os << "[sequence]\n"
     << "frames = " << frame_list_name << "\n"
     << "poses = " << m.poses.string() << "\n"
     << "kind = " << (m.kind == SequenceKind::points ? "points" : "rgbd") << "\n"
     << "stride = " << m.stride << "\n\n";
  if (m.camera) {
    const auto& k = *m.camera;
    os << "[camera]\n"
       << "fx = " << k.fx << "\nfy = " << k.fy << "\ncx = " << k.cx << "\ncy = " << k.cy << "\n"
       << "width = " << k.width << "\nheight = " << k.height << "\ndepth_scale = " << k.depth_scale << "\n\n";
  }
  os << "[fusion]\n"
     << "voxel_size = " << c.fusion.voxel_size << "\n"
     << "truncation_distance = " << c.fusion.truncation_distance << "\n"
     << "weight_fn = " << to_string(c.fusion.weight_fn) << "\n"
     << "space_carving = " << (c.fusion.space_carving ? "true" : "false") << "\n"
     << "max_range = " << c.fusion.max_range << "\n"
     << "leaf_log2 = " << c.leaf_log2 << "\n"
     << "internal_log2 = " << c.internal_log2 << "\n\n";
  os << "[semantics]\n"
     << "mode = " << to_string(c.mode) << "\n"
     << "num_classes = " << c.closed.num_classes << "\n"
     << "prior_alpha = " << c.closed.prior_alpha << "\n"
     << "update_rule = " << to_string(c.closed.update_rule) << "\n"
     << "soft_counts = " << (c.closed.soft_counts ? "true" : "false") << "\n"
     << "feature_dim = " << c.open.feature_dim << "\n"
     << "prior_beta = " << c.open.prior_beta << "\n"
     << "confidence_threshold = " << c.open.confidence_threshold << "\n"
     << "lambda_floor = " << c.open.lambda_floor << "\n"
     << "temperature = " << c.open.temperature << "\n";
  if (!m.palette.empty()) os << "palette = " << m.palette.string() << "\n";
  if (!m.embeddings.empty()) os << "embeddings = " << m.embeddings.string() << "\n";
}

}  // namespace semfuse::io
