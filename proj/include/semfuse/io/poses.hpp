// Copyright 2026 The semfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "semfuse/frame.hpp"

namespace semfuse::io {

inline constexpr double kPoseExactTolerance = 1e-4;
inline constexpr double kPoseRepairTolerance = 1e-3;

/// Parses one row of 12 numbers (row-major 3x4). Rotations off by more than
/// 1e-4 but within 1e-3 are projected to the nearest rotation (polar factor).
[[nodiscard]] inline Pose parse_pose_row(const std::string& line) {
  std::istringstream ss(line);
  Pose p = Pose::Identity();
  for (int n = 0; n < 12; ++n) {
    double x;
    if (!(ss >> x)) throw std::invalid_argument("expected 12 numbers, found " + std::to_string(n));
    p(n / 4, n % 4) = x;
  }
  std::string extra;
  if (ss >> extra) throw std::invalid_argument("trailing data '" + extra + "'");
  if (!p.allFinite()) throw std::invalid_argument("non-finite pose entry");
  Eigen::Matrix3d r = p.topLeftCorner<3, 3>();
  if (r.determinant() <= 0.0) throw std::invalid_argument("rotation has non-positive determinant");
  const double err = orthonormality_error(r);
  if (err > kPoseRepairTolerance) {
    throw std::invalid_argument("rotation is not orthonormal (error " + std::to_string(err) + ")");
  }
  if (err > kPoseExactTolerance) {
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
    p.topLeftCorner<3, 3>() = svd.matrixU() * svd.matrixV().transpose();
  }
  return p;
}

[[nodiscard]] inline std::vector<Pose> read_poses(std::istream& is, const std::string& source = "poses") {
  std::vector<Pose> poses;
  std::string line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      poses.push_back(parse_pose_row(line));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(source + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return poses;
}

[[nodiscard]] inline std::vector<Pose> load_poses(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open pose file " + path.string());
  return read_poses(is, path.string());
}

inline void write_poses(std::ostream& os, const std::vector<Pose>& poses) {
  os << std::setprecision(17);
  for (const Pose& p : poses) {
    for (int n = 0; n < 12; ++n) os << (n ? " " : "") << p(n / 4, n % 4);
    os << "\n";
  }
}

inline void save_poses(const std::filesystem::path& path, const std::vector<Pose>& poses) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_poses(os, poses);
}

}  // namespace semfuse::io
