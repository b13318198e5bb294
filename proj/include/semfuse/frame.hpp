// Copyright 2026 The semfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "semfuse/coord.hpp"
#include "semfuse/labels.hpp"

namespace semfuse {

using Pose = Eigen::Matrix4d;

/// What each point of a frame carries.
enum class PayloadKind : std::uint8_t {
  class_id = 1,
  feature = 2,
};

[[nodiscard]] inline std::string to_string(PayloadKind k) {
  return k == PayloadKind::class_id ? "class_id" : "feature";
}

/// Largest deviation of R^T R from the identity (max-abs entry).
[[nodiscard]] inline double orthonormality_error(const Eigen::Matrix3d& r) {
  return (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
}

/// Throws std::invalid_argument unless `pose` is a rigid transform with a
/// rotation block orthonormal within `tolerance`.
inline void validate_pose(const Pose& pose, double tolerance = 1e-6) {
  if (!pose.allFinite()) throw std::invalid_argument("pose has non-finite entries");
  if (pose(3, 0) != 0.0 || pose(3, 1) != 0.0 || pose(3, 2) != 0.0 || pose(3, 3) != 1.0) {
    throw std::invalid_argument("pose bottom row must be 0 0 0 1");
  }
  const Eigen::Matrix3d r = pose.topLeftCorner<3, 3>();
  const double err = orthonormality_error(r);
  if (err > tolerance) {
    throw std::invalid_argument("pose rotation is not orthonormal (error " + std::to_string(err) + ")");
  }
  if (r.determinant() < 0.0) throw std::invalid_argument("pose rotation is a reflection");
}

/// Camera-to-world pose looking from `eye` at `target`: x right, y down,
/// z forward.
[[nodiscard]] inline Pose look_at(const Vec3d& eye, const Vec3d& target, const Vec3d& up = Vec3d::UnitZ()) {
  const Vec3d z = (target - eye).normalized();
  Vec3d x = z.cross(up);
  if (x.norm() < 1e-9) x = z.cross(Vec3d::UnitX().cross(z).norm() > 1e-9 ? Vec3d::UnitX() : Vec3d::UnitY());
  x.normalize();
  const Vec3d y = z.cross(x);
  Pose pose = Pose::Identity();
  pose.block<3, 1>(0, 0) = x;
  pose.block<3, 1>(0, 1) = y;
  pose.block<3, 1>(0, 2) = z;
  pose.block<3, 1>(0, 3) = eye;
  return pose;
}

/**
 * @brief One sensor observation: points in the sensor frame, one semantic
 * payload per point, and the sensor-to-world pose.
 *
 * Class payloads use 0 for "no label": the point still updates geometry.
 */
struct Frame {
  std::vector<Vec3f> points;
  PayloadKind kind = PayloadKind::class_id;
  std::vector<ClassId> classes;  // kind == class_id
  std::uint32_t feature_dim = 0;
  std::vector<float> features;  // kind == feature, points.size() x feature_dim
  Pose pose = Pose::Identity();

  [[nodiscard]] std::size_t size() const { return points.size(); }
  [[nodiscard]] bool empty() const { return points.empty(); }
  [[nodiscard]] Eigen::Vector3d origin() const { return pose.topRightCorner<3, 1>(); }

  [[nodiscard]] std::span<const float> feature(std::size_t i) const {
    return {features.data() + i * feature_dim, feature_dim};
  }

  void validate() const {
    if (kind == PayloadKind::class_id) {
      if (classes.size() != points.size()) {
        throw std::invalid_argument("frame has " + std::to_string(points.size()) + " points but " +
                                    std::to_string(classes.size()) + " class labels");
      }
    } else {
      if (feature_dim == 0) throw std::invalid_argument("feature frame with zero feature dimension");
      if (features.size() != points.size() * feature_dim) {
        throw std::invalid_argument("frame feature block does not match point count x dimension");
      }
    }
    validate_pose(pose);
  }
};

}  // namespace semfuse
