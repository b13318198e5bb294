// Copyright 2026 The semfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "semfuse/coord.hpp"
#include "semfuse/labels.hpp"
#include "semfuse/sparse_grid.hpp"

namespace semfuse {

/// Counts indexed [truth][prediction], row and column 0 being unlabeled.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int num_classes)
      : k_(num_classes), counts_(static_cast<std::size_t>(num_classes + 1) * static_cast<std::size_t>(num_classes + 1), 0) {
    if (num_classes < 1) throw std::invalid_argument("confusion matrix needs at least one class");
  }

  void add(ClassId truth, ClassId pred, std::uint64_t n = 1) {
    if (truth > k_ || pred > k_) throw std::out_of_range("class id exceeds confusion matrix size");
    counts_[index(truth, pred)] += n;
  }

  [[nodiscard]] int num_classes() const { return k_; }
  [[nodiscard]] std::uint64_t count(ClassId truth, ClassId pred) const { return counts_[index(truth, pred)]; }

  /// TP / (TP + FP + FN); empty when the class is absent from both sides.
  [[nodiscard]] std::optional<double> iou(ClassId c) const {
    const std::uint64_t tp = count(c, c);
    std::uint64_t fp = 0, fn = 0;
    for (int o = 0; o <= k_; ++o) {
      if (o == c) continue;
      fp += count(static_cast<ClassId>(o), c);
      fn += count(c, static_cast<ClassId>(o));
    }
    const std::uint64_t denom = tp + fp + fn;
    if (denom == 0) return std::nullopt;
    return static_cast<double>(tp) / static_cast<double>(denom);
  }

  /// Mean IoU over classes present in truth or prediction; 0 when none are.
  [[nodiscard]] double miou() const {
    double sum = 0.0;
    int n = 0;
    for (int c = 1; c <= k_; ++c) {
      if (const auto v = iou(static_cast<ClassId>(c))) {
        sum += *v;
        ++n;
      }
    }
    return n > 0 ? sum / n : 0.0;
  }

  [[nodiscard]] std::uint64_t total() const {
    std::uint64_t s = 0;
    for (auto v : counts_) s += v;
    return s;
  }

 private:
  [[nodiscard]] std::size_t index(ClassId truth, ClassId pred) const {
    return static_cast<std::size_t>(truth) * static_cast<std::size_t>(k_ + 1) + pred;
  }

  int k_;
  std::vector<std::uint64_t> counts_;
};

/**
 * @brief Voxel-wise confusion over the union of both grids' active voxels. A
 * voxel missing from one grid counts as unlabeled there, so an unlabeled or
 * missing prediction is a false negative and an extra prediction a false
 * positive. `num_classes` 0 sizes the matrix from the largest id seen.
 */
[[nodiscard]] inline ConfusionMatrix miou(const SparseGrid<ClassId>& pred, const SparseGrid<ClassId>& truth,
                                          int num_classes = 0) {
  if (pred.voxel_size() != truth.voxel_size()) {
    throw std::invalid_argument("voxel size mismatch: prediction " + std::to_string(pred.voxel_size()) +
                                " m, truth " + std::to_string(truth.voxel_size()) + " m");
  }
  if (num_classes <= 0) {
    ClassId hi = 1;
    pred.for_each_value([&](const Coord&, ClassId z) { hi = std::max(hi, z); });
    truth.for_each_value([&](const Coord&, ClassId z) { hi = std::max(hi, z); });
    num_classes = hi;
  }
  ConfusionMatrix cm(num_classes);
  auto truth_acc = truth.const_accessor();
  auto pred_acc = pred.const_accessor();
  pred.for_each_value([&](const Coord& c, ClassId z) {
    const ClassId* t = truth_acc.find(c);
    cm.add(t ? *t : kUnlabeled, z);
  });
  truth.for_each_value([&](const Coord& c, ClassId t) {
    if (!pred_acc.find(c)) cm.add(t, kUnlabeled);
  });
  return cm;
}

/// Exact nearest-neighbor queries by grid bucketing with expanding shells.
class PointIndex {
 public:
  explicit PointIndex(std::span<const Vec3d> points) : points_(points.begin(), points.end()) {
    if (points_.empty()) throw std::invalid_argument("point set is empty");
    Vec3d lo = points_[0], hi = points_[0];
    for (const Vec3d& p : points_) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    const double extent = (hi - lo).maxCoeff();
    // about two points per occupied cell for surface-like sets
    cell_ = extent > 0.0 ? extent / std::max(1.0, std::sqrt(static_cast<double>(points_.size()) / 2.0)) : 1.0;
    lo_cell_ = key(lo);
    hi_cell_ = key(hi);
    for (std::uint32_t i = 0; i < points_.size(); ++i) cells_[key(points_[i])].push_back(i);
  }

  /// Squared distance to the nearest indexed point.
  [[nodiscard]] double nearest_squared(const Vec3d& q) const {
    const Coord qc = key(q);
    double best = std::numeric_limits<double>::infinity();
    std::int64_t max_ring = 0;
    for (int a = 0; a < 3; ++a) {
      max_ring = std::max<std::int64_t>(
          max_ring, std::max<std::int64_t>(std::int64_t{hi_cell_[a]} - qc[a], std::int64_t{qc[a]} - lo_cell_[a]));
    }
    for (std::int64_t r = 0; r <= max_ring; ++r) {
      visit_ring(qc, static_cast<std::int32_t>(r), [&](const std::vector<std::uint32_t>& ids) {
        for (std::uint32_t i : ids) best = std::min(best, (points_[i] - q).squaredNorm());
      });
      // every cell beyond ring r lies at least r cells away
      const double reach = static_cast<double>(r) * cell_;
      if (best <= reach * reach) break;
    }
    return best;
  }

 private:
  [[nodiscard]] Coord key(const Vec3d& p) const {
    return {static_cast<std::int32_t>(std::floor(p.x() / cell_)), static_cast<std::int32_t>(std::floor(p.y() / cell_)),
            static_cast<std::int32_t>(std::floor(p.z() / cell_))};
  }

  template <typename F>
  void visit_ring(const Coord& c, std::int32_t r, F&& f) const {
    for (std::int32_t dz = -r; dz <= r; ++dz) {
      for (std::int32_t dy = -r; dy <= r; ++dy) {
        const bool face = std::abs(dz) == r || std::abs(dy) == r;
        for (std::int32_t dx = -r; dx <= r; dx += (face || r == 0) ? 1 : 2 * r) {
          const auto it = cells_.find(c + Coord{dx, dy, dz});
          if (it != cells_.end()) f(it->second);
        }
      }
    }
  }

  std::vector<Vec3d> points_;
  double cell_ = 1.0;
  Coord lo_cell_, hi_cell_;
  std::unordered_map<Coord, std::vector<std::uint32_t>, CoordHash> cells_;
};

/// Mean squared distance from each point of `a` to its nearest point in `b`.
[[nodiscard]] inline double mean_nearest_squared(std::span<const Vec3d> a, const PointIndex& b) {
  double sum = 0.0;
  for (const Vec3d& p : a) sum += b.nearest_squared(p);
  return sum / static_cast<double>(a.size());
}

/// Symmetric L2 Chamfer distance: the average of both directed mean squared
/// nearest-neighbor distances (m^2).
[[nodiscard]] inline double chamfer_l2(std::span<const Vec3d> a, std::span<const Vec3d> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("chamfer distance needs two non-empty point sets");
  const PointIndex ia(a), ib(b);
  return 0.5 * (mean_nearest_squared(a, ib) + mean_nearest_squared(b, ia));
}

}  // namespace semfuse
