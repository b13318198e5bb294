// Copyright 2026 The semfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "semfuse/binary_io.hpp"
#include "semfuse/dirichlet.hpp"
#include "semfuse/frame.hpp"
#include "semfuse/gaussian.hpp"
#include "semfuse/grid_io.hpp"
#include "semfuse/labels.hpp"
#include "semfuse/parallel.hpp"
#include "semfuse/raycast.hpp"
#include "semfuse/sparse_grid.hpp"
#include "semfuse/tsdf.hpp"

namespace semfuse {

enum class SemanticMode : std::uint8_t {
  closed = 1,
  open = 2,
};

[[nodiscard]] inline std::string to_string(SemanticMode m) { return m == SemanticMode::closed ? "closed" : "open"; }

[[nodiscard]] inline SemanticMode parse_semantic_mode(const std::string& s) {
  if (s == "closed") return SemanticMode::closed;
  if (s == "open") return SemanticMode::open;
  throw std::invalid_argument("unknown semantic mode '" + s + "' (expected closed or open)");
}

struct MapConfig {
  FusionConfig fusion;
  int leaf_log2 = 3;
  int internal_log2 = 4;
  SemanticMode mode = SemanticMode::closed;
  ClosedSetConfig closed;
  OpenSetConfig open;

  [[nodiscard]] TreeConfig tree() const { return {leaf_log2, internal_log2, fusion.voxel_size}; }

  [[nodiscard]] std::uint32_t semantic_channels() const {
    return mode == SemanticMode::closed ? static_cast<std::uint32_t>(closed.num_classes)
                                        : 2u * static_cast<std::uint32_t>(open.feature_dim);
  }

  void validate() const {
    fusion.validate();
    tree().validate();
    if (mode == SemanticMode::closed) {
      closed.validate();
    } else {
      open.validate();
    }
  }
};

struct IntegrationReport {
  std::size_t frames = 0;
  std::size_t points = 0;
  std::size_t skipped_nonfinite = 0;
  std::size_t dropped_range = 0;
  std::size_t degenerate = 0;
  std::size_t dropped_features = 0;
  std::size_t touched_voxels = 0;  // voxel updates, one per (ray, band voxel)
  double raycast_ms = 0.0;
  double update_ms = 0.0;
  double total_ms = 0.0;

  IntegrationReport& operator+=(const IntegrationReport& o) {
    frames += o.frames;
    points += o.points;
    skipped_nonfinite += o.skipped_nonfinite;
    dropped_range += o.dropped_range;
    degenerate += o.degenerate;
    dropped_features += o.dropped_features;
    touched_voxels += o.touched_voxels;
    raycast_ms += o.raycast_ms;
    update_ms += o.update_ms;
    total_ms += o.total_ms;
    return *this;
  }
};

struct BridgeReport {
  double ratio = 0.0;
  std::size_t co_active = 0;
  std::size_t agree = 0;
  std::size_t closed_only = 0;
  std::size_t open_only = 0;
};

/**
 * @brief TSDF grid plus one semantic layer on the same tree layout.
 *
 * Closed mode stores per-class evidence counts (k floats; the concentration
 * is prior_alpha + evidence). Open mode stores [mean..., beta...] (2l floats);
 * lambda and 2 nu are taken from the voxel's TSDF weight.
 *
 * Integration is two-phase: rays are traversed in parallel into hit lists
 * bucketed by leaf owner, then each owner applies its hits in point order.
 * Every voxel sees the same update sequence for any worker count, so results
 * are bit-identical to the single-worker run.
 */
class SemanticMap {
 public:
  using TsdfGrid = SparseGrid<TsdfVoxel>;
  using SemanticGrid = SparseGrid<float>;

  explicit SemanticMap(const MapConfig& cfg)
      : cfg_(validated(cfg)),
        tsdf_(cfg_.tree(), tsdf_background(cfg_.fusion)),
        semantic_(cfg_.tree(), semantic_background(cfg_)) {}

  SemanticMap(const MapConfig& cfg, TsdfGrid tsdf, SemanticGrid semantic)
      : cfg_(validated(cfg)), tsdf_(std::move(tsdf)), semantic_(std::move(semantic)) {
    if (!(tsdf_.config() == cfg_.tree()) || !(semantic_.config() == cfg_.tree())) {
      throw std::runtime_error("grid layout does not match map configuration");
    }
    if (semantic_.channels() != cfg_.semantic_channels()) {
      throw std::runtime_error("semantic grid has " + std::to_string(semantic_.channels()) +
                               " channels, configuration needs " + std::to_string(cfg_.semantic_channels()));
    }
  }

  [[nodiscard]] const MapConfig& config() const { return cfg_; }
  [[nodiscard]] SemanticMode mode() const { return cfg_.mode; }
  [[nodiscard]] const TsdfGrid& tsdf() const { return tsdf_; }
  [[nodiscard]] TsdfGrid& tsdf() { return tsdf_; }
  [[nodiscard]] const SemanticGrid& semantics() const { return semantic_; }
  [[nodiscard]] SemanticGrid& semantics() { return semantic_; }

  [[nodiscard]] static std::vector<float> semantic_background(const MapConfig& cfg) {
    if (cfg.mode == SemanticMode::closed) {
      return std::vector<float>(static_cast<std::size_t>(cfg.closed.num_classes), 0.0f);
    }
    const auto l = static_cast<std::size_t>(cfg.open.feature_dim);
    std::vector<float> bg(2 * l, 0.0f);
    std::fill(bg.begin() + static_cast<std::ptrdiff_t>(l), bg.end(), static_cast<float>(cfg.open.prior_beta));
    return bg;
  }

  /// Throws std::invalid_argument if the frame cannot be fused into this map.
  void check_frame(const Frame& frame) const {
    frame.validate();
    if (cfg_.mode == SemanticMode::closed) {
      const bool soft = cfg_.closed.soft_counts && frame.kind == PayloadKind::feature &&
                        frame.feature_dim == static_cast<std::uint32_t>(cfg_.closed.num_classes);
      if (frame.kind != PayloadKind::class_id && !soft) {
        throw std::invalid_argument("payload kind mismatch: closed-set map received " + to_string(frame.kind) +
                                    " payloads");
      }
      if (frame.kind == PayloadKind::class_id) {
        for (ClassId z : frame.classes) {
          if (z > cfg_.closed.num_classes) {
            throw std::invalid_argument("class id " + std::to_string(z) + " exceeds num_classes " +
                                        std::to_string(cfg_.closed.num_classes));
          }
        }
      }
    } else {
      if (frame.kind != PayloadKind::feature) {
        throw std::invalid_argument("payload kind mismatch: open-set map received class_id payloads");
      }
      if (frame.feature_dim != static_cast<std::uint32_t>(cfg_.open.feature_dim)) {
        throw std::invalid_argument("feature dimension mismatch: map expects " +
                                    std::to_string(cfg_.open.feature_dim) + ", frame has " +
                                    std::to_string(frame.feature_dim));
      }
    }
  }

  /// Fuses one frame. `workers` > 1 enables leaf-partitioned parallelism.
  IntegrationReport integrate(const Frame& frame, std::size_t workers = 1) {
    using Clock = std::chrono::steady_clock;
    const auto t_start = Clock::now();
    check_frame(frame);
    workers = std::max<std::size_t>(workers, 1);

    IntegrationReport report;
    report.frames = 1;
    report.points = frame.size();
    if (frame.empty()) return report;

    const Eigen::Matrix3d rot = frame.pose.topLeftCorner<3, 3>();
    const Eigen::Vector3d origin = frame.origin();
    const FusionConfig& fc = cfg_.fusion;
    const RayBand band = fc.band();
    const bool open = cfg_.mode == SemanticMode::open || frame.kind == PayloadKind::feature;

    // phase 1: traverse rays into per-(chunk, owner) hit buckets
    const std::size_t chunks = workers;
    std::vector<std::vector<std::vector<Hit>>> buckets(chunks, std::vector<std::vector<Hit>>(workers));
    std::vector<IntegrationReport> chunk_reports(chunks);
    run_workers(workers, [&](std::size_t w) {
      const auto [begin, end] = chunk_range(frame.size(), chunks, w);
      auto& mine = buckets[w];
      IntegrationReport& rep = chunk_reports[w];
      for (auto& b : mine) b.reserve((end - begin) * 8 / workers + 16);
      for (std::size_t i = begin; i < end; ++i) {
        const Vec3f& ps = frame.points[i];
        if (!ps.allFinite()) {
          ++rep.skipped_nonfinite;
          continue;
        }
        if (open && !features_finite(frame.feature(i))) {
          ++rep.dropped_features;
          continue;
        }
        const Eigen::Vector3d p = ps.cast<double>();
        const double range = p.norm();
        if (range > fc.max_range) {
          ++rep.dropped_range;
          continue;
        }
        const Eigen::Vector3d endpoint = rot * p + origin;
        const bool ok = traverse_band(origin, endpoint, band, [&](const Coord& c, double, double) {
          const double sdf = signed_distance(c, origin, endpoint, fc);
          const double weight = observation_weight(sdf, fc);
          if (weight <= 0.0) return;
          const std::size_t owner = workers == 1 ? 0 : CoordHash{}(tsdf_.leaf_origin(c)) % workers;
          mine[owner].push_back({c, static_cast<std::uint32_t>(i), sdf, weight});
        });
        if (!ok) ++rep.degenerate;
      }
    });
    for (const auto& r : chunk_reports) {
      report.skipped_nonfinite += r.skipped_nonfinite;
      report.dropped_features += r.dropped_features;
      report.dropped_range += r.dropped_range;
      report.degenerate += r.degenerate;
    }
    const auto t_raycast = Clock::now();

    // phase 2: each owner applies its hits in chunk (= point) order
    std::mutex alloc_mutex;
    std::vector<std::size_t> touched(workers, 0);
    run_workers(workers, [&](std::size_t owner) {
      OwnerState state(*this, alloc_mutex, workers > 1);
      std::unordered_map<Coord, OpenBatch, CoordHash> batches;
      for (std::size_t c = 0; c < chunks; ++c) {
        for (const Hit& h : buckets[c][owner]) {
          state.apply(h, frame, open ? &batches : nullptr);
        }
        touched[owner] += buckets[c][owner].size();
      }
      if (open) state.apply_open(batches, frame);
    });
    for (std::size_t t : touched) report.touched_voxels += t;

    const auto t_end = Clock::now();
    report.raycast_ms = std::chrono::duration<double, std::milli>(t_raycast - t_start).count();
    report.update_ms = std::chrono::duration<double, std::milli>(t_end - t_raycast).count();
    report.total_ms = std::chrono::duration<double, std::milli>(t_end - t_start).count();
    return report;
  }

  // ---- queries -------------------------------------------------------------

  /// Closed-set label of an evidence vector: argmax, or unlabeled if empty.
  [[nodiscard]] static ClassId closed_label(std::span<const float> evidence) {
    const bool any = std::any_of(evidence.begin(), evidence.end(), [](float e) { return e > 0.0f; });
    return any ? argmax_class(evidence) : kUnlabeled;
  }

  [[nodiscard]] std::span<const float> feature_mean(std::span<const float> stats) const {
    return stats.first(static_cast<std::size_t>(cfg_.open.feature_dim));
  }
  [[nodiscard]] std::span<const float> feature_beta(std::span<const float> stats) const {
    return stats.subspan(static_cast<std::size_t>(cfg_.open.feature_dim));
  }

  /// Label of one voxel. Open maps need label embeddings; labels are
  /// 1 + the embedding index, and rejected queries are unlabeled.
  [[nodiscard]] ClassId label_of(std::span<const float> stats, double weight, const EmbeddingSet* labels) const {
    if (cfg_.mode == SemanticMode::closed) return closed_label(stats);
    if (!labels) throw std::invalid_argument("open-set map needs label embeddings to assign classes");
    const auto mean = feature_mean(stats);
    if (!(weight > 0.0) || std::all_of(mean.begin(), mean.end(), [](float x) { return x == 0.0f; })) {
      return kUnlabeled;
    }
    const ClassQuery q = query_classes(mean, weight, *labels, cfg_.open);
    return q.accepted ? static_cast<ClassId>(q.best + 1) : kUnlabeled;
  }

  /// Per-voxel labels over every observed voxel (TSDF weight >= min_weight and
  /// > 0). Voxels without semantic evidence carry kUnlabeled.
  [[nodiscard]] SparseGrid<ClassId> label_grid(const EmbeddingSet* labels = nullptr, double min_weight = 0.0) const {
    if (cfg_.mode == SemanticMode::open && !labels) {
      throw std::invalid_argument("open-set map needs label embeddings to assign classes");
    }
    SparseGrid<ClassId> out(cfg_.tree(), kUnlabeled);
    auto sem = semantic_.const_accessor();
    auto acc = out.accessor();
    tsdf_.for_each_value([&](const Coord& c, const TsdfVoxel& v) {
      if (!(v.weight > 0.0) || v.weight < min_weight) return;
      const float* s = sem.find(c);
      acc.set(c, s ? label_of({s, semantic_.channels()}, v.weight, labels) : kUnlabeled);
    });
    return out;
  }

  [[nodiscard]] MemoryStats memory_stats() const {
    const MemoryStats a = tsdf_.memory_stats();
    const MemoryStats b = semantic_.memory_stats();
    return {a.leaf_count + b.leaf_count, a.internal_count + b.internal_count, a.active_voxels,
            a.bytes_estimate + b.bytes_estimate};
  }

  // ---- persistence -----------------------------------------------------------

  void save(std::ostream& os) const {
    binio::write_magic(os, "SLMP");
    binio::write<std::uint32_t>(os, kMapFormatVersion);
    binio::write<std::uint8_t>(os, static_cast<std::uint8_t>(cfg_.mode));
    binio::write<double>(os, cfg_.fusion.voxel_size);
    binio::write<double>(os, cfg_.fusion.truncation_distance);
    binio::write<std::uint8_t>(os, static_cast<std::uint8_t>(cfg_.fusion.weight_fn));
    binio::write<std::uint8_t>(os, cfg_.fusion.space_carving ? 1 : 0);
    binio::write<double>(os, cfg_.fusion.max_range);
    binio::write<std::uint32_t>(os, static_cast<std::uint32_t>(cfg_.closed.num_classes));
    binio::write<double>(os, cfg_.closed.prior_alpha);
    binio::write<std::uint8_t>(os, static_cast<std::uint8_t>(cfg_.closed.update_rule));
    binio::write<std::uint8_t>(os, cfg_.closed.soft_counts ? 1 : 0);
    binio::write<std::uint32_t>(os, static_cast<std::uint32_t>(cfg_.open.feature_dim));
    binio::write<double>(os, cfg_.open.prior_beta);
    binio::write<double>(os, cfg_.open.confidence_threshold);
    binio::write<double>(os, cfg_.open.lambda_floor);
    binio::write<double>(os, cfg_.open.temperature);
    save_grid(os, tsdf_, PayloadTag::tsdf);
    save_grid(os, semantic_, cfg_.mode == SemanticMode::closed ? PayloadTag::class_evidence
                                                               : PayloadTag::feature_stats);
  }

  [[nodiscard]] static SemanticMap load(std::istream& is) {
    binio::expect_magic(is, "SLMP");
    const auto version = binio::read<std::uint32_t>(is, "map version");
    if (version != kMapFormatVersion) throw std::runtime_error("unsupported map version " + std::to_string(version));
    MapConfig cfg;
    const auto mode = binio::read<std::uint8_t>(is, "mode");
    if (mode != 1 && mode != 2) throw std::runtime_error("corrupt map file: semantic mode");
    cfg.mode = static_cast<SemanticMode>(mode);
    cfg.fusion.voxel_size = binio::read<double>(is, "voxel size");
    cfg.fusion.truncation_distance = binio::read<double>(is, "truncation");
    cfg.fusion.weight_fn = static_cast<WeightFunction>(binio::read<std::uint8_t>(is, "weight function"));
    cfg.fusion.space_carving = binio::read<std::uint8_t>(is, "space carving") != 0;
    cfg.fusion.max_range = binio::read<double>(is, "max range");
    cfg.closed.num_classes = static_cast<int>(binio::read<std::uint32_t>(is, "num classes"));
    cfg.closed.prior_alpha = binio::read<double>(is, "prior alpha");
    cfg.closed.update_rule = static_cast<UpdateRule>(binio::read<std::uint8_t>(is, "update rule"));
    cfg.closed.soft_counts = binio::read<std::uint8_t>(is, "soft counts") != 0;
    cfg.open.feature_dim = static_cast<int>(binio::read<std::uint32_t>(is, "feature dim"));
    cfg.open.prior_beta = binio::read<double>(is, "prior beta");
    cfg.open.confidence_threshold = binio::read<double>(is, "confidence threshold");
    cfg.open.lambda_floor = binio::read<double>(is, "lambda floor");
    cfg.open.temperature = binio::read<double>(is, "temperature");
    auto tsdf = load_grid<TsdfVoxel>(is, PayloadTag::tsdf);
    cfg.leaf_log2 = tsdf.config().leaf_log2;
    cfg.internal_log2 = tsdf.config().internal_log2;
    auto sem = load_grid<float>(is, cfg.mode == SemanticMode::closed ? PayloadTag::class_evidence
                                                                     : PayloadTag::feature_stats);
    try {
      return SemanticMap(cfg, std::move(tsdf), std::move(sem));
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(std::string("corrupt map file: ") + e.what());
    }
  }

  [[nodiscard]] std::string serialize() const {
    std::ostringstream os(std::ios::binary);
    save(os);
    return std::move(os).str();
  }

  /// FNV-1a over the canonical serialized bytes.
  [[nodiscard]] std::uint64_t content_hash() const {
    binio::Fnv1a h;
    h.update(serialize());
    return h.digest();
  }

  static constexpr std::uint32_t kMapFormatVersion = 1;

 private:
  struct Hit {
    Coord c;
    std::uint32_t point;
    double sdf;
    double weight;
  };

  struct OpenBatch {
    double weight_before = 0.0;
    std::vector<std::uint32_t> rows;
  };

  class OwnerState {
   public:
    OwnerState(SemanticMap& map, std::mutex& alloc, bool locking)
        : map_(map), alloc_(alloc), locking_(locking), tsdf_bg_(map.tsdf_.background().front()) {}

    void apply(const Hit& h, const Frame& frame, std::unordered_map<Coord, OpenBatch, CoordHash>* batches) {
      const Coord lo = map_.tsdf_.leaf_origin(h.c);
      if (!current_ || !(current_origin_ == lo)) select(lo);
      const std::uint32_t offset = map_.tsdf_.leaf_offset(h.c);
      TsdfVoxel* v = current_->tsdf->touch(offset, std::span<const TsdfVoxel>(&tsdf_bg_, 1)).first;
      const double before = v->weight;
      *v = update_voxel(*v, h.sdf, h.weight);

      if (batches) {
        if (map_.cfg_.mode == SemanticMode::closed) {
          // soft class probabilities
          float* e = semantic_touch(offset);
          absorb_soft(std::span<float>(e, map_.semantic_.channels()), frame.feature(h.point));
          return;
        }
        auto [it, fresh] = batches->try_emplace(h.c);
        if (fresh) it->second.weight_before = before;
        it->second.rows.push_back(h.point);
        return;
      }
      const ClassId z = frame.classes[h.point];
      if (z == kUnlabeled) return;
      std::span<float> e(semantic_touch(offset), map_.semantic_.channels());
      if (map_.cfg_.closed.update_rule == UpdateRule::bayesian) {
        absorb(e, z);
      } else {
        overwrite_last(e, z);
      }
    }

    void apply_open(std::unordered_map<Coord, OpenBatch, CoordHash>& batches, const Frame& frame) {
      if (map_.cfg_.mode != SemanticMode::open) return;
      const auto l = static_cast<std::size_t>(map_.cfg_.open.feature_dim);
      std::vector<std::span<const float>> rows;
      for (auto& [c, batch] : batches) {
        const Coord lo = map_.tsdf_.leaf_origin(c);
        if (!current_ || !(current_origin_ == lo)) select(lo);
        std::span<float> stats(semantic_touch(map_.tsdf_.leaf_offset(c)), 2 * l);
        rows.clear();
        for (std::uint32_t r : batch.rows) rows.push_back(frame.feature(r));
        (void)absorb_features(stats.first(l), stats.subspan(l), map_.cfg_.open.coupled_lambda(batch.weight_before),
                              std::span<const std::span<const float>>(rows));
      }
    }

   private:
    struct LeafPair {
      TsdfGrid::Leaf* tsdf = nullptr;
      SemanticGrid::Leaf* semantic = nullptr;
    };

    void select(const Coord& lo) {
      auto it = leaves_.find(lo);
      if (it == leaves_.end()) {
        LeafPair pair;
        if (locking_) {
          std::lock_guard lock(alloc_);
          pair = {&map_.tsdf_.leaf_for_write(lo), &map_.semantic_.leaf_for_write(lo)};
        } else {
          pair = {&map_.tsdf_.leaf_for_write(lo), &map_.semantic_.leaf_for_write(lo)};
        }
        it = leaves_.emplace(lo, pair).first;
      }
      current_ = &it->second;
      current_origin_ = lo;
    }

    float* semantic_touch(std::uint32_t offset) {
      return current_->semantic->touch(offset, map_.semantic_.background()).first;
    }

    SemanticMap& map_;
    std::mutex& alloc_;
    bool locking_;
    TsdfVoxel tsdf_bg_;
    std::unordered_map<Coord, LeafPair, CoordHash> leaves_;
    const LeafPair* current_ = nullptr;
    Coord current_origin_{};
  };

  static bool features_finite(std::span<const float> f) {
    return std::all_of(f.begin(), f.end(), [](float x) { return std::isfinite(x); });
  }

  static const MapConfig& validated(const MapConfig& cfg) {
    cfg.validate();
    return cfg;
  }

  MapConfig cfg_;
  TsdfGrid tsdf_;
  SemanticGrid semantic_;
};

/// Agreement between a closed-set map and an open-set map fused from the same
/// frames with one-hot feature payloads (l = k). A co-active voxel agrees when
/// the open-set argmax class has the largest closed-set evidence (closed-set
/// ties admit every tied class).
[[nodiscard]] inline BridgeReport one_hot_bridge_check(const SemanticMap& closed, const SemanticMap& open) {
  if (closed.mode() != SemanticMode::closed || open.mode() != SemanticMode::open) {
    throw std::invalid_argument("bridge check needs a closed-set map and an open-set map");
  }
  if (open.config().open.feature_dim != closed.config().closed.num_classes) {
    throw std::invalid_argument("bridge check needs one-hot features: feature_dim must equal num_classes");
  }
  BridgeReport r;
  auto open_acc = open.semantics().const_accessor();
  auto open_tsdf = open.tsdf().const_accessor();
  const auto k = static_cast<std::size_t>(closed.config().closed.num_classes);
  auto has_open = [&](const float* s) {
    return s && std::any_of(s, s + k, [](float x) { return x != 0.0f; });
  };
  closed.semantics().for_each([&](const Coord& c, std::span<const float> e) {
    if (SemanticMap::closed_label(e) == kUnlabeled) return;
    const float* s = open_acc.find(c);
    if (!has_open(s) || !(open_tsdf.get(c).weight > 0.0)) {
      ++r.closed_only;
      return;
    }
    ++r.co_active;
    // cosine with e_c is m_c / |m|: the argmax is the largest mean entry
    const std::size_t best = static_cast<std::size_t>(std::max_element(s, s + k) - s);
    const float top = *std::max_element(e.begin(), e.end());
    if (e[best] == top) ++r.agree;
  });
  auto closed_acc = closed.semantics().const_accessor();
  open.semantics().for_each([&](const Coord& c, std::span<const float> s) {
    if (!has_open(s.data())) return;
    const float* e = closed_acc.find(c);
    if (!e || SemanticMap::closed_label({e, k}) == kUnlabeled) ++r.open_only;
  });
  if (r.co_active == 0) throw std::domain_error("bridge check undefined: no co-active voxels");
  r.ratio = static_cast<double>(r.agree) / static_cast<double>(r.co_active);
  return r;
}

inline void save_map(const std::filesystem::path& path, const SemanticMap& map) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  map.save(os);
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

[[nodiscard]] inline SemanticMap load_map(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open map " + path.string());
  try {
    return SemanticMap::load(is);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace semfuse
