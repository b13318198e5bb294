// Copyright 2026 The semfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <unordered_map>
#include <utility>
#include <vector>

#include "semfuse/coord.hpp"

namespace semfuse {

/// Shape of the three-level tree: root hash map -> internal nodes of
/// (2^internal_log2)^3 children -> leaves of (2^leaf_log2)^3 voxels.
struct TreeConfig {
  int leaf_log2 = 3;
  int internal_log2 = 4;
  double voxel_size = 0.1;

  void validate() const {
    // slot indices inside a leaf are 16 bit
    if (leaf_log2 < 1 || leaf_log2 > 5) {
      throw std::invalid_argument("leaf_log2 must be in [1, 5], got " + std::to_string(leaf_log2));
    }
    if (internal_log2 < 1 || internal_log2 > 6) {
      throw std::invalid_argument("internal_log2 must be in [1, 6], got " +
                                  std::to_string(internal_log2));
    }
    if (!(voxel_size > 0.0)) {
      throw std::invalid_argument("voxel_size must be positive");
    }
  }

  [[nodiscard]] int leaf_dim() const { return 1 << leaf_log2; }
  [[nodiscard]] std::uint32_t leaf_volume() const { return 1u << (3 * leaf_log2); }
  [[nodiscard]] std::uint32_t internal_volume() const { return 1u << (3 * internal_log2); }
  [[nodiscard]] double leaf_extent() const { return voxel_size * leaf_dim(); }

  friend bool operator==(const TreeConfig&, const TreeConfig&) = default;
};

struct MemoryStats {
  std::size_t leaf_count = 0;
  std::size_t internal_count = 0;
  std::size_t active_voxels = 0;
  std::size_t bytes_estimate = 0;
};

/**
 * @brief Sparse voxel grid with a fixed three-level hierarchy.
 *
 * Every voxel carries `channels()` consecutive values of type T. Scalar
 * payloads (a TSDF record) use one channel; runtime-width payloads (class
 * evidence, feature mean and scale) use k or 2l channels.
 *
 * Leaves keep an activity bitmask, a rank -> slot table and a packed pool that
 * only holds active voxels, so memory follows the number of observed voxels
 * rather than the leaf volume. Inactive voxels read as the background value.
 *
 * Iteration is canonical: internal nodes in coordinate order, leaves by child
 * index, voxels by offset. Two grids with the same content iterate and
 * serialize identically regardless of insertion history.
 */
template <typename T>
class SparseGrid {
  static_assert(std::is_trivially_copyable_v<T>, "voxel payload must be trivially copyable");

 public:
  using value_type = T;

  class Leaf {
   public:
    Leaf(const Coord& origin, const TreeConfig& cfg, std::uint32_t channels)
        : origin_(origin),
          channels_(channels),
          mask_((cfg.leaf_volume() + 63) / 64, 0),
          prefix_(mask_.size(), 0) {}

    [[nodiscard]] const Coord& origin() const { return origin_; }
    [[nodiscard]] std::uint32_t active_count() const {
      return static_cast<std::uint32_t>(slot_of_rank_.size());
    }
    [[nodiscard]] std::span<const std::uint64_t> mask() const { return mask_; }

    [[nodiscard]] bool is_on(std::uint32_t offset) const {
      return (mask_[offset >> 6] >> (offset & 63)) & 1u;
    }

    [[nodiscard]] const T* find(std::uint32_t offset) const {
      return is_on(offset) ? pool_.data() + std::size_t{slot(offset)} * channels_ : nullptr;
    }
    [[nodiscard]] T* find(std::uint32_t offset) {
      return is_on(offset) ? pool_.data() + std::size_t{slot(offset)} * channels_ : nullptr;
    }

    /// Returns the voxel's values, activating it with `init` when inactive.
    /// Pointers into the leaf stay valid until the next activation in it.
    std::pair<T*, bool> touch(std::uint32_t offset, std::span<const T> init) {
      if (T* p = find(offset)) {
        return {p, false};
      }
      const std::uint32_t w = offset >> 6;
      const std::uint32_t r = rank(offset);
      mask_[w] |= std::uint64_t{1} << (offset & 63);
      for (std::size_t x = w + 1; x < prefix_.size(); ++x) {
        ++prefix_[x];
      }
      const auto slot_index = static_cast<std::uint16_t>(slot_of_rank_.size());
      slot_of_rank_.insert(slot_of_rank_.begin() + r, slot_index);
      if (pool_.size() + channels_ > pool_.capacity()) {
        // 1.25x growth keeps slack small; accounting uses capacity
        const std::size_t grow = std::max<std::size_t>(16 * channels_, pool_.size() / 4);
        pool_.reserve(pool_.size() + grow);
      }
      pool_.insert(pool_.end(), init.begin(), init.end());
      return {pool_.data() + std::size_t{slot_index} * channels_, true};
    }

    /// Calls f(offset, const T*) for every active voxel in offset order.
    template <typename F>
    void for_each(F&& f) const {
      std::uint32_t r = 0;
      for (std::size_t w = 0; w < mask_.size(); ++w) {
        std::uint64_t bits = mask_[w];
        while (bits != 0) {
          const auto b = static_cast<std::uint32_t>(std::countr_zero(bits));
          bits &= bits - 1;
          const auto offset = static_cast<std::uint32_t>(w * 64 + b);
          f(offset, pool_.data() + std::size_t{slot_of_rank_[r]} * channels_);
          ++r;
        }
      }
    }

    [[nodiscard]] std::size_t bytes() const {
      return sizeof(Leaf) + mask_.capacity() * sizeof(std::uint64_t) +
             prefix_.capacity() * sizeof(std::uint16_t) +
             slot_of_rank_.capacity() * sizeof(std::uint16_t) + pool_.capacity() * sizeof(T);
    }

   private:
    [[nodiscard]] std::uint32_t rank(std::uint32_t offset) const {
      const std::uint32_t w = offset >> 6;
      const std::uint64_t below = mask_[w] & ((std::uint64_t{1} << (offset & 63)) - 1);
      return prefix_[w] + static_cast<std::uint32_t>(std::popcount(below));
    }
    [[nodiscard]] std::uint32_t slot(std::uint32_t offset) const {
      return slot_of_rank_[rank(offset)];
    }

    Coord origin_;
    std::uint32_t channels_;
    std::vector<std::uint64_t> mask_;
    std::vector<std::uint16_t> prefix_;  // set bits in words before w
    std::vector<std::uint16_t> slot_of_rank_;
    std::vector<T> pool_;
  };

  struct Internal {
    Coord origin;
    std::vector<std::unique_ptr<Leaf>> children;
    std::vector<std::uint64_t> mask;
    std::uint32_t child_count = 0;

    Internal(const Coord& o, std::uint32_t volume)
        : origin(o), children(volume), mask((volume + 63) / 64, 0) {}

    [[nodiscard]] std::size_t bytes() const {
      return sizeof(Internal) + children.capacity() * sizeof(std::unique_ptr<Leaf>) +
             mask.capacity() * sizeof(std::uint64_t);
    }
  };

  SparseGrid(const TreeConfig& cfg, std::vector<T> background)
      : cfg_(cfg), background_(std::move(background)) {
    cfg_.validate();
    if (background_.empty()) {
      throw std::invalid_argument("background must have at least one channel");
    }
    channels_ = static_cast<std::uint32_t>(background_.size());
    leaf_mask_ = (1 << cfg_.leaf_log2) - 1;
    internal_mask_ = (1 << cfg_.internal_log2) - 1;
    node_mask_ = (1 << (cfg_.leaf_log2 + cfg_.internal_log2)) - 1;
  }

  SparseGrid(const TreeConfig& cfg, const T& background)
      : SparseGrid(cfg, std::vector<T>{background}) {}

  SparseGrid(const SparseGrid&) = delete;
  SparseGrid& operator=(const SparseGrid&) = delete;
  SparseGrid(SparseGrid&&) noexcept = default;
  SparseGrid& operator=(SparseGrid&&) noexcept = default;

  [[nodiscard]] const TreeConfig& config() const { return cfg_; }
  [[nodiscard]] double voxel_size() const { return cfg_.voxel_size; }
  [[nodiscard]] std::uint32_t channels() const { return channels_; }
  [[nodiscard]] std::span<const T> background() const { return background_; }

  // ---- index arithmetic ----------------------------------------------------

  [[nodiscard]] Coord leaf_origin(const Coord& c) const {
    return {c.i & ~leaf_mask_, c.j & ~leaf_mask_, c.k & ~leaf_mask_};
  }
  [[nodiscard]] Coord internal_origin(const Coord& c) const {
    return {c.i & ~node_mask_, c.j & ~node_mask_, c.k & ~node_mask_};
  }
  [[nodiscard]] std::uint32_t leaf_offset(const Coord& c) const {
    const int l = cfg_.leaf_log2;
    return static_cast<std::uint32_t>(((c.i & leaf_mask_) << (2 * l)) |
                                      ((c.j & leaf_mask_) << l) | (c.k & leaf_mask_));
  }
  [[nodiscard]] Coord offset_to_coord(const Coord& leaf_origin, std::uint32_t offset) const {
    const int l = cfg_.leaf_log2;
    const auto m = static_cast<std::uint32_t>(leaf_mask_);
    return {leaf_origin.i + static_cast<std::int32_t>((offset >> (2 * l)) & m),
            leaf_origin.j + static_cast<std::int32_t>((offset >> l) & m),
            leaf_origin.k + static_cast<std::int32_t>(offset & m)};
  }
  [[nodiscard]] std::uint32_t child_index(const Coord& c) const {
    const int l = cfg_.leaf_log2;
    const int n = cfg_.internal_log2;
    return static_cast<std::uint32_t>((((c.i >> l) & internal_mask_) << (2 * n)) |
                                      (((c.j >> l) & internal_mask_) << n) |
                                      ((c.k >> l) & internal_mask_));
  }

  // ---- direct access (one root probe per call) ------------------------------

  [[nodiscard]] const Leaf* find_leaf(const Coord& c) const {
    const Internal* node = find_internal(internal_origin(c));
    return node ? node->children[child_index(c)].get() : nullptr;
  }

  [[nodiscard]] const T* find(const Coord& c) const {
    const Leaf* leaf = find_leaf(c);
    return leaf ? leaf->find(leaf_offset(c)) : nullptr;
  }

  [[nodiscard]] bool is_active(const Coord& c) const { return find(c) != nullptr; }

  /// Value of a single-channel grid, or the background when inactive.
  [[nodiscard]] T get(const Coord& c) const {
    const T* p = find(c);
    return p ? *p : background_.front();
  }

  [[nodiscard]] std::span<const T> values(const Coord& c) const {
    const T* p = find(c);
    return p ? std::span<const T>(p, channels_) : std::span<const T>(background_);
  }

  void set(const Coord& c, const T& value) {
    require_single_channel();
    *touch(c).data() = value;
  }

  void set(const Coord& c, std::span<const T> values) {
    if (values.size() != channels_) {
      throw std::invalid_argument("channel count mismatch in set()");
    }
    std::copy(values.begin(), values.end(), touch(c).begin());
  }

  T& get_or_insert(const Coord& c, const T& default_value) {
    require_single_channel();
    Leaf& leaf = leaf_for_write(c);
    return *leaf.touch(leaf_offset(c), std::span<const T>(&default_value, 1)).first;
  }

  /// Values of the voxel, activated with the background when inactive.
  std::span<T> touch(const Coord& c) {
    Leaf& leaf = leaf_for_write(c);
    return {leaf.touch(leaf_offset(c), background_).first, channels_};
  }

  /// Allocates the internal node and leaf containing `c` if needed.
  Leaf& leaf_for_write(const Coord& c) {
    check_range(c);
    Internal& node = internal_for_write(internal_origin(c));
    return child_for_write(node, c);
  }

  // ---- iteration ------------------------------------------------------------

  /// f(const Leaf&) over every allocated leaf in canonical order.
  template <typename F>
  void for_each_leaf(F&& f) const {
    for (const Internal* node : sorted_internals()) {
      for (std::size_t w = 0; w < node->mask.size(); ++w) {
        std::uint64_t bits = node->mask[w];
        while (bits != 0) {
          const auto b = std::countr_zero(bits);
          bits &= bits - 1;
          f(*node->children[w * 64 + b]);
        }
      }
    }
  }

  /// f(const Coord&, std::span<const T>) over every active voxel.
  template <typename F>
  void for_each(F&& f) const {
    for_each_leaf([&](const Leaf& leaf) {
      leaf.for_each([&](std::uint32_t offset, const T* p) {
        f(offset_to_coord(leaf.origin(), offset), std::span<const T>(p, channels_));
      });
    });
  }

  /// f(const Coord&, const T&) for single-channel grids.
  template <typename F>
  void for_each_value(F&& f) const {
    require_single_channel();
    for_each_leaf([&](const Leaf& leaf) {
      leaf.for_each([&](std::uint32_t offset, const T* p) {
        f(offset_to_coord(leaf.origin(), offset), *p);
      });
    });
  }

  [[nodiscard]] std::vector<Coord> active_coords() const {
    std::vector<Coord> out;
    out.reserve(active_voxel_count());
    for_each([&](const Coord& c, std::span<const T>) { out.push_back(c); });
    return out;
  }

  // ---- statistics -----------------------------------------------------------

  [[nodiscard]] std::size_t internal_count() const { return root_.size(); }

  /// Origins of the allocated internal nodes in canonical order.
  [[nodiscard]] std::vector<Coord> internal_origins() const {
    std::vector<Coord> out;
    for (const Internal* node : sorted_internals()) out.push_back(node->origin);
    return out;
  }

  [[nodiscard]] std::size_t leaf_count() const {
    std::size_t n = 0;
    for (const auto& [key, node] : root_) n += node->child_count;
    return n;
  }

  [[nodiscard]] std::size_t active_voxel_count() const {
    std::size_t n = 0;
    for_each_leaf([&](const Leaf& leaf) { n += leaf.active_count(); });
    return n;
  }

  [[nodiscard]] bool empty() const { return root_.empty(); }

  [[nodiscard]] MemoryStats memory_stats() const {
    MemoryStats s;
    s.internal_count = root_.size();
    s.bytes_estimate = sizeof(SparseGrid) + background_.capacity() * sizeof(T) +
                       root_.bucket_count() * sizeof(void*);
    for (const auto& [key, node] : root_) {
      // hash node: key, owning pointer, next pointer, cached hash
      s.bytes_estimate += sizeof(Coord) + sizeof(void*) * 3 + node->bytes();
    }
    for_each_leaf([&](const Leaf& leaf) {
      ++s.leaf_count;
      s.active_voxels += leaf.active_count();
      s.bytes_estimate += leaf.bytes();
    });
    return s;
  }

  /// Number of root hash-map lookups performed so far (instrumentation).
  [[nodiscard]] std::uint64_t root_probes() const {
    return std::atomic_ref<std::uint64_t>(root_probes_).load(std::memory_order_relaxed);
  }

  [[nodiscard]] bool content_equals(const SparseGrid& other) const {
    if (!(cfg_ == other.cfg_) || channels_ != other.channels_ ||
        !std::equal(background_.begin(), background_.end(), other.background_.begin())) {
      return false;
    }
    if (active_voxel_count() != other.active_voxel_count()) {
      return false;
    }
    bool same = true;
    for_each([&](const Coord& c, std::span<const T> v) {
      if (!same) return;
      const T* o = other.find(c);
      same = o != nullptr && std::equal(v.begin(), v.end(), o);
    });
    return same;
  }

  // ---- cached accessors -------------------------------------------------------

  template <bool Mutable>
  class BasicAccessor {
    using GridRef = std::conditional_t<Mutable, SparseGrid&, const SparseGrid&>;
    using LeafPtr = std::conditional_t<Mutable, Leaf*, const Leaf*>;
    using InternalPtr = std::conditional_t<Mutable, Internal*, const Internal*>;

   public:
    explicit BasicAccessor(GridRef grid) : grid_(grid) {}

    [[nodiscard]] const T* find(const Coord& c) {
      LeafPtr leaf = resolve(c, false);
      return leaf ? leaf->find(grid_.leaf_offset(c)) : nullptr;
    }

    [[nodiscard]] T get(const Coord& c) {
      const T* p = find(c);
      return p ? *p : grid_.background_.front();
    }

    [[nodiscard]] std::span<const T> values(const Coord& c) {
      const T* p = find(c);
      return p ? std::span<const T>(p, grid_.channels_) : std::span<const T>(grid_.background_);
    }

    [[nodiscard]] bool is_active(const Coord& c) { return find(c) != nullptr; }

    T& get_or_insert(const Coord& c, const T& default_value)
      requires Mutable
    {
      grid_.require_single_channel();
      return *resolve(c, true)->touch(grid_.leaf_offset(c), std::span<const T>(&default_value, 1)).first;
    }

    std::span<T> touch(const Coord& c, bool* inserted = nullptr)
      requires Mutable
    {
      auto [p, fresh] = resolve(c, true)->touch(grid_.leaf_offset(c), grid_.background_);
      if (inserted) *inserted = fresh;
      return {p, grid_.channels_};
    }

    void set(const Coord& c, const T& value)
      requires Mutable
    {
      *touch(c).data() = value;
    }

    /// Walks from the root or a cached internal node (cache misses only).
    [[nodiscard]] std::uint64_t leaf_resolutions() const { return resolutions_; }

   private:
    struct Entry {
      Coord origin;
      LeafPtr leaf = nullptr;
    };

    LeafPtr resolve(const Coord& c, bool create) {
      const Coord lo = grid_.leaf_origin(c);
      if (cache_[0].leaf && cache_[0].origin == lo) {
        return cache_[0].leaf;
      }
      if (cache_[1].leaf && cache_[1].origin == lo) {
        std::swap(cache_[0], cache_[1]);
        return cache_[0].leaf;
      }
      ++resolutions_;
      if (create) {
        grid_.check_range(c);
      }
      const Coord io = grid_.internal_origin(c);
      if (!internal_ || !(internal_origin_ == io)) {
        InternalPtr node = nullptr;
        if constexpr (Mutable) {
          node = create ? &grid_.internal_for_write(io) : grid_.find_internal_mut(io);
        } else {
          node = grid_.find_internal(io);
        }
        if (!node) {
          return nullptr;  // misses are not cached
        }
        internal_ = node;
        internal_origin_ = io;
      }
      LeafPtr leaf = nullptr;
      if constexpr (Mutable) {
        leaf = create ? &grid_.child_for_write(*internal_, c)
                      : internal_->children[grid_.child_index(c)].get();
      } else {
        leaf = internal_->children[grid_.child_index(c)].get();
      }
      if (leaf) {
        cache_[1] = cache_[0];
        cache_[0] = {lo, leaf};
      }
      return leaf;
    }

    GridRef grid_;
    std::array<Entry, 2> cache_{};
    Coord internal_origin_{};
    InternalPtr internal_ = nullptr;
    std::uint64_t resolutions_ = 0;
  };

  using Accessor = BasicAccessor<true>;
  using ConstAccessor = BasicAccessor<false>;

  [[nodiscard]] Accessor accessor() { return Accessor(*this); }
  [[nodiscard]] ConstAccessor accessor() const { return ConstAccessor(*this); }
  [[nodiscard]] ConstAccessor const_accessor() const { return ConstAccessor(*this); }

 private:
  void require_single_channel() const {
    if (channels_ != 1) {
      throw std::logic_error("scalar access on a multi-channel grid");
    }
  }

  static void check_range(const Coord& c) {
    if (!in_addressable_range(c)) {
      throw std::out_of_range("voxel coordinate " + c.str() + " outside addressable range +-2^30");
    }
  }

  const Internal* find_internal(const Coord& origin) const {
    std::atomic_ref<std::uint64_t>(root_probes_).fetch_add(1, std::memory_order_relaxed);
    auto it = root_.find(origin);
    return it == root_.end() ? nullptr : it->second.get();
  }

  Internal* find_internal_mut(const Coord& origin) {
    return const_cast<Internal*>(std::as_const(*this).find_internal(origin));
  }

  Internal& internal_for_write(const Coord& origin) {
    std::atomic_ref<std::uint64_t>(root_probes_).fetch_add(1, std::memory_order_relaxed);
    auto [it, inserted] = root_.try_emplace(origin);
    if (inserted) {
      it->second = std::make_unique<Internal>(origin, cfg_.internal_volume());
    }
    return *it->second;
  }

  Leaf& child_for_write(Internal& node, const Coord& c) {
    const std::uint32_t idx = child_index(c);
    auto& slot = node.children[idx];
    if (!slot) {
      slot = std::make_unique<Leaf>(leaf_origin(c), cfg_, channels_);
      node.mask[idx >> 6] |= std::uint64_t{1} << (idx & 63);
      ++node.child_count;
    }
    return *slot;
  }

  std::vector<const Internal*> sorted_internals() const {
    std::vector<const Internal*> nodes;
    nodes.reserve(root_.size());
    for (const auto& [key, node] : root_) nodes.push_back(node.get());
    std::sort(nodes.begin(), nodes.end(),
              [](const Internal* a, const Internal* b) { return a->origin < b->origin; });
    return nodes;
  }

  TreeConfig cfg_;
  std::vector<T> background_;
  std::uint32_t channels_ = 1;
  std::int32_t leaf_mask_ = 0;
  std::int32_t internal_mask_ = 0;
  std::int32_t node_mask_ = 0;
  std::unordered_map<Coord, std::unique_ptr<Internal>, CoordHash> root_;
  alignas(std::atomic_ref<std::uint64_t>::required_alignment) mutable std::uint64_t root_probes_ = 0;
};

}  // namespace semfuse
