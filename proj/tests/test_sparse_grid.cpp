// Copyright 2026 The semfuse Authors
// SPDX-License-Identifier: Apache-2.0
#include <map>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "semfuse/sparse_grid.hpp"

using semfuse::Coord;
using semfuse::SparseGrid;
using semfuse::TreeConfig;

namespace {

TreeConfig default_config() { return TreeConfig{3, 4, 0.1}; }

}  // namespace

TEST(SparseGrid, FreshGridReadsBackground) {
  SparseGrid<float> g(default_config(), -1.0f);
  EXPECT_EQ(g.get({3, 4, 5}), -1.0f);
  EXPECT_FALSE(g.is_active({3, 4, 5}));
  EXPECT_EQ(g.leaf_count(), 0u);
  EXPECT_EQ(g.internal_count(), 0u);
}

TEST(SparseGrid, SetGetRoundTrip) {
  SparseGrid<float> g(default_config(), 0.0f);
  g.set({5, 5, 5}, 2.5f);
  EXPECT_EQ(g.get({5, 5, 5}), 2.5f);
  EXPECT_EQ(g.get({5, 5, 6}), 0.0f);
  EXPECT_EQ(g.active_voxel_count(), 1u);
  g.set({5, 5, 5}, 3.0f);
  EXPECT_EQ(g.active_voxel_count(), 1u);
  g.set({5, 5, 6}, 1.0f);
  EXPECT_EQ(g.active_voxel_count(), 2u);
}

TEST(SparseGrid, SignHandlingFarCoordinates) {
  SparseGrid<int> g(default_config(), 0);
  g.set({1 << 20, 0, 0}, 7);
  g.set({-(1 << 20), 0, 0}, 9);
  EXPECT_EQ(g.get({1 << 20, 0, 0}), 7);
  EXPECT_EQ(g.get({-(1 << 20), 0, 0}), 9);
  EXPECT_EQ(g.active_voxel_count(), 2u);
}

TEST(SparseGrid, RejectsCoordinatesBeyondAddressableRange) {
  SparseGrid<int> g(default_config(), 0);
  EXPECT_THROW(g.set({std::numeric_limits<std::int32_t>::max(), 0, 0}, 1), std::out_of_range);
  EXPECT_EQ(g.get({std::numeric_limits<std::int32_t>::max(), 0, 0}), 0);
}

TEST(SparseGrid, GetDoesNotAllocate) {
  SparseGrid<int> g(default_config(), 0);
  for (int n = 0; n < 1000; ++n) (void)g.get({n, -n, 3 * n});
  EXPECT_TRUE(g.empty());
  EXPECT_EQ(g.memory_stats().leaf_count, 0u);
}

TEST(SparseGrid, MemoryStatsShape) {
  SparseGrid<float> g(default_config(), 0.0f);
  const auto empty = g.memory_stats();
  EXPECT_EQ(empty.leaf_count, 0u);
  EXPECT_EQ(empty.internal_count, 0u);
  EXPECT_EQ(empty.active_voxels, 0u);
  EXPECT_LT(empty.bytes_estimate, 1024u);

  g.set({1, 2, 3}, 1.0f);
  auto one = g.memory_stats();
  EXPECT_EQ(one.leaf_count, 1u);
  EXPECT_EQ(one.internal_count, 1u);
  EXPECT_EQ(one.active_voxels, 1u);
  EXPECT_GT(one.bytes_estimate, empty.bytes_estimate);

  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j)
      for (int k = 0; k < 8; ++k) g.set({i, j, k}, 1.0f);
  const auto full = g.memory_stats();
  EXPECT_EQ(full.leaf_count, 1u);
  EXPECT_EQ(full.active_voxels, 512u);
}

TEST(SparseGrid, EquivalentToHashMapOracle) {
  std::mt19937_64 rng(42);
  SparseGrid<std::int64_t> g(TreeConfig{2, 2, 0.1}, -1);
  auto acc = g.accessor();
  std::map<Coord, std::int64_t> oracle;
  std::uniform_int_distribution<int> coord(-40, 40);
  std::uniform_int_distribution<int> op(0, 4);
  for (int n = 0; n < 50000; ++n) {
    const Coord c{coord(rng), coord(rng), coord(rng)};
    const auto value = static_cast<std::int64_t>(rng() >> 1);
    switch (op(rng)) {
      case 0:
        g.set(c, value);
        oracle[c] = value;
        break;
      case 1:
        acc.set(c, value);
        oracle[c] = value;
        break;
      case 2: {
        std::int64_t& r = acc.get_or_insert(c, 5);
        auto [it, inserted] = oracle.try_emplace(c, 5);
        ASSERT_EQ(r, it->second);
        r += 1;
        it->second += 1;
        break;
      }
      case 3: {
        auto it = oracle.find(c);
        ASSERT_EQ(g.get(c), it == oracle.end() ? -1 : it->second);
        break;
      }
      default: {
        auto it = oracle.find(c);
        ASSERT_EQ(acc.get(c), it == oracle.end() ? -1 : it->second);
        ASSERT_EQ(acc.is_active(c), it != oracle.end());
      }
    }
  }
  ASSERT_EQ(g.active_voxel_count(), oracle.size());
  std::map<Coord, std::int64_t> seen;
  g.for_each_value([&](const Coord& c, std::int64_t v) { EXPECT_TRUE(seen.emplace(c, v).second); });
  EXPECT_EQ(seen, oracle);
}

TEST(SparseGrid, MultiChannelTouchAndValues) {
  SparseGrid<float> g(default_config(), std::vector<float>{0.5f, 0.25f, 0.0f});
  EXPECT_EQ(g.channels(), 3u);
  auto v = g.touch({-3, 0, 9});
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(v[1], 0.25f);
  v[2] = 4.0f;
  auto back = g.values({-3, 0, 9});
  EXPECT_EQ(back[2], 4.0f);
  EXPECT_EQ(g.values({0, 0, 0})[0], 0.5f);
  EXPECT_THROW(g.set({0, 0, 0}, 1.0f), std::logic_error);
}

TEST(SparseGrid, AccessorSingleLeafNeedsOneRootProbe) {
  SparseGrid<float> g(default_config(), 0.0f);
  g.set({0, 0, 0}, 1.0f);
  const auto before = g.root_probes();
  auto acc = g.const_accessor();
  double sum = 0.0;
  for (int n = 0; n < 1000000; ++n) {
    sum += acc.get({n & 7, (n >> 3) & 7, (n >> 6) & 7});
  }
  EXPECT_EQ(sum, 1954.0);  // offsets with n % 512 == 0
  EXPECT_LE(g.root_probes() - before, 1u);
  EXPECT_EQ(acc.leaf_resolutions(), 1u);
}

TEST(SparseGrid, AccessorCachesTwoLeaves) {
  SparseGrid<float> g(default_config(), 0.0f);
  g.set({0, 0, 0}, 1.0f);
  g.set({8, 0, 0}, 2.0f);
  auto acc = g.const_accessor();
  for (int n = 0; n < 1000; ++n) {
    EXPECT_EQ(acc.get({(n % 2) * 8, 0, 0}), n % 2 ? 2.0f : 1.0f);
  }
  EXPECT_LE(acc.leaf_resolutions(), 2u);
}

TEST(SparseGrid, IterationSetIndependentOfInsertOrder) {
  std::vector<Coord> coords;
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> d(-300, 300);
  for (int n = 0; n < 3000; ++n) coords.push_back({d(rng), d(rng), d(rng)});
  SparseGrid<int> a(default_config(), 0);
  SparseGrid<int> b(default_config(), 0);
  for (const auto& c : coords) a.set(c, c.i + c.j);
  std::shuffle(coords.begin(), coords.end(), rng);
  for (const auto& c : coords) b.set(c, c.i + c.j);
  EXPECT_TRUE(a.content_equals(b));
  std::vector<Coord> ia = a.active_coords();
  std::vector<Coord> ib = b.active_coords();
  EXPECT_EQ(ia, ib);
  EXPECT_EQ(std::set<Coord>(ia.begin(), ia.end()).size(), ia.size());
  EXPECT_EQ(a.memory_stats().leaf_count, b.memory_stats().leaf_count);
}

TEST(SparseGrid, EmptyIterationAndDeterministicStats) {
  SparseGrid<int> g(default_config(), 0);
  int n = 0;
  g.for_each([&](const Coord&, std::span<const int>) { ++n; });
  EXPECT_EQ(n, 0);

  SparseGrid<int> a(default_config(), 0);
  SparseGrid<int> b(default_config(), 0);
  for (int i = 0; i < 500; ++i) {
    a.set({i, -i, 2 * i}, i);
    b.set({i, -i, 2 * i}, i);
  }
  EXPECT_TRUE(a.content_equals(b));
  EXPECT_EQ(a.memory_stats().bytes_estimate, b.memory_stats().bytes_estimate);
}

TEST(SparseGrid, ThinShellAllocationIsSparse) {
  SparseGrid<float> g(default_config(), 0.0f);
  std::size_t written = 0;
  // 2-voxel-thick shell of a sphere of radius 100 voxels
  for (int i = -102; i <= 102; ++i)
    for (int j = -102; j <= 102; ++j)
      for (int k = -102; k <= 102; ++k) {
        const double r = std::sqrt(double(i) * i + double(j) * j + double(k) * k);
        if (r >= 99.0 && r < 101.0) {
          g.set({i, j, k}, 1.0f);
          ++written;
        }
      }
  const auto s = g.memory_stats();
  EXPECT_EQ(s.active_voxels, written);
  // leaves scale with the shell, not the bounding box
  EXPECT_LT(s.leaf_count, 16 * written / 512);
  // hollow core stays unallocated
  for (int i = -64; i < 64; i += 8)
    for (int j = -64; j < 64; j += 8)
      for (int k = -64; k < 64; k += 8) {
        if (std::sqrt(double(i) * i + double(j) * j + double(k) * k) < 80.0) {
          EXPECT_EQ(g.find_leaf({i, j, k}), nullptr);
        }
      }
}
