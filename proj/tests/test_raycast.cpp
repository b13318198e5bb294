// Copyright 2026 The semfuse Authors
// SPDX-License-Identifier: Apache-2.0
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "semfuse/raycast.hpp"

using semfuse::Coord;
using semfuse::RayBand;
using semfuse::Vec3d;

namespace {

std::vector<int> x_indices(const std::vector<Coord>& cs) {
  std::vector<int> out;
  for (const auto& c : cs) {
    EXPECT_EQ(c.j, 0);
    EXPECT_EQ(c.k, 0);
    out.push_back(c.i);
  }
  return out;
}

}  // namespace

TEST(Raycast, AxisRayHalfOpenBand) {
  const auto cs = semfuse::raycast_band(Vec3d(0, 0, 0), Vec3d(1.0, 0, 0), RayBand{0.25, 0.25, false});
  EXPECT_EQ(x_indices(cs), (std::vector<int>{3, 4}));
  const auto oracle = semfuse::oracle::sampled_band(Vec3d(0, 0, 0), Vec3d(1.0, 0, 0), 0.25, 0.25, false);
  EXPECT_EQ(cs, oracle);
}

TEST(Raycast, AxisRaySpaceCarving) {
  const auto cs = semfuse::raycast_band(Vec3d(0, 0, 0), Vec3d(1.0, 0, 0), RayBand{0.25, 0.25, true});
  EXPECT_EQ(x_indices(cs), (std::vector<int>{0, 1, 2, 3, 4}));
}

TEST(Raycast, NegativeDirectionAxisRay) {
  const auto cs = semfuse::raycast_band(Vec3d(0.1, 0.1, 0.1), Vec3d(-0.9, 0.1, 0.1), RayBand{0.25, 0.25, false});
  const auto oracle = semfuse::oracle::sampled_band(Vec3d(0.1, 0.1, 0.1), Vec3d(-0.9, 0.1, 0.1), 0.25, 0.25, false);
  EXPECT_EQ(cs, oracle);
  ASSERT_FALSE(cs.empty());
  EXPECT_GT(cs.front().i, cs.back().i);
}

TEST(Raycast, ZeroLengthRayIsDegenerate) {
  bool degenerate = false;
  const auto cs = semfuse::raycast_band(Vec3d(1, 2, 3), Vec3d(1, 2, 3), RayBand{0.1, 0.3, false}, &degenerate);
  EXPECT_TRUE(cs.empty());
  EXPECT_TRUE(degenerate);
}

TEST(Raycast, MatchesSamplingOracleOnRandomRays) {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> pos(-3.0, 3.0);
  std::uniform_real_distribution<double> vs_d(0.05, 0.5);
  for (int n = 0; n < 300; ++n) {
    const Vec3d o(pos(rng), pos(rng), pos(rng));
    const Vec3d e(pos(rng), pos(rng), pos(rng));
    const double vs = vs_d(rng);
    const double trunc = vs * (1.0 + 3.0 * std::uniform_real_distribution<double>(0, 1)(rng));
    const bool carve = n % 4 == 0;
    const auto got = semfuse::raycast_band(o, e, RayBand{vs, trunc, carve});
    const auto want = semfuse::oracle::sampled_band(o, e, vs, trunc, carve);
    ASSERT_EQ(got, want) << "ray " << n;
    const std::set<Coord> unique(got.begin(), got.end());
    ASSERT_EQ(unique.size(), got.size());
  }
}

TEST(Raycast, DiagonalRaysThroughUnitVoxels) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> cell(-5, 5);
  std::uniform_real_distribution<double> jitter(0.0, 1.0);
  for (int n = 0; n < 300; ++n) {
    // lattice-aligned diagonals hit edges and corners exactly
    const Vec3d o(cell(rng), cell(rng), cell(rng));
    const Vec3d dir = Vec3d(n % 2 ? 1 : -1, n % 3 ? 1 : -1, n % 5 ? 1 : -1) * (1 + cell(rng) % 3 + 3);
    const Vec3d e = o + dir + (n % 7 == 0 ? Vec3d(jitter(rng), 0, 0) : Vec3d::Zero());
    const auto got = semfuse::raycast_band(o, e, RayBand{1.0, 1.5, n % 2 == 0});
    const auto want = semfuse::oracle::sampled_band(o, e, 1.0, 1.5, n % 2 == 0);
    ASSERT_EQ(got, want) << "ray " << n;
  }
}

TEST(Raycast, VisitedIntervalsAreContiguousAndOrdered) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pos(-2.0, 2.0);
  for (int n = 0; n < 200; ++n) {
    const Vec3d o(pos(rng), pos(rng), pos(rng));
    const Vec3d e(pos(rng), pos(rng), pos(rng));
    const double len = (e - o).norm();
    double last_exit = -1.0;
    double first_enter = -1.0;
    semfuse::traverse_band(o, e, RayBand{0.1, 0.3, false}, [&](const Coord& c, double t0, double t1) {
      EXPECT_LT(t0, t1);
      if (first_enter < 0) first_enter = t0;
      if (last_exit >= 0) {
        EXPECT_NEAR(t0, last_exit, 1e-12);
      }
      last_exit = t1;
      const Vec3d mid = o + 0.5 * (t0 + t1) * (e - o) / len;
      EXPECT_EQ(semfuse::world_to_coord(mid, 0.1), c);
    });
    EXPECT_NEAR(first_enter, std::max(0.0, len - 0.3), 1e-12);
    EXPECT_NEAR(last_exit, len + 0.3, 1e-12);
  }
}
