/*
 * Copyright 2026 The irdkit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <set>

#include <gtest/gtest.h>

#include "irdkit/geometry.hpp"
#include "test_support.hpp"

namespace irdkit {
namespace {

std::set<Cell> BruteForceCrossed(HalfPoint a, HalfPoint b) {
  std::set<Cell> out;
  const auto lo_x = std::min(a.x, b.x) / 2 - 2, hi_x = std::max(a.x, b.x) / 2 + 2;
  const auto lo_y = std::min(a.y, b.y) / 2 - 2, hi_y = std::max(a.y, b.y) / 2 + 2;
  for (auto y = lo_y; y <= hi_y; ++y)
    for (auto x = lo_x; x <= hi_x; ++x)
      if (testing::segment_hits_open_square(a.x, a.y, b.x, b.y, 2 * x, 2 * y))
        out.insert({static_cast<int>(x), static_cast<int>(y)});
  return out;
}

TEST(CrossedCells, MatchesBruteForceOnRandomSegments) {
  Rng rng(11);
  for (int trial = 0; trial < 5000; ++trial) {
    // Mix of centers (even), vertices/edges (odd) and arbitrary lattice points.
    HalfPoint a{rng.uniform_int(-20, 20), rng.uniform_int(-20, 20)};
    HalfPoint b{rng.uniform_int(-20, 20), rng.uniform_int(-20, 20)};
    if (trial % 3 == 0) {
      a = {a.x & ~std::int64_t{1}, a.y & ~std::int64_t{1}};
      b = {b.x & ~std::int64_t{1}, b.y & ~std::int64_t{1}};
    }
    if (a == b) continue;
    std::vector<Cell> visited;
    for_each_crossed_cell(a, b, [&](Cell c) { visited.push_back(c); });
    const std::set<Cell> unique(visited.begin(), visited.end());
    EXPECT_EQ(unique.size(), visited.size()) << "cell visited twice";
    EXPECT_EQ(unique, BruteForceCrossed(a, b))
        << "segment (" << a.x << "," << a.y << ")->(" << b.x << "," << b.y << ")";
  }
}

TEST(CrossedCells, DiagonalThroughVerticesSkipsSideCells) {
  std::vector<Cell> visited;
  for_each_crossed_cell(HalfPoint{0, 0}, HalfPoint{6, 6}, [&](Cell c) { visited.push_back(c); });
  EXPECT_EQ(visited, (std::vector<Cell>{{0, 0}, {1, 1}, {2, 2}, {3, 3}}));
}

TEST(AngularCover, OpenIntervalsLeaveSharedEndpointsUncovered) {
  AngularCover cover;
  cover.add({1, 0}, {1, 1});
  cover.add({1, 1}, {0, 1});
  EXPECT_TRUE(cover.covers({2, 1}));
  EXPECT_TRUE(cover.covers({1, 2}));
  EXPECT_FALSE(cover.covers({1, 1}));
  EXPECT_FALSE(cover.covers({1, 0}));
  EXPECT_FALSE(cover.covers({-1, -1}));
  cover.add({2, 1}, {1, 2});  // bridges the gap
  EXPECT_TRUE(cover.covers({1, 1}));
  EXPECT_EQ(cover.size(), 1u);
}

TEST(AngularCover, WrapAroundNegativeXAxis) {
  AngularCover cover;
  cover.add({-1, 1}, {-1, -1});  // spans the negative x axis
  EXPECT_TRUE(cover.covers({-1, 0}));
  EXPECT_TRUE(cover.covers({-5, 1}));
  EXPECT_TRUE(cover.covers({-5, -1}));
  EXPECT_FALSE(cover.covers({1, 0}));
  EXPECT_FALSE(cover.covers({0, 1}));
}

TEST(VisibilitySweep, AgreesWithSegmentOracleOnClutter) {
  Rng rng(2024);
  std::size_t cells = 0, disagreements = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const int w = static_cast<int>(rng.uniform_int(5, 40));
    const int h = static_cast<int>(rng.uniform_int(5, 40));
    const Scene s = testing::random_clutter_scene(rng, w, h, rng.uniform(0.05, 0.5));
    const Cell ap = s.aps.front();
    const Mask sweep = visibility_sweep(w, h, ap, [&](Cell c) { return s.classes[c] != kAir; });
    const Mask oracle = testing::los_oracle(s, ap);
    for (std::size_t i = 0; i < sweep.size(); ++i) {
      ++cells;
      if (sweep.data()[i] != oracle.data()[i]) ++disagreements;
    }
  }
  EXPECT_EQ(disagreements, 0u) << "of " << cells;
}

}  // namespace
}  // namespace irdkit
