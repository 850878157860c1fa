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

#include <cmath>
#include <cstdlib>

#include <gtest/gtest.h>

#include "irdkit/propagate.hpp"
#include "irdkit/radiomap.hpp"
#include "test_support.hpp"

namespace irdkit {
namespace {

double FreeSpace(const SimConfig& cfg, Cell ap, Cell c) {
  return cfg.p_max - 20.0 * std::log10(std::hypot(double(c.x - ap.x), double(c.y - ap.y)));
}

Scene Generated(std::uint64_t seed, int size = 32) {
  SceneSpec spec;
  spec.width = size;
  spec.height = size;
  spec.room_count = 2;
  spec.min_room_extent = 6;
  spec.max_room_extent = 14;
  spec.ap_count = 3;
  spec.seed = seed;
  return generate_scene(spec);
}

TEST(SimulateRm, FreeSpaceMatchesClosedForm) {
  const Scene s = make_empty_scene(33, 33);
  const Cell ap{16, 16};
  const SimConfig cfg;
  const RadioMap rm = simulate_rm(s, ap, cfg);
  double worst = 0.0;
  for (int y = 0; y < 33; ++y)
    for (int x = 0; x < 33; ++x) {
      if (Cell{x, y} == ap) continue;
      worst = std::max(worst, std::abs(rm.rssi(x, y) - FreeSpace(cfg, ap, {x, y})));
    }
  EXPECT_LT(worst, 1.0);
  EXPECT_EQ(rm.rssi[ap], static_cast<float>(cfg.p_max));
}

TEST(SimulateRm, FreeSpaceMonotoneAndIsotropic) {
  const Scene s = make_empty_scene(41, 41);
  const Cell ap{20, 20};
  const RadioMap rm = simulate_rm(s, ap);
  // One cell away is the reference distance, so it ties with the AP cell.
  EXPECT_LE(rm.rssi(21, 20), rm.rssi(20, 20));
  for (int x = 22; x < 41; ++x) EXPECT_LT(rm.rssi(x, 20), rm.rssi(x - 1, 20));
  for (int k = 1; k <= 20; ++k) {
    const float ref = rm.rssi(20 + k, 20);
    EXPECT_NEAR(rm.rssi(20 - k, 20), ref, 0.5);
    EXPECT_NEAR(rm.rssi(20, 20 + k), ref, 0.5);
    EXPECT_NEAR(rm.rssi(20, 20 - k), ref, 0.5);
  }
  // Pythagorean triples: equal distance along different directions.
  EXPECT_NEAR(rm.rssi(25, 20), rm.rssi(23, 24), 0.5);
  EXPECT_NEAR(rm.rssi(30, 20), rm.rssi(26, 28), 0.5);
  EXPECT_NEAR(rm.rssi(35, 20), rm.rssi(29, 32), 0.5);
}

TEST(SimulateRm, SingleWallOffsetMatchesCoefficient) {
  // Wall of h_t = 0.05 spanning the grid between AP and probe.
  Scene wall = make_empty_scene(31, 41);
  for (int y = 0; y < 41; ++y) wall.classes(20, y) = 1;  // concrete, t = 0.05
  const Scene open = make_empty_scene(31, 41);
  const Cell ap{10, 20};
  const double expected = 20.0 * std::log10(0.05);  // -26.02 dB

  SimConfig single;
  single.max_reflections = 0;
  single.max_diffractions = 0;
  for (const SimConfig& cfg : {single, SimConfig{}}) {
    const RadioMap a = simulate_rm(wall, ap, cfg);
    const RadioMap b = simulate_rm(open, ap, cfg);
    for (const Cell probe : {Cell{25, 20}, Cell{28, 20}, Cell{30, 24}})
      EXPECT_NEAR(a.rssi[probe] - b.rssi[probe], expected, 1.0) << probe.x << "," << probe.y;
  }
}

TEST(SimulateRm, InvariantsOnGeneratedScenes) {
  const SimConfig cfg;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const Scene s = Generated(seed);
    for (const Cell ap : s.aps) {
      const RadioMap rm = simulate_rm(s, ap, cfg);
      EXPECT_EQ(rm.rssi[ap], static_cast<float>(cfg.p_max));
      for (float v : rm.rssi.data()) {
        EXPECT_TRUE(std::isfinite(v));
        EXPECT_GE(v, cfg.p_min);
        EXPECT_LE(v, cfg.p_max);
      }
    }
  }
}

TEST(SimulateRm, MirroredSceneGivesBitMirroredMap) {
  for (std::uint64_t seed = 4; seed <= 6; ++seed) {
    const Scene s = Generated(seed);
    const Scene m = s.mirrored();
    for (std::size_t k = 0; k < s.aps.size(); ++k)
      EXPECT_EQ(simulate_rm(m, m.aps[k]).rssi, simulate_rm(s, s.aps[k]).rssi.mirrored()) << "seed " << seed;
  }
}

TEST(SimulateRm, IndependentOfWorkerCount) {
  const Scene s = Generated(9);
  setenv("IRD_THREADS", "1", 1);
  const RadioMap one = simulate_rm(s, s.aps.front());
  setenv("IRD_THREADS", "3", 1);
  const RadioMap three = simulate_rm(s, s.aps.front());
  unsetenv("IRD_THREADS");
  EXPECT_EQ(one, three);
}

TEST(SimulateRm, RaisingOneTransmissionCoefficientNeverLowersPower) {
  const SimConfig cfg;
  Rng rng(21);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const Scene s = Generated(seed);
    const FieldPair f = derive_fields(s);
    std::vector<Cell> material;
    for (int y = 0; y < s.height; ++y)
      for (int x = 0; x < s.width; ++x)
        if (s.classes(x, y) != kAir) material.push_back({x, y});
    const Grid<double> base = simulate_power(s, f, s.aps.front(), cfg);
    for (int trial = 0; trial < 3; ++trial) {
      FieldPair g = f;
      const Cell c = material[static_cast<std::size_t>(rng.uniform_int(0, material.size() - 1))];
      g.h_t[c] = std::min(1.0, g.h_t[c] + 0.3);
      const Grid<double> raised = simulate_power(s, g, s.aps.front(), cfg);
      for (std::size_t i = 0; i < base.size(); ++i) EXPECT_GE(raised.data()[i], base.data()[i]);
    }
  }
}

TEST(SimulateRm, DeeperBudgetsNeverLowerPower) {
  const Scene s = Generated(2);
  const FieldPair f = derive_fields(s);
  SimConfig cfg;
  const Grid<double> base = simulate_power(s, f, s.aps.front(), cfg);
  for (int which = 0; which < 3; ++which) {
    SimConfig deeper = cfg;
    (which == 0 ? deeper.max_reflections : which == 1 ? deeper.max_transmissions : deeper.max_diffractions) += 1;
    const Grid<double> more = simulate_power(s, f, s.aps.front(), deeper);
    for (std::size_t i = 0; i < base.size(); ++i) EXPECT_GE(more.data()[i], base.data()[i]) << which;
  }
}

TEST(SimulateRm, DiffractionOnlyAddsPowerInShadow) {
  // Closed concrete box around the AP; its outer corners face exterior air,
  // a different room, so they survive pruning and radiate outwards.
  Scene s = make_empty_scene(25, 25);
  for (int i = 3; i <= 11; ++i) {
    s.classes(i, 3) = s.classes(i, 11) = 1;
    s.classes(3, i) = s.classes(11, i) = 1;
  }
  const FieldPair f = derive_fields(s);
  const Cell ap{7, 6};
  SimConfig without;
  without.max_diffractions = 0;
  const Grid<double> a = simulate_power(s, f, ap, without);
  const Grid<double> b = simulate_power(s, f, ap, SimConfig{});
  const Mask los = testing::los_oracle(s, ap);
  int gained = 0;
  for (int y = 0; y < 25; ++y)
    for (int x = 0; x < 25; ++x) {
      if (los(x, y) || s.classes(x, y) != kAir) {
        EXPECT_EQ(a(x, y), b(x, y)) << x << "," << y;
      } else if (b(x, y) > a(x, y)) {
        ++gained;
      }
    }
  EXPECT_GT(gained, 0);
}

TEST(SimulateRm, ZeroRaysIsConfigError) {
  SimConfig cfg;
  cfg.rays = 0;
  EXPECT_THROW(simulate_rm(make_empty_scene(4, 4), {1, 1}, cfg), ConfigError);
  cfg = SimConfig{};
  cfg.p_min = cfg.p_max;
  EXPECT_THROW(simulate_rm(make_empty_scene(4, 4), {1, 1}, cfg), ConfigError);
}

// ---------------------------------------------------------------------------

TEST(RadioMapIo, RoundTripIsIdentity) {
  const Scene s = Generated(3);
  const RadioMap rm = simulate_rm(s, s.aps.front());
  const auto dir = testing::temp_dir("radiomap");
  const std::string path = (dir / "m.irdmap").string();
  save_radiomap(rm, path);
  EXPECT_EQ(load_radiomap(path).rssi, rm.rssi);
  const ImportResult imp = import_radiomap(path);
  EXPECT_EQ(imp.map.rssi, rm.rssi);
  EXPECT_EQ(imp.clamped, 0u);
}

TEST(RadioMapIo, RejectsNanAndBadHeaders) {
  Grid<float> g(3, 2, -60.0f);
  g(1, 1) = std::nanf("");
  EXPECT_THROW(decode_radiomap(encode_radiomap(g)), ParseError);

  const std::string ok = encode_radiomap(Grid<float>(3, 2, -60.0f));
  auto kind = [](const std::string& b) {
    try {
      decode_radiomap(b);
    } catch (const ParseError& e) {
      return e.kind();
    }
    return ParseError::Kind::kInvalidValue;
  };
  EXPECT_EQ(kind("IRDMAP2\n" + ok.substr(8)), ParseError::Kind::kMalformedHeader);
  EXPECT_EQ(kind(ok.substr(0, ok.size() - 4)), ParseError::Kind::kTruncated);
  EXPECT_EQ(kind(ok + "abcd"), ParseError::Kind::kDimensionMismatch);
}

TEST(RadioMapIo, ImportClampsAndCounts) {
  Grid<float> g(4, 1, -60.0f);
  g(0, 0) = -200.0f;
  g(3, 0) = 5.0f;
  const auto dir = testing::temp_dir("radiomap_import");
  const std::string path = (dir / "ext.irdmap").string();
  write_file_bytes(path, encode_radiomap(g));
  const ImportResult r = import_radiomap(path, -150.0, -30.0);
  EXPECT_EQ(r.clamped, 2u);
  EXPECT_EQ(r.map.rssi(0, 0), -150.0f);
  EXPECT_EQ(r.map.rssi(3, 0), -30.0f);
  EXPECT_EQ(r.map.rssi(1, 0), -60.0f);
}

}  // namespace
}  // namespace irdkit
