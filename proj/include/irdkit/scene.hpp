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

#ifndef IRDKIT_SCENE_HPP_
#define IRDKIT_SCENE_HPP_

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "irdkit/common.hpp"

namespace irdkit {

inline constexpr int kAir = 0;

struct Material {
  int id = 1;
  std::string name;
  double reflection = 0.0;    // amplitude ratio
  double transmission = 0.0;  // amplitude ratio

  friend bool operator==(const Material&, const Material&) = default;
};

class MaterialPalette {
 public:
  MaterialPalette() = default;
  explicit MaterialPalette(std::vector<Material> entries) : entries_(std::move(entries)) {
    validate();
  }

  /// concrete / drywall / glass. These are configuration, not physics.
  static MaterialPalette defaults() {
    return MaterialPalette({{1, "concrete", 0.7, 0.05}, {2, "drywall", 0.4, 0.3}, {3, "glass", 0.2, 0.8}});
  }

  const std::vector<Material>& entries() const { return entries_; }

  const Material* find(int id) const {
    for (const auto& m : entries_)
      if (m.id == id) return &m;
    return nullptr;
  }

  bool contains(int id) const { return find(id) != nullptr; }

  Material& at(int id) {
    for (auto& m : entries_)
      if (m.id == id) return m;
    throw ValidationError("unknown material class " + std::to_string(id));
  }

  void validate() const {
    std::set<int> seen;
    for (const auto& m : entries_) {
      if (m.id < 1) throw ValidationError("material class id must be >= 1 (0 is air)");
      if (!seen.insert(m.id).second)
        throw ValidationError("duplicate material class id " + std::to_string(m.id));
      if (m.name.empty() || m.name.find_first_of(" \t\r\n") != std::string::npos)
        throw ValidationError("material name must be a single non-empty token");
      if (!(m.reflection > 0.0 && m.reflection <= 1.0))
        throw ValidationError("material '" + m.name + "': reflection must be in (0, 1]");
      if (!(m.transmission >= 0.0 && m.transmission <= 1.0))
        throw ValidationError("material '" + m.name + "': transmission must be in [0, 1]");
    }
  }

  friend bool operator==(const MaterialPalette&, const MaterialPalette&) = default;

 private:
  std::vector<Material> entries_;
};

/// Material-class grid with AP placements. Immutable once validated.
struct Scene {
  int width = 0;
  int height = 0;
  double delta = 0.25;  // meters per cell
  Grid<int> classes;
  MaterialPalette palette;
  std::vector<Cell> aps;

  bool is_air(Cell c) const { return classes[c] == kAir; }

  void validate() const {
    if (width < 1 || height < 1) throw ValidationError("scene dimensions must be positive");
    if (!(delta > 0.0) || !std::isfinite(delta)) throw ValidationError("delta must be > 0");
    if (classes.width() != width || classes.height() != height)
      throw ValidationError("class grid does not match scene dimensions");
    palette.validate();
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        const int k = classes(x, y);
        if (k != kAir && !palette.contains(k))
          throw ValidationError("cell (" + std::to_string(x) + "," + std::to_string(y) +
                                ") has unknown class " + std::to_string(k));
      }
    for (const auto& ap : aps) validate_ap(ap);
  }

  void validate_ap(Cell ap) const {
    if (!classes.contains(ap))
      throw ValidationError("AP (" + std::to_string(ap.x) + "," + std::to_string(ap.y) +
                            ") lies outside the grid");
    if (classes[ap] != kAir)
      throw ValidationError("AP (" + std::to_string(ap.x) + "," + std::to_string(ap.y) +
                            ") is not on an air cell");
  }

  Scene mirrored() const {
    Scene out = *this;
    out.classes = classes.mirrored();
    for (auto& ap : out.aps) ap.x = width - 1 - ap.x;
    return out;
  }

  friend bool operator==(const Scene&, const Scene&) = default;
};

inline Scene make_empty_scene(int width, int height, double delta = 0.25,
                              MaterialPalette palette = MaterialPalette::defaults()) {
  Scene s;
  s.width = width;
  s.height = height;
  s.delta = delta;
  s.classes = Grid<int>(width, height, kAir);
  s.palette = std::move(palette);
  return s;
}

/// Co-registered reflection / transmission coefficient fields.
struct FieldPair {
  Grid<double> h_r;
  Grid<double> h_t;
};

/// Air maps to (0, 1); material class k maps to its palette (r, t).
inline FieldPair derive_fields(const Scene& scene) {
  FieldPair f{Grid<double>(scene.width, scene.height, 0.0), Grid<double>(scene.width, scene.height, 1.0)};
  if (scene.classes.width() != scene.width || scene.classes.height() != scene.height)
    throw ValidationError("class grid does not match scene dimensions");
  for (std::size_t i = 0; i < scene.classes.size(); ++i) {
    const int k = scene.classes.data()[i];
    if (k == kAir) continue;
    const Material* m = scene.palette.find(k);
    if (m == nullptr) throw ValidationError("unknown material class " + std::to_string(k));
    f.h_r.data()[i] = m->reflection;
    f.h_t.data()[i] = m->transmission;
  }
  return f;
}

// ---------------------------------------------------------------------------
// Procedural generation.

/// Axis-aligned room; the perimeter cells are walls, the interior is air.
struct Room {
  int x = 0;
  int y = 0;
  int w = 3;
  int h = 3;
};

struct SceneSpec {
  int width = 32;
  int height = 32;
  double delta = 0.25;

  int room_count = 2;
  int min_room_extent = 6;
  int max_room_extent = 12;
  std::vector<Room> fixed_rooms;  // placed first, as given

  double door_probability = 0.5;
  double window_probability = 0.25;
  int door_width = 2;
  int window_width = 2;
  // Every generated room gets at least one aperture when set.
  bool force_aperture = true;

  MaterialPalette palette = MaterialPalette::defaults();
  std::vector<int> wall_classes{1, 2};
  int door_class = 3;
  int window_class = 3;

  int ap_count = 0;
  std::uint64_t seed = 1;

  void validate() const {
    if (width < 1 || height < 1) throw ConfigError("scene spec: grid size must be positive");
    if (!(delta > 0.0)) throw ConfigError("scene spec: delta must be > 0");
    if (room_count < 0) throw ConfigError("scene spec: room count must be >= 0");
    if (ap_count < 0) throw ConfigError("scene spec: AP count must be >= 0");
    auto prob_ok = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob_ok(door_probability) || !prob_ok(window_probability))
      throw ConfigError("scene spec: aperture probabilities must lie in [0, 1]");
    if (door_width < 1 || window_width < 1) throw ConfigError("scene spec: aperture widths must be >= 1");
    if (min_room_extent < 3 || max_room_extent < min_room_extent)
      throw ConfigError("scene spec: room extents need 3 <= min <= max");
    try {
      palette.validate();
    } catch (const ValidationError& e) {
      throw ConfigError(std::string("scene spec: ") + e.what());
    }
    if (wall_classes.empty()) throw ConfigError("scene spec: no wall classes");
    for (int k : wall_classes)
      if (!palette.contains(k)) throw ConfigError("scene spec: wall class not in palette");
    if (!palette.contains(door_class) || !palette.contains(window_class))
      throw ConfigError("scene spec: aperture class not in palette");
    for (const auto& r : fixed_rooms)
      if (r.w < 3 || r.h < 3) throw ConfigError("scene spec: fixed rooms need extent >= 3");
  }
};

namespace detail {

inline bool rooms_clear(const Room& a, const Room& b) {
  // One air cell of separation keeps rooms from sharing walls.
  return a.x + a.w + 1 <= b.x || b.x + b.w + 1 <= a.x || a.y + a.h + 1 <= b.y || b.y + b.h + 1 <= a.y;
}

inline void paint_room(Grid<int>& classes, const Room& r, int wall_class) {
  for (int x = r.x; x < r.x + r.w; ++x) {
    classes(x, r.y) = wall_class;
    classes(x, r.y + r.h - 1) = wall_class;
  }
  for (int y = r.y; y < r.y + r.h; ++y) {
    classes(r.x, y) = wall_class;
    classes(r.x + r.w - 1, y) = wall_class;
  }
  for (int y = r.y + 1; y < r.y + r.h - 1; ++y)
    for (int x = r.x + 1; x < r.x + r.w - 1; ++x) classes(x, y) = kAir;
}

// side: 0 top, 1 bottom, 2 left, 3 right. Corners are never cut.
inline void cut_aperture(Grid<int>& classes, const Room& r, int side, int run, int cls, Rng& rng) {
  const int span = (side < 2 ? r.w : r.h) - 2;
  run = std::min(run, span);
  const int offset = 1 + static_cast<int>(rng.uniform_int(0, span - run));
  for (int i = 0; i < run; ++i) {
    switch (side) {
      case 0: classes(r.x + offset + i, r.y) = cls; break;
      case 1: classes(r.x + offset + i, r.y + r.h - 1) = cls; break;
      case 2: classes(r.x, r.y + offset + i) = cls; break;
      default: classes(r.x + r.w - 1, r.y + offset + i) = cls; break;
    }
  }
}

}  // namespace detail

/// Deterministic for a fixed spec (including seed).
inline Scene generate_scene(const SceneSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  Scene scene = make_empty_scene(spec.width, spec.height, spec.delta, spec.palette);

  std::vector<Room> rooms;
  for (const auto& r : spec.fixed_rooms) {
    if (r.x < 0 || r.y < 0 || r.x + r.w > spec.width || r.y + r.h > spec.height)
      throw SizingError("fixed room does not fit inside the grid");
    for (const auto& other : rooms)
      if (!detail::rooms_clear(r, other)) throw SizingError("fixed rooms overlap");
    rooms.push_back(r);
  }

  if (spec.room_count > 0) {
    // Rooms keep a one-cell air margin to the grid edge so the exterior stays connected.
    if (spec.min_room_extent + 2 > spec.width || spec.min_room_extent + 2 > spec.height)
      throw SizingError("grid " + std::to_string(spec.width) + "x" + std::to_string(spec.height) +
                        " too small for rooms of extent " + std::to_string(spec.min_room_extent));
    constexpr int kAttempts = 2000;
    for (int n = 0; n < spec.room_count; ++n) {
      bool placed = false;
      for (int attempt = 0; attempt < kAttempts && !placed; ++attempt) {
        Room r;
        r.w = static_cast<int>(rng.uniform_int(spec.min_room_extent,
                                               std::min(spec.max_room_extent, spec.width - 2)));
        r.h = static_cast<int>(rng.uniform_int(spec.min_room_extent,
                                               std::min(spec.max_room_extent, spec.height - 2)));
        r.x = static_cast<int>(rng.uniform_int(1, spec.width - 1 - r.w));
        r.y = static_cast<int>(rng.uniform_int(1, spec.height - 1 - r.h));
        placed = std::all_of(rooms.begin(), rooms.end(),
                             [&](const Room& o) { return detail::rooms_clear(r, o); });
        if (placed) rooms.push_back(r);
      }
      if (!placed)
        throw SizingError("could not place room " + std::to_string(n + 1) + " of " +
                          std::to_string(spec.room_count) + " in a " + std::to_string(spec.width) +
                          "x" + std::to_string(spec.height) + " grid");
    }
  }

  for (const auto& r : rooms) {
    const int wall = spec.wall_classes[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(spec.wall_classes.size()) - 1))];
    detail::paint_room(scene.classes, r, wall);
    bool any_aperture = false;
    for (int side = 0; side < 4; ++side) {
      if (rng.bernoulli(spec.door_probability)) {
        detail::cut_aperture(scene.classes, r, side, spec.door_width, spec.door_class, rng);
        any_aperture = true;
      }
      if (rng.bernoulli(spec.window_probability)) {
        detail::cut_aperture(scene.classes, r, side, spec.window_width, spec.window_class, rng);
        any_aperture = true;
      }
    }
    if (spec.force_aperture && !any_aperture) {
      const int side = static_cast<int>(rng.uniform_int(0, 3));
      detail::cut_aperture(scene.classes, r, side, spec.door_width, spec.door_class, rng);
    }
  }

  if (spec.ap_count > 0) {
    std::vector<Cell> free;
    for (int y = 1; y + 1 < spec.height; ++y)
      for (int x = 1; x + 1 < spec.width; ++x)
        if (scene.classes(x, y) == kAir) free.push_back({x, y});
    if (static_cast<int>(free.size()) < spec.ap_count)
      throw SizingError("not enough air cells for " + std::to_string(spec.ap_count) + " APs");
    rng.shuffle(free);
    free.resize(static_cast<std::size_t>(spec.ap_count));
    std::sort(free.begin(), free.end());
    scene.aps = std::move(free);
  }

  scene.validate();
  return scene;
}

}  // namespace irdkit

#endif  // IRDKIT_SCENE_HPP_
