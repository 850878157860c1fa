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

// Exact grid geometry in "doubled" integer coordinates: the center of cell
// (i, j) is (2i, 2j) and its square spans (2i-1, 2i+1) x (2j-1, 2j+1). Cell
// vertices therefore have odd coordinates. A segment is blocked by a cell
// only if it passes through the open interior of that cell's square; grazing
// an edge or a vertex does not block.

#ifndef IRDKIT_GEOMETRY_HPP_
#define IRDKIT_GEOMETRY_HPP_

#include <cstdint>
#include <vector>

#include "irdkit/common.hpp"

namespace irdkit {

struct HalfPoint {
  std::int64_t x = 0;
  std::int64_t y = 0;

  static HalfPoint center(Cell c) { return {2 * std::int64_t{c.x}, 2 * std::int64_t{c.y}}; }

  friend bool operator==(const HalfPoint&, const HalfPoint&) = default;
};

inline std::int64_t cross(HalfPoint a, HalfPoint b) { return a.x * b.y - a.y * b.x; }

/// Visits, in order, every cell whose open square the open segment p0->p1
/// passes through. Exact integer arithmetic.
template <typename Visitor>
void for_each_crossed_cell(HalfPoint p0, HalfPoint p1, Visitor&& visit) {
  const std::int64_t dx = p1.x - p0.x;
  const std::int64_t dy = p1.y - p0.y;
  if (dx == 0 && dy == 0) return;

  // Start cell along one axis; false when the segment runs along a cell edge.
  auto start_index = [](std::int64_t p, std::int64_t d, std::int64_t& index) {
    if ((p & 1) == 0) {
      index = p / 2;
      return true;
    }
    if (d == 0) return false;
    index = d > 0 ? (p + 1) / 2 : (p - 1) / 2;
    return true;
  };
  std::int64_t ix = 0, iy = 0;
  if (!start_index(p0.x, dx, ix) || !start_index(p0.y, dy, iy)) return;

  const int sx = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
  const int sy = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
  const std::int64_t den_x = dx < 0 ? -dx : dx;
  const std::int64_t den_y = dy < 0 ? -dy : dy;
  // Parameter of the next boundary crossing is num/den; den = 0 means never.
  std::int64_t num_x = sx != 0 ? (2 * ix + sx) - p0.x : 0;
  std::int64_t num_y = sy != 0 ? (2 * iy + sy) - p0.y : 0;
  if (num_x < 0) num_x = -num_x;
  if (num_y < 0) num_y = -num_y;

  while (true) {
    visit(Cell{static_cast<int>(ix), static_cast<int>(iy)});
    // Compare t_x = num_x/den_x, t_y = num_y/den_y and 1.
    const bool x_done = den_x == 0 || num_x >= den_x;
    const bool y_done = den_y == 0 || num_y >= den_y;
    if (x_done && y_done) return;
    int step;  // 1: x, 2: y, 3: both (through a vertex)
    if (x_done) {
      step = 2;
    } else if (y_done) {
      step = 1;
    } else {
      const std::int64_t lhs = num_x * den_y;
      const std::int64_t rhs = num_y * den_x;
      step = lhs < rhs ? 1 : (rhs < lhs ? 2 : 3);
    }
    if (step & 1) {
      ix += sx;
      num_x += 2;
    }
    if (step & 2) {
      iy += sy;
      num_y += 2;
    }
  }
}

/// True if no blocking cell other than `target` lies on the open segment.
template <typename BlockFn>
bool segment_clear(HalfPoint from, HalfPoint to, Cell target, BlockFn&& blocks) {
  bool clear = true;
  for_each_crossed_cell(from, to, [&](Cell c) {
    if (clear && !(c == target) && blocks(c)) clear = false;
  });
  return clear;
}

// ---------------------------------------------------------------------------
// Rotational visibility sweep from a cell center.
//
// Cells are processed ring by ring in Chebyshev distance from the origin.
// A segment from the origin to a ring-r cell can only pass through the
// interior of cells in rings < r, so every cell is tested against the
// angular intervals of blockers already swept, and its own interval is added
// afterwards. Directions are kept as exact integer vectors; an interval is the
// open angular range spanned by a blocking square, so rays through a vertex
// shared by two disjoint squares stay visible, as in the segment test.

class AngularCover {
 public:
  /// Adds the open angular interval (lo, hi), measured counter-clockwise,
  /// lo != hi, span < pi.
  void add(HalfPoint lo, HalfPoint hi) {
    Key s{lo, 0};
    Key e{hi, before(hi, lo) || same_angle(hi, lo) ? 1 : 0};
    // Merge with every interval it strictly overlaps.
    auto first = intervals_.begin();
    while (first != intervals_.end() && !less(s, first->end)) ++first;
    auto last = first;
    while (last != intervals_.end() && less(last->start, e)) {
      if (less(last->start, s)) s = last->start;
      if (less(e, last->end)) e = last->end;
      ++last;
    }
    first = intervals_.erase(first, last);
    intervals_.insert(first, Interval{s, e});
  }

  /// True if direction v lies strictly inside some interval.
  bool covers(HalfPoint v) const { return covers_key(Key{v, 0}) || covers_key(Key{v, 1}); }

  std::size_t size() const { return intervals_.size(); }

 private:
  struct Key {
    HalfPoint dir;
    int turn;
  };
  struct Interval {
    Key start;
    Key end;
  };

  static int half(HalfPoint v) { return (v.y > 0 || (v.y == 0 && v.x > 0)) ? 0 : 1; }
  static bool before(HalfPoint a, HalfPoint b) {
    const int ha = half(a), hb = half(b);
    if (ha != hb) return ha < hb;
    return cross(a, b) > 0;
  }
  static bool same_angle(HalfPoint a, HalfPoint b) { return half(a) == half(b) && cross(a, b) == 0; }
  static bool less(const Key& a, const Key& b) {
    if (a.turn != b.turn) return a.turn < b.turn;
    return before(a.dir, b.dir);
  }

  bool covers_key(const Key& q) const {
    // Last interval whose start is strictly before q.
    auto it = std::partition_point(intervals_.begin(), intervals_.end(),
                                   [&](const Interval& iv) { return less(iv.start, q); });
    if (it == intervals_.begin()) return false;
    --it;
    return less(q, it->end);
  }

  // Sorted by start; pairwise non-overlapping, so ends are sorted as well.
  std::vector<Interval> intervals_;
};

/// Angular extent of cell `c`'s square as seen from `origin` (doubled coords).
inline void square_extent(HalfPoint origin, Cell c, HalfPoint& lo, HalfPoint& hi) {
  const HalfPoint center = HalfPoint::center(c);
  HalfPoint v[4];
  int n = 0;
  for (int sx : {-1, 1})
    for (int sy : {-1, 1}) v[n++] = {center.x + sx - origin.x, center.y + sy - origin.y};
  // The square never contains the origin, so its span is below pi and the
  // extreme vertices are those with every other vertex on one side.
  lo = v[0];
  hi = v[0];
  for (int i = 1; i < 4; ++i) {
    if (cross(lo, v[i]) < 0) lo = v[i];
    if (cross(hi, v[i]) > 0) hi = v[i];
  }
}

/// Visibility of every cell center from the center of `origin`. Blocking
/// cells are themselves reported visible when nothing in front of them blocks.
template <typename BlockFn>
Mask visibility_sweep(int width, int height, Cell origin, BlockFn&& blocks) {
  Mask visible(width, height, 0);
  if (!visible.contains(origin)) throw ValidationError("sweep origin outside grid");
  const HalfPoint o = HalfPoint::center(origin);
  AngularCover cover;
  visible[origin] = 1;
  const int max_ring = std::max({origin.x, width - 1 - origin.x, origin.y, height - 1 - origin.y});
  std::vector<Cell> ring;
  for (int r = 1; r <= max_ring; ++r) {
    ring.clear();
    for (int y = origin.y - r; y <= origin.y + r; ++y) {
      if (y < 0 || y >= height) continue;
      if (y == origin.y - r || y == origin.y + r) {
        for (int x = std::max(0, origin.x - r); x <= std::min(width - 1, origin.x + r); ++x) ring.push_back({x, y});
      } else {
        if (origin.x - r >= 0) ring.push_back({origin.x - r, y});
        if (origin.x + r < width) ring.push_back({origin.x + r, y});
      }
    }
    for (const Cell& c : ring) {
      const HalfPoint dir{2 * std::int64_t{c.x - origin.x}, 2 * std::int64_t{c.y - origin.y}};
      visible[c] = cover.covers(dir) ? 0 : 1;
    }
    for (const Cell& c : ring) {
      if (!blocks(c)) continue;
      HalfPoint lo, hi;
      square_extent(o, c, lo, hi);
      cover.add(lo, hi);
    }
  }
  // Blockers in the origin cell itself are not meaningful; the origin is
  // always visible.
  return visible;
}

}  // namespace irdkit

#endif  // IRDKIT_GEOMETRY_HPP_
