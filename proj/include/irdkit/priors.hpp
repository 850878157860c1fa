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

// Physics-informed priors: diffraction corners, strong-transmission
// boundaries, wall-following discontinuity contours, line-of-sight masks and
// the conditioning stack handed to the generator.

#ifndef IRDKIT_PRIORS_HPP_
#define IRDKIT_PRIORS_HPP_

#include <array>
#include <deque>
#include <limits>
#include <vector>

#include "irdkit/common.hpp"
#include "irdkit/geometry.hpp"
#include "irdkit/scene.hpp"

namespace irdkit {

struct CandidatePoint {
  Cell cell;
  Cell normal;             // sum of unit vectors toward zero-reflection neighbors
  std::uint8_t faces = 0;  // bit i set when kFourNeighbors[i] has zero reflection

  friend bool operator==(const CandidatePoint&, const CandidatePoint&) = default;
};

/// Both lists are kept in row-major cell order.
struct CandidateSet {
  std::vector<CandidatePoint> diffraction;
  std::vector<CandidatePoint> transmission;

  friend bool operator==(const CandidateSet&, const CandidateSet&) = default;
};

namespace detail {

inline double reflection_or_air(const Grid<double>& h_r, int x, int y) {
  return h_r.contains(x, y) ? h_r(x, y) : 0.0;
}

inline CandidatePoint describe_point(const Grid<double>& h_r, Cell c) {
  CandidatePoint p{c, {0, 0}, 0};
  for (int i = 0; i < 4; ++i) {
    const Cell d = kFourNeighbors[i];
    if (reflection_or_air(h_r, c.x + d.x, c.y + d.y) == 0.0) {
      p.faces |= static_cast<std::uint8_t>(1u << i);
      p.normal.x += d.x;
      p.normal.y += d.y;
    }
  }
  return p;
}

}  // namespace detail

/// Corner rule: non-zero own reflection, and among the four direct neighbors
/// (off-grid counts as zero) at least one non-zero and at least two zero.
inline bool satisfies_corner_rule(const Grid<double>& h_r, Cell c) {
  if (!h_r.contains(c) || !(h_r[c] > 0.0)) return false;
  int zero = 0, nonzero = 0;
  for (const Cell d : kFourNeighbors) {
    if (detail::reflection_or_air(h_r, c.x + d.x, c.y + d.y) > 0.0)
      ++nonzero;
    else
      ++zero;
  }
  return nonzero >= 1 && zero >= 2;
}

inline CandidateSet detect_diffraction_candidates(const FieldPair& fields) {
  CandidateSet out;
  const auto& h_r = fields.h_r;
  for (int y = 0; y < h_r.height(); ++y)
    for (int x = 0; x < h_r.width(); ++x)
      if (satisfies_corner_rule(h_r, {x, y})) out.diffraction.push_back(detail::describe_point(h_r, {x, y}));
  return out;
}

/// Material cells whose transmission coefficient reaches tau_t.
inline CandidateSet detect_transmission_boundaries(const FieldPair& fields, double tau_t) {
  if (!(tau_t > 0.0 && tau_t <= 1.0)) throw ConfigError("tau_t must lie in (0, 1]");
  require_same_shape(fields.h_r, fields.h_t, "detect_transmission_boundaries");
  CandidateSet out;
  for (int y = 0; y < fields.h_r.height(); ++y)
    for (int x = 0; x < fields.h_r.width(); ++x)
      if (fields.h_r(x, y) > 0.0 && fields.h_t(x, y) >= tau_t)
        out.transmission.push_back(detail::describe_point(fields.h_r, {x, y}));
  return out;
}

enum class CullRule {
  // Remove a corner only if the AP lies strictly outside every exposed face,
  // i.e. the corner is fully lit and casts no wedge shadow.
  kLitFaces,
  // Literal quadrant test on the summed normal:
  // sign(dx)sign(nx) >= 0, sign(dy)sign(ny) >= 0 and n.d > 0.
  kNormalQuadrant,
};

inline bool corner_fully_lit(const CandidatePoint& p, Cell ap, CullRule rule) {
  const Cell d{ap.x - p.cell.x, ap.y - p.cell.y};
  if (rule == CullRule::kNormalQuadrant) {
    const Cell n = p.normal;
    return sign(d.x) * sign(n.x) >= 0 && sign(d.y) * sign(n.y) >= 0 && n.x * d.x + n.y * d.y > 0;
  }
  if (p.faces == 0) return false;
  for (int i = 0; i < 4; ++i) {
    if (!(p.faces & (1u << i))) continue;
    const Cell u = kFourNeighbors[i];
    if (u.x * d.x + u.y * d.y <= 0) return false;
  }
  return true;
}

/// Directional culling of diffraction points; transmission points pass through.
inline CandidateSet cull_directional(const CandidateSet& candidates, Cell ap,
                                     CullRule rule = CullRule::kLitFaces) {
  CandidateSet out;
  out.transmission = candidates.transmission;
  for (const auto& p : candidates.diffraction)
    if (!corner_fully_lit(p, ap, rule)) out.diffraction.push_back(p);
  return out;
}

/// Air-room labels: 4-connected components of air cells, -1 for material.
/// Labels are assigned in row-major order of each component's first cell.
inline Grid<int> label_rooms(const Scene& scene) {
  Grid<int> label(scene.width, scene.height, -1);
  int next = 0;
  std::vector<Cell> stack;
  for (int y = 0; y < scene.height; ++y)
    for (int x = 0; x < scene.width; ++x) {
      if (scene.classes(x, y) != kAir || label(x, y) >= 0) continue;
      label(x, y) = next;
      stack.push_back({x, y});
      while (!stack.empty()) {
        const Cell c = stack.back();
        stack.pop_back();
        for (const Cell d : kFourNeighbors) {
          const Cell n{c.x + d.x, c.y + d.y};
          if (!scene.classes.contains(n) || scene.classes[n] != kAir || label[n] >= 0) continue;
          label[n] = next;
          stack.push_back(n);
        }
      }
      ++next;
    }
  return label;
}

/// Removes diffraction points whose adjacent air cells all belong to the AP's room.
inline CandidateSet prune_same_room(const CandidateSet& candidates, Cell ap, const Scene& scene) {
  scene.validate_ap(ap);
  const Grid<int> rooms = label_rooms(scene);
  const int ap_room = rooms[ap];
  CandidateSet out;
  out.transmission = candidates.transmission;
  for (const auto& p : candidates.diffraction) {
    bool all_in_ap_room = true;
    for (const Cell d : kFourNeighbors) {
      const Cell n{p.cell.x + d.x, p.cell.y + d.y};
      if (rooms.contains(n) && rooms[n] >= 0 && rooms[n] != ap_room) all_in_ap_room = false;
    }
    if (!all_in_ap_room) out.diffraction.push_back(p);
  }
  return out;
}

namespace detail {

// 8-connected BFS over material cells from `sources`, up to `limit` steps.
inline Grid<int> material_bfs(const Grid<double>& h_r, const std::vector<Cell>& sources, int limit) {
  Grid<int> dist(h_r.width(), h_r.height(), -1);
  std::deque<Cell> queue;
  for (const Cell s : sources) {
    dist[s] = 0;
    queue.push_back(s);
  }
  while (!queue.empty()) {
    const Cell c = queue.front();
    queue.pop_front();
    if (dist[c] >= limit) continue;
    for (const Cell d : kEightNeighbors) {
      const Cell n{c.x + d.x, c.y + d.y};
      if (!h_r.contains(n) || !(h_r[n] > 0.0) || dist[n] >= 0) continue;
      dist[n] = dist[c] + 1;
      queue.push_back(n);
    }
  }
  return dist;
}

}  // namespace detail

/// Wall-following contour through diffraction and transmission points.
///
/// Every point is marked. Each point is then linked to its nearest other
/// point(s) inside the same 8-connected material body, marking every cell on
/// any shortest material path between them. Links never leave material cells,
/// so straight source-to-scatterer segments through air are never part of
/// the contour. max_link bounds the path length in cells (0: unbounded).
inline Mask link_contours(const CandidateSet& points, const FieldPair& fields, int max_link = 0) {
  const auto& h_r = fields.h_r;
  Mask contour(h_r.width(), h_r.height(), 0);
  Mask is_point(h_r.width(), h_r.height(), 0);
  std::vector<Cell> all;
  for (const auto* list : {&points.diffraction, &points.transmission})
    for (const auto& p : *list) {
      if (!h_r.contains(p.cell) || !(h_r[p.cell] > 0.0))
        throw ValidationError("contour point is not a material cell");
      if (!is_point[p.cell]) all.push_back(p.cell);
      is_point[p.cell] = 1;
      contour[p.cell] = 1;
    }
  std::sort(all.begin(), all.end());
  const int limit = max_link > 0 ? max_link : std::numeric_limits<int>::max();

  for (const Cell s : all) {
    const Grid<int> from_s = detail::material_bfs(h_r, {s}, limit);
    int best = std::numeric_limits<int>::max();
    for (const Cell t : all)
      if (!(t == s) && from_s[t] > 0) best = std::min(best, from_s[t]);
    if (best == std::numeric_limits<int>::max() || best <= 1) continue;
    std::vector<Cell> nearest;
    for (const Cell t : all)
      if (!(t == s) && from_s[t] == best) nearest.push_back(t);
    const Grid<int> from_t = detail::material_bfs(h_r, nearest, best);
    for (std::size_t i = 0; i < contour.size(); ++i) {
      const int a = from_s.data()[i], b = from_t.data()[i];
      if (a >= 0 && b >= 0 && a + b == best) contour.data()[i] = 1;
    }
  }
  return contour;
}

/// LoS from the AP cell center to every cell center; any material cell blocks.
inline Mask compute_los_mask(const Scene& scene, Cell ap) {
  scene.validate_ap(ap);
  return visibility_sweep(scene.width, scene.height, ap,
                          [&](Cell c) { return scene.classes[c] != kAir; });
}

/// LoS air cells 4-adjacent to at least one NLoS air cell.
inline Mask extract_los_contour(const Mask& los, const Scene& scene) {
  require_same_shape(los, scene.classes, "extract_los_contour");
  Mask out(los.width(), los.height(), 0);
  for (int y = 0; y < los.height(); ++y)
    for (int x = 0; x < los.width(); ++x) {
      if (!los(x, y) || scene.classes(x, y) != kAir) continue;
      for (const Cell d : kFourNeighbors) {
        const Cell n{x + d.x, y + d.y};
        if (los.contains(n) && !los[n] && scene.classes[n] == kAir) {
          out(x, y) = 1;
          break;
        }
      }
    }
  return out;
}

// ---------------------------------------------------------------------------

struct PriorConfig {
  double tau_t = 0.5;
  double sigma_m = 0.0;  // AP heatmap width in meters; <= 0 selects 4 * delta
  double w_b = 4.0;
  int rho = 1;
  int max_link = 0;
  CullRule cull_rule = CullRule::kLitFaces;

  double sigma_for(const Scene& scene) const { return sigma_m > 0.0 ? sigma_m : 4.0 * scene.delta; }

  void validate() const {
    if (!(tau_t > 0.0 && tau_t <= 1.0)) throw ConfigError("tau_t must lie in (0, 1]");
    if (!(w_b >= 1.0)) throw ConfigError("w_b must be >= 1");
    if (rho < 0) throw ConfigError("rho must be >= 0");
    if (max_link < 0) throw ConfigError("max_link must be >= 0");
  }
};

struct PriorSet {
  Cell ap;
  CandidateSet raw;        // corner rule + transmission threshold
  CandidateSet validated;  // after directional culling and same-room pruning
  Mask contour;            // Gamma
  Mask los_mask;
  Mask los_contour;

  friend bool operator==(const PriorSet&, const PriorSet&) = default;
};

inline PriorSet extract_priors(const Scene& scene, const FieldPair& fields, Cell ap,
                               const PriorConfig& config = {}) {
  config.validate();
  scene.validate_ap(ap);
  require_same_shape(fields.h_r, scene.classes, "extract_priors");
  PriorSet ps;
  ps.ap = ap;
  ps.raw = detect_diffraction_candidates(fields);
  ps.raw.transmission = detect_transmission_boundaries(fields, config.tau_t).transmission;
  ps.validated = prune_same_room(cull_directional(ps.raw, ap, config.cull_rule), ap, scene);
  ps.contour = link_contours(ps.validated, fields, config.max_link);
  ps.los_mask = compute_los_mask(scene, ap);
  ps.los_contour = extract_los_contour(ps.los_mask, scene);
  return ps;
}

// ---------------------------------------------------------------------------

enum Channel : int { kApHeatmap = 0, kReflection = 1, kTransmission = 2, kContour = 3, kLos = 4 };
inline constexpr int kConditionChannels = 5;
inline constexpr std::array<const char*, kConditionChannels> kChannelNames = {"ap_heatmap", "h_r", "h_t",
                                                                              "gamma", "los"};

/// Five co-registered channels with values in [0, 1].
struct ConditionStack {
  std::array<Grid<float>, kConditionChannels> channels;

  int width() const { return channels[0].width(); }
  int height() const { return channels[0].height(); }

  /// Copy with the contour and LoS channels zeroed (ablation input).
  ConditionStack without_physics() const {
    ConditionStack out = *this;
    out.channels[kContour].fill(0.0f);
    out.channels[kLos].fill(0.0f);
    return out;
  }

  friend bool operator==(const ConditionStack&, const ConditionStack&) = default;
};

inline ConditionStack assemble_condition(const Scene& scene, const FieldPair& fields, const PriorSet& priors,
                                         Cell ap, double sigma_m) {
  if (!(sigma_m > 0.0)) throw ConfigError("sigma must be > 0");
  require_same_shape(fields.h_r, scene.classes, "assemble_condition");
  require_same_shape(fields.h_t, scene.classes, "assemble_condition");
  require_same_shape(priors.contour, scene.classes, "assemble_condition");
  require_same_shape(priors.los_mask, scene.classes, "assemble_condition");
  scene.validate_ap(ap);
  ConditionStack cs;
  for (auto& ch : cs.channels) ch = Grid<float>(scene.width, scene.height, 0.0f);
  const double scale = scene.delta * scene.delta / (2.0 * sigma_m * sigma_m);
  for (int y = 0; y < scene.height; ++y)
    for (int x = 0; x < scene.width; ++x) {
      const double r2 = double(x - ap.x) * (x - ap.x) + double(y - ap.y) * (y - ap.y);
      cs.channels[kApHeatmap](x, y) = static_cast<float>(std::exp(-r2 * scale));
      cs.channels[kReflection](x, y) = static_cast<float>(fields.h_r(x, y));
      cs.channels[kTransmission](x, y) = static_cast<float>(fields.h_t(x, y));
      cs.channels[kContour](x, y) = priors.contour(x, y) ? 1.0f : 0.0f;
      cs.channels[kLos](x, y) = priors.los_mask(x, y) ? 1.0f : 0.0f;
    }
  return cs;
}

/// 1 + (w_b - 1) on cells within Chebyshev distance rho of the contour or the LoS front.
inline Grid<float> boundary_weight_map(const PriorSet& priors, double w_b, int rho) {
  if (!(w_b >= 1.0)) throw ConfigError("w_b must be >= 1");
  if (rho < 0) throw ConfigError("rho must be >= 0");
  require_same_shape(priors.contour, priors.los_contour, "boundary_weight_map");
  const int w = priors.contour.width(), h = priors.contour.height();
  Grid<float> weights(w, h, 1.0f);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!priors.contour(x, y) && !priors.los_contour(x, y)) continue;
      for (int yy = std::max(0, y - rho); yy <= std::min(h - 1, y + rho); ++yy)
        for (int xx = std::max(0, x - rho); xx <= std::min(w - 1, x + rho); ++xx)
          weights(xx, yy) = static_cast<float>(w_b);
    }
  return weights;
}

}  // namespace irdkit

#endif  // IRDKIT_PRIORS_HPP_
