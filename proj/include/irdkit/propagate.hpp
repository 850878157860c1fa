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

// Desk-scale multipath simulator.
//
// Rays leave the AP cell center at uniformly spaced angles and are marched
// cell by cell. A ray entering a material cell from air splits into a
// specular reflection (amplitude * h_r) and a transmitted ray (amplitude *
// h_t); each further material cell crossed multiplies by its h_t. Amplitude
// spreads as 1/s with s the unfolded path length in cells.
//
// Each ray stands for an angular slice of width 2*pi/N around its image
// source. A cell whose center lies within half a cell of the ray receives
// a^2 * K(phi), where r is the image-source distance to the center, phi the
// angle between the ray and the center, and K a triangular kernel of
// half-width asin(0.5 / r) normalised to unit angular mass. In free space
// this reproduces 1/r^2 at cell centers.
//
// Accumulation is in 128-bit fixed point, so the result does not depend on
// the order in which rays are processed or on the worker count.

#ifndef IRDKIT_PROPAGATE_HPP_
#define IRDKIT_PROPAGATE_HPP_

#include <cmath>
#include <map>
#include <numbers>
#include <vector>

#include "irdkit/common.hpp"
#include "irdkit/geometry.hpp"
#include "irdkit/priors.hpp"
#include "irdkit/radiomap.hpp"
#include "irdkit/scene.hpp"

namespace irdkit {

struct SimConfig {
  double frequency_ghz = 3.5;  // recorded with every map; the grid model is frequency-flat
  int max_reflections = 2;
  int max_transmissions = 4;
  int max_diffractions = 1;
  int rays = 3600;
  double p_min = kDefaultPMin;
  double p_max = kDefaultPMax;
  double diffraction_loss_db = 15.0;
  double min_amplitude = 1e-6;

  void validate() const {
    if (rays <= 0) throw ConfigError("rays per source must be positive");
    if (max_reflections < 0 || max_transmissions < 0 || max_diffractions < 0)
      throw ConfigError("interaction budgets must be >= 0");
    if (!(p_min < p_max)) throw ConfigError("p_min must be below p_max");
    if (!(frequency_ghz > 0.0)) throw ConfigError("frequency must be positive");
    if (!(diffraction_loss_db >= 0.0)) throw ConfigError("diffraction loss must be >= 0 dB");
    if (!(min_amplitude > 0.0)) throw ConfigError("min_amplitude must be positive");
  }
};

namespace detail {

using Fixed = __int128;
inline constexpr int kFixedBits = 80;

inline Fixed to_fixed(double v) { return static_cast<Fixed>(std::nearbyint(std::ldexp(v, kFixedBits))); }
inline double from_fixed(Fixed v) {
  // Split to keep precision: high and low 64-bit halves.
  const auto hi = static_cast<std::int64_t>(v >> 64);
  const auto lo = static_cast<std::uint64_t>(v);
  return std::ldexp(static_cast<double>(hi), 64 - kFixedBits) + std::ldexp(static_cast<double>(lo), -kFixedBits);
}

/// Direction of ray k out of n: angle (2k+1)*pi/n, built by quadrant
/// reduction so that mirrored rays get bit-mirrored components.
inline void ray_direction(int k, int n, double& dx, double& dy) {
  long long m = 2LL * k + 1;  // angle = m * pi / n, m in [1, 2n - 1]
  double sx = 1.0, sy = 1.0;
  if (m > n) {
    m = 2LL * n - m;
    sy = -1.0;
  }
  if (2 * m > n) {
    m = n - m;
    sx = -1.0;
  }
  const double a = static_cast<double>(m) * std::numbers::pi / static_cast<double>(n);
  dx = 2 * m == n ? 0.0 : sx * std::cos(a);
  dy = sy * std::sin(a);
}

struct RayState {
  int cx, cy;
  int sx, sy;
  double tmax_x, tmax_y;
  double t_enter;
  double gain;  // product of interaction coefficients
  int reflections_left;
  int transmissions_left;
};

class RayTracer {
 public:
  RayTracer(const Scene& scene, const FieldPair& fields, const SimConfig& cfg)
      : scene_(scene), fields_(fields), cfg_(cfg), tube_(2.0 * std::numbers::pi / cfg.rays) {}

  void trace(Cell ap, int k, Grid<Fixed>& acc) const {
    double dx, dy;
    ray_direction(k, cfg_.rays, dx, dy);
    const double inf = std::numeric_limits<double>::infinity();
    const double adx = std::abs(dx), ady = std::abs(dy);
    const double tdx = adx > 0.0 ? 1.0 / adx : inf;
    const double tdy = ady > 0.0 ? 1.0 / ady : inf;
    stack_.clear();
    stack_.push_back({ap.x, ap.y, dx < 0 ? -1 : 1, dy < 0 ? -1 : 1, 0.5 * tdx, 0.5 * tdy, 0.0, 1.0,
                      cfg_.max_reflections, cfg_.max_transmissions});
    while (!stack_.empty()) {
      RayState r = stack_.back();
      stack_.pop_back();
      march(r, std::abs(dx), std::abs(dy), tdx, tdy, acc);
    }
  }

 private:
  void march(RayState r, double dx, double dy, double tdx, double tdy, Grid<Fixed>& acc) const {
    while (true) {
      const double t_exit = std::min(r.tmax_x, r.tmax_y);
      deposit(r, dx, dy, acc);
      if (r.gain / std::max(1.0, t_exit) < cfg_.min_amplitude) return;

      const bool step_x = r.tmax_x <= r.tmax_y;
      const bool step_y = r.tmax_y <= r.tmax_x;
      const int nx = r.cx + (step_x ? r.sx : 0);
      const int ny = r.cy + (step_y ? r.sy : 0);
      if (!scene_.classes.contains(nx, ny)) return;

      const bool here_air = scene_.classes(r.cx, r.cy) == kAir;
      if (scene_.classes(nx, ny) != kAir) {
        if (here_air && r.reflections_left > 0) {
          RayState b = r;
          if (step_x) {
            b.sx = -b.sx;
            b.tmax_x += tdx;
          }
          if (step_y) {
            b.sy = -b.sy;
            b.tmax_y += tdy;
          }
          b.t_enter = t_exit;
          b.gain *= fields_.h_r(nx, ny);
          --b.reflections_left;
          if (b.gain > 0.0) stack_.push_back(b);
        }
        if (r.transmissions_left == 0) return;
        r.gain *= fields_.h_t(nx, ny);
        --r.transmissions_left;
        if (!(r.gain > 0.0)) return;
      }
      if (step_x) r.tmax_x += tdx;
      if (step_y) r.tmax_y += tdy;
      r.cx = nx;
      r.cy = ny;
      r.t_enter = t_exit;
    }
  }

  // Kernel contribution of the current cell's center. adx, ady are the
  // absolute direction components; the folded direction is (sx adx, sy ady).
  void deposit(const RayState& r, double adx, double ady, Grid<Fixed>& acc) const {
    // Center relative to the ray position at t_enter.
    const double ox = adx > 0.0 ? r.sx * (0.5 - (r.tmax_x - r.t_enter) * adx) : 0.0;
    const double oy = ady > 0.0 ? r.sy * (0.5 - (r.tmax_y - r.t_enter) * ady) : 0.0;
    const double ux = r.sx * adx, uy = r.sy * ady;
    const double along = -(ox * ux + oy * uy);
    const double h = std::abs(ox * uy - oy * ux);
    if (h >= 0.5) return;
    const double t_p = r.t_enter + along;
    const double dist = std::hypot(t_p, h);
    if (dist <= 0.5) return;
    const double half = std::asin(0.5 / dist);
    const double phi = std::asin(h / dist);
    const double w = tube_ * (1.0 - phi / half) / half;
    acc(r.cx, r.cy) += to_fixed(r.gain * r.gain * w / (dist * dist));
  }

  const Scene& scene_;
  const FieldPair& fields_;
  const SimConfig& cfg_;
  double tube_;
  mutable std::vector<RayState> stack_;
};

inline double cell_distance(Cell a, Cell b) { return std::hypot(double(a.x - b.x), double(a.y - b.y)); }

/// Product of h_t over material cells strictly between two cell centers.
inline double transmission_between(const Scene& scene, const FieldPair& fields, Cell a, Cell b) {
  double g = 1.0;
  for_each_crossed_cell(HalfPoint::center(a), HalfPoint::center(b), [&](Cell c) {
    if (c == a || c == b || !scene.classes.contains(c)) return;
    if (scene.classes[c] != kAir) g *= fields.h_t[c];
  });
  return g;
}

// Fixed-loss secondary sources at validated corners, illuminating the
// geometric shadow of the previous source, up to max_diffractions levels.
class DiffractionModel {
 public:
  DiffractionModel(const Scene& scene, const FieldPair& fields, const SimConfig& cfg, Cell ap)
      : scene_(scene), fields_(fields), cfg_(cfg), ap_(ap),
        gain_(std::pow(10.0, -cfg.diffraction_loss_db / 20.0)) {}

  void add(Grid<Fixed>& acc) {
    if (cfg_.max_diffractions == 0) return;
    const PriorSet priors = extract_priors(scene_, fields_, ap_);
    raw_ = detect_diffraction_candidates(fields_).diffraction;
    const Mask& ap_vis = visible_from(ap_);
    for (const auto& p : priors.validated.diffraction) {
      if (straight_run(p)) continue;
      const double d1 = cell_distance(ap_, p.cell);
      const double a = transmission_between(scene_, fields_, ap_, p.cell) / d1;
      emit(p.cell, ap_vis, a, 1, acc);
    }
  }

 private:
  // Mid-run cell of a one-cell-thick straight wall: it passes the corner
  // rule but has no exposed edge, so it does not radiate.
  static bool straight_run(const CandidatePoint& p) { return p.faces == 0b0011 || p.faces == 0b1100; }

  void emit(Cell src, const Mask& prev_vis, double incident, int level, Grid<Fixed>& acc) {
    const double a0 = incident * gain_;
    if (a0 < cfg_.min_amplitude) return;
    const Mask& ap_vis = visible_from(ap_);
    const Mask& src_vis = visible_from(src);
    for (int y = 0; y < scene_.height; ++y)
      for (int x = 0; x < scene_.width; ++x) {
        if (scene_.classes(x, y) != kAir || prev_vis(x, y) || ap_vis(x, y) || !src_vis(x, y)) continue;
        const double a = a0 / cell_distance(src, {x, y});
        if (a < cfg_.min_amplitude) continue;
        acc(x, y) += to_fixed(a * a);
      }
    if (level >= cfg_.max_diffractions) return;
    for (const auto& q : raw_) {
      if (q.cell == src || straight_run(q) || !src_vis[q.cell] || prev_vis[q.cell]) continue;
      if (corner_fully_lit(q, src, CullRule::kLitFaces)) continue;
      emit(q.cell, src_vis, a0 / cell_distance(src, q.cell), level + 1, acc);
    }
  }

  const Mask& visible_from(Cell c) {
    auto it = vis_.find(c);
    if (it == vis_.end()) {
      it = vis_.emplace(c, visibility_sweep(scene_.width, scene_.height, c, [&](Cell b) {
                         return !(b == c) && scene_.classes[b] != kAir;
                       })).first;
    }
    return it->second;
  }

  const Scene& scene_;
  const FieldPair& fields_;
  const SimConfig& cfg_;
  Cell ap_;
  double gain_;
  std::vector<CandidatePoint> raw_;
  std::map<Cell, Mask> vis_;
};

}  // namespace detail

/// Linear received power relative to the AP cell (1 at one cell distance in free space).
inline Grid<double> simulate_power(const Scene& scene, const FieldPair& fields, Cell ap, const SimConfig& cfg) {
  cfg.validate();
  scene.validate_ap(ap);
  require_same_shape(fields.h_r, scene.classes, "simulate_power");
  require_same_shape(fields.h_t, scene.classes, "simulate_power");

  // Fixed chunking keeps the work split independent of the worker count;
  // the fixed-point sum makes the merge order irrelevant anyway.
  const std::size_t chunks = std::min<std::size_t>(64, static_cast<std::size_t>(cfg.rays));
  std::vector<Grid<detail::Fixed>> partial(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    Grid<detail::Fixed> acc(scene.width, scene.height, 0);
    detail::RayTracer tracer(scene, fields, cfg);
    for (int k = static_cast<int>(c); k < cfg.rays; k += static_cast<int>(chunks)) tracer.trace(ap, k, acc);
    partial[c] = std::move(acc);
  });
  Grid<detail::Fixed> total(scene.width, scene.height, 0);
  for (const auto& p : partial)
    for (std::size_t i = 0; i < total.size(); ++i) total.data()[i] += p.data()[i];

  detail::DiffractionModel(scene, fields, cfg, ap).add(total);

  Grid<double> power(scene.width, scene.height, 0.0);
  for (std::size_t i = 0; i < power.size(); ++i) power.data()[i] = detail::from_fixed(total.data()[i]);
  return power;
}

inline double power_to_rssi(double power, const SimConfig& cfg) {
  if (!(power > 0.0)) return cfg.p_min;
  return std::clamp(cfg.p_max + 10.0 * std::log10(power), cfg.p_min, cfg.p_max);
}

/// Ground-truth radio map for one AP. The AP cell is pinned to p_max.
inline RadioMap simulate_rm(const Scene& scene, Cell ap, const SimConfig& cfg = {},
                            const std::string& scene_id = "", int ap_index = 0) {
  const FieldPair fields = derive_fields(scene);
  const Grid<double> power = simulate_power(scene, fields, ap, cfg);
  RadioMap rm{Grid<float>(scene.width, scene.height), scene_id, ap_index};
  for (std::size_t i = 0; i < power.size(); ++i)
    rm.rssi.data()[i] = static_cast<float>(power_to_rssi(power.data()[i], cfg));
  rm.rssi[ap] = static_cast<float>(cfg.p_max);
  return rm;
}

}  // namespace irdkit

#endif  // IRDKIT_PROPAGATE_HPP_
