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

// Decoupled diffusion with the constant-to-zero drift f_t = -x0:
//
//   forward:  x_t = (1 - t) x0 + sqrt(t) eps
//   reverse:  x_{t-dt} ~ N(x_t - dt f - (dt / sqrt(t)) eps, dt (t - dt) / t)
//
// Maps live on [-1, 1] via an affine map of [p_min, p_max] dBm.

#ifndef IRDKIT_DDM_HPP_
#define IRDKIT_DDM_HPP_

#include <cmath>
#include <vector>

#include "irdkit/common.hpp"
#include "irdkit/priors.hpp"
#include "irdkit/radiomap.hpp"

namespace irdkit {

inline constexpr double kTMin = 1e-3;

struct DriftSchedule {
  static double mean_coeff(double t) { return 1.0 - t; }
  static Grid<float> integrated_drift(const Grid<float>& x0, double t) {
    Grid<float> out = x0;
    for (float& v : out.data()) v = static_cast<float>(-t * v);
    return out;
  }
};

// ---------------------------------------------------------------------------
// Normalisation

inline Grid<float> normalize(const RadioMap& rm, double p_min = kDefaultPMin, double p_max = kDefaultPMax) {
  if (!(p_min < p_max)) throw ConfigError("p_min must be below p_max");
  Grid<float> x(rm.width(), rm.height());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = rm.rssi.data()[i];
    if (!(v >= p_min && v <= p_max)) throw ValidationError("map value outside [p_min, p_max]: " + std::to_string(v));
    x.data()[i] = static_cast<float>(2.0 * (v - p_min) / (p_max - p_min) - 1.0);
  }
  return x;
}

inline RadioMap denormalize(const Grid<float>& x, double p_min = kDefaultPMin, double p_max = kDefaultPMax) {
  if (!(p_min < p_max)) throw ConfigError("p_min must be below p_max");
  RadioMap rm{Grid<float>(x.width(), x.height()), "", 0};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = x.data()[i];
    if (!(v >= -1.0 && v <= 1.0)) throw ValidationError("normalized value outside [-1, 1]");
    rm.rssi.data()[i] = static_cast<float>(p_min + 0.5 * (v + 1.0) * (p_max - p_min));
  }
  return rm;
}

// ---------------------------------------------------------------------------
// Closed-form forward and reverse steps

struct ForwardDraw {
  Grid<float> x_t;
  Grid<float> eps;
};

inline void require_time(double t) {
  if (!(t >= kTMin && t <= 1.0)) throw ValidationError("t must lie in [t_min, 1]");
}

inline ForwardDraw forward_sample(const Grid<float>& x0, double t, Rng& rng) {
  require_time(t);
  ForwardDraw d{Grid<float>(x0.width(), x0.height()), Grid<float>(x0.width(), x0.height())};
  const double a = 1.0 - t, s = std::sqrt(t);
  for (std::size_t i = 0; i < x0.size(); ++i) {
    const double e = rng.normal();
    d.eps.data()[i] = static_cast<float>(e);
    d.x_t.data()[i] = static_cast<float>(a * x0.data()[i] + s * e);
  }
  return d;
}

/// One reverse step of size dt from time t. dt == t is the final,
/// deterministic jump; otherwise 0 < dt <= t - t_min. With inject_noise
/// false the step returns its mean.
inline Grid<float> reverse_step(const Grid<float>& x_t, double t, double dt, const Grid<float>& f_hat,
                                const Grid<float>& eps_hat, Rng& rng, bool inject_noise = true) {
  require_same_shape(x_t, f_hat, "reverse_step");
  require_same_shape(x_t, eps_hat, "reverse_step");
  if (!(t > 0.0 && t <= 1.0)) throw ValidationError("t must lie in (0, 1]");
  if (dt > t) throw ValidationError("reverse step dt exceeds t");
  const bool final_jump = dt == t;
  if (!final_jump && !(dt > 0.0 && dt <= t - kTMin + 1e-12))
    throw ValidationError("reverse step must satisfy 0 < dt <= t - t_min");
  const double c_eps = dt / std::sqrt(t);
  const double sd = final_jump ? 0.0 : std::sqrt(dt * (t - dt) / t);
  Grid<float> out(x_t.width(), x_t.height());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double v = x_t.data()[i] - dt * f_hat.data()[i] - c_eps * eps_hat.data()[i];
    if (inject_noise && sd > 0.0) v += sd * rng.normal();
    out.data()[i] = static_cast<float>(v);
  }
  return out;
}

/// Reverse time grid for `steps` predictor calls: uniform from 1 down to
/// t_min, then the final jump to 0. Returned as the list of (t, dt).
inline std::vector<std::pair<double, double>> reverse_schedule(int steps) {
  if (steps < 1) throw ConfigError("steps must be >= 1");
  std::vector<std::pair<double, double>> out;
  if (steps == 1) {
    out.push_back({1.0, 1.0});
    return out;
  }
  const int n = steps - 1;
  for (int k = 0; k < n; ++k) {
    const double t = 1.0 - (1.0 - kTMin) * k / n;
    const double t_next = 1.0 - (1.0 - kTMin) * (k + 1) / n;
    out.push_back({t, t - t_next});
  }
  out.push_back({kTMin, kTMin});
  return out;
}

// ---------------------------------------------------------------------------
// Predictor interface

struct Prediction {
  Grid<float> drift;
  Grid<float> noise;
};

class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual Prediction predict(const Grid<float>& x_t, double t, const ConditionStack& cond) const = 0;
};

/// Runs the reverse chain from x ~ N(0, I) at t = 1. The result is clipped
/// to [-1, 1] before being returned.
inline Grid<float> sample_normalized(const Predictor& predictor, const ConditionStack& cond, int steps,
                                     std::uint64_t seed) {
  Rng rng(seed);
  Grid<float> x(cond.width(), cond.height());
  for (float& v : x.data()) v = static_cast<float>(rng.normal());
  for (const auto& [t, dt] : reverse_schedule(steps)) {
    const Prediction p = predictor.predict(x, t, cond);
    x = reverse_step(x, t, dt, p.drift, p.noise, rng);
  }
  for (float& v : x.data()) v = std::clamp(std::isfinite(v) ? v : 0.0f, -1.0f, 1.0f);
  return x;
}

inline RadioMap sample_rm(const Predictor& predictor, const ConditionStack& cond, int steps, std::uint64_t seed,
                          double p_min = kDefaultPMin, double p_max = kDefaultPMax) {
  return denormalize(sample_normalized(predictor, cond, steps, seed), p_min, p_max);
}

// ---------------------------------------------------------------------------
// Training objective

/// mean over cells of  w (f_hat + x0)^2 + w (eps_hat - eps)^2.
inline double weighted_ddm_loss(const Grid<float>& f_hat, const Grid<float>& eps_hat, const Grid<float>& x0,
                                const Grid<float>& eps, const Grid<float>& weights) {
  require_same_shape(f_hat, x0, "weighted_ddm_loss");
  require_same_shape(eps_hat, eps, "weighted_ddm_loss");
  require_same_shape(f_hat, eps_hat, "weighted_ddm_loss");
  require_same_shape(weights, x0, "weighted_ddm_loss");
  double sum = 0.0;
  for (std::size_t i = 0; i < x0.size(); ++i) {
    const double a = static_cast<double>(f_hat.data()[i]) + x0.data()[i];
    const double b = static_cast<double>(eps_hat.data()[i]) - eps.data()[i];
    sum += weights.data()[i] * (a * a + b * b);
  }
  return sum / static_cast<double>(x0.size());
}

}  // namespace irdkit

#endif  // IRDKIT_DDM_HPP_
