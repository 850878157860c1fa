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

// Pixel metrics on the common 0..255 scale. Maps in dBm are mapped
// affinely from [p_min, p_max] before comparison.
//
// PSNR of identical maps is +infinity; JSON output writes it as "inf".

#ifndef IRDKIT_METRICS_HPP_
#define IRDKIT_METRICS_HPP_

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "irdkit/common.hpp"
#include "irdkit/radiomap.hpp"
#include "irdkit/scene_io.hpp"

namespace irdkit {

inline constexpr double kPixelMax = 255.0;

template <typename A, typename B>
double mse(const Grid<A>& a, const Grid<B>& b) {
  require_same_shape(a, b, "mse");
  if (a.size() == 0) throw ShapeError("mse of empty maps");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a.data()[i]) - static_cast<double>(b.data()[i]);
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

template <typename A, typename B>
double rmse(const Grid<A>& a, const Grid<B>& b) {
  return std::sqrt(mse(a, b));
}

inline double psnr_from_mse(double m, double max_value = kPixelMax) {
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(max_value * max_value / m);
}

template <typename A, typename B>
double psnr(const Grid<A>& a, const Grid<B>& b, double max_value = kPixelMax) {
  return psnr_from_mse(mse(a, b), max_value);
}

/// sqrt(sum w (a - b)^2 / sum w).
template <typename A, typename B, typename W>
double boundary_rmse(const Grid<A>& a, const Grid<B>& b, const Grid<W>& weights) {
  require_same_shape(a, b, "boundary_rmse");
  require_same_shape(a, weights, "boundary_rmse");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double w = static_cast<double>(weights.data()[i]);
    if (w < 0.0) throw ValidationError("negative weight");
    const double d = static_cast<double>(a.data()[i]) - static_cast<double>(b.data()[i]);
    num += w * d * d;
    den += w;
  }
  if (!(den > 0.0)) throw ValidationError("weights sum to zero");
  return std::sqrt(num / den);
}

// ---------------------------------------------------------------------------

struct MetricEntry {
  std::string scene_id;
  int ap_index = 0;
  std::string method;
  double rmse = 0.0;
  double psnr = 0.0;
  double boundary_rmse = 0.0;
};

struct MetricReport {
  double p_min = kDefaultPMin;
  double p_max = kDefaultPMax;
  bool scaled_8bit = true;
  double max_value = kPixelMax;
  std::vector<MetricEntry> entries;

  void add(const MetricEntry& e) { entries.push_back(e); }

  double mean_rmse() const { return mean([](const MetricEntry& e) { return e.rmse; }); }
  double mean_boundary_rmse() const { return mean([](const MetricEntry& e) { return e.boundary_rmse; }); }
  /// PSNR of the mean MSE over entries.
  double mean_psnr() const {
    return psnr_from_mse(mean([](const MetricEntry& e) { return e.rmse * e.rmse; }), max_value);
  }

 private:
  template <typename F>
  double mean(F f) const {
    if (entries.empty()) return 0.0;
    double s = 0.0;
    for (const auto& e : entries) s += f(e);
    return s / static_cast<double>(entries.size());
  }
};

/// Compares predicted and reference maps in dBm on the 0..255 scale.
inline MetricEntry compare_maps(const RadioMap& predicted, const RadioMap& reference, const Grid<float>& weights,
                                double p_min = kDefaultPMin, double p_max = kDefaultPMax) {
  const Grid<double> a = predicted.to_8bit(p_min, p_max), b = reference.to_8bit(p_min, p_max);
  MetricEntry e;
  e.scene_id = reference.scene_id;
  e.ap_index = reference.ap_index;
  e.rmse = rmse(a, b);
  e.psnr = psnr(a, b);
  e.boundary_rmse = boundary_rmse(a, b, weights);
  return e;
}

namespace detail {

inline nlohmann::ordered_json finite_or_inf(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const MetricReport& r) {
  nlohmann::ordered_json j;
  j["normalization"] = {{"p_min", r.p_min}, {"p_max", r.p_max}, {"scaled_8bit", r.scaled_8bit}, {"max", r.max_value}};
  j["mean"] = {{"rmse", r.mean_rmse()},
               {"psnr", detail::finite_or_inf(r.mean_psnr())},
               {"boundary_rmse", r.mean_boundary_rmse()},
               {"count", r.entries.size()}};
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& e : r.entries)
    arr.push_back({{"scene", e.scene_id},
                   {"ap", e.ap_index},
                   {"method", e.method},
                   {"rmse", e.rmse},
                   {"psnr", detail::finite_or_inf(e.psnr)},
                   {"boundary_rmse", e.boundary_rmse}});
  j["maps"] = arr;
  return j;
}

inline std::string to_csv(const MetricReport& r) {
  std::ostringstream os;
  os << "scene,ap,method,rmse,psnr,boundary_rmse\n";
  for (const auto& e : r.entries)
    os << e.scene_id << "," << e.ap_index << "," << e.method << "," << format_double(e.rmse) << ","
       << (std::isinf(e.psnr) ? std::string("inf") : format_double(e.psnr)) << "," << format_double(e.boundary_rmse)
       << "\n";
  return os.str();
}

}  // namespace irdkit

#endif  // IRDKIT_METRICS_HPP_
