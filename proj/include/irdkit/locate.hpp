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

// RSSI fingerprint localisation. A database row is one air cell of a scene
// holding the RSSI of every AP at that cell; a query is matched by KNN in
// RSSI space and located at the mean of the matched cell centers.

#ifndef IRDKIT_LOCATE_HPP_
#define IRDKIT_LOCATE_HPP_

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "irdkit/common.hpp"
#include "irdkit/radiomap.hpp"
#include "irdkit/scene.hpp"
#include "irdkit/scene_io.hpp"

namespace irdkit {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

inline Point2 cell_center(Cell c, double delta) { return {(c.x + 0.5) * delta, (c.y + 0.5) * delta}; }

struct FingerprintDB {
  int aps = 0;
  double delta = 0.25;
  std::vector<Cell> cells;            // row-major air cells
  std::vector<double> fingerprints;   // rows x aps, row-major

  std::size_t rows() const { return cells.size(); }
  const double* row(std::size_t i) const { return fingerprints.data() + i * static_cast<std::size_t>(aps); }
  Point2 position(std::size_t i) const { return cell_center(cells[i], delta); }
};

inline FingerprintDB build_fingerprint_db(const std::vector<RadioMap>& rms, const Scene& scene) {
  if (rms.empty()) throw SizingError("fingerprint database needs at least one map");
  for (const auto& rm : rms)
    if (rm.width() != scene.width || rm.height() != scene.height)
      throw ShapeError("map dimensions do not match the scene");
  FingerprintDB db;
  db.aps = static_cast<int>(rms.size());
  db.delta = scene.delta;
  for (int y = 0; y < scene.height; ++y)
    for (int x = 0; x < scene.width; ++x) {
      if (!scene.is_air({x, y})) continue;
      db.cells.push_back({x, y});
      for (const auto& rm : rms) db.fingerprints.push_back(rm.rssi(x, y));
    }
  return db;
}

/// Reads the fingerprint at one cell directly from the maps.
inline std::vector<double> fingerprint_at(const std::vector<RadioMap>& rms, Cell c) {
  std::vector<double> v;
  v.reserve(rms.size());
  for (const auto& rm : rms) v.push_back(rm.rssi[c]);
  return v;
}

/// Indices of the K nearest rows by Euclidean RSSI distance; ties go to the
/// earlier row. Returned nearest first.
inline std::vector<std::size_t> knn_rows(const FingerprintDB& db, const std::vector<double>& query, int k) {
  if (k <= 0) throw ConfigError("K must be >= 1");
  if (static_cast<int>(query.size()) != db.aps) throw ShapeError("query length does not match AP count");
  if (static_cast<std::size_t>(k) > db.rows()) throw SizingError("K exceeds the number of database rows");
  std::vector<std::pair<double, std::size_t>> d(db.rows());
  for (std::size_t i = 0; i < db.rows(); ++i) {
    const double* r = db.row(i);
    double s = 0.0;
    for (int j = 0; j < db.aps; ++j) {
      const double e = r[j] - query[static_cast<std::size_t>(j)];
      s += e * e;
    }
    d[i] = {s, i};
  }
  std::partial_sort(d.begin(), d.begin() + k, d.end());
  std::vector<std::size_t> out(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) out[static_cast<std::size_t>(i)] = d[static_cast<std::size_t>(i)].second;
  return out;
}

/// Unweighted mean of the K nearest cell centers. With `weighted`, inverse
/// RSSI-distance weights are used; exact matches then take all the weight.
inline Point2 knn_locate(const FingerprintDB& db, const std::vector<double>& query, int k, bool weighted = false) {
  const std::vector<std::size_t> nn = knn_rows(db, query, k);
  Point2 p;
  if (!weighted) {
    for (std::size_t i : nn) {
      const Point2 c = db.position(i);
      p.x += c.x;
      p.y += c.y;
    }
    p.x /= k;
    p.y /= k;
    return p;
  }
  std::vector<double> dist;
  bool exact = false;
  for (std::size_t i : nn) {
    double s = 0.0;
    for (int j = 0; j < db.aps; ++j) s += std::pow(db.row(i)[j] - query[static_cast<std::size_t>(j)], 2);
    dist.push_back(std::sqrt(s));
    exact = exact || s == 0.0;
  }
  double wsum = 0.0;
  for (std::size_t n = 0; n < nn.size(); ++n) {
    const double w = exact ? (dist[n] == 0.0 ? 1.0 : 0.0) : 1.0 / dist[n];
    const Point2 c = db.position(nn[n]);
    p.x += w * c.x;
    p.y += w * c.y;
    wsum += w;
  }
  p.x /= wsum;
  p.y /= wsum;
  return p;
}

// ---------------------------------------------------------------------------

struct LocalizationQuery {
  Point2 truth;
  Point2 estimate;
  double error = 0.0;  // meters
};

struct LocalizationResult {
  std::vector<LocalizationQuery> queries;
  double mean_error = 0.0;

  double percentile(double q) const {
    if (queries.empty()) return 0.0;
    std::vector<double> e;
    for (const auto& r : queries) e.push_back(r.error);
    std::sort(e.begin(), e.end());
    // Linear interpolation between closest ranks.
    const double pos = q * static_cast<double>(e.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, e.size() - 1);
    return e[lo] + (pos - static_cast<double>(lo)) * (e[hi] - e[lo]);
  }
  double median_error() const { return percentile(0.5); }
};

/// Query cells drawn uniformly (with replacement) over the scene's air cells.
inline std::vector<Cell> draw_query_cells(const Scene& scene, int n_queries, std::uint64_t seed) {
  if (n_queries < 1) throw ConfigError("n_queries must be >= 1");
  std::vector<Cell> air;
  for (int y = 0; y < scene.height; ++y)
    for (int x = 0; x < scene.width; ++x)
      if (scene.is_air({x, y})) air.push_back({x, y});
  if (air.empty()) throw ValidationError("scene has no air cells");
  Rng rng(seed);
  std::vector<Cell> out;
  out.reserve(static_cast<std::size_t>(n_queries));
  for (int i = 0; i < n_queries; ++i)
    out.push_back(air[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(air.size()) - 1))]);
  return out;
}

/// Database from predicted maps, query fingerprints from oracle maps.
inline LocalizationResult evaluate_localization(const std::vector<RadioMap>& predicted,
                                                const std::vector<RadioMap>& oracle, const Scene& scene,
                                                int n_queries, std::uint64_t seed, int k, bool weighted = false) {
  if (predicted.size() != oracle.size()) throw ShapeError("predicted and oracle map counts differ");
  for (std::size_t i = 0; i < oracle.size(); ++i) require_same_shape(predicted[i].rssi, oracle[i].rssi, "localization");
  const FingerprintDB db = build_fingerprint_db(predicted, scene);
  const std::vector<Cell> cells = draw_query_cells(scene, n_queries, seed);
  LocalizationResult res;
  res.queries.resize(cells.size());
  parallel_for(cells.size(), [&](std::size_t i) {
    LocalizationQuery& q = res.queries[i];
    q.truth = cell_center(cells[i], scene.delta);
    q.estimate = knn_locate(db, fingerprint_at(oracle, cells[i]), k, weighted);
    q.error = std::hypot(q.estimate.x - q.truth.x, q.estimate.y - q.truth.y);
  });
  double s = 0.0;
  for (const auto& q : res.queries) s += q.error;
  res.mean_error = s / static_cast<double>(res.queries.size());
  return res;
}

inline std::string to_csv(const LocalizationResult& r) {
  std::ostringstream os;
  os << "true_x,true_y,est_x,est_y,error_m\n";
  for (const auto& q : r.queries)
    os << format_double(q.truth.x) << "," << format_double(q.truth.y) << "," << format_double(q.estimate.x) << ","
       << format_double(q.estimate.y) << "," << format_double(q.error) << "\n";
  return os.str();
}

inline nlohmann::ordered_json summary_json(const LocalizationResult& r) {
  return {{"queries", r.queries.size()},
          {"mean_error_m", r.mean_error},
          {"median_error_m", r.median_error()},
          {"p90_error_m", r.percentile(0.9)}};
}

}  // namespace irdkit

#endif  // IRDKIT_LOCATE_HPP_
