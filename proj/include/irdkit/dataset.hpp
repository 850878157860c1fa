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

// Train/test splits over (scene, AP) pairs and dataset materialisation.
//
//   ALG: every scene appears in train; each scene's APs are shuffled and
//        80% go to train, the rest to test (unseen AP positions).
//   ZLG: scenes are shuffled; 80% of scenes go to train with all their APs,
//        the remaining scenes form the test set (unseen layouts).

#ifndef IRDKIT_DATASET_HPP_
#define IRDKIT_DATASET_HPP_

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "irdkit/common.hpp"
#include "irdkit/propagate.hpp"
#include "irdkit/radiomap.hpp"
#include "irdkit/scene.hpp"
#include "irdkit/scene_io.hpp"

namespace irdkit {

enum class Protocol { kAlg, kZlg };

inline std::string to_string(Protocol p) { return p == Protocol::kAlg ? "ALG" : "ZLG"; }

inline Protocol parse_protocol(const std::string& s) {
  if (s == "ALG" || s == "alg") return Protocol::kAlg;
  if (s == "ZLG" || s == "zlg") return Protocol::kZlg;
  throw ConfigError("unknown protocol '" + s + "' (expected ALG or ZLG)");
}

struct Pair {
  int scene = 0;  // index into the scene list
  int ap = 0;     // index into that scene's AP list

  friend bool operator==(const Pair&, const Pair&) = default;
  friend auto operator<=>(const Pair&, const Pair&) = default;
};

struct DatasetSplit {
  Protocol protocol = Protocol::kAlg;
  std::vector<Pair> train;
  std::vector<Pair> test;

  friend bool operator==(const DatasetSplit&, const DatasetSplit&) = default;
};

struct NamedScene {
  std::string id;
  Scene scene;
};

inline constexpr double kTrainFraction = 0.8;

namespace detail {

// Size of the train part of n items: round(0.8 n), keeping both parts non-empty.
inline int train_count(int n) {
  const int k = static_cast<int>(std::lround(kTrainFraction * n));
  return std::clamp(k, 1, n - 1);
}

}  // namespace detail

/// ap_counts[i] = number of APs available in scene i. Both halves are sorted.
inline DatasetSplit make_split(const std::vector<int>& ap_counts, Protocol protocol, std::uint64_t seed) {
  DatasetSplit split;
  split.protocol = protocol;
  const int scenes = static_cast<int>(ap_counts.size());
  for (int i = 0; i < scenes; ++i)
    if (ap_counts[i] < 1) throw SizingError("scene " + std::to_string(i) + " has no AP");
  if (protocol == Protocol::kAlg) {
    if (scenes < 1) throw SizingError("ALG split needs at least one scene");
    for (int i = 0; i < scenes; ++i) {
      if (ap_counts[i] < 2)
        throw SizingError("ALG split needs >= 2 APs per scene; scene " + std::to_string(i) + " has " +
                          std::to_string(ap_counts[i]));
      std::vector<int> order(ap_counts[i]);
      for (int k = 0; k < ap_counts[i]; ++k) order[k] = k;
      Rng rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
      rng.shuffle(order);
      const int n_train = detail::train_count(ap_counts[i]);
      for (int k = 0; k < ap_counts[i]; ++k) (k < n_train ? split.train : split.test).push_back({i, order[k]});
    }
  } else {
    if (scenes < 2) throw SizingError("ZLG split needs at least two scenes");
    std::vector<int> order(scenes);
    for (int i = 0; i < scenes; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);
    const int n_train = detail::train_count(scenes);
    for (int k = 0; k < scenes; ++k)
      for (int a = 0; a < ap_counts[order[k]]; ++a) (k < n_train ? split.train : split.test).push_back({order[k], a});
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

/// Canonical key=value rendering used for hashing and logging.
inline std::string describe(const SimConfig& c) {
  std::ostringstream os;
  os << "frequency_ghz=" << format_double(c.frequency_ghz) << "\n"
     << "max_reflections=" << c.max_reflections << "\n"
     << "max_transmissions=" << c.max_transmissions << "\n"
     << "max_diffractions=" << c.max_diffractions << "\n"
     << "rays=" << c.rays << "\n"
     << "p_min=" << format_double(c.p_min) << "\n"
     << "p_max=" << format_double(c.p_max) << "\n"
     << "diffraction_loss_db=" << format_double(c.diffraction_loss_db) << "\n"
     << "min_amplitude=" << format_double(c.min_amplitude) << "\n";
  return os.str();
}

inline std::string config_hash(const std::string& canonical) {
  Fnv1a h;
  h.update(canonical);
  return hex64(h.digest());
}

struct Dataset {
  DatasetSplit split;
  std::vector<std::vector<RadioMap>> maps;  // maps[scene][ap]
};

inline std::string map_file_name(const std::string& scene_id, int ap) {
  return scene_id + "_ap" + std::to_string(ap) + ".irdmap";
}

inline std::string scene_file_name(const std::string& scene_id) { return scene_id + ".irdscn"; }

/// Simulates every (scene, AP) pair. When out_dir is non-empty, writes the
/// maps and a manifest.json describing the split.
inline Dataset generate_dataset(const std::vector<NamedScene>& scenes, const SimConfig& config, Protocol protocol,
                                std::uint64_t seed, const std::string& out_dir = "") {
  config.validate();
  std::vector<int> counts;
  for (const auto& ns : scenes) {
    ns.scene.validate();
    counts.push_back(static_cast<int>(ns.scene.aps.size()));
  }
  Dataset ds;
  ds.split = make_split(counts, protocol, seed);
  ds.maps.resize(scenes.size());
  for (std::size_t i = 0; i < scenes.size(); ++i)
    for (std::size_t a = 0; a < scenes[i].scene.aps.size(); ++a)
      ds.maps[i].push_back(
          simulate_rm(scenes[i].scene, scenes[i].scene.aps[a], config, scenes[i].id, static_cast<int>(a)));

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    nlohmann::ordered_json manifest;
    manifest["format"] = "irdkit-dataset-1";
    manifest["protocol"] = to_string(protocol);
    manifest["seed"] = seed;
    manifest["config_hash"] = config_hash(describe(config));
    manifest["sim_config"] = describe(config);
    auto entries = [&](const std::vector<Pair>& pairs) {
      nlohmann::ordered_json arr = nlohmann::ordered_json::array();
      for (const Pair& p : pairs) {
        const auto& ns = scenes[static_cast<std::size_t>(p.scene)];
        const Cell ap = ns.scene.aps[static_cast<std::size_t>(p.ap)];
        arr.push_back({{"scene", ns.id}, {"scene_index", p.scene}, {"ap", p.ap},
                       {"ap_x", ap.x}, {"ap_y", ap.y}, {"map", map_file_name(ns.id, p.ap)}});
      }
      return arr;
    };
    nlohmann::ordered_json scene_list = nlohmann::ordered_json::array();
    for (const auto& ns : scenes) scene_list.push_back({{"id", ns.id}, {"file", scene_file_name(ns.id)}});
    manifest["scenes"] = scene_list;
    manifest["train"] = entries(ds.split.train);
    manifest["test"] = entries(ds.split.test);
    for (const auto& ns : scenes) save_scene(ns.scene, (std::filesystem::path(out_dir) / scene_file_name(ns.id)).string());
    for (std::size_t i = 0; i < scenes.size(); ++i)
      for (std::size_t a = 0; a < ds.maps[i].size(); ++a)
        save_radiomap(ds.maps[i][a], (std::filesystem::path(out_dir) / map_file_name(scenes[i].id, static_cast<int>(a))).string());
    std::ofstream(std::filesystem::path(out_dir) / "manifest.json") << manifest.dump(2) << "\n";
  }
  return ds;
}

struct LoadedDataset {
  std::vector<NamedScene> scenes;
  Dataset data;
  std::string config_hash;
  std::uint64_t seed = 0;
};

/// Reads a directory written by generate_dataset.
inline LoadedDataset load_dataset(const std::string& dir) {
  using K = ParseError::Kind;
  const std::filesystem::path root(dir);
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(read_file_bytes((root / "manifest.json").string()));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(K::kMalformedHeader, std::string("manifest: ") + e.what());
  }
  LoadedDataset out;
  try {
    if (m.at("format") != "irdkit-dataset-1") throw ParseError(K::kMalformedHeader, "unknown dataset format");
    out.data.split.protocol = parse_protocol(m.at("protocol").get<std::string>());
    out.config_hash = m.at("config_hash").get<std::string>();
    out.seed = m.at("seed").get<std::uint64_t>();
    for (const auto& s : m.at("scenes"))
      out.scenes.push_back({s.at("id").get<std::string>(), load_scene((root / s.at("file").get<std::string>()).string())});
    out.data.maps.resize(out.scenes.size());
    for (std::size_t i = 0; i < out.scenes.size(); ++i)
      for (std::size_t a = 0; a < out.scenes[i].scene.aps.size(); ++a) {
        RadioMap rm = load_radiomap((root / map_file_name(out.scenes[i].id, static_cast<int>(a))).string());
        rm.scene_id = out.scenes[i].id;
        rm.ap_index = static_cast<int>(a);
        out.data.maps[i].push_back(std::move(rm));
      }
    auto pairs = [&](const char* key) {
      std::vector<Pair> v;
      for (const auto& e : m.at(key)) {
        const Pair p{e.at("scene_index").get<int>(), e.at("ap").get<int>()};
        if (p.scene < 0 || p.scene >= static_cast<int>(out.scenes.size()) || p.ap < 0 ||
            p.ap >= static_cast<int>(out.scenes[static_cast<std::size_t>(p.scene)].scene.aps.size()))
          throw ParseError(K::kInvalidValue, "manifest pair out of range");
        v.push_back(p);
      }
      return v;
    };
    out.data.split.train = pairs("train");
    out.data.split.test = pairs("test");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(K::kMalformedHeader, std::string("manifest: ") + e.what());
  }
  return out;
}

}  // namespace irdkit

#endif  // IRDKIT_DATASET_HPP_
