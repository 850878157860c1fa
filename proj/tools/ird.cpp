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

// ird: command-line driver for the irdkit pipeline.
//
// Exit codes: 0 ok, 2 usage or configuration error, 3 validation error,
// 4 unreadable input file, 5 other failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "irdkit/dataset.hpp"
#include "irdkit/ddm.hpp"
#include "irdkit/locate.hpp"
#include "irdkit/metrics.hpp"
#include "irdkit/pipeline.hpp"
#include "irdkit/priors.hpp"
#include "irdkit/propagate.hpp"
#include "irdkit/render.hpp"
#include "irdkit/scene.hpp"
#include "irdkit/scene_io.hpp"
#include "irdkit/unet.hpp"

namespace fs = std::filesystem;

namespace irdkit::cli {

enum ExitCode { kOk = 0, kUsage = 2, kInvalid = 3, kUnreadable = 4, kFailure = 5 };

class UsageError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Settings: section.key -> value, seeded with every known key's default.

const std::vector<std::pair<std::string, std::string>>& defaults() {
  static const std::vector<std::pair<std::string, std::string>> d = {
      {"scene.width", "32"},
      {"scene.height", "32"},
      {"scene.delta", "0.25"},
      {"scene.room_count", "2"},
      {"scene.min_room_extent", "6"},
      {"scene.max_room_extent", "12"},
      {"scene.door_probability", "0.5"},
      {"scene.window_probability", "0.25"},
      {"scene.door_width", "2"},
      {"scene.window_width", "2"},
      {"scene.force_aperture", "true"},
      {"scene.ap_count", "5"},
      {"scene.seed", "1"},
      {"priors.tau_t", "0.5"},
      {"priors.sigma_m", "0"},
      {"priors.w_b", "4"},
      {"priors.rho", "1"},
      {"priors.max_link", "0"},
      {"priors.cull_rule", "lit_faces"},
      {"sim.frequency_ghz", "3.5"},
      {"sim.max_reflections", "2"},
      {"sim.max_transmissions", "4"},
      {"sim.max_diffractions", "1"},
      {"sim.rays", "3600"},
      {"sim.p_min", "-150"},
      {"sim.p_max", "-30"},
      {"sim.diffraction_loss_db", "15"},
      {"sim.min_amplitude", "1e-06"},
      {"dataset.scenes", "10"},
      {"dataset.protocol", "ALG"},
      {"dataset.seed", "1"},
      {"train.epochs", "30"},
      {"train.batch_size", "8"},
      {"train.learning_rate", "0.05"},
      {"train.seed", "1"},
      {"train.base_channels", "16"},
      {"train.optimizer", "sgd"},
      {"train.physics", "true"},
      {"sample.steps", "10"},
      {"sample.seed", "1"},
      {"locate.k", "5"},
      {"locate.n_queries", "3000"},
      {"locate.seed", "1"},
      {"locate.weighted", "false"},
      {"render.colormap", "viridis"},
  };
  return d;
}

class Settings {
 public:
  Settings() {
    for (const auto& [k, v] : defaults()) kv_[k] = v;
  }

  void set(const std::string& key, const std::string& value) {
    if (!kv_.count(key)) throw UsageError("unknown configuration key '" + key + "'");
    kv_[key] = value;
  }

  void load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file '" + path + "'");
    CLI::ConfigINI ini;
    ini.comment('#');
    for (const CLI::ConfigItem& item : ini.from_config(in)) {
      if (item.name == "++" || item.name == "--") continue;  // section markers
      std::string value;
      for (std::size_t i = 0; i < item.inputs.size(); ++i) value += (i ? " " : "") + item.inputs[i];
      set(item.fullname(), value);
    }
  }

  /// "section.key=value"
  void apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw UsageError("override must look like section.key=value: '" + assignment + "'");
    set(assignment.substr(0, eq), assignment.substr(eq + 1));
  }

  const std::string& str(const std::string& key) const { return kv_.at(key); }

  double num(const std::string& key) const {
    try {
      std::size_t used = 0;
      const double v = std::stod(str(key), &used);
      if (used != str(key).size()) throw std::invalid_argument(key);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("'" + key + "' is not a number: '" + str(key) + "'");
    }
  }

  long long integer(const std::string& key) const {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(str(key), &used);
      if (used != str(key).size()) throw std::invalid_argument(key);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("'" + key + "' is not an integer: '" + str(key) + "'");
    }
  }

  std::uint64_t seed(const std::string& key) const {
    const long long v = integer(key);
    if (v < 0) throw ConfigError("'" + key + "' must be a non-negative seed");
    return static_cast<std::uint64_t>(v);
  }

  bool flag(const std::string& key) const {
    const std::string& v = str(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("'" + key + "' is not a boolean: '" + v + "'");
  }

  /// Sorted key=value lines; the input to the config hash.
  std::string canonical() const {
    std::ostringstream os;
    for (const auto& [k, v] : kv_) os << k << "=" << v << "\n";
    return os.str();
  }

 private:
  std::map<std::string, std::string> kv_;
};

// ---------------------------------------------------------------------------
// Typed configuration, validated before any work starts.

struct RunConfig {
  SceneSpec scene;
  PriorConfig priors;
  SimConfig sim;
  int dataset_scenes = 10;
  Protocol protocol = Protocol::kAlg;
  std::uint64_t dataset_seed = 1;
  TrainConfig train;
  bool physics = true;
  int sample_steps = 10;
  std::uint64_t sample_seed = 1;
  int k = 5;
  int n_queries = 3000;
  std::uint64_t locate_seed = 1;
  bool weighted = false;
  Colormap colormap = Colormap::kViridis;
  std::string hash;
};

int to_int(const Settings& s, const std::string& key) {
  const long long v = s.integer(key);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw ConfigError("'" + key + "' out of range");
  return static_cast<int>(v);
}

RunConfig resolve(const Settings& s) {
  RunConfig c;
  c.scene.width = to_int(s, "scene.width");
  c.scene.height = to_int(s, "scene.height");
  c.scene.delta = s.num("scene.delta");
  c.scene.room_count = to_int(s, "scene.room_count");
  c.scene.min_room_extent = to_int(s, "scene.min_room_extent");
  c.scene.max_room_extent = to_int(s, "scene.max_room_extent");
  c.scene.door_probability = s.num("scene.door_probability");
  c.scene.window_probability = s.num("scene.window_probability");
  c.scene.door_width = to_int(s, "scene.door_width");
  c.scene.window_width = to_int(s, "scene.window_width");
  c.scene.force_aperture = s.flag("scene.force_aperture");
  c.scene.ap_count = to_int(s, "scene.ap_count");
  c.scene.seed = s.seed("scene.seed");

  c.priors.tau_t = s.num("priors.tau_t");
  c.priors.sigma_m = s.num("priors.sigma_m");
  c.priors.w_b = s.num("priors.w_b");
  c.priors.rho = to_int(s, "priors.rho");
  c.priors.max_link = to_int(s, "priors.max_link");
  const std::string& rule = s.str("priors.cull_rule");
  if (rule == "lit_faces") {
    c.priors.cull_rule = CullRule::kLitFaces;
  } else if (rule == "normal_quadrant") {
    c.priors.cull_rule = CullRule::kNormalQuadrant;
  } else {
    throw ConfigError("priors.cull_rule must be lit_faces or normal_quadrant");
  }

  c.sim.frequency_ghz = s.num("sim.frequency_ghz");
  c.sim.max_reflections = to_int(s, "sim.max_reflections");
  c.sim.max_transmissions = to_int(s, "sim.max_transmissions");
  c.sim.max_diffractions = to_int(s, "sim.max_diffractions");
  c.sim.rays = to_int(s, "sim.rays");
  c.sim.p_min = s.num("sim.p_min");
  c.sim.p_max = s.num("sim.p_max");
  c.sim.diffraction_loss_db = s.num("sim.diffraction_loss_db");
  c.sim.min_amplitude = s.num("sim.min_amplitude");

  c.dataset_scenes = to_int(s, "dataset.scenes");
  c.protocol = parse_protocol(s.str("dataset.protocol"));
  c.dataset_seed = s.seed("dataset.seed");

  c.train.epochs = to_int(s, "train.epochs");
  c.train.batch_size = to_int(s, "train.batch_size");
  c.train.learning_rate = s.num("train.learning_rate");
  c.train.seed = s.seed("train.seed");
  c.train.base_channels = to_int(s, "train.base_channels");
  c.train.optimizer = parse_optimizer(s.str("train.optimizer"));
  c.train.w_b = c.priors.w_b;
  c.train.rho = c.priors.rho;
  c.train.p_min = c.sim.p_min;
  c.train.p_max = c.sim.p_max;
  c.physics = s.flag("train.physics");

  c.sample_steps = to_int(s, "sample.steps");
  c.sample_seed = s.seed("sample.seed");
  c.k = to_int(s, "locate.k");
  c.n_queries = to_int(s, "locate.n_queries");
  c.locate_seed = s.seed("locate.seed");
  c.weighted = s.flag("locate.weighted");
  c.colormap = parse_colormap(s.str("render.colormap"));

  c.scene.validate();
  c.priors.validate();
  c.sim.validate();
  c.train.validate();
  if (c.dataset_scenes < 1) throw ConfigError("dataset.scenes must be >= 1");
  if (c.sample_steps < 1) throw ConfigError("sample.steps must be >= 1");
  if (c.k < 1) throw ConfigError("locate.k must be >= 1");
  if (c.n_queries < 1) throw ConfigError("locate.n_queries must be >= 1");
  c.hash = config_hash(s.canonical());
  return c;
}

void log_run(const std::string& command, const RunConfig& c, std::uint64_t seed) {
  std::cerr << "[ird] " << command << " config_hash=" << c.hash << " seed=" << seed << "\n";
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) { write_text(path, j.dump(2) + "\n"); }

Cell resolve_ap(const Scene& scene, int index, const std::string& xy) {
  if (!xy.empty()) {
    Cell c{};
    char comma = 0;
    std::istringstream is(xy);
    if (!(is >> c.x >> comma >> c.y) || comma != ',') throw UsageError("--ap-xy must look like X,Y");
    scene.validate_ap(c);
    return c;
  }
  if (index < 0 || index >= static_cast<int>(scene.aps.size()))
    throw ValidationError("AP index " + std::to_string(index) + " out of range (scene has " +
                          std::to_string(scene.aps.size()) + ")");
  return scene.aps[static_cast<std::size_t>(index)];
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_scene_gen(const RunConfig& c, const std::string& out) {
  log_run("scene gen", c, c.scene.seed);
  save_scene(generate_scene(c.scene), out);
  return kOk;
}

int cmd_scene_check(const std::string& path) {
  const Scene s = load_scene(path);
  s.validate();
  std::cout << path << ": " << s.width << "x" << s.height << " delta=" << format_double(s.delta)
            << " aps=" << s.aps.size() << " ok\n";
  return kOk;
}

int cmd_priors_extract(const RunConfig& c, const std::string& scene_path, int ap_index, const std::string& ap_xy,
                       const std::string& out) {
  log_run("priors extract", c, 0);
  const Scene s = load_scene(scene_path);
  const Cell ap = resolve_ap(s, ap_index, ap_xy);
  const FieldPair f = derive_fields(s);
  const PriorSet p = extract_priors(s, f, ap, c.priors);
  export_priors(p, assemble_condition(s, f, p, ap, c.priors.sigma_for(s)), out);
  std::cout << "validated diffraction points: " << p.validated.diffraction.size()
            << ", transmission points: " << p.validated.transmission.size() << "\n";
  return kOk;
}

int cmd_sim_run(const RunConfig& c, const std::string& scene_path, int ap_index, const std::string& ap_xy,
                const std::string& out) {
  log_run("sim run", c, 0);
  const Scene s = load_scene(scene_path);
  save_radiomap(simulate_rm(s, resolve_ap(s, ap_index, ap_xy), c.sim), out);
  return kOk;
}

int cmd_dataset_build(const RunConfig& c, const std::string& out) {
  log_run("dataset build", c, c.dataset_seed);
  std::vector<NamedScene> scenes;
  for (int i = 0; i < c.dataset_scenes; ++i) {
    SceneSpec spec = c.scene;
    spec.seed = mix_seed(c.scene.seed, static_cast<std::uint64_t>(i));
    char id[32];
    std::snprintf(id, sizeof(id), "scene%03d", i);
    scenes.push_back({id, generate_scene(spec)});
  }
  const Dataset ds = generate_dataset(scenes, c.sim, c.protocol, c.dataset_seed, out);
  std::cout << "pairs: train " << ds.split.train.size() << ", test " << ds.split.test.size() << "\n";
  return kOk;
}

int cmd_ddm_train(const RunConfig& c, const std::string& dataset_dir, const std::string& out,
                  const std::string& loss_csv) {
  log_run("ddm train", c, c.train.seed);
  const LoadedDataset ld = load_dataset(dataset_dir);
  const auto examples = build_examples(ld.scenes, ld.data, ld.data.split.train, c.priors, c.physics, c.train.p_min,
                                       c.train.p_max);
  const TrainResult r = train(examples, c.train);
  save_checkpoint({r.net, c.hash, c.train.seed}, out);
  if (!loss_csv.empty()) write_text(loss_csv, loss_curve_csv(r.curve));
  std::cout << "steps: " << r.curve.size() << ", final loss: " << format_double(r.curve.back().loss) << "\n";
  return kOk;
}

int cmd_ddm_sample(const RunConfig& c, const std::string& dataset_dir, const std::string& model,
                   const std::string& out) {
  log_run("ddm sample", c, c.sample_seed);
  const LoadedDataset ld = load_dataset(dataset_dir);
  const Checkpoint ck = load_checkpoint(model);
  const auto examples = build_examples(ld.scenes, ld.data, ld.data.split.test, c.priors, c.physics, c.train.p_min,
                                       c.train.p_max);
  const UNetPredictor pred(ck.net);
  const auto xs = sample_all(pred, examples, c.sample_steps, c.sample_seed);
  fs::create_directories(out);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const Pair p = ld.data.split.test[i];
    const RadioMap rm = denormalize(xs[i], c.train.p_min, c.train.p_max);
    save_radiomap(rm, (fs::path(out) / map_file_name(ld.scenes[static_cast<std::size_t>(p.scene)].id, p.ap)).string());
  }
  std::cout << "sampled maps: " << xs.size() << "\n";
  return kOk;
}

std::vector<RadioMap> load_predictions(const LoadedDataset& ld, const std::string& pred_dir) {
  std::vector<RadioMap> out;
  for (const Pair& p : ld.data.split.test) {
    const std::string& id = ld.scenes[static_cast<std::size_t>(p.scene)].id;
    RadioMap rm = load_radiomap((fs::path(pred_dir) / map_file_name(id, p.ap)).string());
    rm.scene_id = id;
    rm.ap_index = p.ap;
    out.push_back(std::move(rm));
  }
  return out;
}

int cmd_metrics_compare(const RunConfig& c, const std::string& dataset_dir, const std::string& pred_dir,
                        const std::string& method, const std::string& out, const std::string& csv) {
  log_run("metrics compare", c, 0);
  const LoadedDataset ld = load_dataset(dataset_dir);
  const auto preds = load_predictions(ld, pred_dir);
  MetricReport report;
  report.p_min = c.sim.p_min;
  report.p_max = c.sim.p_max;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const Pair p = ld.data.split.test[i];
    const Scene& s = ld.scenes[static_cast<std::size_t>(p.scene)].scene;
    const RadioMap& ref = ld.data.maps[static_cast<std::size_t>(p.scene)][static_cast<std::size_t>(p.ap)];
    const Grid<float> w = pair_inputs(s, derive_fields(s), s.aps[static_cast<std::size_t>(p.ap)], c.priors, true).weights;
    MetricEntry e = compare_maps(preds[i], ref, w, c.sim.p_min, c.sim.p_max);
    e.method = method;
    report.add(e);
  }
  write_json(out, to_json(report));
  if (!csv.empty()) write_text(csv, to_csv(report));
  std::cout << "mean rmse " << format_double(report.mean_rmse()) << " over " << report.entries.size() << " maps\n";
  return kOk;
}

int cmd_locate_eval(const RunConfig& c, const std::string& dataset_dir, const std::string& pred_dir,
                    const std::string& out, const std::string& csv) {
  log_run("locate eval", c, c.locate_seed);
  const LoadedDataset ld = load_dataset(dataset_dir);
  const auto preds = load_predictions(ld, pred_dir);
  // Fingerprints per scene use every AP of that scene present in the test split.
  std::map<int, std::vector<std::size_t>> by_scene;
  for (std::size_t i = 0; i < ld.data.split.test.size(); ++i) by_scene[ld.data.split.test[i].scene].push_back(i);
  nlohmann::ordered_json summary;
  summary["k"] = c.k;
  summary["n_queries_per_scene"] = c.n_queries;
  summary["seed"] = c.locate_seed;
  nlohmann::ordered_json scenes = nlohmann::ordered_json::array();
  std::string rows = "scene,true_x,true_y,est_x,est_y,error_m\n";
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& [scene_index, idx] : by_scene) {
    const auto& ns = ld.scenes[static_cast<std::size_t>(scene_index)];
    std::vector<RadioMap> pred, oracle;
    for (std::size_t i : idx) {
      pred.push_back(preds[i]);
      oracle.push_back(ld.data.maps[static_cast<std::size_t>(scene_index)][static_cast<std::size_t>(ld.data.split.test[i].ap)]);
    }
    const LocalizationResult r = evaluate_localization(pred, oracle, ns.scene, c.n_queries,
                                                       mix_seed(c.locate_seed, static_cast<std::uint64_t>(scene_index)),
                                                       c.k, c.weighted);
    nlohmann::ordered_json j = summary_json(r);
    j["scene"] = ns.id;
    j["aps"] = idx.size();
    scenes.push_back(j);
    std::istringstream lines(to_csv(r));
    std::string line;
    std::getline(lines, line);
    while (std::getline(lines, line)) rows += ns.id + "," + line + "\n";
    total += r.mean_error * static_cast<double>(r.queries.size());
    count += r.queries.size();
  }
  summary["mean_error_m"] = count ? total / static_cast<double>(count) : 0.0;
  summary["scenes"] = scenes;
  write_json(out, summary);
  if (!csv.empty()) write_text(csv, rows);
  std::cout << "mean localization error " << format_double(summary["mean_error_m"].get<double>()) << " m\n";
  return kOk;
}

int cmd_render(const RunConfig& c, const std::string& in, const std::string& out, double lo, double hi) {
  log_run("render", c, 0);
  const std::string ext = fs::path(in).extension().string();
  const std::string source = fs::path(in).filename().string();
  if (ext == ".pgm") {
    const Grid<std::uint8_t> g = decode_pgm(read_file_bytes(in));
    Grid<float> v(g.width(), g.height());
    for (std::size_t i = 0; i < g.size(); ++i) v.data()[i] = g.data()[i] / 255.0f;
    render_to_file(v, std::isnan(lo) ? 0.0 : lo, std::isnan(hi) ? 1.0 : hi, c.colormap, source, out);
  } else {
    const Grid<float> g = decode_radiomap(read_file_bytes(in));
    render_to_file(g, std::isnan(lo) ? c.sim.p_min : lo, std::isnan(hi) ? c.sim.p_max : hi, c.colormap, source, out);
  }
  return kOk;
}

// ---------------------------------------------------------------------------

int run(int argc, char** argv) {
  CLI::App app{"irdkit radio map pipeline"};
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "keyed configuration file")->check(CLI::ExistingFile);
  app.add_option("--set", overrides, "override, section.key=value (repeatable)");

  std::string out, in, scene_path, dataset_dir, model, pred_dir, loss_csv, csv, ap_xy, method = "ddm";
  int ap_index = 0;
  double lo = std::nan(""), hi = std::nan("");

  auto* scene = app.add_subcommand("scene", "generate or check scene files");
  scene->require_subcommand(1);
  auto* scene_gen = scene->add_subcommand("gen", "generate a scene from [scene] settings");
  scene_gen->add_option("--spec", config_path, "configuration file")->check(CLI::ExistingFile);
  scene_gen->add_option("--out", out, "output .irdscn")->required();
  auto* scene_check = scene->add_subcommand("check", "parse and validate a scene file");
  scene_check->add_option("file", in, "scene file")->required();

  auto* priors = app.add_subcommand("priors", "physics priors");
  priors->require_subcommand(1);
  auto* priors_extract = priors->add_subcommand("extract", "export prior channels and point index");
  priors_extract->add_option("--scene", scene_path)->required();
  priors_extract->add_option("--ap", ap_index, "AP index in the scene");
  priors_extract->add_option("--ap-xy", ap_xy, "explicit AP cell X,Y");
  priors_extract->add_option("--out", out, "output directory")->required();

  auto* sim = app.add_subcommand("sim", "ray-tracing simulator");
  sim->require_subcommand(1);
  auto* sim_run = sim->add_subcommand("run", "simulate one radio map");
  sim_run->add_option("--scene", scene_path)->required();
  sim_run->add_option("--ap", ap_index, "AP index in the scene");
  sim_run->add_option("--ap-xy", ap_xy, "explicit AP cell X,Y");
  sim_run->add_option("--out", out, "output .irdmap")->required();

  auto* dataset = app.add_subcommand("dataset", "datasets");
  dataset->require_subcommand(1);
  auto* dataset_build = dataset->add_subcommand("build", "generate scenes, simulate maps, write split manifest");
  dataset_build->add_option("--out", out, "output directory")->required();

  auto* ddm = app.add_subcommand("ddm", "diffusion model");
  ddm->require_subcommand(1);
  auto* ddm_train = ddm->add_subcommand("train", "train a predictor on the train split");
  ddm_train->add_option("--dataset", dataset_dir)->required();
  ddm_train->add_option("--out", out, "output checkpoint")->required();
  ddm_train->add_option("--loss-csv", loss_csv, "loss curve CSV");
  auto* ddm_sample = ddm->add_subcommand("sample", "sample maps for the test split");
  ddm_sample->add_option("--dataset", dataset_dir)->required();
  ddm_sample->add_option("--model", model)->required();
  ddm_sample->add_option("--out", out, "output directory")->required();

  auto* locate = app.add_subcommand("locate", "fingerprint localization");
  locate->require_subcommand(1);
  auto* locate_eval = locate->add_subcommand("eval", "KNN localization with predicted maps as database");
  locate_eval->add_option("--dataset", dataset_dir)->required();
  locate_eval->add_option("--pred", pred_dir)->required();
  locate_eval->add_option("--out", out, "summary JSON")->required();
  locate_eval->add_option("--csv", csv, "per-query CSV");

  auto* metrics = app.add_subcommand("metrics", "pixel metrics");
  metrics->require_subcommand(1);
  auto* metrics_compare = metrics->add_subcommand("compare", "compare predicted maps with the dataset");
  metrics_compare->add_option("--dataset", dataset_dir)->required();
  metrics_compare->add_option("--pred", pred_dir)->required();
  metrics_compare->add_option("--method", method, "method tag");
  metrics_compare->add_option("--out", out, "report JSON")->required();
  metrics_compare->add_option("--csv", csv, "report CSV");

  auto* render = app.add_subcommand("render", "render an IRDMAP1 map or PGM channel to PNG");
  render->add_option("input", in)->required();
  render->add_option("--out", out, "output .png")->required();
  render->add_option("--min", lo, "value at the bottom bin");
  render->add_option("--max", hi, "value at the top bin");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    Settings settings;
    if (!config_path.empty()) settings.load_file(config_path);
    for (const auto& o : overrides) settings.apply_override(o);
    const RunConfig c = resolve(settings);

    if (scene_gen->parsed()) return cmd_scene_gen(c, out);
    if (scene_check->parsed()) return cmd_scene_check(in);
    if (priors_extract->parsed()) return cmd_priors_extract(c, scene_path, ap_index, ap_xy, out);
    if (sim_run->parsed()) return cmd_sim_run(c, scene_path, ap_index, ap_xy, out);
    if (dataset_build->parsed()) return cmd_dataset_build(c, out);
    if (ddm_train->parsed()) return cmd_ddm_train(c, dataset_dir, out, loss_csv);
    if (ddm_sample->parsed()) return cmd_ddm_sample(c, dataset_dir, model, out);
    if (locate_eval->parsed()) return cmd_locate_eval(c, dataset_dir, pred_dir, out, csv);
    if (metrics_compare->parsed()) return cmd_metrics_compare(c, dataset_dir, pred_dir, method, out, csv);
    if (render->parsed()) return cmd_render(c, in, out, lo, hi);
    throw UsageError("no subcommand");
  } catch (const UsageError& e) {
    std::cerr << "ird: usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "ird: configuration error: " << e.what() << "\n";
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "ird: parse error: " << e.what() << "\n";
    return kUnreadable;
  } catch (const ValidationError& e) {
    std::cerr << "ird: validation error: " << e.what() << "\n";
    return kInvalid;
  } catch (const SizingError& e) {
    std::cerr << "ird: validation error: " << e.what() << "\n";
    return kInvalid;
  } catch (const ShapeError& e) {
    std::cerr << "ird: validation error: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "ird: error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace irdkit::cli

int main(int argc, char** argv) { return irdkit::cli::run(argc, argv); }
