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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.
//
//   acceptance            run all criteria
//   acceptance 1 4 8      run a subset

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "irdkit/dataset.hpp"
#include "irdkit/ddm.hpp"
#include "irdkit/locate.hpp"
#include "irdkit/metrics.hpp"
#include "irdkit/pipeline.hpp"
#include "irdkit/priors.hpp"
#include "irdkit/propagate.hpp"
#include "irdkit/unet.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;

namespace irdkit {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

Scene random_test_scene(Rng& rng, int i) {
  const int size = static_cast<int>(rng.uniform_int(8, 64));
  if (i % 3 == 0) return testing::random_obstacle_scene(rng, size, 6);
  if (i % 3 == 1) return testing::random_clutter_scene(rng, size, static_cast<int>(rng.uniform_int(8, 64)),
                                                       rng.uniform(0.05, 0.5));
  SceneSpec spec;
  spec.width = std::max(size, 24);
  spec.height = std::max(size, 24);
  spec.room_count = 3;
  spec.min_room_extent = 6;
  spec.max_room_extent = 12;
  spec.ap_count = 3;
  spec.seed = rng.next_u64();
  return generate_scene(spec);
}

// ---------------------------------------------------------------------------

Verdict corner_rule() {
  const auto t0 = Clock::now();
  Rng rng(101);
  long long corners = 0, mismatches = 0;
  for (int i = 0; i < 200; ++i) {
    const Scene s = random_test_scene(rng, i);
    std::set<Cell> found;
    for (const auto& p : detect_diffraction_candidates(derive_fields(s)).diffraction) found.insert(p.cell);
    for (int y = 0; y < s.height; ++y)
      for (int x = 0; x < s.width; ++x) {
        const bool want = s.classes(x, y) != kAir && testing::corner_rule_oracle(s, x, y);
        corners += want;
        mismatches += want != (found.count({x, y}) == 1);
      }
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 10.0,
          fmt("%lld mismatches over 200 scenes (%lld corners), %.2f s; need 0 and < 10 s", mismatches, corners, secs)};
}

Verdict los_agreement() {
  Rng rng(202);
  long long cells = 0, disagree = 0, non_tangent = 0;
  for (int i = 0; i < 50; ++i) {
    const Scene s = random_test_scene(rng, i);
    const Cell ap = s.aps.front();
    const Mask m = compute_los_mask(s, ap);
    const Mask oracle = testing::los_oracle(s, ap);
    for (int y = 0; y < s.height; ++y)
      for (int x = 0; x < s.width; ++x) {
        ++cells;
        if (m(x, y) != oracle(x, y)) {
          ++disagree;
          non_tangent += !testing::corner_tangent(s, ap, {x, y});
        }
      }
  }
  const double agree = 1.0 - static_cast<double>(disagree) / static_cast<double>(cells);
  return {agree >= 0.99 && non_tangent == 0,
          fmt("agreement %.5f over %lld cells, %lld disagreements, %lld not corner-tangent; need >= 0.99 and 0",
              agree, cells, disagree, non_tangent)};
}

Verdict cull_prune() {
  Rng rng(303);
  long long checked_cull = 0, false_culls = 0, checked_prune = 0, false_prunes = 0;
  for (int i = 0; i < 100; ++i) {
    // Directional culling on open obstacle layouts.
    const Scene o = testing::random_obstacle_scene(rng, static_cast<int>(rng.uniform_int(10, 20)), 3);
    const CandidateSet oc = detect_diffraction_candidates(derive_fields(o));
    for (const Cell ap : o.aps) {
      std::set<Cell> kept;
      for (const auto& p : cull_directional(oc, ap).diffraction) kept.insert(p.cell);
      for (const auto& p : oc.diffraction) {
        if (kept.count(p.cell)) continue;
        ++checked_cull;
        false_culls += !testing::corner_shadow_region(o, ap, p.cell).empty();
      }
    }
    // Same-room pruning on generated room layouts.
    SceneSpec spec;
    spec.width = 32;
    spec.height = 32;
    spec.room_count = 3;
    spec.min_room_extent = 6;
    spec.max_room_extent = 14;
    spec.ap_count = 3;
    spec.seed = 5000 + static_cast<std::uint64_t>(i);
    const Scene r = generate_scene(spec);
    const CandidateSet rc = detect_diffraction_candidates(derive_fields(r));
    for (const Cell ap : r.aps) {
      const Mask room = testing::flood_air(r, ap);
      std::set<Cell> kept;
      for (const auto& p : prune_same_room(rc, ap, r).diffraction) kept.insert(p.cell);
      for (const auto& p : rc.diffraction) {
        if (kept.count(p.cell)) continue;
        ++checked_prune;
        bool touches_other_room = false;
        for (const Cell d : kFourNeighbors) {
          const Cell n{p.cell.x + d.x, p.cell.y + d.y};
          if (r.classes.contains(n) && r.classes[n] == kAir && !room[n]) touches_other_room = true;
        }
        false_prunes += touches_other_room;
      }
    }
  }
  return {false_culls == 0 && false_prunes == 0 && checked_cull > 0 && checked_prune > 0,
          fmt("%lld culled corners with nonempty shadow (of %lld), %lld wrongly pruned (of %lld) on 100+100 "
              "scenes; need 0 and 0",
              false_culls, checked_cull, false_prunes, checked_prune)};
}

Verdict ddm_consistency() {
  const auto t0 = Clock::now();
  const int n = 100000;
  Rng rng(7);  // same stream as the unit test
  const Grid<float> x0 = testing::random_field(rng, 2, 2);
  double worst_z = 0.0, worst_var = 0.0;
  for (double t : {0.1, 0.5, 0.9}) {
    std::vector<double> sum(4, 0.0), sq(4, 0.0);
    for (int k = 0; k < n; ++k) {
      const ForwardDraw d = forward_sample(x0, t, rng);
      for (int i = 0; i < 4; ++i) {
        sum[i] += d.x_t.data()[i];
        sq[i] += static_cast<double>(d.x_t.data()[i]) * d.x_t.data()[i];
      }
    }
    for (int i = 0; i < 4; ++i) {
      const double mean = sum[i] / n;
      const double var = sq[i] / n - mean * mean;
      // standard error of the mean is sqrt(t/n); of the sample variance, t*sqrt(2/n)
      worst_z = std::max(worst_z, std::abs(mean - (1.0 - t) * x0.data()[i]) / std::sqrt(t / n));
      worst_var = std::max(worst_var, std::abs(var - t) / (t * std::sqrt(2.0 / n)));
    }
  }
  const Grid<float> clean = testing::random_field(rng, 16, 16, -0.9, 0.9);
  const testing::OraclePredictor oracle(clean);
  ConditionStack blank;
  for (auto& ch : blank.channels) ch = Grid<float>(16, 16, 0.0f);
  const Grid<float> x = sample_normalized(oracle, blank, 100, 405);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += std::pow(double(x.data()[i]) - clean.data()[i], 2);
  const double rec = std::sqrt(s / static_cast<double>(x.size()));
  const double secs = seconds_since(t0);
  return {worst_z < 3.0 && worst_var < 3.0 && rec < 1e-3 && secs < 60.0,
          fmt("worst mean |z| %.2f, worst variance |z| %.2f, oracle 100-step RMSE %.2e, %.1f s; need < 3, < 3, "
              "< 1e-3, < 60 s",
              worst_z, worst_var, rec, secs)};
}

Verdict training_objective() {
  // Unit boundary weights on a real scene, network outputs on a fixed batch.
  SceneSpec spec;
  spec.width = 16;
  spec.height = 16;
  spec.room_count = 1;
  spec.min_room_extent = 6;
  spec.max_room_extent = 10;
  spec.ap_count = 2;
  spec.seed = 505;
  const Scene s = generate_scene(spec);
  PriorConfig pc;
  pc.w_b = 1.0;
  const FieldPair f = derive_fields(s);
  const CondUNet net(NetArch{}, 506);
  Rng rng(507);
  std::vector<TrainingExample> batch;
  std::vector<detail::Draw> draws;
  for (const Cell ap : s.aps) {
    PairInputs in = pair_inputs(s, f, ap, pc, true);
    batch.push_back({in.cond, normalize(simulate_rm(s, ap)), in.weights});
  }
  double plain = 0.0;
  const UNetPredictor pred(net);
  for (const auto& ex : batch) {
    const double t = rng.uniform(kTMin, 1.0);
    ForwardDraw fd = forward_sample(ex.x0, t, rng);
    const Prediction p = pred.predict(fd.x_t, t, ex.cond);
    double sum = 0.0;
    for (std::size_t i = 0; i < ex.x0.size(); ++i) {
      sum += std::pow(double(p.drift.data()[i]) + ex.x0.data()[i], 2);
      sum += std::pow(double(p.noise.data()[i]) - fd.eps.data()[i], 2);
    }
    plain += sum / static_cast<double>(ex.x0.size());
    draws.push_back({t, std::move(fd.x_t), std::move(fd.eps)});
  }
  plain /= static_cast<double>(batch.size());
  std::vector<const TrainingExample*> ptrs;
  for (const auto& ex : batch) ptrs.push_back(&ex);
  const double weighted = detail::batch_loss(net, ptrs, draws, nullptr);
  const double rel = std::abs(weighted - plain) / plain;

  std::vector<TrainingExample> one{batch.front()};
  TrainConfig cfg;
  cfg.epochs = 300;
  cfg.batch_size = 1;
  cfg.base_channels = 8;
  cfg.seed = 508;
  const double before = evaluate_loss(CondUNet(NetArch{kNetInputChannels, 8}, mix_seed(cfg.seed, 1)), one, 16, 509);
  const double after = evaluate_loss(train(one, cfg).net, one, 16, 509);
  const double drop = 1.0 - after / before;
  return {rel < 1e-6 && drop >= 0.5,
          fmt("unit-weight loss vs plain MSE relative error %.2e; single-sample overfit loss %.4f -> %.4f "
              "(%.0f%% drop); need < 1e-6 and >= 50%%",
              rel, before, after, 100.0 * drop)};
}

// ---------------------------------------------------------------------------
// Ablation and localization share one trained model set.

struct AblationRun {
  Protocol protocol;
  std::uint64_t seed;
  double rmse[2];  // [ablated, physics]
  std::vector<Pair> test;
  std::vector<Grid<float>> predicted[2];
};

struct AblationData {
  std::vector<NamedScene> scenes;
  std::vector<std::vector<RadioMap>> oracle;
  std::vector<std::vector<TrainingExample>> examples[2];
  std::vector<AblationRun> runs;
  double seconds = 0.0;
};

constexpr double kAblationPMin = kDefaultPMin, kAblationPMax = kDefaultPMax;

AblationData& ablation() {
  static AblationData d = [] {
    const auto t0 = Clock::now();
    AblationData a;
    const int n_scenes = 40;
    for (int i = 0; i < n_scenes; ++i) {
      SceneSpec spec;
      spec.width = 32;
      spec.height = 32;
      spec.room_count = 3;
      spec.min_room_extent = 6;
      spec.max_room_extent = 14;
      spec.ap_count = 5;
      spec.seed = 1000 + static_cast<std::uint64_t>(i);
      a.scenes.push_back({"scene" + std::to_string(i), generate_scene(spec)});
    }
    a.oracle.resize(n_scenes);
    for (auto& e : a.examples) e.resize(n_scenes);
    parallel_for(static_cast<std::size_t>(n_scenes), [&](std::size_t i) {
      const Scene& s = a.scenes[i].scene;
      const FieldPair f = derive_fields(s);
      for (const Cell ap : s.aps) {
        a.oracle[i].push_back(simulate_rm(s, ap));
        for (int phys = 0; phys < 2; ++phys) {
          PairInputs in = pair_inputs(s, f, ap, PriorConfig{}, phys == 1);
          a.examples[phys][i].push_back(
              {std::move(in.cond), normalize(a.oracle[i].back(), kAblationPMin, kAblationPMax), std::move(in.weights)});
        }
      }
    });
    const std::vector<int> counts(n_scenes, 5);
    for (std::uint64_t seed = 1; seed <= 5; ++seed)
      for (Protocol proto : {Protocol::kAlg, Protocol::kZlg}) {
        const DatasetSplit split = make_split(counts, proto, seed);
        AblationRun run{proto, seed, {0.0, 0.0}, split.test, {}};
        for (int phys = 0; phys < 2; ++phys) {
          std::vector<TrainingExample> train_set, test_set;
          for (const Pair p : split.train) train_set.push_back(a.examples[phys][p.scene][p.ap]);
          for (const Pair p : split.test) test_set.push_back(a.examples[phys][p.scene][p.ap]);
          TrainConfig cfg;  // identical budget for both arms
          cfg.seed = seed;
          const TrainResult r = train(train_set, cfg);
          run.predicted[phys] = sample_all(UNetPredictor(r.net), test_set, 10, mix_seed(seed, 77));
          double sum = 0.0;
          for (std::size_t k = 0; k < test_set.size(); ++k) {
            double s2 = 0.0;
            const auto& x = run.predicted[phys][k];
            for (std::size_t i = 0; i < x.size(); ++i) s2 += std::pow(double(x.data()[i]) - test_set[k].x0.data()[i], 2);
            sum += std::sqrt(s2 / static_cast<double>(x.size()));
          }
          run.rmse[phys] = sum / static_cast<double>(test_set.size());
        }
        std::cerr << "  seed " << seed << " " << to_string(proto) << ": ablated " << run.rmse[0] << ", physics "
                  << run.rmse[1] << " (" << fmt("%.0f", seconds_since(t0)) << " s)\n";
        a.runs.push_back(std::move(run));
      }
    a.seconds = seconds_since(t0);
    return a;
  }();
  return d;
}

Verdict ablation_direction() {
  const AblationData& a = ablation();
  int wins[2] = {0, 0};
  std::string per;
  for (const auto& r : a.runs) {
    const int p = r.protocol == Protocol::kAlg ? 0 : 1;
    wins[p] += r.rmse[1] < r.rmse[0];
    per += fmt(" %s%llu %.3f/%.3f", to_string(r.protocol).c_str(), static_cast<unsigned long long>(r.seed), r.rmse[1],
               r.rmse[0]);
  }
  return {wins[0] >= 4 && wins[1] >= 4 && a.seconds <= 1800.0,
          fmt("physics beats ablated on ALG %d/5, ZLG %d/5, %.0f s; need >= 4/5 each and <= 30 min; "
              "physics/ablated RMSE:",
              wins[0], wins[1], a.seconds) +
              per};
}

Verdict localization() {
  const AblationData& a = ablation();
  // Oracle maps as database and query source, K = 1.
  double oracle_total = 0.0;
  std::size_t oracle_queries = 0, shared_queries = 0, shared_cells = 0;
  for (std::size_t i = 0; i < a.scenes.size(); ++i) {
    const auto r = evaluate_localization(a.oracle[i], a.oracle[i], a.scenes[i].scene, 500, mix_seed(707, i), 1);
    oracle_total += r.mean_error * static_cast<double>(r.queries.size());
    oracle_queries += r.queries.size();
    // Diagnostic only: cells whose fingerprint is not unique in the scene.
    const FingerprintDB db = build_fingerprint_db(a.oracle[i], a.scenes[i].scene);
    std::map<std::vector<double>, int> seen;
    for (std::size_t row = 0; row < db.rows(); ++row) ++seen[std::vector<double>(db.row(row), db.row(row) + db.aps)];
    std::set<std::pair<double, double>> shared;
    for (std::size_t row = 0; row < db.rows(); ++row)
      if (seen[std::vector<double>(db.row(row), db.row(row) + db.aps)] > 1) shared.insert({db.position(row).x, db.position(row).y});
    shared_cells += shared.size();
    for (const auto& q : r.queries) shared_queries += shared.count({q.truth.x, q.truth.y});
  }
  const double oracle_mean = oracle_total / static_cast<double>(oracle_queries);

  // Predicted maps of the unseen-layout runs: every AP of a test scene is held out.
  double err[2] = {0.0, 0.0};
  std::size_t n = 0;
  for (const auto& run : a.runs) {
    if (run.protocol != Protocol::kZlg) continue;
    std::map<int, std::vector<std::size_t>> by_scene;
    for (std::size_t k = 0; k < run.test.size(); ++k) by_scene[run.test[k].scene].push_back(k);
    for (const auto& [scene, idx] : by_scene) {
      std::vector<RadioMap> truth;
      for (std::size_t k : idx) truth.push_back(a.oracle[static_cast<std::size_t>(scene)][static_cast<std::size_t>(run.test[k].ap)]);
      for (int phys = 0; phys < 2; ++phys) {
        std::vector<RadioMap> pred;
        for (std::size_t k : idx) pred.push_back(denormalize(run.predicted[phys][k], kAblationPMin, kAblationPMax));
        const auto r = evaluate_localization(pred, truth, a.scenes[static_cast<std::size_t>(scene)].scene, 500,
                                             mix_seed(run.seed, static_cast<std::uint64_t>(scene)), 5);
        err[phys] += r.mean_error * static_cast<double>(r.queries.size());
        if (phys == 1) n += r.queries.size();
      }
    }
  }
  err[0] /= static_cast<double>(n);
  err[1] /= static_cast<double>(n);
  return {oracle_mean == 0.0 && err[1] <= err[0],
          fmt("oracle K=1 mean error %.6g m over %zu queries (%zu queries land on %zu cells with a non-unique "
              "fingerprint); K=5 mean error physics %.3f m vs ablated %.3f m over %zu queries; need exactly 0 and "
              "physics <= ablated",
              oracle_mean, oracle_queries, shared_queries, shared_cells, err[1], err[0], n)};
}

Verdict metric_closed_forms() {
  Rng rng(808);
  double worst = 0.0;
  for (double offset : {0.5, 1.0, 3.0, 12.75, 25.5, 100.0}) {
    Grid<double> a(16, 16), b(16, 16);
    for (std::size_t i = 0; i < a.size(); ++i) {
      a.data()[i] = rng.uniform(0.0, 100.0);
      b.data()[i] = a.data()[i] + offset;
    }
    worst = std::max(worst, std::abs(rmse(a, b) - offset));
    worst = std::max(worst, std::abs(psnr(a, b) - 20.0 * std::log10(255.0 / offset)));
  }
  int violations = 0;
  for (int i = 0; i < 1000; ++i) {
    Grid<double> a(8, 8), b(8, 8), c(8, 8);
    for (std::size_t k = 0; k < a.size(); ++k) {
      a.data()[k] = rng.uniform(0.0, 255.0);
      b.data()[k] = rng.uniform(0.0, 255.0);
      c.data()[k] = rng.uniform(0.0, 255.0);
    }
    const double r1 = rmse(a, b), r2 = rmse(a, c), p1 = psnr(a, b), p2 = psnr(a, c);
    if ((r1 < r2 && !(p1 > p2)) || (r1 > r2 && !(p1 < p2))) ++violations;
  }
  return {worst < 1e-9 && violations == 0,
          fmt("worst closed-form error %.2e, %d monotonicity violations over 1000 pairs; need < 1e-9 and 0", worst,
              violations)};
}

std::string read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Verdict determinism() {
  const fs::path root = fs::temp_directory_path() / "irdkit_acceptance_determinism";
  fs::remove_all(root);
  for (const char* run : {"a", "b"}) {
    const std::string cmd = std::string("bash '") + IRDKIT_PIPELINE_SCRIPT + "' '" + IRDKIT_CLI + "' '" +
                            IRDKIT_DEMO_CONFIG + "' '" + (root / run).string() + "' > '" +
                            (root / (std::string(run) + ".log")).string() + "' 2>&1";
    fs::create_directories(root);
    if (std::system(cmd.c_str()) != 0) return {false, "pipeline script failed; see " + (root / run).string() + ".log"};
  }
  std::map<std::string, std::string> files[2];
  int r = 0;
  for (const char* run : {"a", "b"}) {
    for (const auto& e : fs::recursive_directory_iterator(root / run))
      if (e.is_regular_file()) files[r][fs::relative(e.path(), root / run).string()] = read_all(e.path());
    ++r;
  }
  int differ = 0;
  std::set<std::string> kinds;
  for (const auto& [name, bytes] : files[0]) {
    const auto it = files[1].find(name);
    if (it == files[1].end() || it->second != bytes) ++differ;
    kinds.insert(fs::path(name).extension().string());
  }
  if (files[1].size() != files[0].size()) ++differ;
  const bool covered = kinds.count(".irdscn") && kinds.count(".irdmap") && kinds.count(".ckpt") &&
                       kinds.count(".json") && kinds.count(".png");
  return {differ == 0 && covered && !files[0].empty(),
          fmt("%zu files compared, %d differ (scenes, maps, checkpoint, metrics JSON and PNGs %s); need 0",
              files[0].size(), differ, covered ? "present" : "MISSING")};
}

}  // namespace
}  // namespace irdkit

int main(int argc, char** argv) {
  using namespace irdkit;
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"corner-rule exactness", corner_rule},
      {"line-of-sight agreement", los_agreement},
      {"culling and pruning soundness", cull_prune},
      {"forward/reverse process consistency", ddm_consistency},
      {"training objective correctness", training_objective},
      {"ablation direction", ablation_direction},
      {"localization sanity", localization},
      {"metric closed forms", metric_closed_forms},
      {"determinism", determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::cout << "criterion " << id << " " << (v.pass ? "PASS" : "FAIL") << " " << criteria[i].first << ": "
              << v.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
