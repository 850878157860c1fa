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

// Glue between datasets, priors and the predictor: conditioning and
// training examples per (scene, AP) pair, and batch sampling.

#ifndef IRDKIT_PIPELINE_HPP_
#define IRDKIT_PIPELINE_HPP_

#include <vector>

#include "irdkit/dataset.hpp"
#include "irdkit/ddm.hpp"
#include "irdkit/priors.hpp"
#include "irdkit/unet.hpp"

namespace irdkit {

struct PairInputs {
  ConditionStack cond;
  Grid<float> weights;
};

/// Condition stack and boundary weights for one AP. With physics off the
/// contour and LoS channels are zeroed; the weights are unchanged.
inline PairInputs pair_inputs(const Scene& scene, const FieldPair& fields, Cell ap, const PriorConfig& prior_cfg,
                              bool physics) {
  const PriorSet priors = extract_priors(scene, fields, ap, prior_cfg);
  ConditionStack cond = assemble_condition(scene, fields, priors, ap, prior_cfg.sigma_for(scene));
  if (!physics) cond = cond.without_physics();
  return {std::move(cond), boundary_weight_map(priors, prior_cfg.w_b, prior_cfg.rho)};
}

/// One example per listed pair, in list order.
inline std::vector<TrainingExample> build_examples(const std::vector<NamedScene>& scenes, const Dataset& ds,
                                                   const std::vector<Pair>& pairs, const PriorConfig& prior_cfg,
                                                   bool physics, double p_min, double p_max) {
  std::vector<TrainingExample> out(pairs.size());
  std::vector<FieldPair> fields;
  for (const auto& ns : scenes) fields.push_back(derive_fields(ns.scene));
  parallel_for(pairs.size(), [&](std::size_t i) {
    const Pair p = pairs[i];
    const Scene& s = scenes[static_cast<std::size_t>(p.scene)].scene;
    PairInputs in = pair_inputs(s, fields[static_cast<std::size_t>(p.scene)], s.aps[static_cast<std::size_t>(p.ap)],
                                prior_cfg, physics);
    out[i] = {std::move(in.cond),
              normalize(ds.maps[static_cast<std::size_t>(p.scene)][static_cast<std::size_t>(p.ap)], p_min, p_max),
              std::move(in.weights)};
  });
  return out;
}

/// Sample i uses seed mix_seed(seed, i).
inline std::vector<Grid<float>> sample_all(const Predictor& predictor, const std::vector<TrainingExample>& examples,
                                           int steps, std::uint64_t seed) {
  std::vector<Grid<float>> out(examples.size());
  parallel_for(examples.size(), [&](std::size_t i) {
    out[i] = sample_normalized(predictor, examples[i].cond, steps, mix_seed(seed, i));
  });
  return out;
}

}  // namespace irdkit

#endif  // IRDKIT_PIPELINE_HPP_
