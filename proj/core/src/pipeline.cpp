/* Copyright 2026 The DHR Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "dhr/pipeline.hpp"

namespace dhr {

void DhrConfig::validate() const {
  seed.validate();
  rebalance.validate();
  refiner.validate();
}

namespace {

FeatureMap aligned(const FeatureMap& f, std::size_t h, std::size_t w) {
  if (f.height() == h && f.width() == w) return f;
  return FeatureMap(resample(f, h, w, ResampleMode::kBilinear));
}

// Drops classes outside image_labels from a one-hot stack; their pixels
// become background.
ScoreStack restrict_one_hot(const ScoreStack& stack, const ClassSet& labels) {
  LabelMask l = argmax_labels(stack);
  for (std::size_t p = 0; p < l.pixels(); ++p) {
    if (l[p] != 0 && !labels.contains(l[p])) l[p] = 0;
  }
  ScoreStack out = one_hot(l, stack.classes());
  out.has_background = true;
  return out;
}

DhrResult run(const SceneBundle& scene, const DhrConfig& cfg) {
  cfg.validate();
  scene.validate();
  const std::size_t h = scene.cams.height();
  const std::size_t w = scene.cams.width();
  const RgbImage* rgb = scene.rgb ? &*scene.rgb : nullptr;

  DhrResult r;
  Provenance& prov = r.provenance;

  const ScoreStack cams = attach_background(scene.cams, cfg.seed);
  SeedResult seed =
      compute_seed(cams, scene.image_labels, rgb, cfg.refiner, cfg.rebalance.ot);
  prov.seed_iterations = seed.gated.iterations;
  prov.seed_ot_fallback = !seed.gated.converged;
  r.seed = std::move(seed.seed);

  const ScoreStack base = restrict_one_hot(scene.base_mask, scene.image_labels);
  prov.vanished =
      detect_vanished(base, r.seed, scene.image_labels, cfg.seed.vanish_ratio);
  r.init = merge_init(base, r.seed, prov.vanished);

  const FeatureMap uss_features = aligned(scene.uss_features, h, w);
  const FeatureMap wss_features = aligned(scene.wss_features, h, w);

  UssResult uss = uss_rebalance(uss_features, r.init, cfg.rebalance);
  prov.uss_iterations = uss.gated.iterations;
  prov.uss_ot_fallback = !uss.gated.converged;
  r.uss = std::move(uss.scores);

  prov.groups = correlation_groups(uss.centroids, cfg.rebalance.tau, {0});
  WssResult wss = wss_rebalance(r.uss, wss_features, r.init, prov.groups, cfg.rebalance);
  prov.wss_iterations = std::move(wss.iterations);
  prov.wss_unconverged_groups = wss.unconverged_groups;
  r.balanced = std::move(wss.scores);
  r.balanced.has_background = true;

  RefineResult refined = apply_refiner(r.balanced, rgb, cfg.refiner);
  prov.refiner_fallback = refined.fell_back || seed.refiner_fell_back;
  r.final_scores = std::move(refined.scores);
  r.final_scores.has_background = true;
  return r;
}

}  // namespace

DhrResult dhr_propagate(const SceneBundle& scene, const DhrConfig& cfg) {
  try {
    return run(scene, cfg);
  } catch (const Error& e) {
    throw Error(e.kind(), "scene " + scene.id + ": " + e.what());
  }
}

}  // namespace dhr
