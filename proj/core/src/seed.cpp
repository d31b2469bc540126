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

#include "dhr/seed.hpp"

#include <algorithm>
#include <string>

namespace dhr {

void SeedConfig::validate() const {
  if (!(vanish_ratio > 0.0 && vanish_ratio <= 1.0)) {
    throw Error(ErrorKind::kConfig, "seed: theta_v must lie in (0, 1]");
  }
  if (!(bg_fixed_score >= 0.0 && bg_fixed_score <= 1.0)) {
    throw Error(ErrorKind::kConfig, "seed: bg score must lie in [0, 1]");
  }
}

ScoreStack attach_background(const ScoreStack& cams, const SeedConfig& cfg) {
  const std::size_t n = cams.pixels();
  ScoreStack out(cams.classes() + 1, cams.height(), cams.width(), 0.0);
  out.has_background = true;
  auto bg = out.channel(0);
  if (cfg.bg_mode == BackgroundMode::kFixed) {
    std::fill(bg.begin(), bg.end(), cfg.bg_fixed_score);
  } else {
    std::vector<double> fg_max(n, 0.0);
    for (std::size_t c = 0; c < cams.classes(); ++c) {
      auto ch = cams.channel(c);
      for (std::size_t p = 0; p < n; ++p) fg_max[p] = std::max(fg_max[p], ch[p]);
    }
    for (std::size_t p = 0; p < n; ++p) bg[p] = std::clamp(1.0 - fg_max[p], 0.0, 1.0);
  }
  for (std::size_t c = 0; c < cams.classes(); ++c) {
    std::copy(cams.channel(c).begin(), cams.channel(c).end(),
              out.channel(c + 1).begin());
  }
  return out;
}

ScoreStack restrict_to_labels(const ScoreStack& scores, const ClassSet& labels) {
  ScoreStack out = scores;
  for (std::size_t c = 1; c < out.classes(); ++c) {
    if (!labels.contains(static_cast<int>(c))) {
      auto ch = out.channel(c);
      std::fill(ch.begin(), ch.end(), 0.0);
    }
  }
  return out;
}

SeedResult compute_seed(const ScoreStack& cams_with_bg,
                        const ClassSet& image_labels, const RgbImage* rgb,
                        const RefinerConfig& refiner, const OtConfig& ot_cfg) {
  const ScoreStack restricted = restrict_to_labels(cams_with_bg, image_labels);
  for (int c : image_labels) {
    if (c <= 0 || static_cast<std::size_t>(c) >= restricted.classes()) {
      throw Error(ErrorKind::kDomain,
                  "seed: image label " + std::to_string(c) + " out of range");
    }
    const auto ch = restricted.channel(static_cast<std::size_t>(c));
    if (std::none_of(ch.begin(), ch.end(), [](double v) { return v > 0.0; })) {
      throw Error(ErrorKind::kDegenerate,
                  "seed: labeled class " + std::to_string(c) + " has no CAM mass");
    }
  }
  SeedResult out;
  out.gated = f_ot_mask(restricted, ot_cfg);
  out.gated.scores.has_background = true;
  const ScoreStack& gated = out.gated.converged ? out.gated.scores : restricted;
  RefineResult refined = apply_refiner(gated, rgb, refiner);
  out.seed = std::move(refined.scores);
  out.seed.has_background = true;
  out.refiner_fell_back = refined.fell_back;
  return out;
}

ClassSet detect_vanished(const ScoreStack& base, const ScoreStack& seed,
                         const ClassSet& image_labels, double vanish_ratio) {
  if (!base.same_shape(seed)) {
    throw Error(ErrorKind::kDomain, "seed: base and seed shapes differ");
  }
  const auto base_area = label_areas(argmax_labels(base), base.classes());
  const auto seed_area = label_areas(argmax_labels(seed), seed.classes());
  ClassSet vanished;
  for (int c : image_labels) {
    if (c <= 0 || static_cast<std::size_t>(c) >= base.classes()) continue;
    const double b = static_cast<double>(base_area[static_cast<std::size_t>(c)]);
    const double s = static_cast<double>(seed_area[static_cast<std::size_t>(c)]);
    if (s > 0.0 && b < vanish_ratio * s) vanished.insert(c);
  }
  return vanished;
}

ScoreStack merge_init(const ScoreStack& base, const ScoreStack& seed,
                      const ClassSet& vanished) {
  if (!base.same_shape(seed)) {
    throw Error(ErrorKind::kDomain, "seed: base and seed shapes differ");
  }
  LabelMask fused = argmax_labels(base);
  const LabelMask seed_labels = argmax_labels(seed);
  for (std::size_t p = 0; p < fused.pixels(); ++p) {
    if (vanished.contains(seed_labels[p])) fused[p] = seed_labels[p];
  }
  ScoreStack out = one_hot(fused, base.classes());
  out.has_background = base.has_background;
  return out;
}

}  // namespace dhr
