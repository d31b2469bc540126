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

#pragma once

#include <set>
#include <vector>

#include "dhr/refine.hpp"
#include "dhr/sinkhorn.hpp"
#include "dhr/tensor.hpp"

namespace dhr {

enum class BackgroundMode { kOneMinusMax, kFixed };

struct SeedConfig {
  double vanish_ratio = 0.5;  // theta_v in (0, 1]
  BackgroundMode bg_mode = BackgroundMode::kOneMinusMax;
  double bg_fixed_score = 0.4;

  void validate() const;
};

/// Foreground class indices are 1-based once background occupies channel 0.
using ClassSet = std::set<int>;

/// Prepends a background channel to foreground-only CAMs.
ScoreStack attach_background(const ScoreStack& cams, const SeedConfig& cfg);

/// Zeroes every foreground channel whose class is not in image_labels.
ScoreStack restrict_to_labels(const ScoreStack& scores_with_bg,
                              const ClassSet& image_labels);

struct SeedResult {
  ScoreStack seed;
  GatedScores gated;  // pre-refinement OT output and solver statistics
  bool refiner_fell_back = false;
};

/// R_C(f_ot_mask(cams)) over CAMs that already carry a background channel.
/// Throws kDegenerate when a labeled class has no CAM mass. When the plan
/// does not converge the ungated CAMs are refined instead and
/// gated.converged is false.
SeedResult compute_seed(const ScoreStack& cams_with_bg,
                        const ClassSet& image_labels, const RgbImage* rgb,
                        const RefinerConfig& refiner, const OtConfig& ot_cfg);

/// Labeled classes whose base-mask area fell below theta_v times their seed
/// area. Background (class 0) is never reported.
ClassSet detect_vanished(const ScoreStack& base, const ScoreStack& seed,
                         const ClassSet& image_labels, double vanish_ratio);

/// one_hot(argmax(base)) with every pixel whose seed argmax is a vanished
/// class relabeled to that class.
ScoreStack merge_init(const ScoreStack& base, const ScoreStack& seed,
                      const ClassSet& vanished);

}  // namespace dhr
