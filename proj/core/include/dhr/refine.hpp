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

#include <vector>

#include "dhr/tensor.hpp"

namespace dhr {

enum class RefinerKind { kIdentity, kPamr };

struct RefinerConfig {
  RefinerKind kind = RefinerKind::kIdentity;
  int iterations = 10;
  std::vector<int> dilations = {1, 2, 4, 8};
  double sigma_color = 0.1;  // on colors scaled to [0, 1]

  void validate() const;
};

struct RefineResult {
  ScoreStack scores;
  bool fell_back = false;  // pamr requested without a usable rgb image
};

ScoreStack refine_identity(const ScoreStack& scores);

/// Local affinity propagation: each iteration replaces a pixel's scores by
/// the color-affinity weighted mean over its 8-neighborhood at every
/// dilation, weights exp(-|rgb_p - rgb_q|^2 / (2 sigma^2)) normalized per
/// pixel. Out-of-image neighbors are skipped.
ScoreStack refine_pamr(const ScoreStack& scores, const RgbImage& rgb,
                       const RefinerConfig& cfg);

/// Dispatches on cfg.kind. PAMR without rgb, or with rgb at another
/// resolution, falls back to identity and sets fell_back.
RefineResult apply_refiner(const ScoreStack& scores, const RgbImage* rgb,
                           const RefinerConfig& cfg);

}  // namespace dhr
