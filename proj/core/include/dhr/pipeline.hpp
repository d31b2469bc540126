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

#include "dhr/rebalance.hpp"
#include "dhr/refine.hpp"
#include "dhr/scene.hpp"
#include "dhr/seed.hpp"

namespace dhr {

/// rebalance.ot drives every OT solve in the pipeline, including the seed.
struct DhrConfig {
  SeedConfig seed;
  RebalanceConfig rebalance;
  RefinerConfig refiner;

  void validate() const;
};

/// What each stage decided for one scene.
struct Provenance {
  ClassSet vanished;
  ClassGroups groups;
  int seed_iterations = 0;
  int uss_iterations = 0;
  std::vector<int> wss_iterations;
  bool seed_ot_fallback = false;  // seed used ungated CAMs
  bool uss_ot_fallback = false;   // S-hat^us is the ungated similarity
  int wss_unconverged_groups = 0;
  bool refiner_fallback = false;  // pamr requested without rgb
};

struct DhrResult {
  ScoreStack seed;      // M^seed
  ScoreStack init;      // M^init
  ScoreStack uss;       // S-hat^us
  ScoreStack balanced;  // S-hat^dh
  ScoreStack final_scores;  // M^dh
  Provenance provenance;
};

/// Full refinement of one scene: background attachment, OT seed, vanished
/// class recovery, USS then WSS rebalancing, boundary refinement. Feature
/// maps are bilinearly resampled to mask resolution. Stage errors are
/// rethrown with the scene id prefixed.
DhrResult dhr_propagate(const SceneBundle& scene, const DhrConfig& cfg);

}  // namespace dhr
