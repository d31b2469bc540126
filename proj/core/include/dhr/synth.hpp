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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dhr/random.hpp"
#include "dhr/rebalance.hpp"
#include "dhr/scene.hpp"

namespace dhr {

/// Synthetic scenes reproducing the vanishing adjacent minor class failure.
/// Classes are numbered 1 + s * classes_per_super + k for member k of
/// super-class s; class 0 is background.
struct SynthConfig {
  std::uint64_t seed = 42;
  std::size_t height = 64;
  std::size_t width = 64;
  int n_superclasses = 3;
  int classes_per_super = 2;
  double minor_area_frac = 0.05;  // area of each minor disk / image area
  std::size_t feature_dim_us = 16;
  std::size_t feature_dim_ws = 16;
  double noise_sigma = 0.15;
  int cam_blur_radius = 2;
  double absorb_prob = 1.0;
  double boundary_flip_prob = 0.5;  // label noise on base-mask boundaries
  double minor_cam_gain = 0.5;

  void validate() const;
  std::size_t num_classes() const {
    return 1 + static_cast<std::size_t>(n_superclasses * classes_per_super);
  }
  // -1 for background.
  int super_of(int cls) const {
    return cls <= 0 ? -1 : (cls - 1) / classes_per_super;
  }
};

struct SynthScene {
  SceneBundle bundle;
  std::uint64_t scene_seed = 0;   // stream key of the scene's layout draws
  std::vector<int> minor_classes;
  std::vector<int> hosts;          // host class of each minor
  std::vector<int> absorbed;       // minors erased from the base mask
  ClassGroups planted_groups;      // present classes grouped by super-class
};

/// Deterministic in (cfg, scene_index). Throws kGeneration when no feasible
/// layout is found within 100 attempts.
SynthScene generate_scene(const SynthConfig& cfg, std::uint64_t scene_index);

/// Base mask from ground truth: each listed minor class is absorbed into its
/// largest neighboring class with probability absorb_prob, then boundary
/// pixels take a random differing 4-neighbor label with probability
/// boundary_flip_prob. Returns the one-hot stack and the absorbed classes.
struct DegradedMask {
  ScoreStack base;
  std::vector<int> absorbed;
};
DegradedMask degrade_base_mask(const LabelMask& gt, const std::vector<int>& minors,
                               std::size_t num_classes, const SynthConfig& cfg,
                               Rng& rng);

/// Partition of `classes` by super-class, background alone.
ClassGroups planted_partition(const SynthConfig& cfg, const std::vector<int>& classes);

/// Writes scene_0000 ... plus manifest.json (config echo and per-scene
/// seeds) under `dir`.
std::vector<SynthScene> generate_suite(const SynthConfig& cfg, std::size_t n_scenes,
                                       const std::filesystem::path& dir,
                                       std::size_t workers = 1);

/// Config echoed in a suite manifest, for regenerating the suite.
SynthConfig synth_config_from_manifest(const std::filesystem::path& manifest_path);

std::string scene_name(std::uint64_t index);

}  // namespace dhr
