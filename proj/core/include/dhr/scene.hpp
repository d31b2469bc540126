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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dhr/seed.hpp"
#include "dhr/tensor.hpp"

namespace dhr {

/// One image's inputs. Class 0 is background; CAM channel k holds class k+1.
struct SceneBundle {
  std::string id;
  std::size_t num_classes = 0;  // including background
  ScoreStack cams;              // (num_classes - 1, H, W)
  ScoreStack base_mask;         // (num_classes, H, W), background at 0
  FeatureMap uss_features;
  FeatureMap wss_features;
  ClassSet image_labels;  // present foreground classes
  std::optional<RgbImage> rgb;
  std::optional<LabelMask> ground_truth;

  // Shapes, label ranges and the CAM-mass/label consistency rule.
  void validate() const;
};

// File names of the on-disk scene layout.
namespace scene_files {
inline constexpr const char* kCam = "cam.npy";
inline constexpr const char* kBaseMask = "base_mask.png";
inline constexpr const char* kUssFeatures = "uss_feat.npy";
inline constexpr const char* kWssFeatures = "wss_feat.npy";
inline constexpr const char* kLabels = "labels.json";
inline constexpr const char* kRgb = "rgb.png";
inline constexpr const char* kGroundTruth = "gt.png";
}  // namespace scene_files

/// Reads <dir>/{cam.npy, base_mask.png, uss_feat.npy, wss_feat.npy,
/// labels.json} plus the optional rgb.png and gt.png. The scene id is the
/// directory name.
SceneBundle load_scene(const std::filesystem::path& dir);

/// Writes the layout read by load_scene. The base mask is stored as its
/// argmax labels.
void save_scene(const SceneBundle& scene, const std::filesystem::path& dir);

/// Sorted names of the immediate subdirectories of `root`.
std::vector<std::string> list_scene_ids(const std::filesystem::path& root);

}  // namespace dhr
