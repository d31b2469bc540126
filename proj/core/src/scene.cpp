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

#include "dhr/scene.hpp"

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>

#include "dhr/io.hpp"

namespace dhr {

namespace fs = std::filesystem;

void SceneBundle::validate() const {
  if (num_classes < 1) throw Error(ErrorKind::kDomain, "scene: num_classes < 1");
  if (cams.classes() + 1 != num_classes) {
    throw Error(ErrorKind::kDomain, "scene: cam channel count != num_classes - 1");
  }
  if (base_mask.classes() != num_classes ||
      base_mask.height() != cams.height() || base_mask.width() != cams.width()) {
    throw Error(ErrorKind::kDomain, "scene: base mask shape does not match cams");
  }
  cams.validate();
  base_mask.validate();
  uss_features.validate();
  wss_features.validate();
  if (uss_features.empty() || wss_features.empty()) {
    throw Error(ErrorKind::kDomain, "scene: empty feature map");
  }
  for (int c : image_labels) {
    if (c < 1 || static_cast<std::size_t>(c) >= num_classes) {
      throw Error(ErrorKind::kDomain, "scene: image label out of range");
    }
  }
  for (std::size_t k = 0; k < cams.classes(); ++k) {
    const auto ch = cams.channel(k);
    const bool has_mass =
        std::any_of(ch.begin(), ch.end(), [](double v) { return v > 0.0; });
    if (has_mass && !image_labels.contains(static_cast<int>(k + 1))) {
      throw Error(ErrorKind::kDomain, "scene: class " + std::to_string(k + 1) +
                                          " has CAM mass but no image label");
    }
  }
  if (rgb && (rgb->height != cams.height() || rgb->width != cams.width())) {
    throw Error(ErrorKind::kDomain, "scene: rgb size does not match cams");
  }
  if (ground_truth) {
    if (ground_truth->height() != cams.height() ||
        ground_truth->width() != cams.width()) {
      throw Error(ErrorKind::kDomain, "scene: ground truth size does not match cams");
    }
    ground_truth->validate(num_classes);
  }
}

SceneBundle load_scene(const fs::path& dir) {
  using namespace scene_files;
  for (const char* name : {kCam, kBaseMask, kUssFeatures, kWssFeatures, kLabels}) {
    if (!fs::exists(dir / name)) {
      throw Error(ErrorKind::kIo, "scene " + dir.filename().string() +
                                      ": missing required file " + name);
    }
  }
  SceneBundle s;
  s.id = dir.filename().string();

  nlohmann::json labels;
  try {
    std::ifstream in(dir / kLabels);
    labels = nlohmann::json::parse(in);
    s.num_classes = labels.at("num_classes").get<std::size_t>();
    for (int c : labels.at("classes").get<std::vector<int>>()) s.image_labels.insert(c);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kFormat, "scene " + s.id + ": bad labels.json: " + e.what());
  }

  s.cams = ScoreStack(npy_to_tensor(load_npy(dir / kCam)));
  for (double& v : s.cams.data()) v = std::clamp(v, 0.0, 1.0);
  const LabelMask base = load_mask_png(dir / kBaseMask);
  s.base_mask = one_hot(base, s.num_classes);
  s.base_mask.has_background = true;
  s.uss_features = FeatureMap(npy_to_tensor(load_npy(dir / kUssFeatures)));
  s.wss_features = FeatureMap(npy_to_tensor(load_npy(dir / kWssFeatures)));
  if (fs::exists(dir / kRgb)) s.rgb = load_rgb_png(dir / kRgb);
  if (fs::exists(dir / kGroundTruth)) s.ground_truth = load_mask_png(dir / kGroundTruth);
  s.validate();
  return s;
}

void save_scene(const SceneBundle& scene, const fs::path& dir) {
  using namespace scene_files;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create " + dir.string());
  save_npy(tensor_to_npy(scene.cams), dir / kCam);
  save_mask_png(argmax_labels(scene.base_mask), dir / kBaseMask);
  save_npy(tensor_to_npy(scene.uss_features), dir / kUssFeatures);
  save_npy(tensor_to_npy(scene.wss_features), dir / kWssFeatures);
  nlohmann::json labels;
  labels["classes"] = std::vector<int>(scene.image_labels.begin(), scene.image_labels.end());
  labels["num_classes"] = scene.num_classes;
  const std::string text = labels.dump() + "\n";
  write_file_bytes(dir / kLabels, std::vector<std::uint8_t>(text.begin(), text.end()));
  if (scene.rgb) save_rgb_png(*scene.rgb, dir / kRgb);
  if (scene.ground_truth) save_mask_png(*scene.ground_truth, dir / kGroundTruth);
}

std::vector<std::string> list_scene_ids(const fs::path& root) {
  std::vector<std::string> ids;
  if (!fs::is_directory(root)) {
    throw Error(ErrorKind::kIo, "not a directory: " + root.string());
  }
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) ids.push_back(entry.path().filename().string());
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace dhr
