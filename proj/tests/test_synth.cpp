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

#include <gtest/gtest.h>

#include <fstream>
#include <nlohmann/json.hpp>

#include "dhr/eval.hpp"
#include "dhr/io.hpp"
#include "dhr/synth.hpp"
#include "test_util.hpp"

namespace dhr {
namespace {

namespace fs = std::filesystem;
using testing::kind_of;
using testing::TempDir;

bool same_bundle(const SceneBundle& a, const SceneBundle& b) {
  return a.id == b.id && a.num_classes == b.num_classes && a.cams == b.cams &&
         a.base_mask == b.base_mask && a.uss_features == b.uss_features &&
         a.wss_features == b.wss_features && a.image_labels == b.image_labels &&
         a.rgb == b.rgb && a.ground_truth == b.ground_truth;
}

TEST(GenerateScene, DeterministicInSeedAndIndex) {
  const SynthConfig cfg;
  EXPECT_TRUE(same_bundle(generate_scene(cfg, 5).bundle, generate_scene(cfg, 5).bundle));
  EXPECT_FALSE(same_bundle(generate_scene(cfg, 5).bundle, generate_scene(cfg, 6).bundle));
}

TEST(GenerateScene, NoiselessUssFeaturesAreConstantPerSuperClass) {
  SynthConfig cfg;
  cfg.noise_sigma = 0.0;
  const SynthScene s = generate_scene(cfg, 0);
  const FeatureMap& f = s.bundle.uss_features;
  const LabelMask& gt = *s.bundle.ground_truth;
  std::map<int, std::vector<double>> first;
  for (std::size_t p = 0; p < gt.pixels(); ++p) {
    std::vector<double> v(f.dim());
    for (std::size_t k = 0; k < f.dim(); ++k) v[k] = f.at(k, p);
    const int sup = cfg.super_of(gt[p]);
    auto [it, inserted] = first.emplace(sup, v);
    if (!inserted) {
      ASSERT_EQ(it->second, v);
    }
  }
  EXPECT_GE(first.size(), 3u);
}

TEST(GenerateScene, MinorAreaNearTarget) {
  const SynthConfig cfg;
  double sum = 0.0;
  std::size_t n = 0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const SynthScene s = generate_scene(cfg, i);
    const auto areas = label_areas(*s.bundle.ground_truth, cfg.num_classes());
    for (int m : s.minor_classes) {
      sum += static_cast<double>(areas[static_cast<std::size_t>(m)]) /
             static_cast<double>(cfg.height * cfg.width);
      ++n;
    }
  }
  const double mean = sum / static_cast<double>(n);
  EXPECT_GT(mean, 0.5 * cfg.minor_area_frac);
  EXPECT_LT(mean, 1.5 * cfg.minor_area_frac);
}

TEST(GenerateScene, EveryMinorSitsInsideItsHost) {
  const SynthConfig cfg;
  for (std::uint64_t i = 0; i < 20; ++i) {
    const SynthScene s = generate_scene(cfg, i);
    ASSERT_EQ(s.minor_classes.size(), 2u);
    // One inter-super pair and one intra-super pair.
    EXPECT_NE(cfg.super_of(s.minor_classes[0]), cfg.super_of(s.hosts[0]));
    EXPECT_EQ(cfg.super_of(s.minor_classes[1]), cfg.super_of(s.hosts[1]));
    const AdjacencyReport adj = adjacency_stats(*s.bundle.ground_truth, std::nullopt, 1);
    for (std::size_t m = 0; m < 2; ++m) {
      EXPECT_GT((adj.pair_counts.count({s.minor_classes[m], s.hosts[m]})), 0u);
    }
  }
}

TEST(GenerateScene, WssFeaturesSeparateClasses) {
  // Nearest class centroid of the WSS features labels almost every pixel
  // correctly.
  const SynthConfig cfg;
  std::size_t correct = 0, total = 0;
  for (std::uint64_t i = 0; i < 10; ++i) {
    const SynthScene s = generate_scene(cfg, i);
    const LabelMask& gt = *s.bundle.ground_truth;
    const FeatureMap& f = s.bundle.wss_features;
    const ClassCentroids cents = class_average_pool(f, gt);
    const ScoreStack sim = similarity_scores(f, cents, cfg.num_classes());
    const LabelMask pred = argmax_labels(sim);
    for (std::size_t p = 0; p < gt.pixels(); ++p) correct += pred[p] == gt[p];
    total += gt.pixels();
  }
  EXPECT_GE(static_cast<double>(correct) / static_cast<double>(total), 0.95);
}

TEST(GenerateScene, InvalidConfigIsRejected) {
  SynthConfig cfg;
  cfg.minor_area_frac = 1.5;
  EXPECT_EQ(kind_of([&] { generate_scene(cfg, 0); }), ErrorKind::kConfig);
}

TEST(GenerateScene, ImpossibleLayoutIsGenerationError) {
  SynthConfig cfg;
  cfg.minor_area_frac = 0.9;
  EXPECT_EQ(kind_of([&] { generate_scene(cfg, 0); }), ErrorKind::kGeneration);
}

TEST(DegradeBaseMask, NoAbsorbNoNoiseIsGroundTruth) {
  SynthConfig cfg;
  cfg.absorb_prob = 0.0;
  cfg.boundary_flip_prob = 0.0;
  const SynthScene s = generate_scene(cfg, 2);
  EXPECT_EQ(argmax_labels(s.bundle.base_mask), *s.bundle.ground_truth);
  EXPECT_TRUE(s.absorbed.empty());
}

TEST(DegradeBaseMask, FullAbsorptionErasesMinors) {
  const SynthConfig cfg;
  for (std::uint64_t i = 0; i < 10; ++i) {
    const SynthScene s = generate_scene(cfg, i);
    const auto areas = label_areas(argmax_labels(s.bundle.base_mask), cfg.num_classes());
    EXPECT_EQ(s.absorbed, s.minor_classes);
    for (int m : s.minor_classes) EXPECT_EQ(areas[static_cast<std::size_t>(m)], 0u);
    const auto r = miou(confusion(argmax_labels(s.bundle.base_mask), *s.bundle.ground_truth,
                                  cfg.num_classes()));
    EXPECT_LT(r.mean, 1.0);
  }
}

TEST(PlantedPartition, GroupsBySuperClass) {
  const SynthConfig cfg;  // supers {1,2}, {3,4}, {5,6}
  const ClassGroups g = planted_partition(cfg, {0, 1, 2, 3, 5, 6});
  EXPECT_EQ(g.groups, (std::vector<std::vector<int>>{{0}, {1, 2}, {3}, {5, 6}}));
}

TEST(GenerateSuite, SingleSceneDirectoryIsComplete) {
  TempDir dir;
  generate_suite(SynthConfig{}, 1, dir.path());
  for (const char* f : {scene_files::kCam, scene_files::kBaseMask, scene_files::kUssFeatures,
                        scene_files::kWssFeatures, scene_files::kLabels, scene_files::kRgb,
                        scene_files::kGroundTruth}) {
    EXPECT_TRUE(fs::exists(dir.path() / "scene_0000" / f)) << f;
  }
  const SceneBundle loaded = load_scene(dir.path() / "scene_0000");
  EXPECT_EQ(loaded.image_labels, generate_scene(SynthConfig{}, 0).bundle.image_labels);
}

TEST(GenerateSuite, ManifestCountsAndRegeneratesIdentically) {
  TempDir dir;
  SynthConfig cfg;
  cfg.seed = 77;
  cfg.height = 40;
  cfg.width = 48;
  generate_suite(cfg, 3, dir.path() / "a", 2);
  std::ifstream in(dir.path() / "a" / "manifest.json");
  const auto manifest = nlohmann::json::parse(in);
  EXPECT_EQ(manifest.at("num_scenes").get<std::size_t>(), 3u);
  EXPECT_EQ(manifest.at("scenes").size(), 3u);
  EXPECT_EQ(manifest.at("scenes")[1].at("scene_seed").get<std::uint64_t>(),
            generate_scene(cfg, 1).scene_seed);

  const SynthConfig back = synth_config_from_manifest(dir.path() / "a" / "manifest.json");
  generate_suite(back, 3, dir.path() / "b", 1);
  for (const auto& entry : fs::recursive_directory_iterator(dir.path() / "a")) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), dir.path() / "a");
    EXPECT_EQ(read_file_bytes(entry.path()), read_file_bytes(dir.path() / "b" / rel))
        << rel.string();
  }
}

TEST(SceneIo, MissingRequiredFileIsIoError) {
  TempDir dir;
  generate_suite(SynthConfig{}, 1, dir.path());
  fs::remove(dir.path() / "scene_0000" / scene_files::kWssFeatures);
  EXPECT_EQ(kind_of([&] { load_scene(dir.path() / "scene_0000"); }), ErrorKind::kIo);
}

}  // namespace
}  // namespace dhr
