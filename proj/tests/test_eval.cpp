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

#include <cmath>
#include <map>

#include "dhr/eval.hpp"
#include "dhr/random.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace dhr {
namespace {

using testing::kind_of;

LabelMask random_mask(Rng& rng, std::size_t h, std::size_t w, std::size_t classes,
                      bool with_ignore) {
  LabelMask m(h, w);
  for (auto& l : m.labels()) {
    l = static_cast<std::uint8_t>(rng.below(classes));
    if (with_ignore && rng.bernoulli(0.05)) l = kIgnoreLabel;
  }
  return m;
}

TEST(Confusion, IdenticalMasksAreDiagonal) {
  Rng rng(1);
  const LabelMask m = random_mask(rng, 6, 6, 4, false);
  const ConfusionMatrix cm = confusion(m, m, 4);
  for (std::size_t g = 0; g < 4; ++g) {
    for (std::size_t p = 0; p < 4; ++p) {
      if (g != p) {
        EXPECT_EQ(cm.at(g, p), 0u);
      }
    }
  }
  EXPECT_EQ(cm.total(), 36u);
}

TEST(Confusion, AllIgnoreIsZero) {
  const LabelMask gt(3, 3, kIgnoreLabel);
  EXPECT_EQ(confusion(LabelMask(3, 3, 1), gt, 2).total(), 0u);
}

TEST(Confusion, MatchesNestedLoopCount) {
  for (std::uint64_t t = 0; t < 20; ++t) {
    Rng rng(2, t, "cm");
    const LabelMask gt = random_mask(rng, 8, 8, 5, true);
    const LabelMask pred = random_mask(rng, 8, 8, 5, false);
    const auto ref = oracle::confusion(pred.labels(), gt.labels(), 5);
    const ConfusionMatrix cm = confusion(pred, gt, 5);
    for (std::size_t g = 0; g < 5; ++g) {
      for (std::size_t p = 0; p < 5; ++p) EXPECT_EQ(cm.at(g, p), ref[g][p]);
    }
  }
}

TEST(Confusion, MergingShardsEqualsWhole) {
  Rng rng(3);
  const LabelMask g1 = random_mask(rng, 5, 5, 3, true), p1 = random_mask(rng, 5, 5, 3, false);
  const LabelMask g2 = random_mask(rng, 5, 5, 3, true), p2 = random_mask(rng, 5, 5, 3, false);
  ConfusionMatrix sum = confusion(p1, g1, 3);
  sum += confusion(p2, g2, 3);
  ConfusionMatrix other = confusion(p2, g2, 3);
  other += confusion(p1, g1, 3);
  EXPECT_EQ(sum, other);
  EXPECT_EQ(sum.total(), confusion(p1, g1, 3).total() + confusion(p2, g2, 3).total());
}

TEST(Miou, IdenticalMasksScoreOne) {
  Rng rng(4);
  const LabelMask m = random_mask(rng, 7, 7, 6, true);
  EXPECT_DOUBLE_EQ(miou(confusion(m, m, 6)).mean, 1.0);
}

TEST(Miou, HandCountedTwoByTwo) {
  const LabelMask gt(2, 2, std::vector<std::uint8_t>{1, 1, 0, 0});
  const LabelMask pred(2, 2, std::vector<std::uint8_t>{1, 0, 0, 0});
  const IouReport r = miou(confusion(pred, gt, 2));
  EXPECT_EQ(*r.per_class[1], 0.5);
  EXPECT_EQ(*r.per_class[0], 2.0 / 3.0);
  EXPECT_EQ(r.mean, 7.0 / 12.0);
  EXPECT_EQ(r.counted_classes, 2u);
}

TEST(Miou, DisjointSingleClassMasksScoreZero) {
  const IouReport r = miou(confusion(LabelMask(3, 3, 1), LabelMask(3, 3, 0), 2));
  EXPECT_EQ(r.mean, 0.0);
  EXPECT_EQ(*r.per_class[0], 0.0);
  EXPECT_EQ(*r.per_class[1], 0.0);
}

TEST(Miou, AbsentClassIsUndefined) {
  const IouReport r = miou(confusion(LabelMask(2, 2, 0), LabelMask(2, 2, 0), 3));
  EXPECT_FALSE(r.per_class[1].has_value());
  EXPECT_FALSE(r.per_class[2].has_value());
  EXPECT_EQ(r.counted_classes, 1u);
}

TEST(Miou, MatchesBruteForce) {
  for (std::uint64_t t = 0; t < 30; ++t) {
    Rng rng(5, t, "miou");
    const std::size_t h = 1 + rng.below(32), w = 1 + rng.below(32), c = 1 + rng.below(6);
    const LabelMask gt = random_mask(rng, h, w, c, true);
    const LabelMask pred = random_mask(rng, h, w, c, false);
    EXPECT_EQ(miou(confusion(pred, gt, c)).mean, oracle::miou(pred.labels(), gt.labels(), c));
  }
}

TEST(Adjacency, SingleClassHasNone) {
  const AdjacencyReport r = adjacency_stats(LabelMask(5, 5, 2), std::nullopt);
  EXPECT_EQ(r.adjacent_area_ratio, 0.0);
  EXPECT_EQ(r.counted_pixels, 25u);
}

TEST(Adjacency, VerticalHalfSplit) {
  LabelMask m(16, 16);
  for (std::size_t y = 0; y < 16; ++y) {
    for (std::size_t x = 8; x < 16; ++x) m.at(y, x) = 1;
  }
  const AdjacencyReport r = adjacency_stats(m, std::nullopt, 1);
  EXPECT_EQ(r.adjacent_area_ratio, 0.125);
  EXPECT_EQ(r.adjacent_pixels, 32u);
  EXPECT_EQ(r.inter_class_share, 1.0);
  EXPECT_EQ((r.pair_counts.at({0, 1})), 16u);
  EXPECT_EQ((r.pair_counts.at({1, 0})), 16u);

  const auto bf = oracle::adjacency(m.labels(), 16, 16, 1, {{0, 0}, {1, 1}});
  EXPECT_EQ(bf.adjacent, r.adjacent_pixels);
}

TEST(Adjacency, SameGroupIsNotInterClass) {
  LabelMask m(4, 4);
  for (std::size_t y = 0; y < 4; ++y) m.at(y, 3) = 1;
  ClassGroups g;
  g.groups = {{0, 1}};
  const AdjacencyReport r = adjacency_stats(m, g, 1);
  EXPECT_GT(r.adjacent_pixels, 0u);
  EXPECT_EQ(r.inter_class_share, 0.0);
}

TEST(Adjacency, MatchesBruteForce) {
  for (std::uint64_t t = 0; t < 30; ++t) {
    Rng rng(6, t, "adj");
    const std::size_t h = 1 + rng.below(32), w = 1 + rng.below(32);
    const int radius = 1 + static_cast<int>(rng.below(3));
    const LabelMask m = random_mask(rng, h, w, 4, true);
    ClassGroups g;
    g.groups = {{0, 2}, {1}, {3}};
    const std::map<int, int> key = {{0, 0}, {2, 0}, {1, 1}, {3, 2}};
    const AdjacencyReport r = adjacency_stats(m, g, radius);
    const auto bf = oracle::adjacency(m.labels(), static_cast<int>(h), static_cast<int>(w), radius, key);
    EXPECT_EQ(r.counted_pixels, bf.counted);
    EXPECT_EQ(r.adjacent_pixels, bf.adjacent);
    EXPECT_EQ(r.inter_class_pixels, bf.inter);
  }
}

TEST(ClassifyFromCams, ClosedForms) {
  ScoreStack s(2, 3, 3, 0.0);
  for (double& v : s.channel(1)) v = 2.0;  // outside [0, 1] on purpose
  const auto p = classify_from_cams(s);
  EXPECT_EQ(p[0], 0.5);
  EXPECT_NEAR(p[1], 0.8807970779778823, 1e-15);
}

TEST(ClassifyFromCams, MatchesMeanThenLogistic) {
  Rng rng(7);
  ScoreStack s(4, 5, 6);
  for (double& v : s.data()) v = rng.uniform();
  const auto p = classify_from_cams(s);
  for (std::size_t c = 0; c < 4; ++c) {
    double mean = 0.0;
    for (std::size_t y = 0; y < 5; ++y) {
      for (std::size_t x = 0; x < 6; ++x) mean += s.at(c, y, x);
    }
    mean /= 30.0;
    EXPECT_NEAR(p[c], 1.0 / (1.0 + std::exp(-mean)), 1e-12);
  }
}

TEST(SoftMargin, ZeroLogitsGiveLogTwo) {
  const std::vector<double> x(5, 0.0), y = {1, 0, 1, 1, 0};
  EXPECT_NEAR(multilabel_soft_margin(x, y), std::log(2.0), 1e-12);
}

TEST(SoftMargin, SaturatedCorrectLogitIsNearZero) {
  const std::vector<double> x = {20.0}, y = {1.0};
  EXPECT_LT(multilabel_soft_margin(x, y), 1e-8);
  const std::vector<double> far = {800.0};
  EXPECT_TRUE(std::isfinite(multilabel_soft_margin(far, std::vector<double>{0.0})));
}

TEST(SoftMargin, MatchesDirectFormula) {
  Rng rng(8);
  std::vector<double> x(10), y(10);
  for (std::size_t k = 0; k < 10; ++k) {
    x[k] = 4.0 * rng.normal();
    y[k] = rng.bernoulli(0.5) ? 1.0 : 0.0;
  }
  double expected = 0.0;
  for (std::size_t k = 0; k < 10; ++k) {
    const double s = 1.0 / (1.0 + std::exp(-x[k]));
    expected += -(y[k] * std::log(s) + (1 - y[k]) * std::log(1 - s));
  }
  EXPECT_NEAR(multilabel_soft_margin(x, y), expected / 10.0, 1e-12);
}

TEST(SoftMargin, NanIsRejected) {
  const std::vector<double> x = {std::nan("")}, y = {1.0};
  EXPECT_EQ(kind_of([&] { multilabel_soft_margin(x, y); }), ErrorKind::kDomain);
}

TEST(CrossEntropy, OneHotMatchIsZero) {
  Rng rng(9);
  const LabelMask m = random_mask(rng, 4, 4, 3, false);
  const auto r = pixel_cross_entropy(one_hot(m, 3), m);
  EXPECT_EQ(r.loss, 0.0);
  EXPECT_FALSE(r.clamped);
}

TEST(CrossEntropy, UniformPredictionGivesLogC) {
  for (std::size_t c : {2u, 5u, 21u}) {
    Rng rng(c);
    const LabelMask m = random_mask(rng, 6, 6, c, true);
    const auto r = pixel_cross_entropy(ScoreStack(c, 6, 6, 1.0 / static_cast<double>(c)), m);
    EXPECT_NEAR(r.loss, std::log(static_cast<double>(c)), 1e-12);
  }
}

TEST(CrossEntropy, MatchesDirectEvaluationAndClamps) {
  Rng rng(10);
  ScoreStack pred(3, 4, 4);
  for (std::size_t p = 0; p < 16; ++p) {
    double z = 0.0;
    for (std::size_t c = 0; c < 3; ++c) z += pred.at(c, p) = rng.uniform() + 0.01;
    for (std::size_t c = 0; c < 3; ++c) pred.at(c, p) /= z;
  }
  const LabelMask m = random_mask(rng, 4, 4, 3, true);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t p = 0; p < 16; ++p) {
    if (m[p] == kIgnoreLabel) continue;
    sum -= std::log(pred.at(m[p], p));
    ++n;
  }
  EXPECT_NEAR(pixel_cross_entropy(pred, m).loss, sum / static_cast<double>(n), 1e-12);

  pred.at(0, 0) = 0.0;
  LabelMask zero(4, 4, 0);
  EXPECT_TRUE(pixel_cross_entropy(pred, zero).clamped);
}

}  // namespace
}  // namespace dhr
