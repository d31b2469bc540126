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
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "dhr/rebalance.hpp"
#include "dhr/tensor.hpp"

namespace dhr {

/// Rows are ground truth, columns prediction; ignore pixels are not counted.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t num_classes = 0)
      : n_(num_classes), counts_(num_classes * num_classes, 0) {}

  std::size_t num_classes() const { return n_; }
  std::uint64_t& at(std::size_t gt, std::size_t pred) { return counts_[gt * n_ + pred]; }
  std::uint64_t at(std::size_t gt, std::size_t pred) const {
    return counts_[gt * n_ + pred];
  }
  std::uint64_t total() const;

  // Element-wise sum; shards from parallel workers merge this way.
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t n_;
  std::vector<std::uint64_t> counts_;
};

ConfusionMatrix confusion(const LabelMask& pred, const LabelMask& gt,
                          std::size_t num_classes);

struct IouReport {
  std::vector<std::optional<double>> per_class;  // empty when undefined
  double mean = 0.0;  // over classes with a defined IoU
  std::size_t counted_classes = 0;
};

IouReport miou(const ConfusionMatrix& cm);

struct AdjacencyReport {
  std::size_t counted_pixels = 0;   // non-ignore
  std::size_t adjacent_pixels = 0;
  std::size_t inter_class_pixels = 0;
  double adjacent_area_ratio = 0.0;
  double inter_class_share = 0.0;
  // (own label, neighboring label) -> number of pixels of `own` touching it.
  std::map<std::pair<int, int>, std::size_t> pair_counts;
};

/// A pixel is adjacent when some non-ignore pixel within Chebyshev radius r
/// carries another label; it is inter-class when one such label lies in a
/// different group. Without groups every class is its own group.
AdjacencyReport adjacency_stats(const LabelMask& gt,
                                const std::optional<ClassGroups>& groups,
                                int radius = 1);

/// sigmoid(spatial mean) per channel.
std::vector<double> classify_from_cams(const ScoreStack& cams);

/// Mean over classes of -[y log sigmoid(x) + (1 - y) log sigmoid(-x)].
double multilabel_soft_margin(std::span<const double> logits,
                              std::span<const double> targets);

struct CrossEntropyResult {
  double loss = 0.0;
  std::size_t counted_pixels = 0;
  bool clamped = false;  // some target probability was below 1e-12
};

/// Mean of -log pred[target] over non-ignore pixels.
CrossEntropyResult pixel_cross_entropy(const ScoreStack& pred,
                                       const LabelMask& target);

}  // namespace dhr
