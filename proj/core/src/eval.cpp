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

#include "dhr/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace dhr {

std::uint64_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.n_ != n_) {
    throw Error(ErrorKind::kDomain, "confusion: class counts differ");
  }
  for (std::size_t k = 0; k < counts_.size(); ++k) counts_[k] += other.counts_[k];
  return *this;
}

ConfusionMatrix confusion(const LabelMask& pred, const LabelMask& gt,
                          std::size_t num_classes) {
  if (pred.height() != gt.height() || pred.width() != gt.width()) {
    throw Error(ErrorKind::kDomain, "confusion: mask shapes differ");
  }
  ConfusionMatrix cm(num_classes);
  for (std::size_t p = 0; p < gt.pixels(); ++p) {
    const std::uint8_t g = gt[p];
    if (g == kIgnoreLabel) continue;
    const std::uint8_t q = pred[p];
    if (g >= num_classes || q >= num_classes) {
      throw Error(ErrorKind::kDomain,
                  "confusion: label " + std::to_string(std::max(g, q)) +
                      " >= class count " + std::to_string(num_classes));
    }
    ++cm.at(g, q);
  }
  return cm;
}

IouReport miou(const ConfusionMatrix& cm) {
  const std::size_t n = cm.num_classes();
  IouReport r;
  r.per_class.resize(n);
  // Extended accumulation keeps the mean correctly rounded for simple ratios.
  long double sum = 0.0L;
  for (std::size_t c = 0; c < n; ++c) {
    std::uint64_t row = 0, col = 0;
    for (std::size_t k = 0; k < n; ++k) {
      row += cm.at(c, k);
      col += cm.at(k, c);
    }
    const std::uint64_t tp = cm.at(c, c);
    const std::uint64_t denom = row + col - tp;
    if (denom == 0) continue;
    const double iou = static_cast<double>(tp) / static_cast<double>(denom);
    r.per_class[c] = iou;
    sum += static_cast<long double>(tp) / static_cast<long double>(denom);
    ++r.counted_classes;
  }
  r.mean = r.counted_classes > 0
               ? static_cast<double>(sum / static_cast<long double>(r.counted_classes))
               : 0.0;
  return r;
}

AdjacencyReport adjacency_stats(const LabelMask& gt,
                                const std::optional<ClassGroups>& groups,
                                int radius) {
  if (radius < 1) throw Error(ErrorKind::kDomain, "adjacency: radius must be >= 1");
  const auto h = static_cast<long>(gt.height());
  const auto w = static_cast<long>(gt.width());
  auto group_key = [&](int label) {
    if (!groups) return label;
    const int g = groups->group_of(label);
    // classes missing from the partition act as their own group
    return g < 0 ? 1000 + label : g;
  };

  AdjacencyReport r;
  std::vector<bool> seen(256);
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      const std::uint8_t own = gt.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x));
      if (own == kIgnoreLabel) continue;
      ++r.counted_pixels;
      std::fill(seen.begin(), seen.end(), false);
      bool adjacent = false;
      bool inter = false;
      for (long dy = -radius; dy <= radius; ++dy) {
        const long qy = y + dy;
        if (qy < 0 || qy >= h) continue;
        for (long dx = -radius; dx <= radius; ++dx) {
          const long qx = x + dx;
          if (qx < 0 || qx >= w) continue;
          const std::uint8_t other =
              gt.at(static_cast<std::size_t>(qy), static_cast<std::size_t>(qx));
          if (other == kIgnoreLabel || other == own || seen[other]) continue;
          seen[other] = true;
          adjacent = true;
          if (group_key(other) != group_key(own)) inter = true;
          ++r.pair_counts[{own, other}];
        }
      }
      if (adjacent) ++r.adjacent_pixels;
      if (inter) ++r.inter_class_pixels;
    }
  }
  if (r.counted_pixels > 0) {
    r.adjacent_area_ratio =
        static_cast<double>(r.adjacent_pixels) / static_cast<double>(r.counted_pixels);
  }
  if (r.adjacent_pixels > 0) {
    r.inter_class_share =
        static_cast<double>(r.inter_class_pixels) / static_cast<double>(r.adjacent_pixels);
  }
  return r;
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log(sigmoid(x)) without overflow for large |x|.
double log_sigmoid(double x) {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

}  // namespace

std::vector<double> classify_from_cams(const ScoreStack& cams) {
  std::vector<double> out(cams.classes(), 0.5);
  if (cams.pixels() == 0) return out;
  for (std::size_t c = 0; c < cams.classes(); ++c) {
    const auto ch = cams.channel(c);
    const double mean =
        std::accumulate(ch.begin(), ch.end(), 0.0) / static_cast<double>(ch.size());
    out[c] = sigmoid(mean);
  }
  return out;
}

double multilabel_soft_margin(std::span<const double> logits,
                              std::span<const double> targets) {
  if (logits.size() != targets.size()) {
    throw Error(ErrorKind::kDomain, "soft margin: length mismatch");
  }
  if (logits.empty()) throw Error(ErrorKind::kDomain, "soft margin: empty input");
  double sum = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    const double x = logits[k];
    const double y = targets[k];
    if (std::isnan(x) || std::isnan(y)) {
      throw Error(ErrorKind::kDomain, "soft margin: NaN input");
    }
    sum += -(y * log_sigmoid(x) + (1.0 - y) * log_sigmoid(-x));
  }
  return sum / static_cast<double>(logits.size());
}

CrossEntropyResult pixel_cross_entropy(const ScoreStack& pred,
                                       const LabelMask& target) {
  if (pred.height() != target.height() || pred.width() != target.width()) {
    throw Error(ErrorKind::kDomain, "cross entropy: shapes differ");
  }
  target.validate(pred.classes());
  constexpr double kFloor = 1e-12;
  CrossEntropyResult r;
  double sum = 0.0;
  for (std::size_t p = 0; p < target.pixels(); ++p) {
    if (target[p] == kIgnoreLabel) continue;
    double prob = pred.at(target[p], p);
    if (prob < kFloor) {
      prob = kFloor;
      r.clamped = true;
    }
    sum -= std::log(prob);
    ++r.counted_pixels;
  }
  if (r.counted_pixels > 0) r.loss = sum / static_cast<double>(r.counted_pixels);
  return r;
}

}  // namespace dhr
