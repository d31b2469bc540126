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

#include "dhr/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dhr {

const char* ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kFormat:
      return "format";
    case ErrorKind::kUnsupported:
      return "unsupported";
    case ErrorKind::kIo:
      return "io";
    case ErrorKind::kDomain:
      return "domain";
    case ErrorKind::kDegenerate:
      return "degenerate";
    case ErrorKind::kConfig:
      return "config";
    case ErrorKind::kGeneration:
      return "generation";
  }
  return "unknown";
}

void ScoreStack::validate() const {
  for (double v : data()) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw Error(ErrorKind::kDomain,
                  "score value " + std::to_string(v) + " outside [0, 1]");
    }
  }
}

void FeatureMap::validate() const {
  for (double v : data()) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::kDomain, "non-finite feature value");
    }
  }
}

LabelMask::LabelMask(std::size_t height, std::size_t width,
                     std::vector<std::uint8_t> labels)
    : height_(height), width_(width), labels_(std::move(labels)) {
  if (labels_.size() != height_ * width_) {
    throw Error(ErrorKind::kDomain, "label data size does not match shape");
  }
}

void LabelMask::validate(std::size_t num_classes) const {
  for (std::uint8_t l : labels_) {
    if (l != kIgnoreLabel && l >= num_classes) {
      throw Error(ErrorKind::kDomain,
                  "label " + std::to_string(l) + " >= class count " +
                      std::to_string(num_classes));
    }
  }
}

LabelMask argmax_labels(const ScoreStack& scores) {
  LabelMask out(scores.height(), scores.width(), 0);
  const std::size_t n = scores.pixels();
  if (scores.classes() == 0) return out;
  std::vector<double> best(scores.channel(0).begin(), scores.channel(0).end());
  for (std::size_t c = 1; c < scores.classes(); ++c) {
    auto ch = scores.channel(c);
    for (std::size_t p = 0; p < n; ++p) {
      // strict '>' keeps the smallest index on ties
      if (ch[p] > best[p]) {
        best[p] = ch[p];
        out[p] = static_cast<std::uint8_t>(c);
      }
    }
  }
  return out;
}

ScoreStack one_hot(const LabelMask& mask, std::size_t num_classes) {
  mask.validate(num_classes);
  ScoreStack out(num_classes, mask.height(), mask.width(), 0.0);
  for (std::size_t p = 0; p < mask.pixels(); ++p) {
    if (mask[p] != kIgnoreLabel) out.at(mask[p], p) = 1.0;
  }
  return out;
}

namespace {

double source_coord(std::size_t dst, std::size_t src_extent,
                    std::size_t dst_extent) {
  const double scale =
      static_cast<double>(src_extent) / static_cast<double>(dst_extent);
  const double s = (static_cast<double>(dst) + 0.5) * scale - 0.5;
  return std::clamp(s, 0.0, static_cast<double>(src_extent - 1));
}

std::size_t nearest_index(std::size_t dst, std::size_t src_extent,
                          std::size_t dst_extent) {
  const double s = (static_cast<double>(dst) + 0.5) *
                   static_cast<double>(src_extent) /
                   static_cast<double>(dst_extent);
  return std::min(static_cast<std::size_t>(std::floor(s)), src_extent - 1);
}

void check_resample_args(std::size_t src_h, std::size_t src_w,
                         std::size_t new_h, std::size_t new_w) {
  if (src_h == 0 || src_w == 0) {
    throw Error(ErrorKind::kDomain, "resample of empty source");
  }
  if (new_h == 0 || new_w == 0) {
    throw Error(ErrorKind::kDomain, "resample to zero target size");
  }
}

}  // namespace

Tensor3<double> resample(const Tensor3<double>& src, std::size_t new_height,
                         std::size_t new_width, ResampleMode mode) {
  check_resample_args(src.height(), src.width(), new_height, new_width);
  if (new_height == src.height() && new_width == src.width()) return src;

  Tensor3<double> out(src.channels(), new_height, new_width);
  if (mode == ResampleMode::kNearest) {
    for (std::size_t y = 0; y < new_height; ++y) {
      const std::size_t sy = nearest_index(y, src.height(), new_height);
      for (std::size_t x = 0; x < new_width; ++x) {
        const std::size_t sx = nearest_index(x, src.width(), new_width);
        for (std::size_t c = 0; c < src.channels(); ++c) {
          out.at(c, y, x) = src.at(c, sy, sx);
        }
      }
    }
    return out;
  }

  for (std::size_t y = 0; y < new_height; ++y) {
    const double fy = source_coord(y, src.height(), new_height);
    const auto y0 = static_cast<std::size_t>(std::floor(fy));
    const std::size_t y1 = std::min(y0 + 1, src.height() - 1);
    const double wy = fy - static_cast<double>(y0);
    for (std::size_t x = 0; x < new_width; ++x) {
      const double fx = source_coord(x, src.width(), new_width);
      const auto x0 = static_cast<std::size_t>(std::floor(fx));
      const std::size_t x1 = std::min(x0 + 1, src.width() - 1);
      const double wx = fx - static_cast<double>(x0);
      for (std::size_t c = 0; c < src.channels(); ++c) {
        const double top =
            src.at(c, y0, x0) + wx * (src.at(c, y0, x1) - src.at(c, y0, x0));
        const double bottom =
            src.at(c, y1, x0) + wx * (src.at(c, y1, x1) - src.at(c, y1, x0));
        out.at(c, y, x) = top + wy * (bottom - top);
      }
    }
  }
  return out;
}

LabelMask resample(const LabelMask& src, std::size_t new_height,
                   std::size_t new_width) {
  check_resample_args(src.height(), src.width(), new_height, new_width);
  LabelMask out(new_height, new_width);
  for (std::size_t y = 0; y < new_height; ++y) {
    const std::size_t sy = nearest_index(y, src.height(), new_height);
    for (std::size_t x = 0; x < new_width; ++x) {
      out.at(y, x) = src.at(sy, nearest_index(x, src.width(), new_width));
    }
  }
  return out;
}

std::vector<std::size_t> label_areas(const LabelMask& mask,
                                     std::size_t num_classes) {
  std::vector<std::size_t> areas(num_classes, 0);
  for (std::uint8_t l : mask.labels()) {
    if (l != kIgnoreLabel && l < num_classes) ++areas[l];
  }
  return areas;
}

}  // namespace dhr
