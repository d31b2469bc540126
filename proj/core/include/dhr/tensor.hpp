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

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dhr/error.hpp"

namespace dhr {

/// Dense channel-major (C, H, W) array.
template <typename T>
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(std::size_t channels, std::size_t height, std::size_t width,
          T fill = T{})
      : channels_(channels),
        height_(height),
        width_(width),
        data_(channels * height * width, fill) {}
  Tensor3(std::size_t channels, std::size_t height, std::size_t width,
          std::vector<T> data)
      : channels_(channels), height_(height), width_(width),
        data_(std::move(data)) {
    if (data_.size() != channels_ * height_ * width_) {
      throw Error(ErrorKind::kDomain, "tensor data size does not match shape");
    }
  }

  std::size_t channels() const { return channels_; }
  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t pixels() const { return height_ * width_; }
  bool empty() const { return data_.empty(); }

  T& at(std::size_t c, std::size_t y, std::size_t x) {
    return data_[(c * height_ + y) * width_ + x];
  }
  const T& at(std::size_t c, std::size_t y, std::size_t x) const {
    return data_[(c * height_ + y) * width_ + x];
  }
  // Flat pixel index p = y * width + x.
  T& at(std::size_t c, std::size_t p) { return data_[c * pixels() + p]; }
  const T& at(std::size_t c, std::size_t p) const {
    return data_[c * pixels() + p];
  }

  std::span<T> channel(std::size_t c) {
    return {data_.data() + c * pixels(), pixels()};
  }
  std::span<const T> channel(std::size_t c) const {
    return {data_.data() + c * pixels(), pixels()};
  }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  bool same_shape(const Tensor3& other) const {
    return channels_ == other.channels_ && height_ == other.height_ &&
           width_ == other.width_;
  }
  friend bool operator==(const Tensor3&, const Tensor3&) = default;

 private:
  std::size_t channels_ = 0;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<T> data_;
};

/// Per-class soft scores in [0, 1] over an image grid. When
/// `has_background` is set, channel 0 is the background class.
class ScoreStack : public Tensor3<double> {
 public:
  using Tensor3<double>::Tensor3;
  explicit ScoreStack(Tensor3<double> t, bool background = false)
      : Tensor3<double>(std::move(t)), has_background(background) {}

  std::size_t classes() const { return channels(); }

  // Throws kDomain when any value is non-finite or outside [0, 1].
  void validate() const;

  bool has_background = false;
};

/// Dense embedding field (D, H, W).
class FeatureMap : public Tensor3<double> {
 public:
  using Tensor3<double>::Tensor3;
  explicit FeatureMap(Tensor3<double> t) : Tensor3<double>(std::move(t)) {}

  std::size_t dim() const { return channels(); }
  void validate() const;
};

inline constexpr std::uint8_t kIgnoreLabel = 255;

/// Hard per-pixel class labels; kIgnoreLabel marks unlabeled pixels.
class LabelMask {
 public:
  LabelMask() = default;
  LabelMask(std::size_t height, std::size_t width, std::uint8_t fill = 0)
      : height_(height), width_(width), labels_(height * width, fill) {}
  LabelMask(std::size_t height, std::size_t width,
            std::vector<std::uint8_t> labels);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t pixels() const { return labels_.size(); }

  std::uint8_t& at(std::size_t y, std::size_t x) {
    return labels_[y * width_ + x];
  }
  std::uint8_t at(std::size_t y, std::size_t x) const {
    return labels_[y * width_ + x];
  }
  std::uint8_t& operator[](std::size_t p) { return labels_[p]; }
  std::uint8_t operator[](std::size_t p) const { return labels_[p]; }

  const std::vector<std::uint8_t>& labels() const { return labels_; }
  std::vector<std::uint8_t>& labels() { return labels_; }

  // Throws kDomain when a non-ignore label is >= num_classes.
  void validate(std::size_t num_classes) const;

  friend bool operator==(const LabelMask&, const LabelMask&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<std::uint8_t> labels_;
};

/// Interleaved 8-bit RGB image.
struct RgbImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> pixels;  // size height * width * 3

  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

/// Per pixel, the smallest class index attaining the maximum score.
LabelMask argmax_labels(const ScoreStack& scores);

/// Exact 0/1 stack; ignore pixels map to all-zero columns.
ScoreStack one_hot(const LabelMask& mask, std::size_t num_classes);

enum class ResampleMode { kBilinear, kNearest };

/// Pixel-center aligned resampling: destination pixel x samples source
/// coordinate (x + 0.5) * src_w / dst_w - 0.5, clamped to the source extent.
Tensor3<double> resample(const Tensor3<double>& src, std::size_t new_height,
                         std::size_t new_width, ResampleMode mode);
LabelMask resample(const LabelMask& src, std::size_t new_height,
                   std::size_t new_width);

/// Number of pixels per label, indexed by class (ignore pixels excluded).
std::vector<std::size_t> label_areas(const LabelMask& mask,
                                     std::size_t num_classes);

}  // namespace dhr
