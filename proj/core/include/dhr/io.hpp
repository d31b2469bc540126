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
#include <filesystem>
#include <string>
#include <vector>

#include "dhr/tensor.hpp"

namespace dhr {

enum class NpyDtype { kFloat32, kUint8 };

/// In-memory image of an NPY v1.0 file: C-order little-endian payload.
struct NpyArray {
  NpyDtype dtype = NpyDtype::kFloat32;
  std::vector<std::size_t> shape;  // rank <= 3
  std::vector<std::uint8_t> bytes;

  std::size_t element_count() const;
  std::size_t element_size() const { return dtype == NpyDtype::kFloat32 ? 4 : 1; }

  static NpyArray from_floats(std::vector<std::size_t> shape,
                              const std::vector<float>& values);
  static NpyArray from_bytes(std::vector<std::size_t> shape,
                             std::vector<std::uint8_t> values);
  std::vector<float> floats() const;

  friend bool operator==(const NpyArray&, const NpyArray&) = default;
};

/// Reads NPY format version 1.0 (little-endian float32 or uint8, C order).
NpyArray load_npy(const std::filesystem::path& path);
NpyArray parse_npy(const std::vector<std::uint8_t>& file_bytes);

void save_npy(const NpyArray& array, const std::filesystem::path& path);
std::vector<std::uint8_t> serialize_npy(const NpyArray& array);

/// The header dict written for `array`, e.g.
/// "{'descr': '<f4', 'fortran_order': False, 'shape': (3, 4), }".
std::string npy_header_dict(const NpyArray& array);

// Rank-3 (C, H, W) float32 arrays to and from in-memory tensors.
Tensor3<double> npy_to_tensor(const NpyArray& array);
NpyArray tensor_to_npy(const Tensor3<double>& tensor);

/// 8-bit grayscale or 8-bit paletted PNG; pixel value (or palette index) is
/// the class label.
LabelMask load_mask_png(const std::filesystem::path& path);
void save_mask_png(const LabelMask& mask, const std::filesystem::path& path);

RgbImage load_rgb_png(const std::filesystem::path& path);
void save_rgb_png(const RgbImage& image, const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path,
                      const std::vector<std::uint8_t>& bytes);

}  // namespace dhr
