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

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <numeric>
#include <string_view>

#include "dhr/io.hpp"

namespace dhr {

static_assert(std::endian::native == std::endian::little,
              "NPY payloads are copied without byte swapping");

namespace {

constexpr char kMagic[] = "\x93NUMPY";
constexpr std::size_t kMagicLen = 6;
constexpr std::size_t kPreambleLen = 10;  // magic + version + header length
constexpr std::size_t kAlign = 64;

[[noreturn]] void format_error(const std::string& msg) {
  throw Error(ErrorKind::kFormat, "npy: " + msg);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\n')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\n')) s.remove_suffix(1);
  return s;
}

// Value text for `key` in the header dict, up to the next top-level comma.
std::string_view dict_value(std::string_view dict, std::string_view key) {
  const std::string quoted = "'" + std::string(key) + "'";
  auto pos = dict.find(quoted);
  if (pos == std::string_view::npos) format_error("header missing " + quoted);
  pos = dict.find(':', pos + quoted.size());
  if (pos == std::string_view::npos) format_error("header missing ':'");
  std::string_view rest = dict.substr(pos + 1);
  int depth = 0;
  std::size_t end = 0;
  for (; end < rest.size(); ++end) {
    const char ch = rest[end];
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if ((ch == ',' && depth == 0) || (ch == '}' && depth == 0)) break;
  }
  return trim(rest.substr(0, end));
}

std::vector<std::size_t> parse_shape(std::string_view text) {
  if (text.size() < 2 || text.front() != '(' || text.back() != ')') {
    format_error("malformed shape tuple");
  }
  text = text.substr(1, text.size() - 2);
  std::vector<std::size_t> shape;
  while (!(text = trim(text)).empty()) {
    const auto comma = text.find(',');
    const std::string_view item = trim(text.substr(0, comma));
    if (item.empty()) format_error("empty shape entry");
    std::size_t value = 0;
    for (char ch : item) {
      if (ch < '0' || ch > '9') format_error("non-integer shape entry");
      value = value * 10 + static_cast<std::size_t>(ch - '0');
    }
    shape.push_back(value);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return shape;
}

std::size_t product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

}  // namespace

std::size_t NpyArray::element_count() const { return product(shape); }

NpyArray NpyArray::from_floats(std::vector<std::size_t> shape,
                               const std::vector<float>& values) {
  if (product(shape) != values.size()) {
    throw Error(ErrorKind::kDomain, "npy: value count does not match shape");
  }
  NpyArray a;
  a.dtype = NpyDtype::kFloat32;
  a.shape = std::move(shape);
  a.bytes.resize(values.size() * 4);
  if (!values.empty()) std::memcpy(a.bytes.data(), values.data(), a.bytes.size());
  return a;
}

NpyArray NpyArray::from_bytes(std::vector<std::size_t> shape,
                              std::vector<std::uint8_t> values) {
  if (product(shape) != values.size()) {
    throw Error(ErrorKind::kDomain, "npy: value count does not match shape");
  }
  NpyArray a;
  a.dtype = NpyDtype::kUint8;
  a.shape = std::move(shape);
  a.bytes = std::move(values);
  return a;
}

std::vector<float> NpyArray::floats() const {
  if (dtype != NpyDtype::kFloat32) {
    throw Error(ErrorKind::kUnsupported, "npy: array is not float32");
  }
  std::vector<float> out(bytes.size() / 4);
  if (!out.empty()) std::memcpy(out.data(), bytes.data(), bytes.size());
  return out;
}

NpyArray parse_npy(const std::vector<std::uint8_t>& file) {
  if (file.size() < kPreambleLen ||
      std::memcmp(file.data(), kMagic, kMagicLen) != 0) {
    format_error("bad magic string");
  }
  if (file[6] != 1 || file[7] != 0) {
    throw Error(ErrorKind::kUnsupported,
                "npy: only format version 1.0 is supported");
  }
  const std::size_t header_len =
      static_cast<std::size_t>(file[8]) | (static_cast<std::size_t>(file[9]) << 8);
  if (kPreambleLen + header_len > file.size()) format_error("truncated header");
  const std::string_view dict(reinterpret_cast<const char*>(file.data()) + kPreambleLen,
                              header_len);
  if (trim(dict).empty() || trim(dict).front() != '{') {
    format_error("header is not a dict");
  }

  NpyArray out;
  const std::string_view descr = dict_value(dict, "descr");
  if (descr == "'<f4'") {
    out.dtype = NpyDtype::kFloat32;
  } else if (descr == "'|u1'" || descr == "'<u1'") {
    out.dtype = NpyDtype::kUint8;
  } else {
    throw Error(ErrorKind::kUnsupported,
                "npy: unsupported dtype " + std::string(descr));
  }
  const std::string_view fortran = dict_value(dict, "fortran_order");
  if (fortran == "True") {
    throw Error(ErrorKind::kUnsupported, "npy: fortran_order arrays not supported");
  }
  if (fortran != "False") format_error("malformed fortran_order");
  out.shape = parse_shape(dict_value(dict, "shape"));
  if (out.shape.size() > 3) {
    throw Error(ErrorKind::kUnsupported, "npy: rank > 3 not supported");
  }

  const std::size_t payload = out.element_count() * out.element_size();
  const std::size_t offset = kPreambleLen + header_len;
  if (file.size() - offset != payload) format_error("payload size mismatch");
  out.bytes.assign(file.begin() + static_cast<std::ptrdiff_t>(offset), file.end());
  return out;
}

NpyArray load_npy(const std::filesystem::path& path) {
  return parse_npy(read_file_bytes(path));
}

std::string npy_header_dict(const NpyArray& array) {
  std::string shape = "(";
  for (std::size_t i = 0; i < array.shape.size(); ++i) {
    if (i > 0) shape += ", ";
    shape += std::to_string(array.shape[i]);
  }
  if (array.shape.size() == 1) shape += ",";
  shape += ")";
  const char* descr = array.dtype == NpyDtype::kFloat32 ? "'<f4'" : "'|u1'";
  return std::string("{'descr': ") + descr +
         ", 'fortran_order': False, 'shape': " + shape + ", }";
}

std::vector<std::uint8_t> serialize_npy(const NpyArray& array) {
  if (array.shape.size() > 3) {
    throw Error(ErrorKind::kUnsupported, "npy: rank > 3 not supported");
  }
  if (array.bytes.size() != array.element_count() * array.element_size()) {
    throw Error(ErrorKind::kDomain, "npy: payload size does not match shape");
  }
  if (array.dtype == NpyDtype::kFloat32) {
    for (float v : array.floats()) {
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::kDomain, "npy: refusing to save non-finite value");
      }
    }
  }
  std::string header = npy_header_dict(array);
  // Pad with spaces so the payload starts on a kAlign boundary; the header
  // ends with a newline.
  const std::size_t unpadded = kPreambleLen + header.size() + 1;
  header.append((kAlign - unpadded % kAlign) % kAlign, ' ');
  header.push_back('\n');

  std::vector<std::uint8_t> out;
  out.reserve(kPreambleLen + header.size() + array.bytes.size());
  out.insert(out.end(), kMagic, kMagic + kMagicLen);
  out.push_back(1);
  out.push_back(0);
  out.push_back(static_cast<std::uint8_t>(header.size() & 0xff));
  out.push_back(static_cast<std::uint8_t>(header.size() >> 8));
  out.insert(out.end(), header.begin(), header.end());
  out.insert(out.end(), array.bytes.begin(), array.bytes.end());
  return out;
}

void save_npy(const NpyArray& array, const std::filesystem::path& path) {
  write_file_bytes(path, serialize_npy(array));
}

Tensor3<double> npy_to_tensor(const NpyArray& array) {
  if (array.shape.size() != 3) {
    throw Error(ErrorKind::kFormat, "npy: expected a rank-3 (C, H, W) array");
  }
  std::vector<double> values;
  if (array.dtype == NpyDtype::kFloat32) {
    const auto f = array.floats();
    values.assign(f.begin(), f.end());
  } else {
    values.assign(array.bytes.begin(), array.bytes.end());
  }
  return Tensor3<double>(array.shape[0], array.shape[1], array.shape[2],
                         std::move(values));
}

NpyArray tensor_to_npy(const Tensor3<double>& tensor) {
  std::vector<float> f(tensor.data().begin(), tensor.data().end());
  return NpyArray::from_floats(
      {tensor.channels(), tensor.height(), tensor.width()}, f);
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path,
                      const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::kIo, "short write to " + path.string());
}

}  // namespace dhr
