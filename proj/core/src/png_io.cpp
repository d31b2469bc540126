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

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <memory>

#include "dhr/io.hpp"

namespace dhr {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct DecodedPng {
  std::size_t height = 0;
  std::size_t width = 0;
  int color_type = 0;
  int bit_depth = 0;
  std::vector<std::uint8_t> rows;  // height * rowbytes
  std::vector<png_bytep> row_ptrs;
};

void png_warning_sink(png_structp, png_const_charp) {}

// libpng reports errors by longjmp; nothing with a destructor may live in
// this frame between setjmp and the last libpng call.
bool decode_png(std::FILE* fp, DecodedPng* out, char* err, std::size_t errlen) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                           nullptr, png_warning_sink);
  if (png == nullptr) {
    std::snprintf(err, errlen, "png_create_read_struct failed");
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    std::snprintf(err, errlen, "png_create_info_struct failed");
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::snprintf(err, errlen, "corrupt png stream");
    return false;
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  out->width = png_get_image_width(png, info);
  out->height = png_get_image_height(png, info);
  out->color_type = png_get_color_type(png, info);
  out->bit_depth = png_get_bit_depth(png, info);
  if (png_get_interlace_type(png, info) != PNG_INTERLACE_NONE) {
    png_set_interlace_handling(png);
  }
  png_read_update_info(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  out->rows.resize(rowbytes * out->height);
  out->row_ptrs.resize(out->height);
  for (std::size_t y = 0; y < out->height; ++y) {
    out->row_ptrs[y] = out->rows.data() + y * rowbytes;
  }
  png_read_image(png, out->row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

DecodedPng read_png(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  png_byte sig[8];
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw Error(ErrorKind::kFormat, "png: bad signature in " + path.string());
  }
  std::rewind(fp.get());
  DecodedPng decoded;
  char err[128] = {0};
  if (!decode_png(fp.get(), &decoded, err, sizeof(err))) {
    throw Error(ErrorKind::kFormat, std::string("png: ") + err + " in " + path.string());
  }
  return decoded;
}

void write_png(const std::filesystem::path& path, std::size_t height,
               std::size_t width, png_uint_32 format,
               const std::vector<std::uint8_t>& pixels) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = format;
  if (png_image_write_to_file(&image, path.c_str(), 0, pixels.data(), 0,
                              nullptr) == 0) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorKind::kIo, "png: cannot write " + path.string() + ": " + msg);
  }
}

}  // namespace

LabelMask load_mask_png(const std::filesystem::path& path) {
  DecodedPng d = read_png(path);
  if (d.bit_depth != 8) {
    throw Error(ErrorKind::kFormat, "png: mask must be 8-bit, got " +
                                        std::to_string(d.bit_depth) + "-bit");
  }
  if (d.color_type != PNG_COLOR_TYPE_GRAY &&
      d.color_type != PNG_COLOR_TYPE_PALETTE) {
    throw Error(ErrorKind::kFormat,
                "png: mask must be single-channel or paletted");
  }
  return LabelMask(d.height, d.width, std::move(d.rows));
}

void save_mask_png(const LabelMask& mask, const std::filesystem::path& path) {
  write_png(path, mask.height(), mask.width(), PNG_FORMAT_GRAY, mask.labels());
}

RgbImage load_rgb_png(const std::filesystem::path& path) {
  DecodedPng d = read_png(path);
  if (d.bit_depth != 8 || d.color_type != PNG_COLOR_TYPE_RGB) {
    throw Error(ErrorKind::kFormat, "png: expected 8-bit RGB image");
  }
  return RgbImage{d.height, d.width, std::move(d.rows)};
}

void save_rgb_png(const RgbImage& image, const std::filesystem::path& path) {
  if (image.pixels.size() != image.height * image.width * 3) {
    throw Error(ErrorKind::kDomain, "rgb pixel buffer does not match shape");
  }
  write_png(path, image.height, image.width, PNG_FORMAT_RGB, image.pixels);
}

}  // namespace dhr
