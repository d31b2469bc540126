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

#include "dhr/refine.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace dhr {

void RefinerConfig::validate() const {
  if (iterations < 0) throw Error(ErrorKind::kConfig, "refine: iterations must be >= 0");
  if (kind == RefinerKind::kPamr) {
    if (dilations.empty()) {
      throw Error(ErrorKind::kConfig, "refine: pamr needs at least one dilation");
    }
    for (int d : dilations) {
      if (d < 1) throw Error(ErrorKind::kConfig, "refine: dilations must be >= 1");
    }
    if (!(sigma_color > 0.0)) {
      throw Error(ErrorKind::kConfig, "refine: sigma_color must be > 0");
    }
  }
}

ScoreStack refine_identity(const ScoreStack& scores) { return scores; }

namespace {

struct Neighbor {
  std::size_t index;
  double weight;
};

}  // namespace

ScoreStack refine_pamr(const ScoreStack& scores, const RgbImage& rgb,
                       const RefinerConfig& cfg) {
  cfg.validate();
  if (rgb.height != scores.height() || rgb.width != scores.width()) {
    throw Error(ErrorKind::kDomain, "refine: rgb size differs from score size");
  }
  const std::size_t h = scores.height();
  const std::size_t w = scores.width();
  const std::size_t n = h * w;
  const double inv_two_sigma2 = 1.0 / (2.0 * cfg.sigma_color * cfg.sigma_color);
  static constexpr std::array<std::array<int, 2>, 8> kOffsets = {
      {{-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}, {1, 1}}};

  // Affinities depend only on the image, so they are built once.
  std::vector<std::size_t> start(n + 1, 0);
  std::vector<Neighbor> nbrs;
  nbrs.reserve(n * 8 * cfg.dilations.size());
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t p = y * w + x;
      const std::size_t first = nbrs.size();
      double total = 0.0;
      for (int d : cfg.dilations) {
        for (const auto& off : kOffsets) {
          const long qy = static_cast<long>(y) + off[0] * d;
          const long qx = static_cast<long>(x) + off[1] * d;
          if (qy < 0 || qx < 0 || qy >= static_cast<long>(h) ||
              qx >= static_cast<long>(w)) {
            continue;
          }
          const std::size_t q = static_cast<std::size_t>(qy) * w +
                                static_cast<std::size_t>(qx);
          double dist2 = 0.0;
          for (int k = 0; k < 3; ++k) {
            const double diff =
                (static_cast<double>(rgb.pixels[p * 3 + k]) -
                 static_cast<double>(rgb.pixels[q * 3 + k])) / 255.0;
            dist2 += diff * diff;
          }
          const double a = std::exp(-dist2 * inv_two_sigma2);
          nbrs.push_back({q, a});
          total += a;
        }
      }
      if (total > 0.0) {
        for (std::size_t k = first; k < nbrs.size(); ++k) nbrs[k].weight /= total;
      } else {
        nbrs.resize(first);  // isolated pixel keeps its scores
      }
      start[p + 1] = nbrs.size();
    }
  }

  ScoreStack cur = scores;
  ScoreStack next = scores;
  for (int it = 0; it < cfg.iterations; ++it) {
    for (std::size_t c = 0; c < cur.classes(); ++c) {
      auto src = cur.channel(c);
      auto dst = next.channel(c);
      for (std::size_t p = 0; p < n; ++p) {
        if (start[p] == start[p + 1]) {
          dst[p] = src[p];
          continue;
        }
        double acc = 0.0;
        for (std::size_t k = start[p]; k < start[p + 1]; ++k) {
          acc += nbrs[k].weight * src[nbrs[k].index];
        }
        dst[p] = acc;
      }
    }
    std::swap(cur, next);
  }
  for (double& v : cur.data()) v = std::clamp(v, 0.0, 1.0);
  return cur;
}

RefineResult apply_refiner(const ScoreStack& scores, const RgbImage* rgb,
                           const RefinerConfig& cfg) {
  if (cfg.kind == RefinerKind::kIdentity) return {refine_identity(scores), false};
  if (rgb == nullptr || rgb->height != scores.height() ||
      rgb->width != scores.width()) {
    return {refine_identity(scores), true};
  }
  return {refine_pamr(scores, *rgb, cfg), false};
}

}  // namespace dhr
