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

#include "dhr/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <nlohmann/json.hpp>
#include <numbers>

#include "dhr/io.hpp"
#include "dhr/parallel.hpp"

namespace dhr {

namespace fs = std::filesystem;

void SynthConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorKind::kConfig, "synth: " + m); };
  if (height < 16 || width < 16) fail("grid must be at least 16x16");
  if (n_superclasses < 2) fail("n_superclasses must be >= 2");
  if (classes_per_super < 1) fail("classes_per_super must be >= 1");
  if (num_classes() > 255) fail("too many classes for 8-bit masks");
  if (!(minor_area_frac > 0.0 && minor_area_frac < 1.0)) {
    fail("minor_area_frac must lie in (0, 1)");
  }
  if (!(absorb_prob >= 0.0 && absorb_prob <= 1.0)) fail("absorb_prob must lie in [0, 1]");
  if (!(boundary_flip_prob >= 0.0 && boundary_flip_prob < 1.0)) {
    fail("boundary_flip_prob must lie in [0, 1)");
  }
  if (!(minor_cam_gain > 0.0 && minor_cam_gain <= 1.0)) {
    fail("minor_cam_gain must lie in (0, 1]");
  }
  if (!(noise_sigma >= 0.0)) fail("noise_sigma must be >= 0");
  if (cam_blur_radius < 0) fail("cam_blur_radius must be >= 0");
  if (feature_dim_us < 2 || feature_dim_ws < 2) fail("feature dims must be >= 2");
  if (feature_dim_us < static_cast<std::size_t>(n_superclasses) + 1) {
    fail("feature_dim_us too small for one prototype per super-class");
  }
  if (feature_dim_ws < num_classes()) {
    fail("feature_dim_ws too small for one prototype per class");
  }
}

std::string scene_name(std::uint64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scene_%04llu", static_cast<unsigned long long>(index));
  return buf;
}

namespace {

// `count` orthonormal vectors of length `dim` (Gram-Schmidt on Gaussians).
std::vector<std::vector<double>> orthonormal_set(std::size_t count, std::size_t dim,
                                                 Rng& rng) {
  std::vector<std::vector<double>> out;
  while (out.size() < count) {
    std::vector<double> v(dim);
    for (double& x : v) x = rng.normal();
    for (const auto& u : out) {
      double dot = 0.0;
      for (std::size_t k = 0; k < dim; ++k) dot += v[k] * u[k];
      for (std::size_t k = 0; k < dim; ++k) v[k] -= dot * u[k];
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm < 1e-6) continue;
    for (double& x : v) x /= norm;
    out.push_back(std::move(v));
  }
  return out;
}

double to_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

struct Layout {
  LabelMask gt;
  std::vector<int> minors;
  std::vector<int> hosts;
};

// Voronoi partition of background and host classes, then one disk per minor
// class strictly inside its host region.
bool try_layout(const SynthConfig& cfg, Rng& rng, Layout& out) {
  const int cps = cfg.classes_per_super;
  const int n_super = cfg.n_superclasses;
  auto member = [&](int s, int k) { return 1 + s * cps + k; };

  const int super_b = static_cast<int>(rng.below(static_cast<std::uint64_t>(n_super)));
  int super_a = static_cast<int>(rng.below(static_cast<std::uint64_t>(n_super - 1)));
  if (super_a >= super_b) ++super_a;

  std::vector<int> minors, hosts;
  // Minor next to a host of another super-class.
  const int m1 = member(super_b, static_cast<int>(rng.below(static_cast<std::uint64_t>(cps))));
  // Minor next to a host of its own super-class, when the super-class has room.
  int h2 = -1, m2 = -1;
  if (cps >= 2) {
    const int k_host = static_cast<int>(rng.below(static_cast<std::uint64_t>(cps)));
    int k_minor = static_cast<int>(rng.below(static_cast<std::uint64_t>(cps - 1)));
    if (k_minor >= k_host) ++k_minor;
    h2 = member(super_a, k_host);
    m2 = member(super_a, k_minor);
  }
  std::vector<int> h1_choices;
  for (int c = 1; c < static_cast<int>(cfg.num_classes()); ++c) {
    if (cfg.super_of(c) != super_b && c != m2 && c != h2) h1_choices.push_back(c);
  }
  const int h1 = h1_choices.empty()
                     ? h2
                     : h1_choices[rng.below(h1_choices.size())];
  minors.push_back(m1);
  hosts.push_back(h1);
  if (m2 > 0) {
    minors.push_back(m2);
    hosts.push_back(h2);
  }

  std::vector<int> majors;
  for (int h : hosts) {
    if (std::find(majors.begin(), majors.end(), h) == majors.end()) majors.push_back(h);
  }
  std::vector<int> extra;
  for (int c = 1; c < static_cast<int>(cfg.num_classes()); ++c) {
    if (std::find(majors.begin(), majors.end(), c) == majors.end() &&
        std::find(minors.begin(), minors.end(), c) == minors.end()) {
      extra.push_back(c);
    }
  }
  if (!extra.empty() && rng.bernoulli(0.5)) majors.push_back(extra[rng.below(extra.size())]);

  // Sites: two for background, one per major class, kept apart.
  std::vector<int> site_label = {0, 0};
  site_label.insert(site_label.end(), majors.begin(), majors.end());
  const double h = static_cast<double>(cfg.height);
  const double w = static_cast<double>(cfg.width);
  const double min_sep = 0.3 * std::min(h, w);
  std::vector<std::array<double, 2>> sites;
  for (std::size_t s = 0; s < site_label.size(); ++s) {
    bool placed = false;
    for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
      const std::array<double, 2> cand = {rng.uniform() * h, rng.uniform() * w};
      placed = std::all_of(sites.begin(), sites.end(), [&](const auto& o) {
        return std::hypot(o[0] - cand[0], o[1] - cand[1]) >= min_sep;
      });
      if (placed) sites.push_back(cand);
    }
    if (!placed) return false;
  }

  LabelMask gt(cfg.height, cfg.width);
  for (std::size_t y = 0; y < cfg.height; ++y) {
    for (std::size_t x = 0; x < cfg.width; ++x) {
      double best = 1e300;
      int label = 0;
      for (std::size_t s = 0; s < sites.size(); ++s) {
        const double dy = static_cast<double>(y) + 0.5 - sites[s][0];
        const double dx = static_cast<double>(x) + 0.5 - sites[s][1];
        const double d = dy * dy + dx * dx;
        if (d < best) {
          best = d;
          label = site_label[s];
        }
      }
      gt.at(y, x) = static_cast<std::uint8_t>(label);
    }
  }

  const double radius = std::sqrt(cfg.minor_area_frac * h * w / std::numbers::pi);
  const int reach = static_cast<int>(std::ceil(radius)) + 1;
  for (std::size_t m = 0; m < minors.size(); ++m) {
    const auto host = static_cast<std::uint8_t>(hosts[m]);
    // Centers whose whole (radius + 1) neighborhood is host-labeled.
    std::vector<std::pair<int, int>> centers;
    for (int cy = reach; cy + reach < static_cast<int>(cfg.height); ++cy) {
      for (int cx = reach; cx + reach < static_cast<int>(cfg.width); ++cx) {
        bool ok = true;
        for (int dy = -reach; dy <= reach && ok; ++dy) {
          for (int dx = -reach; dx <= reach && ok; ++dx) {
            if (std::hypot(dy, dx) > radius + 1.0) continue;
            ok = gt.at(static_cast<std::size_t>(cy + dy), static_cast<std::size_t>(cx + dx)) == host;
          }
        }
        if (ok) centers.emplace_back(cy, cx);
      }
    }
    if (centers.empty()) return false;
    const auto [cy, cx] = centers[rng.below(centers.size())];
    for (int dy = -reach; dy <= reach; ++dy) {
      for (int dx = -reach; dx <= reach; ++dx) {
        if (std::hypot(dy, dx) <= radius) {
          gt.at(static_cast<std::size_t>(cy + dy), static_cast<std::size_t>(cx + dx)) =
              static_cast<std::uint8_t>(minors[m]);
        }
      }
    }
  }
  out.gt = std::move(gt);
  out.minors = std::move(minors);
  out.hosts = std::move(hosts);
  return true;
}

Tensor3<double> box_blur(const Tensor3<double>& src, int radius) {
  if (radius == 0) return src;
  Tensor3<double> out(src.channels(), src.height(), src.width());
  const auto h = static_cast<long>(src.height());
  const auto w = static_cast<long>(src.width());
  for (std::size_t c = 0; c < src.channels(); ++c) {
    for (long y = 0; y < h; ++y) {
      for (long x = 0; x < w; ++x) {
        double sum = 0.0;
        int count = 0;
        for (long qy = std::max(0L, y - radius); qy <= std::min(h - 1, y + radius); ++qy) {
          for (long qx = std::max(0L, x - radius); qx <= std::min(w - 1, x + radius); ++qx) {
            sum += src.at(c, static_cast<std::size_t>(qy), static_cast<std::size_t>(qx));
            ++count;
          }
        }
        out.at(c, static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = sum / count;
      }
    }
  }
  return out;
}

FeatureMap noisy_features(const LabelMask& gt, std::size_t dim,
                          const std::vector<std::vector<double>>& proto_of_class,
                          double sigma, Rng& rng) {
  FeatureMap f(dim, gt.height(), gt.width());
  for (std::size_t p = 0; p < gt.pixels(); ++p) {
    const auto& proto = proto_of_class[gt[p]];
    for (std::size_t k = 0; k < dim; ++k) {
      f.at(k, p) = to_f32(proto[k] + sigma * rng.normal());
    }
  }
  return f;
}

}  // namespace

ClassGroups planted_partition(const SynthConfig& cfg, const std::vector<int>& classes) {
  std::map<int, std::vector<int>> by_super;  // background keyed -1
  for (int c : classes) by_super[cfg.super_of(c)].push_back(c);
  ClassGroups out;
  for (auto& [s, members] : by_super) {
    std::sort(members.begin(), members.end());
    if (s < 0) {
      for (int c : members) out.groups.push_back({c});
    } else {
      out.groups.push_back(members);
    }
  }
  std::sort(out.groups.begin(), out.groups.end());
  return out;
}

DegradedMask degrade_base_mask(const LabelMask& gt, const std::vector<int>& minors,
                               std::size_t num_classes, const SynthConfig& cfg,
                               Rng& rng) {
  const std::size_t h = gt.height();
  const std::size_t w = gt.width();
  const auto area = label_areas(gt, num_classes);
  LabelMask mask = gt;
  DegradedMask out;
  for (int m : minors) {
    if (!rng.bernoulli(cfg.absorb_prob)) continue;
    // Largest-area class touching the minor region (8-neighborhood).
    int target = -1;
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        if (gt.at(y, x) != m) continue;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const long qy = static_cast<long>(y) + dy;
            const long qx = static_cast<long>(x) + dx;
            if (qy < 0 || qx < 0 || qy >= static_cast<long>(h) || qx >= static_cast<long>(w)) {
              continue;
            }
            const int l = gt.at(static_cast<std::size_t>(qy), static_cast<std::size_t>(qx));
            if (l == m || l == kIgnoreLabel) continue;
            if (target < 0 || area[static_cast<std::size_t>(l)] > area[static_cast<std::size_t>(target)] ||
                (area[static_cast<std::size_t>(l)] == area[static_cast<std::size_t>(target)] && l < target)) {
              target = l;
            }
          }
        }
      }
    }
    if (target < 0) continue;
    for (std::size_t p = 0; p < mask.pixels(); ++p) {
      if (mask[p] == m) mask[p] = static_cast<std::uint8_t>(target);
    }
    out.absorbed.push_back(m);
  }

  if (cfg.boundary_flip_prob > 0.0) {
    const LabelMask before = mask;
    static constexpr int kDy[4] = {-1, 1, 0, 0};
    static constexpr int kDx[4] = {0, 0, -1, 1};
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        std::uint8_t others[4];
        int n_others = 0;
        for (int k = 0; k < 4; ++k) {
          const long qy = static_cast<long>(y) + kDy[k];
          const long qx = static_cast<long>(x) + kDx[k];
          if (qy < 0 || qx < 0 || qy >= static_cast<long>(h) || qx >= static_cast<long>(w)) {
            continue;
          }
          const std::uint8_t l = before.at(static_cast<std::size_t>(qy), static_cast<std::size_t>(qx));
          if (l != before.at(y, x)) others[n_others++] = l;
        }
        if (n_others == 0) continue;
        const double u = rng.uniform();
        const auto pick = static_cast<int>(rng.below(static_cast<std::uint64_t>(n_others)));
        if (u < cfg.boundary_flip_prob) mask.at(y, x) = others[pick];
      }
    }
  }
  out.base = one_hot(mask, num_classes);
  out.base.has_background = true;
  return out;
}

SynthScene generate_scene(const SynthConfig& cfg, std::uint64_t scene_index) {
  cfg.validate();
  SynthScene scene;
  scene.scene_seed = stream_key(cfg.seed, scene_index, "layout");
  Rng layout_rng(scene.scene_seed);
  Layout layout;
  bool ok = false;
  for (int attempt = 0; attempt < 100 && !ok; ++attempt) ok = try_layout(cfg, layout_rng, layout);
  if (!ok) {
    throw Error(ErrorKind::kGeneration,
                "synth: no feasible layout for scene " + std::to_string(scene_index) +
                    " after 100 attempts");
  }

  const std::size_t n_cls = cfg.num_classes();
  const std::size_t h = cfg.height;
  const std::size_t w = cfg.width;
  const LabelMask& gt = layout.gt;
  const auto areas = label_areas(gt, n_cls);

  SceneBundle& b = scene.bundle;
  b.id = scene_name(scene_index);
  b.num_classes = n_cls;
  for (std::size_t c = 1; c < n_cls; ++c) {
    if (areas[c] > 0) b.image_labels.insert(static_cast<int>(c));
  }

  // Prototypes: one per super-class (plus background) for unsupervised
  // features, one per class for weakly-supervised features.
  Rng proto_rng(cfg.seed, scene_index, "prototypes");
  const auto us_basis = orthonormal_set(static_cast<std::size_t>(cfg.n_superclasses) + 1,
                                        cfg.feature_dim_us, proto_rng);
  const auto ws_basis = orthonormal_set(n_cls, cfg.feature_dim_ws, proto_rng);
  std::vector<std::vector<double>> us_proto(n_cls), ws_proto(n_cls);
  for (std::size_t c = 0; c < n_cls; ++c) {
    us_proto[c] = us_basis[static_cast<std::size_t>(cfg.super_of(static_cast<int>(c)) + 1)];
    ws_proto[c] = ws_basis[c];
  }
  Rng us_rng(cfg.seed, scene_index, "uss_noise");
  Rng ws_rng(cfg.seed, scene_index, "wss_noise");
  b.uss_features = noisy_features(gt, cfg.feature_dim_us, us_proto, cfg.noise_sigma, us_rng);
  b.wss_features = noisy_features(gt, cfg.feature_dim_ws, ws_proto, cfg.noise_sigma, ws_rng);

  // CAMs: blurred class indicators with multiplicative noise; minors dimmed.
  Tensor3<double> indicator(n_cls - 1, h, w, 0.0);
  for (std::size_t p = 0; p < gt.pixels(); ++p) {
    if (gt[p] > 0) indicator.at(gt[p] - 1u, p) = 1.0;
  }
  Tensor3<double> blurred = box_blur(indicator, cfg.cam_blur_radius);
  Rng cam_rng(cfg.seed, scene_index, "cam_noise");
  for (std::size_t c = 0; c + 1 < n_cls; ++c) {
    const bool minor = std::find(layout.minors.begin(), layout.minors.end(),
                                 static_cast<int>(c + 1)) != layout.minors.end();
    const double gain = minor ? cfg.minor_cam_gain : 1.0;
    for (std::size_t p = 0; p < gt.pixels(); ++p) {
      const double z = cam_rng.normal();
      double v = blurred.at(c, p);
      if (v > 0.0) v = std::clamp(v * gain * (1.0 + cfg.noise_sigma * z), 0.0, 1.0);
      blurred.at(c, p) = to_f32(v);
    }
  }
  b.cams = ScoreStack(std::move(blurred));

  Rng rgb_rng(cfg.seed, scene_index, "rgb");
  std::vector<std::array<double, 3>> colors;
  while (colors.size() < n_cls) {
    const std::array<double, 3> cand = {rgb_rng.uniform(), rgb_rng.uniform(), rgb_rng.uniform()};
    const bool far = std::all_of(colors.begin(), colors.end(), [&](const auto& o) {
      return std::hypot(o[0] - cand[0], o[1] - cand[1], o[2] - cand[2]) >= 0.3;
    });
    if (far) colors.push_back(cand);
  }
  RgbImage rgb{h, w, std::vector<std::uint8_t>(h * w * 3)};
  for (std::size_t p = 0; p < gt.pixels(); ++p) {
    for (int k = 0; k < 3; ++k) {
      const double v = colors[gt[p]][static_cast<std::size_t>(k)] * 255.0 + 4.0 * rgb_rng.normal();
      rgb.pixels[p * 3 + static_cast<std::size_t>(k)] =
          static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  }
  b.rgb = std::move(rgb);

  Rng degrade_rng(cfg.seed, scene_index, "degrade");
  DegradedMask degraded = degrade_base_mask(gt, layout.minors, n_cls, cfg, degrade_rng);
  b.base_mask = std::move(degraded.base);
  b.ground_truth = gt;

  scene.minor_classes = layout.minors;
  scene.hosts = layout.hosts;
  scene.absorbed = std::move(degraded.absorbed);
  std::vector<int> present = {0};
  present.insert(present.end(), b.image_labels.begin(), b.image_labels.end());
  scene.planted_groups = planted_partition(cfg, present);
  return scene;
}

namespace {

nlohmann::json config_json(const SynthConfig& cfg) {
  return {{"seed", cfg.seed},
          {"height", cfg.height},
          {"width", cfg.width},
          {"n_superclasses", cfg.n_superclasses},
          {"classes_per_super", cfg.classes_per_super},
          {"minor_area_frac", cfg.minor_area_frac},
          {"feature_dim_us", cfg.feature_dim_us},
          {"feature_dim_ws", cfg.feature_dim_ws},
          {"noise_sigma", cfg.noise_sigma},
          {"cam_blur_radius", cfg.cam_blur_radius},
          {"absorb_prob", cfg.absorb_prob},
          {"boundary_flip_prob", cfg.boundary_flip_prob},
          {"minor_cam_gain", cfg.minor_cam_gain}};
}

}  // namespace

SynthConfig synth_config_from_manifest(const fs::path& manifest_path) {
  const auto bytes = read_file_bytes(manifest_path);
  try {
    const auto j = nlohmann::json::parse(bytes.begin(), bytes.end()).at("config");
    SynthConfig cfg;
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.height = j.at("height").get<std::size_t>();
    cfg.width = j.at("width").get<std::size_t>();
    cfg.n_superclasses = j.at("n_superclasses").get<int>();
    cfg.classes_per_super = j.at("classes_per_super").get<int>();
    cfg.minor_area_frac = j.at("minor_area_frac").get<double>();
    cfg.feature_dim_us = j.at("feature_dim_us").get<std::size_t>();
    cfg.feature_dim_ws = j.at("feature_dim_ws").get<std::size_t>();
    cfg.noise_sigma = j.at("noise_sigma").get<double>();
    cfg.cam_blur_radius = j.at("cam_blur_radius").get<int>();
    cfg.absorb_prob = j.at("absorb_prob").get<double>();
    cfg.boundary_flip_prob = j.at("boundary_flip_prob").get<double>();
    cfg.minor_cam_gain = j.at("minor_cam_gain").get<double>();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("synth: bad manifest: ") + e.what());
  }
}

std::vector<SynthScene> generate_suite(const SynthConfig& cfg, std::size_t n_scenes,
                                       const fs::path& dir, std::size_t workers) {
  cfg.validate();
  if (n_scenes < 1) throw Error(ErrorKind::kConfig, "synth: scene count must be >= 1");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create " + dir.string());

  std::vector<SynthScene> scenes(n_scenes);
  parallel_for(n_scenes, workers, [&](std::size_t i) {
    scenes[i] = generate_scene(cfg, i);
    save_scene(scenes[i].bundle, dir / scenes[i].bundle.id);
  });

  nlohmann::json manifest;
  manifest["config"] = config_json(cfg);
  manifest["num_scenes"] = n_scenes;
  manifest["scenes"] = nlohmann::json::array();
  for (std::size_t i = 0; i < n_scenes; ++i) {
    const SynthScene& s = scenes[i];
    nlohmann::json groups = nlohmann::json::array();
    for (const auto& g : s.planted_groups.groups) groups.push_back(g);
    manifest["scenes"].push_back({{"id", s.bundle.id},
                                  {"index", i},
                                  {"scene_seed", s.scene_seed},
                                  {"minor_classes", s.minor_classes},
                                  {"hosts", s.hosts},
                                  {"absorbed", s.absorbed},
                                  {"planted_groups", groups}});
  }
  const std::string text = manifest.dump(2) + "\n";
  write_file_bytes(dir / "manifest.json", std::vector<std::uint8_t>(text.begin(), text.end()));
  return scenes;
}

}  // namespace dhr
