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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero when any criterion fails.

#include <unistd.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

#include "cli.hpp"
#include "dhr/io.hpp"
#include "dhr/random.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace dhr;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

oracle::Matrix rows_of(const DenseMatrix& m) {
  oracle::Matrix out(m.rows, std::vector<double>(m.cols));
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) out[i][j] = m(i, j);
  }
  return out;
}

Outcome ot_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::array<double, 3> lambdas = {0.03, 0.1, 1.0};
  double worst = 0.0;
  int unconverged = 0;
  for (std::uint64_t k = 0; k < 200; ++k) {
    Rng rng(1001, k, "ot-oracle");
    const std::size_t n = 1 + rng.below(16), c = 1 + rng.below(4);
    DenseMatrix s(n, c);
    for (double& v : s.values) v = rng.uniform();
    // Marginal tolerance 1e-6 bounds row sums, not entries; solve tighter.
    OtConfig cfg;
    cfg.lambda = lambdas[k % 3];
    cfg.tol = 1e-9;
    cfg.max_iter = 100000;
    const TransportPlan plan = solve_entropic_ot(s, cfg);
    unconverged += !plan.converged;
    const auto ref = oracle::sinkhorn(rows_of(s), plan.row_marginal, plan.col_marginal, cfg.lambda);
    const auto b = oracle::mass_marginal(rows_of(s), 1e-3 / static_cast<double>(c));
    for (std::size_t j = 0; j < c; ++j) worst = std::max(worst, std::abs(b[j] - plan.col_marginal[j]));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < c; ++j) worst = std::max(worst, std::abs(plan.plan(i, j) - ref[i][j]));
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-6 && secs < 5.0 && unconverged == 0,
          fmt("max |T - T_oracle| = %.3e, %.0f unconverged, %.2f s", worst, unconverged, secs)};
}

Outcome ot_feasibility() {
  int converged = 0;
  double worst = 0.0;
  for (std::uint64_t k = 0; k < 100; ++k) {
    Rng rng(1002, k, "ot-feasible");
    DenseMatrix s(1024, 21);
    for (double& v : s.values) v = rng.uniform();
    OtConfig cfg;  // lambda 0.1, tol 1e-6, max_iter 1000
    const TransportPlan plan = solve_entropic_ot(s, cfg);
    if (!plan.converged) continue;
    ++converged;
    // Recompute the violation from the plan itself.
    for (std::size_t i = 0; i < 1024; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < 21; ++j) row += plan.plan(i, j);
      worst = std::max(worst, std::abs(row - plan.row_marginal[i]));
    }
    for (std::size_t j = 0; j < 21; ++j) {
      double col = 0.0;
      for (std::size_t i = 0; i < 1024; ++i) col += plan.plan(i, j);
      worst = std::max(worst, std::abs(col - plan.col_marginal[j]));
    }
  }
  return {converged >= 99 && worst <= 1e-6,
          fmt("%.0f/100 converged, max violation %.3e", converged, worst)};
}

Outcome cap_brute_force() {
  double worst = 0.0;
  bool classes_match = true;
  for (std::uint64_t k = 0; k < 100; ++k) {
    Rng rng(1003, k, "cap");
    const std::size_t h = 1 + rng.below(16), w = 1 + rng.below(16), d = 1 + rng.below(8);
    FeatureMap f(d, h, w);
    for (double& v : f.data()) v = rng.normal();
    LabelMask m(h, w);
    const std::size_t classes = 1 + rng.below(6);
    for (auto& l : m.labels()) {
      l = rng.bernoulli(0.05) ? kIgnoreLabel : static_cast<std::uint8_t>(rng.below(classes));
    }
    std::vector<std::vector<double>> planes(d, std::vector<double>(h * w));
    for (std::size_t c = 0; c < d; ++c) {
      for (std::size_t p = 0; p < h * w; ++p) planes[c][p] = f.at(c, p);
    }
    const auto ref = oracle::class_means(planes, m.labels());
    const ClassCentroids got = class_average_pool(f, m);
    classes_match = classes_match && got.classes.size() == ref.size();
    for (std::size_t i = 0; i < got.classes.size(); ++i) {
      const auto it = ref.find(got.classes[i]);
      if (it == ref.end()) {
        classes_match = false;
        continue;
      }
      for (std::size_t c = 0; c < d; ++c) worst = std::max(worst, std::abs(got.vectors[i][c] - it->second[c]));
    }
  }
  return {classes_match && worst <= 1e-12, fmt("max deviation %.3e over 100 cases", worst)};
}

struct SuiteRun {
  std::vector<SynthScene> scenes;
  std::vector<DhrResult> results;
  double seconds = 0.0;
};

Outcome tau_bypass(const SuiteRun& suite) {
  std::size_t mismatched = 0, pixels = 0;
  for (const auto& scene : suite.scenes) {
    const SceneBundle& b = scene.bundle;
    // Threshold just above the largest off-diagonal USS centroid similarity
    // seen by the pipeline, and the extreme value 1.0.
    const DhrResult base = dhr_propagate(b, DhrConfig{});
    const ClassCentroids cents =
        class_average_pool(b.uss_features, argmax_labels(base.init));
    double max_sim = -1.0;
    for (std::size_t i = 0; i < cents.vectors.size(); ++i) {
      for (std::size_t j = i + 1; j < cents.vectors.size(); ++j) {
        max_sim = std::max(max_sim, cosine_similarity(cents.vectors[i], cents.vectors[j]));
      }
    }
    for (double tau : {std::min(1.0, std::nextafter(max_sim, 2.0)), 1.0}) {
      DhrConfig cfg;
      cfg.rebalance.tau = tau;
      const DhrResult r = dhr_propagate(b, cfg);
      const LabelMask a = argmax_labels(r.balanced), u = argmax_labels(r.uss);
      for (std::size_t p = 0; p < a.pixels(); ++p) mismatched += a[p] != u[p];
      pixels += a.pixels();
    }
  }
  return {mismatched == 0,
          fmt("%.0f of %.0f pixels differ over %.0f scenes x 2 thresholds",
              static_cast<double>(mismatched), static_cast<double>(pixels),
              static_cast<double>(suite.scenes.size()))};
}

Outcome vanishing_recovery(const SuiteRun& suite) {
  std::size_t eligible = 0, recovered = 0;
  double base_sum = 0.0, init_sum = 0.0, dh_sum = 0.0;
  for (std::size_t i = 0; i < suite.scenes.size(); ++i) {
    const SceneBundle& b = suite.scenes[i].bundle;
    const DhrResult& r = suite.results[i];
    const LabelMask& gt = *b.ground_truth;
    const auto seed_area = label_areas(argmax_labels(r.seed), b.num_classes);
    const auto dh_area = label_areas(argmax_labels(r.final_scores), b.num_classes);
    bool has_eligible = false, all_back = true;
    for (int m : suite.scenes[i].absorbed) {
      if (seed_area[static_cast<std::size_t>(m)] == 0) continue;
      has_eligible = true;
      all_back = all_back && dh_area[static_cast<std::size_t>(m)] > 0;
    }
    if (has_eligible) {
      ++eligible;
      recovered += all_back;
    }
    base_sum += miou(confusion(argmax_labels(b.base_mask), gt, b.num_classes)).mean;
    init_sum += miou(confusion(argmax_labels(r.init), gt, b.num_classes)).mean;
    dh_sum += miou(confusion(argmax_labels(r.final_scores), gt, b.num_classes)).mean;
  }
  const double n = static_cast<double>(suite.scenes.size());
  const double base = base_sum / n, init = init_sum / n, dh = dh_sum / n;
  const double rate = eligible ? static_cast<double>(recovered) / static_cast<double>(eligible) : 0.0;
  const bool pass = eligible > 0 && rate >= 0.9 && dh - base >= 0.10 && dh > init &&
                    init > base && suite.seconds < 60.0;
  return {pass, fmt("recovered in %.1f%% of scenes; mIoU base %.4f, init %.4f, dh %.4f", 100.0 * rate,
                    base, init, dh) +
                    fmt(" (%.1f s)", suite.seconds)};
}

Outcome grouping(const SuiteRun& suite) {
  std::size_t exact = 0;
  for (const auto& scene : suite.scenes) {
    const SceneBundle& b = scene.bundle;
    const ClassCentroids cents = class_average_pool(b.uss_features, *b.ground_truth);
    exact += correlation_groups(cents, 0.8, {0}).groups == scene.planted_groups.groups;
  }
  return {exact == suite.scenes.size(),
          fmt("%.0f/%.0f scenes match the planted partition", static_cast<double>(exact),
              static_cast<double>(suite.scenes.size()))};
}

Outcome determinism(const fs::path& scenes_dir, const fs::path& work) {
  cli::PipelineConfig one, eight;
  eight.workers = 8;
  const auto s1 = cli::cmd_refine(scenes_dir, work / "w1", one);
  const auto s8 = cli::cmd_refine(scenes_dir, work / "w8", eight);
  std::size_t files = 0, differing = 0;
  for (const auto& e : fs::recursive_directory_iterator(work / "w1")) {
    if (!e.is_regular_file()) continue;
    ++files;
    const fs::path other = work / "w8" / fs::relative(e.path(), work / "w1");
    if (!fs::exists(other) || read_file_bytes(e.path()) != read_file_bytes(other)) ++differing;
  }
  std::size_t files8 = 0;
  for (const auto& e : fs::recursive_directory_iterator(work / "w8")) files8 += e.is_regular_file();
  const bool pass = differing == 0 && files == files8 && s1.failed.empty() && s8.failed.empty() &&
                    s1.succeeded.size() == 50;
  return {pass, fmt("%.0f files compared, %.0f differ", static_cast<double>(files),
                    static_cast<double>(differing))};
}

Outcome metric_oracles() {
  std::size_t mismatches = 0;
  for (std::uint64_t k = 0; k < 100; ++k) {
    Rng rng(1004, k, "metrics");
    const std::size_t h = 1 + rng.below(32), w = 1 + rng.below(32), c = 1 + rng.below(8);
    LabelMask gt(h, w), pred(h, w);
    for (auto& l : gt.labels()) {
      l = rng.bernoulli(0.05) ? kIgnoreLabel : static_cast<std::uint8_t>(rng.below(c));
    }
    for (auto& l : pred.labels()) l = static_cast<std::uint8_t>(rng.below(c));
    mismatches += miou(confusion(pred, gt, c)).mean != oracle::miou(pred.labels(), gt.labels(), c);

    ClassGroups groups;
    std::map<int, int> key;
    for (int cls = 0; cls < static_cast<int>(c); ++cls) key[cls] = cls / 2;
    for (int g = 0; g <= static_cast<int>(c - 1) / 2; ++g) {
      std::vector<int> members;
      for (int cls = 2 * g; cls < std::min(2 * g + 2, static_cast<int>(c)); ++cls) members.push_back(cls);
      groups.groups.push_back(members);
    }
    const int radius = 1 + static_cast<int>(rng.below(3));
    const AdjacencyReport r = adjacency_stats(gt, groups, radius);
    const auto bf = oracle::adjacency(gt.labels(), static_cast<int>(h), static_cast<int>(w), radius, key);
    mismatches += r.counted_pixels != bf.counted || r.adjacent_pixels != bf.adjacent ||
                  r.inter_class_pixels != bf.inter;
  }
  const LabelMask gt(2, 2, std::vector<std::uint8_t>{1, 1, 0, 0});
  const LabelMask pred(2, 2, std::vector<std::uint8_t>{1, 0, 0, 0});
  const double hand = miou(confusion(pred, gt, 2)).mean;
  return {mismatches == 0 && hand == 7.0 / 12.0,
          fmt("%.0f mismatches over 100 cases; 2x2 case mIoU %.16f", static_cast<double>(mismatches), hand)};
}

Outcome loss_closed_forms() {
  double worst = 0.0;
  for (std::size_t n : {1u, 3u, 20u}) {
    Rng rng(1005, n, "loss");
    std::vector<double> x(n, 0.0), y(n);
    for (double& t : y) t = rng.bernoulli(0.5) ? 1.0 : 0.0;
    worst = std::max(worst, std::abs(multilabel_soft_margin(x, y) - std::log(2.0)));
  }
  for (std::size_t c : {2u, 7u, 21u}) {
    Rng rng(1006, c, "ce");
    LabelMask m(9, 11);
    for (auto& l : m.labels()) l = static_cast<std::uint8_t>(rng.below(c));
    const ScoreStack pred(c, 9, 11, 1.0 / static_cast<double>(c));
    worst = std::max(worst, std::abs(pixel_cross_entropy(pred, m).loss - std::log(static_cast<double>(c))));
  }
  return {worst <= 1e-12, fmt("max deviation %.3e", worst)};
}

}  // namespace

int main() {
  const fs::path work = fs::temp_directory_path() / ("dhr_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(work);
  fs::create_directories(work);

  int failures = 0;
  auto report = [&](const char* name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  };

  report("ot_oracle_equivalence", ot_oracle);
  report("ot_feasibility", ot_feasibility);
  report("cap_brute_force", cap_brute_force);

  // Frozen suite: seed 42, 64x64, absorb_prob 1.0.
  SynthConfig cfg;
  cfg.seed = 42;
  cfg.height = 64;
  cfg.width = 64;
  cfg.absorb_prob = 1.0;
  SuiteRun suite;
  try {
    const auto t0 = std::chrono::steady_clock::now();
    suite.scenes = generate_suite(cfg, 50, work / "suite", 1);
    for (const auto& s : suite.scenes) suite.results.push_back(dhr_propagate(s.bundle, DhrConfig{}));
    suite.seconds = seconds_since(t0);
  } catch (const std::exception& e) {
    std::printf("suite generation failed: %s\n", e.what());
  }

  report("tau_bypass", [&] { return tau_bypass(suite); });
  report("vanishing_class_recovery", [&] { return vanishing_recovery(suite); });
  report("grouping_correctness", [&] { return grouping(suite); });
  report("determinism_1_vs_8_workers", [&] { return determinism(work / "suite", work); });
  report("metric_oracles", metric_oracles);
  report("loss_closed_forms", loss_closed_forms);

  fs::remove_all(work);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
