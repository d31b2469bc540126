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

#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "dhr/io.hpp"
#include "dhr/parallel.hpp"
#include "dhr/random.hpp"

namespace dhr::cli {

using nlohmann::json;

void PipelineConfig::validate() const {
  dhr.validate();
  synth.validate();
  if (workers < 1) throw Error(ErrorKind::kConfig, "workers must be >= 1");
}

std::size_t effective_workers(std::size_t configured) {
  const char* env = std::getenv("DHR_THREADS");
  if (env == nullptr || *env == '\0') return configured;
  const std::string text(env);
  std::size_t value = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size() || value < 1) {
    throw Error(ErrorKind::kConfig, "DHR_THREADS must be a positive integer, got '" + text + "'");
  }
  return value;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  write_file_bytes(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

std::string kind_name(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) return ErrorKindName(err->kind());
  return "internal";
}

json groups_json(const ClassGroups& g) {
  json out = json::array();
  for (const auto& group : g.groups) out.push_back(group);
  return out;
}

}  // namespace

std::string provenance_json(const std::string& scene_id, const Provenance& p) {
  json j;
  j["scene"] = scene_id;
  j["vanished"] = std::vector<int>(p.vanished.begin(), p.vanished.end());
  j["groups"] = groups_json(p.groups);
  j["ot_iterations"] = {{"seed", p.seed_iterations},
                        {"uss", p.uss_iterations},
                        {"wss", p.wss_iterations}};
  j["fallbacks"] = {{"seed_ot", p.seed_ot_fallback},
                    {"uss_ot", p.uss_ot_fallback},
                    {"wss_unconverged_groups", p.wss_unconverged_groups},
                    {"refiner", p.refiner_fallback}};
  return j.dump(2) + "\n";
}

RefineSummary cmd_refine(const fs::path& input_dir, const fs::path& output_dir,
                         const PipelineConfig& cfg) {
  cfg.dhr.validate();
  const std::vector<std::string> ids = list_scene_ids(input_dir);
  std::error_code ec;
  fs::create_directories(output_dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create " + output_dir.string());

  // Slot per scene so the report order is the sorted id order regardless of
  // which worker finished first.
  std::vector<std::optional<SceneError>> errors(ids.size());
  parallel_for(ids.size(), cfg.workers, [&](std::size_t i) {
    const fs::path out = output_dir / ids[i];
    try {
      const SceneBundle scene = load_scene(input_dir / ids[i]);
      const DhrResult r = dhr_propagate(scene, cfg.dhr);
      fs::create_directories(out);
      save_npy(tensor_to_npy(r.final_scores), out / "m_dh.npy");
      save_mask_png(argmax_labels(r.final_scores), out / "m_dh.png");
      write_text(out / "provenance.json", provenance_json(ids[i], r.provenance));
    } catch (const std::exception& e) {
      errors[i] = SceneError{ids[i], kind_name(e), e.what()};
      std::error_code ignored;
      fs::create_directories(out, ignored);
      json j = {{"scene", ids[i]}, {"kind", errors[i]->kind}, {"message", errors[i]->message}};
      try {
        write_text(out / "error.json", j.dump(2) + "\n");
      } catch (const std::exception&) {
        // The summary still carries the record.
      }
    }
  });

  RefineSummary summary;
  json report;
  report["scenes"] = ids.size();
  report["succeeded"] = json::array();
  report["failed"] = json::array();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (errors[i]) {
      summary.failed.push_back(*errors[i]);
      report["failed"].push_back({{"scene", errors[i]->scene},
                                  {"kind", errors[i]->kind},
                                  {"message", errors[i]->message}});
    } else {
      summary.succeeded.push_back(ids[i]);
      report["succeeded"].push_back(ids[i]);
    }
  }
  write_text(output_dir / "refine_report.json", report.dump(2) + "\n");
  return summary;
}

// ---- eval ----

namespace {

std::set<std::string> scenes_with(const fs::path& root, const std::string& file) {
  std::set<std::string> out;
  if (!fs::is_directory(root)) return out;
  for (const auto& id : list_scene_ids(root)) {
    if (fs::exists(root / id / file)) out.insert(id);
  }
  return out;
}

std::size_t max_label_plus_one(const LabelMask& m) {
  std::size_t n = 0;
  for (auto l : m.labels()) {
    if (l != kIgnoreLabel) n = std::max<std::size_t>(n, l + 1u);
  }
  return n;
}

void accumulate(AdjacencyReport& total, const AdjacencyReport& r) {
  total.counted_pixels += r.counted_pixels;
  total.adjacent_pixels += r.adjacent_pixels;
  total.inter_class_pixels += r.inter_class_pixels;
  for (const auto& [k, v] : r.pair_counts) total.pair_counts[k] += v;
  const double n = static_cast<double>(total.counted_pixels);
  total.adjacent_area_ratio = n > 0 ? static_cast<double>(total.adjacent_pixels) / n : 0.0;
  total.inter_class_share =
      total.adjacent_pixels > 0
          ? static_cast<double>(total.inter_class_pixels) / static_cast<double>(total.adjacent_pixels)
          : 0.0;
}

json adjacency_json(const AdjacencyReport& r) {
  json pairs = json::array();
  for (const auto& [k, v] : r.pair_counts) pairs.push_back({k.first, k.second, v});
  return {{"counted_pixels", r.counted_pixels},
          {"adjacent_pixels", r.adjacent_pixels},
          {"inter_class_pixels", r.inter_class_pixels},
          {"adjacent_area_ratio", r.adjacent_area_ratio},
          {"inter_class_share", r.inter_class_share},
          {"pair_counts", pairs}};
}

}  // namespace

EvalReport cmd_eval(const fs::path& pred_dir, const fs::path& gt_dir,
                    const EvalOptions& opts) {
  if (!fs::is_directory(pred_dir)) throw Error(ErrorKind::kIo, "not a directory: " + pred_dir.string());
  if (!fs::is_directory(gt_dir)) throw Error(ErrorKind::kIo, "not a directory: " + gt_dir.string());
  const auto preds = scenes_with(pred_dir, opts.pred_file);
  const auto gts = scenes_with(gt_dir, opts.gt_file);

  EvalReport r;
  std::vector<std::string> matched;
  for (const auto& id : gts) {
    if (preds.contains(id)) matched.push_back(id);
    else r.missing_pred.push_back(id);
  }
  for (const auto& id : preds) {
    if (!gts.contains(id)) r.missing_gt.push_back(id);
  }

  std::vector<std::pair<LabelMask, LabelMask>> masks;  // (pred, gt)
  masks.reserve(matched.size());
  std::size_t inferred = 0;
  for (const auto& id : matched) {
    LabelMask pred = load_mask_png(pred_dir / id / opts.pred_file);
    LabelMask gt = load_mask_png(gt_dir / id / opts.gt_file);
    if (pred.height() != gt.height() || pred.width() != gt.width()) {
      throw Error(ErrorKind::kDomain, "scene " + id + ": prediction and ground truth sizes differ");
    }
    inferred = std::max({inferred, max_label_plus_one(pred), max_label_plus_one(gt)});
    const fs::path labels = gt_dir / id / scene_files::kLabels;
    if (!opts.num_classes && fs::exists(labels)) {
      std::ifstream in(labels);
      try {
        inferred = std::max(inferred, json::parse(in).at("num_classes").get<std::size_t>());
      } catch (const json::exception& e) {
        throw Error(ErrorKind::kFormat, "scene " + id + ": bad labels.json: " + e.what());
      }
    }
    masks.emplace_back(std::move(pred), std::move(gt));
  }
  r.num_classes = opts.num_classes.value_or(std::max<std::size_t>(inferred, 1));
  r.aggregate = ConfusionMatrix(r.num_classes);

  double scene_sum = 0.0;
  for (std::size_t i = 0; i < matched.size(); ++i) {
    const auto& [pred, gt] = masks[i];
    const ConfusionMatrix cm = confusion(pred, gt, r.num_classes);
    r.aggregate += cm;
    const double m = miou(cm).mean;
    r.scenes.push_back({matched[i], m});
    scene_sum += m;
    accumulate(r.adjacency, adjacency_stats(gt, std::nullopt, opts.radius));
  }
  r.iou = miou(r.aggregate);
  r.mean_scene_miou = matched.empty() ? 0.0 : scene_sum / static_cast<double>(matched.size());
  return r;
}

std::string eval_report_json(const EvalReport& r) {
  json j;
  j["num_classes"] = r.num_classes;
  j["scenes_evaluated"] = r.scenes.size();
  j["miou"] = r.iou.mean;
  j["counted_classes"] = r.iou.counted_classes;
  j["mean_scene_miou"] = r.mean_scene_miou;
  json per_class = json::array();
  for (const auto& v : r.iou.per_class) per_class.push_back(v ? json(*v) : json(nullptr));
  j["per_class_iou"] = per_class;
  json scenes = json::array();
  for (const auto& s : r.scenes) scenes.push_back({{"id", s.id}, {"miou", s.miou}});
  j["scenes"] = scenes;
  j["missing_prediction"] = r.missing_pred;
  j["missing_ground_truth"] = r.missing_gt;
  j["adjacency"] = adjacency_json(r.adjacency);
  return j.dump(2) + "\n";
}

std::string eval_report_text(const EvalReport& r) {
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof line, "scenes evaluated: %zu\n", r.scenes.size());
  out << line;
  for (std::size_t c = 0; c < r.iou.per_class.size(); ++c) {
    if (r.iou.per_class[c]) {
      std::snprintf(line, sizeof line, "class %3zu  IoU %.4f\n", c, *r.iou.per_class[c]);
    } else {
      std::snprintf(line, sizeof line, "class %3zu  IoU   n/a\n", c);
    }
    out << line;
  }
  std::snprintf(line, sizeof line, "mIoU (aggregate): %.4f\nmIoU (scene mean): %.4f\n",
                r.iou.mean, r.mean_scene_miou);
  out << line;
  std::snprintf(line, sizeof line,
                "ground-truth adjacency: adjacent ratio %.4f, inter-class share %.4f\n",
                r.adjacency.adjacent_area_ratio, r.adjacency.inter_class_share);
  out << line;
  for (const auto& id : r.missing_pred) out << "missing prediction: " << id << "\n";
  for (const auto& id : r.missing_gt) out << "missing ground truth: " << id << "\n";
  return out.str();
}

// ---- synth ----

std::vector<SynthScene> cmd_synth(const SynthConfig& cfg, std::size_t n_scenes,
                                  const fs::path& output_dir, std::size_t workers) {
  cfg.validate();
  if (n_scenes < 1) throw Error(ErrorKind::kConfig, "synth: scene count must be >= 1");
  return generate_suite(cfg, n_scenes, output_dir, workers);
}

// ---- ot-bench ----

std::vector<std::pair<std::size_t, std::size_t>> parse_sizes(const std::string& text) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto x = item.find('x');
    std::size_t n = 0, c = 0;
    bool ok = x != std::string::npos;
    if (ok) {
      const char* b = item.data();
      const auto r1 = std::from_chars(b, b + x, n);
      const auto r2 = std::from_chars(b + x + 1, b + item.size(), c);
      ok = r1.ec == std::errc() && r1.ptr == b + x && r2.ec == std::errc() &&
           r2.ptr == b + item.size() && n > 0 && c > 0;
    }
    if (!ok) throw Error(ErrorKind::kConfig, "bad size '" + item + "', expected NxC");
    out.emplace_back(n, c);
  }
  if (out.empty()) throw Error(ErrorKind::kConfig, "no sizes given");
  return out;
}

std::vector<OtBenchRow> run_ot_bench(
    const std::vector<std::pair<std::size_t, std::size_t>>& sizes,
    const OtConfig& cfg, std::uint64_t seed) {
  std::vector<OtBenchRow> rows;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    const auto [n, c] = sizes[k];
    Rng rng(seed, k, "ot-bench");
    DenseMatrix s(n, c);
    for (double& v : s.values) v = rng.uniform();
    const auto t0 = std::chrono::steady_clock::now();
    const TransportPlan plan = solve_entropic_ot(s, cfg);
    const auto t1 = std::chrono::steady_clock::now();
    rows.push_back({n, c, plan.iterations,
                    std::chrono::duration<double, std::milli>(t1 - t0).count(),
                    plan.violation, plan.converged});
  }
  return rows;
}

std::string ot_bench_table(const std::vector<OtBenchRow>& rows) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%8s %5s %10s %12s %12s %10s\n", "N", "C", "iters",
                "time_ms", "violation", "converged");
  out << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%8zu %5zu %10d %12.3f %12.3e %10s\n", r.n, r.c,
                  r.iterations, r.millis, r.violation, r.converged ? "yes" : "no");
    out << line;
  }
  return out.str();
}

// ---- adjacency ----

ClassGroups parse_groups(const std::string& text) {
  ClassGroups g;
  std::set<int> seen;
  std::stringstream groups(text);
  std::string group_text;
  while (std::getline(groups, group_text, ';')) {
    std::vector<int> group;
    std::stringstream members(group_text);
    std::string m;
    while (std::getline(members, m, ',')) {
      int v = 0;
      const auto r = std::from_chars(m.data(), m.data() + m.size(), v);
      if (r.ec != std::errc() || r.ptr != m.data() + m.size() || v < 0 || v > 254) {
        throw Error(ErrorKind::kConfig, "bad class id '" + m + "' in groups");
      }
      if (!seen.insert(v).second) {
        throw Error(ErrorKind::kConfig, "class " + m + " appears in two groups");
      }
      group.push_back(v);
    }
    if (group.empty()) throw Error(ErrorKind::kConfig, "empty group in '" + text + "'");
    std::sort(group.begin(), group.end());
    g.groups.push_back(std::move(group));
  }
  std::sort(g.groups.begin(), g.groups.end());
  return g;
}

std::vector<AdjacencySceneRow> cmd_adjacency(const fs::path& scenes_dir,
                                             const std::string& mask_file,
                                             const std::optional<ClassGroups>& groups,
                                             int radius) {
  std::vector<AdjacencySceneRow> rows;
  for (const auto& id : list_scene_ids(scenes_dir)) {
    const fs::path p = scenes_dir / id / mask_file;
    if (!fs::exists(p)) continue;
    rows.push_back({id, adjacency_stats(load_mask_png(p), groups, radius)});
  }
  return rows;
}

std::string adjacency_table(const std::vector<AdjacencySceneRow>& rows) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-16s %10s %10s %10s %10s\n", "scene", "pixels",
                "adjacent", "adj_ratio", "inter_share");
  out << line;
  AdjacencyReport total;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-16s %10zu %10zu %10.4f %10.4f\n", r.id.c_str(),
                  r.report.counted_pixels, r.report.adjacent_pixels,
                  r.report.adjacent_area_ratio, r.report.inter_class_share);
    out << line;
    accumulate(total, r.report);
  }
  std::snprintf(line, sizeof line, "%-16s %10zu %10zu %10.4f %10.4f\n", "total",
                total.counted_pixels, total.adjacent_pixels, total.adjacent_area_ratio,
                total.inter_class_share);
  out << line;
  return out.str();
}

// ---- entry point ----

namespace {

void print_error(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << "\n";
}

ColMarginalMode parse_col_marginal(const std::string& s) {
  if (s == "mass") return ColMarginalMode::kMassProportional;
  return ColMarginalMode::kUniform;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Pseudo-mask refinement by hierarchical OT rebalancing"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML file of option = value pairs; flags win");
  app.allow_config_extras(CLI::config_extras_mode::error);

  PipelineConfig cfg;
  OtConfig& ot = cfg.dhr.rebalance.ot;
  SeedConfig& seed = cfg.dhr.seed;
  RefinerConfig& ref = cfg.dhr.refiner;
  SynthConfig& syn = cfg.synth;
  std::string col_marginal = "mass", bg_mode = "one_minus_max", refiner = "identity";

  app.add_option("--lambda", ot.lambda, "Entropic regularization")->capture_default_str();
  app.add_option("--tol", ot.tol, "Marginal violation tolerance")->capture_default_str();
  app.add_option("--max-iter", ot.max_iter, "OT iteration cap")->capture_default_str();
  app.add_option("--col-marginal", col_marginal, "Class marginal: mass | uniform")
      ->check(CLI::IsMember({"mass", "uniform"}))
      ->capture_default_str();
  app.add_option("--theta-v", seed.vanish_ratio, "Vanishing ratio")->capture_default_str();
  app.add_option("--bg-mode", bg_mode, "Background score: one_minus_max | fixed")
      ->check(CLI::IsMember({"one_minus_max", "fixed"}))
      ->capture_default_str();
  app.add_option("--bg-score", seed.bg_fixed_score, "Background score in fixed mode")
      ->capture_default_str();
  app.add_option("--tau", cfg.dhr.rebalance.tau, "Grouping threshold")->capture_default_str();
  app.add_flag("--literal-product", cfg.dhr.rebalance.literal_product_mode,
               "Multiply the WSS assignment into the USS scores");
  app.add_option("--refiner", refiner, "Boundary refiner: identity | pamr")
      ->check(CLI::IsMember({"identity", "pamr"}))
      ->capture_default_str();
  app.add_option("--pamr-iters", ref.iterations, "PAMR iterations")->capture_default_str();
  app.add_option("--pamr-dilations", ref.dilations, "PAMR dilations")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--pamr-sigma", ref.sigma_color, "PAMR color sigma")->capture_default_str();
  app.add_option("--workers", cfg.workers, "Worker threads (DHR_THREADS overrides)")
      ->capture_default_str();

  app.add_option("--seed", syn.seed, "RNG seed")->capture_default_str();
  app.add_option("--height", syn.height, "Synthetic scene height")->capture_default_str();
  app.add_option("--width", syn.width, "Synthetic scene width")->capture_default_str();
  app.add_option("--superclasses", syn.n_superclasses, "Super-classes")->capture_default_str();
  app.add_option("--classes-per-super", syn.classes_per_super, "Classes per super-class")
      ->capture_default_str();
  app.add_option("--minor-area-frac", syn.minor_area_frac, "Minor class area fraction")
      ->capture_default_str();
  app.add_option("--feature-dim-us", syn.feature_dim_us, "USS feature dimension")
      ->capture_default_str();
  app.add_option("--feature-dim-ws", syn.feature_dim_ws, "WSS feature dimension")
      ->capture_default_str();
  app.add_option("--noise-sigma", syn.noise_sigma, "Feature noise")->capture_default_str();
  app.add_option("--cam-blur-radius", syn.cam_blur_radius, "CAM blur radius")
      ->capture_default_str();
  app.add_option("--absorb-prob", syn.absorb_prob, "Minor absorption probability")
      ->capture_default_str();
  app.add_option("--boundary-flip-prob", syn.boundary_flip_prob, "Boundary label noise")
      ->capture_default_str();
  app.add_option("--minor-cam-gain", syn.minor_cam_gain, "Minor class CAM gain")
      ->capture_default_str();

  fs::path refine_in, refine_out;
  auto* refine_cmd = app.add_subcommand("refine", "Refine every scene in a directory");
  refine_cmd->add_option("--input,-i", refine_in, "Scene directory")->required();
  refine_cmd->add_option("--output,-o", refine_out, "Output directory")->required();

  fs::path eval_pred, eval_gt, eval_out;
  EvalOptions eval_opts;
  std::size_t eval_classes = 0;
  auto* eval_cmd = app.add_subcommand("eval", "Score predicted masks against ground truth");
  eval_cmd->add_option("--pred", eval_pred, "Prediction directory")->required();
  eval_cmd->add_option("--gt", eval_gt, "Ground-truth directory")->required();
  eval_cmd->add_option("--pred-file", eval_opts.pred_file, "Mask file per prediction scene")
      ->capture_default_str();
  eval_cmd->add_option("--gt-file", eval_opts.gt_file, "Mask file per ground-truth scene")
      ->capture_default_str();
  eval_cmd->add_option("--num-classes", eval_classes, "Class count (default inferred)");
  eval_cmd->add_option("--radius", eval_opts.radius, "Adjacency radius")->capture_default_str();
  eval_cmd->add_option("--out", eval_out, "Directory for eval_report.{json,txt}");

  std::size_t synth_n = 0;
  fs::path synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic scene suite");
  synth_cmd->add_option("--n", synth_n, "Number of scenes")->required();
  synth_cmd->add_option("--out,-o", synth_out, "Output directory")->required();

  std::string sizes = "1x1,256x21,1024x21,4096x21";
  auto* bench_cmd = app.add_subcommand("ot-bench", "Time the OT solver on random scores");
  bench_cmd->add_option("--sizes", sizes, "Comma-separated NxC list")->capture_default_str();

  fs::path adj_dir;
  std::string adj_file = "gt.png", adj_groups;
  int adj_radius = 1;
  auto* adj_cmd = app.add_subcommand("adjacency", "Adjacency statistics of label masks");
  adj_cmd->add_option("scenes", adj_dir, "Scene directory")->required();
  adj_cmd->add_option("--mask-file", adj_file, "Mask file per scene")->capture_default_str();
  adj_cmd->add_option("--groups", adj_groups, "Class groups, e.g. 1,2;3,4");
  adj_cmd->add_option("--radius", adj_radius, "Chebyshev radius")->capture_default_str();

  for (auto* sub : {refine_cmd, eval_cmd, synth_cmd, bench_cmd, adj_cmd}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    print_error("usage", e.what());
    return kExitUsage;
  }

  try {
    ot.col_marginal_mode = parse_col_marginal(col_marginal);
    seed.bg_mode = bg_mode == "fixed" ? BackgroundMode::kFixed : BackgroundMode::kOneMinusMax;
    ref.kind = refiner == "pamr" ? RefinerKind::kPamr : RefinerKind::kIdentity;
    cfg.workers = effective_workers(cfg.workers);
    cfg.validate();
  } catch (const Error& e) {
    print_error(ErrorKindName(e.kind()), e.what());
    return kExitUsage;
  }

  try {
    if (*refine_cmd) {
      const RefineSummary s = cmd_refine(refine_in, refine_out, cfg);
      std::cout << "refined " << s.succeeded.size() << " scene(s), " << s.failed.size()
                << " failed\n";
      for (const auto& f : s.failed) {
        std::cerr << json{{"scene", f.scene}, {"kind", f.kind}, {"message", f.message}}.dump()
                  << "\n";
      }
      return s.exit_code();
    }
    if (*eval_cmd) {
      if (eval_classes > 0) eval_opts.num_classes = eval_classes;
      const EvalReport r = cmd_eval(eval_pred, eval_gt, eval_opts);
      const std::string text = eval_report_text(r);
      std::cout << text;
      if (!eval_out.empty()) {
        fs::create_directories(eval_out);
        write_text(eval_out / "eval_report.json", eval_report_json(r));
        write_text(eval_out / "eval_report.txt", text);
      }
      return kExitOk;
    }
    if (*synth_cmd) {
      const auto scenes = cmd_synth(syn, synth_n, synth_out, cfg.workers);
      std::cout << "wrote " << scenes.size() << " scene(s) to " << synth_out.string() << "\n";
      return kExitOk;
    }
    if (*bench_cmd) {
      std::cout << ot_bench_table(run_ot_bench(parse_sizes(sizes), ot, syn.seed));
      return kExitOk;
    }
    if (*adj_cmd) {
      std::optional<ClassGroups> groups;
      if (!adj_groups.empty()) groups = parse_groups(adj_groups);
      std::cout << adjacency_table(cmd_adjacency(adj_dir, adj_file, groups, adj_radius));
      return kExitOk;
    }
  } catch (const Error& e) {
    print_error(ErrorKindName(e.kind()), e.what());
    return e.kind() == ErrorKind::kConfig ? kExitUsage : kExitPartial;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return kExitPartial;
  }
  return kExitUsage;
}

}  // namespace dhr::cli
