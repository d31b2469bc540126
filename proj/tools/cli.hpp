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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dhr/eval.hpp"
#include "dhr/pipeline.hpp"
#include "dhr/sinkhorn.hpp"
#include "dhr/synth.hpp"

namespace dhr::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitUsage = 2;

struct PipelineConfig {
  DhrConfig dhr;
  SynthConfig synth;
  std::size_t workers = 1;

  void validate() const;
};

/// DHR_THREADS, when set to a positive integer, replaces `configured`.
/// Any other non-empty value is a config error.
std::size_t effective_workers(std::size_t configured);

// ---- refine ----

struct SceneError {
  std::string scene;
  std::string kind;
  std::string message;
};

struct RefineSummary {
  std::vector<std::string> succeeded;
  std::vector<SceneError> failed;

  int exit_code() const { return failed.empty() ? kExitOk : kExitPartial; }
};

/// Runs the pipeline on every scene under `input_dir` and writes
/// <output_dir>/<id>/{m_dh.npy, m_dh.png, provenance.json}. A scene that
/// fails gets <id>/error.json instead. <output_dir>/refine_report.json lists
/// both sets. Output bytes do not depend on the worker count.
RefineSummary cmd_refine(const fs::path& input_dir, const fs::path& output_dir,
                         const PipelineConfig& cfg);

std::string provenance_json(const std::string& scene_id, const Provenance& p);

// ---- eval ----

struct EvalOptions {
  std::string pred_file = "m_dh.png";
  std::string gt_file = "gt.png";
  std::optional<std::size_t> num_classes;  // default: inferred
  int radius = 1;
};

struct SceneScore {
  std::string id;
  double miou = 0.0;
};

struct EvalReport {
  std::size_t num_classes = 0;
  ConfusionMatrix aggregate;
  IouReport iou;  // from the aggregate confusion
  double mean_scene_miou = 0.0;
  std::vector<SceneScore> scenes;
  std::vector<std::string> missing_pred;  // ids with gt but no prediction
  std::vector<std::string> missing_gt;    // ids with prediction but no gt
  AdjacencyReport adjacency;              // summed over ground-truth masks
};

/// Compares <pred_dir>/<id>/<pred_file> against <gt_dir>/<id>/<gt_file> for
/// every id present in both. Scene order does not affect the result.
EvalReport cmd_eval(const fs::path& pred_dir, const fs::path& gt_dir,
                    const EvalOptions& opts);

std::string eval_report_json(const EvalReport& r);
std::string eval_report_text(const EvalReport& r);

// ---- synth ----

/// Validates cfg before touching the filesystem.
std::vector<SynthScene> cmd_synth(const SynthConfig& cfg, std::size_t n_scenes,
                                  const fs::path& output_dir, std::size_t workers);

// ---- ot-bench ----

struct OtBenchRow {
  std::size_t n = 0;
  std::size_t c = 0;
  int iterations = 0;
  double millis = 0.0;
  double violation = 0.0;
  bool converged = false;
};

/// Parses "1x1,1024x21"; throws kConfig on malformed input.
std::vector<std::pair<std::size_t, std::size_t>> parse_sizes(const std::string& text);

/// Random scores in [0, 1] per size, drawn from `seed`.
std::vector<OtBenchRow> run_ot_bench(
    const std::vector<std::pair<std::size_t, std::size_t>>& sizes,
    const OtConfig& cfg, std::uint64_t seed);

std::string ot_bench_table(const std::vector<OtBenchRow>& rows);

// ---- adjacency ----

/// Parses "1,2;3,4" into groups.
ClassGroups parse_groups(const std::string& text);

struct AdjacencySceneRow {
  std::string id;
  AdjacencyReport report;
};

std::vector<AdjacencySceneRow> cmd_adjacency(const fs::path& scenes_dir,
                                             const std::string& mask_file,
                                             const std::optional<ClassGroups>& groups,
                                             int radius);

std::string adjacency_table(const std::vector<AdjacencySceneRow>& rows);

/// Full command-line entry point; returns the process exit code.
int run(int argc, char** argv);

}  // namespace dhr::cli
