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
#include <vector>

#include "dhr/tensor.hpp"

namespace dhr {

enum class ColMarginalMode { kMassProportional, kUniform };

struct OtConfig {
  double lambda = 0.1;  // entropic regularization strength
  double tol = 1e-6;    // max absolute marginal violation at convergence
  int max_iter = 1000;
  ColMarginalMode col_marginal_mode = ColMarginalMode::kMassProportional;
  // Minimum column mass as a fraction of total score mass; negative means
  // the default 1e-3 / C.
  double col_floor = -1.0;
  // Multiply the plan by N before gating so each row is a per-pixel class
  // distribution. Off yields the raw plan entries.
  bool scale_by_rows = true;

  void validate() const;
};

/// Row-major N x C matrix of scores or plan entries.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), values(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return values[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const {
    return values[i * cols + j];
  }
};

struct TransportPlan {
  DenseMatrix plan;  // N x C, nonnegative
  std::vector<double> row_marginal;
  std::vector<double> col_marginal;
  int iterations = 0;
  double violation = 0.0;  // max |row/col sum - marginal|
  bool converged = false;
};

/// Column marginal for a score matrix. Mass-proportional mode floors every
/// column at floor * total mass before renormalizing, so classes with no
/// score still receive a little mass. Throws kDegenerate when S has no
/// positive entry.
std::vector<double> estimate_col_marginal(const DenseMatrix& scores,
                                          ColMarginalMode mode, double floor);

/// Entropic OT between uniform pixel mass and the configured class marginal
/// with cost 1 - S. Log-domain alternating scaling; non-convergence is
/// reported through `converged`, not thrown.
TransportPlan solve_entropic_ot(const DenseMatrix& scores, const OtConfig& cfg);

/// Same as above with explicit marginals (each summing to one).
TransportPlan solve_entropic_ot(const DenseMatrix& scores,
                                std::vector<double> row_marginal,
                                std::vector<double> col_marginal,
                                const OtConfig& cfg);

/// Q = N * T: per-pixel class distributions.
DenseMatrix assignment_from_plan(const TransportPlan& plan);

// (C, H, W) stack <-> (N, C) matrix.
DenseMatrix flatten_scores(const Tensor3<double>& stack);
void unflatten_scores(const DenseMatrix& m, Tensor3<double>& stack);

struct GatedScores {
  ScoreStack scores;
  int iterations = 0;
  double violation = 0.0;
  bool converged = false;
};

/// Q (x) S clamped to [0, 1], where Q is the OT assignment for S.
GatedScores f_ot_mask(const ScoreStack& scores, const OtConfig& cfg);

}  // namespace dhr
