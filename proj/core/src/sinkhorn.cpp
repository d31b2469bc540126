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

#include "dhr/sinkhorn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace dhr {

void OtConfig::validate() const {
  if (!(lambda > 0.0)) throw Error(ErrorKind::kConfig, "ot: lambda must be > 0");
  if (!(tol > 0.0)) throw Error(ErrorKind::kConfig, "ot: tol must be > 0");
  if (max_iter < 1) throw Error(ErrorKind::kConfig, "ot: max_iter must be >= 1");
}

std::vector<double> estimate_col_marginal(const DenseMatrix& scores,
                                          ColMarginalMode mode, double floor) {
  const std::size_t c = scores.cols;
  std::vector<double> mass(c, 0.0);
  double total = 0.0;
  bool any_positive = false;
  for (std::size_t i = 0; i < scores.rows; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      const double s = scores(i, j);
      mass[j] += s;
      total += s;
      any_positive = any_positive || s > 0.0;
    }
  }
  if (!any_positive) {
    throw Error(ErrorKind::kDegenerate, "ot: score matrix has no positive entry");
  }
  if (mode == ColMarginalMode::kUniform) {
    return std::vector<double>(c, 1.0 / static_cast<double>(c));
  }
  if (floor < 0.0) floor = 1e-3 / static_cast<double>(c);
  double norm = 0.0;
  for (double& m : mass) {
    m = std::max(m, floor * total);
    norm += m;
  }
  for (double& m : mass) m /= norm;
  return mass;
}

namespace {

double log_sum_exp(const double* v, std::size_t n, std::size_t stride) {
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) hi = std::max(hi, v[k * stride]);
  if (!std::isfinite(hi)) return hi;
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) acc += std::exp(v[k * stride] - hi);
  return hi + std::log(acc);
}

void check_scores(const DenseMatrix& scores) {
  if (scores.rows == 0 || scores.cols == 0) {
    throw Error(ErrorKind::kDomain, "ot: empty score matrix");
  }
  for (double s : scores.values) {
    if (std::isnan(s)) throw Error(ErrorKind::kDomain, "ot: NaN in scores");
    if (!std::isfinite(s)) throw Error(ErrorKind::kDomain, "ot: infinite score");
  }
}

}  // namespace

TransportPlan solve_entropic_ot(const DenseMatrix& scores, const OtConfig& cfg) {
  cfg.validate();
  check_scores(scores);
  std::vector<double> rows(scores.rows, 1.0 / static_cast<double>(scores.rows));
  return solve_entropic_ot(
      scores, std::move(rows),
      estimate_col_marginal(scores, cfg.col_marginal_mode, cfg.col_floor), cfg);
}

TransportPlan solve_entropic_ot(const DenseMatrix& scores,
                                std::vector<double> row_marginal,
                                std::vector<double> col_marginal,
                                const OtConfig& cfg) {
  cfg.validate();
  check_scores(scores);
  const std::size_t n = scores.rows;
  const std::size_t c = scores.cols;
  if (row_marginal.size() != n || col_marginal.size() != c) {
    throw Error(ErrorKind::kDomain, "ot: marginal length mismatch");
  }

  // Potentials f (rows) and g (cols) in units of lambda: the plan is
  // T_ij = exp(f_i + g_j - cost_ij / lambda).
  DenseMatrix neg_cost(n, c);
  for (std::size_t k = 0; k < n * c; ++k) {
    neg_cost.values[k] = -(1.0 - scores.values[k]) / cfg.lambda;
  }
  std::vector<double> log_a(n), log_b(c);
  for (std::size_t i = 0; i < n; ++i) log_a[i] = std::log(row_marginal[i]);
  for (std::size_t j = 0; j < c; ++j) log_b[j] = std::log(col_marginal[j]);

  std::vector<double> f(n, 0.0), g(c, 0.0), row_lse(n), buf(std::max(n, c));
  TransportPlan result;
  result.row_marginal = std::move(row_marginal);
  result.col_marginal = std::move(col_marginal);

  // row_lse[i] = log sum_j exp(g_j - cost_ij / lambda); the next row update
  // is f = log_a - row_lse and the current row sums are exp(f + row_lse).
  auto refresh_row_lse = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      const double* kr = &neg_cost.values[i * c];
      for (std::size_t j = 0; j < c; ++j) buf[j] = kr[j] + g[j];
      row_lse[i] = log_sum_exp(buf.data(), c, 1);
    }
  };

  refresh_row_lse();
  double row_viol = std::numeric_limits<double>::infinity();
  int it = 0;
  while (it < cfg.max_iter) {
    ++it;
    for (std::size_t i = 0; i < n; ++i) f[i] = log_a[i] - row_lse[i];
    for (std::size_t j = 0; j < c; ++j) {
      for (std::size_t i = 0; i < n; ++i) buf[i] = neg_cost(i, j) + f[i];
      g[j] = log_b[j] - log_sum_exp(buf.data(), n, 1);
    }
    refresh_row_lse();
    row_viol = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      row_viol = std::max(
          row_viol, std::abs(std::exp(f[i] + row_lse[i]) - result.row_marginal[i]));
    }
    if (row_viol <= cfg.tol) break;
  }

  result.plan = DenseMatrix(n, c);
  std::vector<double> col_sum(c, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      const double t = std::exp(f[i] + g[j] + neg_cost(i, j));
      result.plan(i, j) = t;
      col_sum[j] += t;
    }
  }
  double col_viol = 0.0;
  for (std::size_t j = 0; j < c; ++j) {
    col_viol = std::max(col_viol, std::abs(col_sum[j] - result.col_marginal[j]));
  }
  result.iterations = it;
  result.violation = std::max(row_viol, col_viol);
  result.converged = result.violation <= cfg.tol;
  return result;
}

DenseMatrix assignment_from_plan(const TransportPlan& plan) {
  DenseMatrix q = plan.plan;
  const double n = static_cast<double>(q.rows);
  for (double& v : q.values) v *= n;
  return q;
}

DenseMatrix flatten_scores(const Tensor3<double>& stack) {
  const std::size_t n = stack.pixels();
  DenseMatrix m(n, stack.channels());
  for (std::size_t c = 0; c < stack.channels(); ++c) {
    auto ch = stack.channel(c);
    for (std::size_t p = 0; p < n; ++p) m(p, c) = ch[p];
  }
  return m;
}

void unflatten_scores(const DenseMatrix& m, Tensor3<double>& stack) {
  for (std::size_t c = 0; c < stack.channels(); ++c) {
    auto ch = stack.channel(c);
    for (std::size_t p = 0; p < stack.pixels(); ++p) ch[p] = m(p, c);
  }
}

GatedScores f_ot_mask(const ScoreStack& scores, const OtConfig& cfg) {
  const DenseMatrix s = flatten_scores(scores);
  TransportPlan plan = solve_entropic_ot(s, cfg);
  DenseMatrix q = cfg.scale_by_rows ? assignment_from_plan(plan) : plan.plan;
  for (std::size_t k = 0; k < q.values.size(); ++k) {
    q.values[k] = std::clamp(q.values[k] * s.values[k], 0.0, 1.0);
  }
  GatedScores out{scores, plan.iterations, plan.violation, plan.converged};
  unflatten_scores(q, out.scores);
  return out;
}

}  // namespace dhr
