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

#include "dhr/sinkhorn.hpp"
#include "dhr/tensor.hpp"

namespace dhr {

/// Mean feature vector of every class with at least one pixel; classes
/// without pixels are absent rather than zero-filled.
struct ClassCentroids {
  std::vector<int> classes;                 // ascending
  std::size_t dim = 0;
  std::vector<std::vector<double>> vectors;  // parallel to classes

  // Position of `cls` in `classes`, or -1.
  int find(int cls) const;
  const std::vector<double>* vector_for(int cls) const;
};

/// Disjoint groups covering the present classes; each group ascending, groups
/// ordered by their smallest member.
struct ClassGroups {
  std::vector<std::vector<int>> groups;

  // Index of the group containing `cls`, or -1.
  int group_of(int cls) const;
  std::size_t multi_class_count() const;
};

struct RebalanceConfig {
  double tau = 0.8;
  OtConfig ot;
  bool literal_product_mode = false;

  void validate() const;
};

double cosine_similarity(std::span<const double> a, std::span<const double> b);

ClassCentroids class_average_pool(const FeatureMap& features,
                                  const LabelMask& mask);

/// ReLU(cosine(feature, centroid)) per pixel and present class; absent
/// classes score 0. Zero-norm vectors have similarity 0.
ScoreStack similarity_scores(const FeatureMap& features,
                             const ClassCentroids& centroids,
                             std::size_t num_classes);

struct UssResult {
  ScoreStack scores;           // S-hat^us
  ScoreStack raw_similarity;   // S^us
  ClassCentroids centroids;    // V^us
  GatedScores gated;
};

/// Inter-class rebalancing with unsupervised features: centroids from
/// argmax(m_init), cosine scores, then OT gating. When the plan does not
/// converge the ungated similarity scores are returned (gated.converged
/// tells the caller).
UssResult uss_rebalance(const FeatureMap& uss_features, const ScoreStack& m_init,
                        const RebalanceConfig& cfg);

/// Connected components of the graph with an edge wherever two centroids
/// have cosine similarity above tau. Classes in `singletons` never join a
/// group.
ClassGroups correlation_groups(const ClassCentroids& centroids, double tau,
                               const std::vector<int>& singletons = {});

struct WssResult {
  ScoreStack scores;  // S-hat^dh
  ClassCentroids centroids;  // V^ws
  std::vector<int> iterations;  // one entry per solved group
  int unconverged_groups = 0;
};

/// Intra-class rebalancing restricted to multi-class groups. Default mode
/// redistributes each pixel's group mass by a within-group WSS assignment;
/// literal mode multiplies the WSS OT assignment into S-hat^us on grouped
/// classes.
WssResult wss_rebalance(const ScoreStack& s_hat_us, const FeatureMap& wss_features,
                        const ScoreStack& m_init, const ClassGroups& groups,
                        const RebalanceConfig& cfg);

}  // namespace dhr
