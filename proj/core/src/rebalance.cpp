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

#include "dhr/rebalance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dhr {

int ClassCentroids::find(int cls) const {
  auto it = std::lower_bound(classes.begin(), classes.end(), cls);
  if (it == classes.end() || *it != cls) return -1;
  return static_cast<int>(it - classes.begin());
}

const std::vector<double>* ClassCentroids::vector_for(int cls) const {
  const int k = find(cls);
  return k < 0 ? nullptr : &vectors[static_cast<std::size_t>(k)];
}

int ClassGroups::group_of(int cls) const {
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (std::find(groups[g].begin(), groups[g].end(), cls) != groups[g].end()) {
      return static_cast<int>(g);
    }
  }
  return -1;
}

std::size_t ClassGroups::multi_class_count() const {
  return static_cast<std::size_t>(std::count_if(
      groups.begin(), groups.end(), [](const auto& g) { return g.size() >= 2; }));
}

void RebalanceConfig::validate() const {
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw Error(ErrorKind::kConfig, "rebalance: tau must lie in [0, 1]");
  }
  ot.validate();
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dot += a[k] * b[k];
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

ClassCentroids class_average_pool(const FeatureMap& features,
                                  const LabelMask& mask) {
  if (features.height() != mask.height() || features.width() != mask.width()) {
    throw Error(ErrorKind::kDomain, "cap: feature map not at mask resolution");
  }
  const std::size_t d = features.dim();
  std::vector<std::vector<double>> sums(256);
  std::vector<std::size_t> counts(256, 0);
  for (std::size_t p = 0; p < mask.pixels(); ++p) {
    const std::uint8_t l = mask[p];
    if (l == kIgnoreLabel) continue;
    if (counts[l]++ == 0) sums[l].assign(d, 0.0);
    for (std::size_t k = 0; k < d; ++k) sums[l][k] += features.at(k, p);
  }
  ClassCentroids out;
  out.dim = d;
  for (std::size_t l = 0; l < counts.size(); ++l) {
    if (counts[l] == 0) continue;
    for (double& v : sums[l]) v /= static_cast<double>(counts[l]);
    out.classes.push_back(static_cast<int>(l));
    out.vectors.push_back(std::move(sums[l]));
  }
  return out;
}

ScoreStack similarity_scores(const FeatureMap& features,
                             const ClassCentroids& centroids,
                             std::size_t num_classes) {
  if (features.dim() != centroids.dim) {
    throw Error(ErrorKind::kDomain, "similarity: feature and centroid dims differ");
  }
  ScoreStack out(num_classes, features.height(), features.width(), 0.0);
  const std::size_t d = features.dim();
  std::vector<double> pix(d);
  for (std::size_t p = 0; p < features.pixels(); ++p) {
    for (std::size_t k = 0; k < d; ++k) pix[k] = features.at(k, p);
    for (std::size_t i = 0; i < centroids.classes.size(); ++i) {
      const auto c = static_cast<std::size_t>(centroids.classes[i]);
      if (c >= num_classes) continue;
      out.at(c, p) = std::max(0.0, cosine_similarity(pix, centroids.vectors[i]));
    }
  }
  return out;
}

UssResult uss_rebalance(const FeatureMap& uss_features, const ScoreStack& m_init,
                        const RebalanceConfig& cfg) {
  cfg.validate();
  UssResult out;
  out.centroids = class_average_pool(uss_features, argmax_labels(m_init));
  out.raw_similarity =
      similarity_scores(uss_features, out.centroids, m_init.classes());
  out.raw_similarity.has_background = m_init.has_background;
  out.gated = f_ot_mask(out.raw_similarity, cfg.ot);
  out.scores = out.gated.converged ? out.gated.scores : out.raw_similarity;
  out.scores.has_background = m_init.has_background;
  return out;
}

namespace {

struct DisjointSet {
  explicit DisjointSet(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<std::size_t> parent;
};

}  // namespace

ClassGroups correlation_groups(const ClassCentroids& centroids, double tau,
                               const std::vector<int>& singletons) {
  const std::size_t k = centroids.classes.size();
  auto pinned = [&](std::size_t i) {
    return std::find(singletons.begin(), singletons.end(),
                     centroids.classes[i]) != singletons.end();
  };
  DisjointSet sets(k);
  for (std::size_t a = 0; a < k; ++a) {
    if (pinned(a)) continue;
    for (std::size_t b = a + 1; b < k; ++b) {
      if (pinned(b)) continue;
      if (cosine_similarity(centroids.vectors[a], centroids.vectors[b]) > tau) {
        sets.unite(a, b);
      }
    }
  }
  // Roots are the smallest member, so iterating in class order yields
  // groups ordered by their smallest class.
  ClassGroups out;
  std::vector<int> slot(k, -1);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t r = sets.find(i);
    if (slot[r] < 0) {
      slot[r] = static_cast<int>(out.groups.size());
      out.groups.emplace_back();
    }
    out.groups[static_cast<std::size_t>(slot[r])].push_back(centroids.classes[i]);
  }
  return out;
}

namespace {

void wss_group_mass(const ScoreStack& s_hat_us, const FeatureMap& wss_features,
                    const LabelMask& us_labels, const std::vector<int>& group,
                    const ClassCentroids& centroids, const RebalanceConfig& cfg,
                    ScoreStack& out, WssResult& result) {
  std::vector<int> members;  // group classes that own a WSS centroid
  for (int c : group) {
    if (centroids.find(c) >= 0) members.push_back(c);
  }
  if (members.empty()) return;

  std::vector<std::size_t> pixels;
  for (std::size_t p = 0; p < us_labels.pixels(); ++p) {
    if (std::find(group.begin(), group.end(), us_labels[p]) != group.end()) {
      pixels.push_back(p);
    }
  }
  if (pixels.empty()) return;

  const std::size_t m = members.size();
  const std::size_t d = wss_features.dim();
  DenseMatrix sim(pixels.size(), m);
  std::vector<double> pix(d);
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    for (std::size_t k = 0; k < d; ++k) pix[k] = wss_features.at(k, pixels[i]);
    for (std::size_t j = 0; j < m; ++j) {
      sim(i, j) = std::max(0.0, cosine_similarity(pix, *centroids.vector_for(members[j])));
    }
  }

  DenseMatrix weight = sim;
  if (m >= 2) {
    const bool any_positive = std::any_of(sim.values.begin(), sim.values.end(),
                                          [](double v) { return v > 0.0; });
    if (!any_positive) return;
    TransportPlan plan = solve_entropic_ot(sim, cfg.ot);
    result.iterations.push_back(plan.iterations);
    if (plan.converged) {
      const DenseMatrix q = assignment_from_plan(plan);
      for (std::size_t k = 0; k < weight.values.size(); ++k) {
        weight.values[k] = q.values[k] * sim.values[k];
      }
    } else {
      ++result.unconverged_groups;
    }
  } else {
    std::fill(weight.values.begin(), weight.values.end(), 1.0);
  }

  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const std::size_t p = pixels[i];
    double group_mass = 0.0;
    for (int c : group) group_mass += s_hat_us.at(static_cast<std::size_t>(c), p);
    double row = 0.0;
    for (std::size_t j = 0; j < m; ++j) row += weight(i, j);
    if (row <= 0.0) continue;  // no WSS evidence: keep the USS split
    for (int c : group) out.at(static_cast<std::size_t>(c), p) = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      out.at(static_cast<std::size_t>(members[j]), p) =
          std::clamp(weight(i, j) / row * group_mass, 0.0, 1.0);
    }
  }
}

}  // namespace

WssResult wss_rebalance(const ScoreStack& s_hat_us, const FeatureMap& wss_features,
                        const ScoreStack& m_init, const ClassGroups& groups,
                        const RebalanceConfig& cfg) {
  cfg.validate();
  if (!s_hat_us.same_shape(m_init)) {
    throw Error(ErrorKind::kDomain, "wss: S-hat^us and M^init shapes differ");
  }
  WssResult result;
  result.scores = s_hat_us;
  result.centroids = class_average_pool(wss_features, argmax_labels(m_init));
  if (groups.multi_class_count() == 0) return result;

  if (!cfg.literal_product_mode) {
    const LabelMask us_labels = argmax_labels(s_hat_us);
    for (const auto& g : groups.groups) {
      if (g.size() < 2) continue;
      wss_group_mass(s_hat_us, wss_features, us_labels, g, result.centroids, cfg,
                     result.scores, result);
    }
    return result;
  }

  ScoreStack s_ws =
      similarity_scores(wss_features, result.centroids, m_init.classes());
  const TransportPlan plan = solve_entropic_ot(flatten_scores(s_ws), cfg.ot);
  result.iterations.push_back(plan.iterations);
  if (!plan.converged) {
    ++result.unconverged_groups;
    return result;
  }
  const DenseMatrix q = assignment_from_plan(plan);
  for (const auto& g : groups.groups) {
    if (g.size() < 2) continue;
    for (int c : g) {
      const auto cu = static_cast<std::size_t>(c);
      for (std::size_t p = 0; p < s_hat_us.pixels(); ++p) {
        result.scores.at(cu, p) =
            std::clamp(q(p, cu) * s_hat_us.at(cu, p), 0.0, 1.0);
      }
    }
  }
  return result;
}

}  // namespace dhr
