// Copyright 2026 The splitguard Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "splitguard/defense.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "splitguard/errors.h"
#include "splitguard/random.h"

namespace splitguard {
namespace {

// Sample indices grouped by label, labels ascending.
std::map<int, std::vector<std::size_t>> group_by_label(
    std::span<const int> labels) {
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t k = 0; k < labels.size(); ++k) groups[labels[k]].push_back(k);
  return groups;
}

// Coordinate-wise median of the selected rows.
std::vector<double> coordinate_median(const Matrix& m,
                                      std::span<const std::size_t> rows) {
  std::vector<double> out(m.cols());
  std::vector<double> column(rows.size());
  for (std::size_t j = 0; j < m.cols(); ++j) {
    for (std::size_t i = 0; i < rows.size(); ++i) column[i] = m(rows[i], j);
    out[j] = median_in_place(column);
  }
  return out;
}

}  // namespace

std::string_view to_string(DefenseKind kind) {
  switch (kind) {
    case DefenseKind::kNone:
      return "none";
    case DefenseKind::kProtoguard:
      return "protoguard";
    case DefenseKind::kDp:
      return "dp";
    case DefenseKind::kPrune:
      return "prune";
  }
  return "none";
}

DefenseKind parse_defense_kind(std::string_view tag) {
  for (DefenseKind k : {DefenseKind::kNone, DefenseKind::kProtoguard,
                        DefenseKind::kDp, DefenseKind::kPrune}) {
    if (to_string(k) == tag) return k;
  }
  throw ConfigError("unknown defense kind \"" + std::string(tag) + "\"");
}

void validate(const DefenseSpec& spec) {
  if (!(spec.alpha > 0.0 && spec.alpha < 1.0)) {
    throw ConfigError("alpha must lie in (0, 1)");
  }
  if (!(spec.dp_sigma >= 0.0)) throw ConfigError("dp_sigma must be non-negative");
  if (!(spec.prune_fraction >= 0.0 && spec.prune_fraction <= 1.0)) {
    throw ConfigError("prune_fraction must lie in [0, 1]");
  }
}

double median_in_place(std::span<double> values) {
  if (values.empty()) throw ConfigError("median of an empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return (lower + upper) / 2.0;
}

int PrototypeSet::index_of(int label) const {
  const auto it = std::lower_bound(classes.begin(), classes.end(), label);
  if (it == classes.end() || *it != label) return -1;
  return static_cast<int>(it - classes.begin());
}

PrototypeSet compute_prototypes(const Matrix& embeddings,
                                std::span<const int> labels) {
  if (labels.size() != embeddings.rows()) {
    throw ConfigError("compute_prototypes: label count does not match rows");
  }
  const auto groups = group_by_label(labels);
  PrototypeSet set;
  set.prototypes = Matrix(groups.size(), embeddings.cols());
  std::size_t i = 0;
  for (const auto& [label, rows] : groups) {
    set.classes.push_back(label);
    const auto median = coordinate_median(embeddings, rows);
    std::copy(median.begin(), median.end(), set.prototypes.row(i).begin());
    ++i;
  }
  return set;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0;
  double aa = 0.0;
  double bb = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    dot += a[j] * b[j];
    aa += a[j] * a[j];
    bb += b[j] * b[j];
  }
  if (aa == 0.0 || bb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
}

Matrix consistency_transform(const Matrix& embeddings,
                             const PrototypeSet& prototypes) {
  if (prototypes.prototypes.cols() != embeddings.cols()) {
    throw ConfigError("prototype width does not match embedding width");
  }
  const std::size_t c = prototypes.class_count();
  Matrix v(embeddings.rows(), c);
  for (std::size_t k = 0; k < embeddings.rows(); ++k) {
    const auto e = embeddings.row(k);
    for (std::size_t i = 0; i < c; ++i) {
      v(k, i) = cosine_similarity(e, prototypes.prototypes.row(i));
    }
  }
  return v;
}

DeviationResult deviation_scores(const Matrix& consistency,
                                 std::span<const int> labels,
                                 std::span<const int> classes) {
  if (labels.size() != consistency.rows()) {
    throw ConfigError("deviation_scores: label count does not match rows");
  }
  const auto groups = group_by_label(labels);
  DeviationResult out;
  out.reference_patterns = Matrix(classes.size(), consistency.cols());
  std::map<int, std::size_t> pattern_row;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    pattern_row[classes[i]] = i;
    const auto it = groups.find(classes[i]);
    if (it == groups.end()) continue;
    const auto median = coordinate_median(consistency, it->second);
    std::copy(median.begin(), median.end(),
              out.reference_patterns.row(i).begin());
  }
  out.scores.resize(labels.size());
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const auto it = pattern_row.find(labels[k]);
    if (it == pattern_row.end()) {
      throw ConfigError("label " + std::to_string(labels[k]) +
                        " has no reference pattern");
    }
    const auto v = consistency.row(k);
    const auto mu = out.reference_patterns.row(it->second);
    double sq = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      const double d = v[j] - mu[j];
      sq += d * d;
    }
    out.scores[k] = std::sqrt(sq);
  }
  return out;
}

std::vector<double> conformal_p_values(std::span<const double> scores,
                                       std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw ConfigError("conformal_p_values: score and label counts differ");
  }
  std::vector<double> p(scores.size());
  for (const auto& [label, rows] : group_by_label(labels)) {
    std::vector<double> sorted;
    sorted.reserve(rows.size());
    for (std::size_t k : rows) sorted.push_back(scores[k]);
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    for (std::size_t k : rows) {
      const auto below = std::lower_bound(sorted.begin(), sorted.end(), scores[k]);
      const auto at_least = static_cast<double>(sorted.end() - below);
      p[k] = (at_least + 1.0) / (n + 1.0);
    }
  }
  return p;
}

std::vector<std::size_t> filter_benign(std::span<const double> p_values,
                                       double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError("alpha must lie in (0, 1), got " + std::to_string(alpha));
  }
  std::vector<std::size_t> benign;
  for (std::size_t k = 0; k < p_values.size(); ++k) {
    if (p_values[k] > alpha) benign.push_back(k);
  }
  return benign;
}

FilterVerdict protoguard_filter(const Matrix& embeddings,
                                std::span<const int> labels, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError("alpha must lie in (0, 1), got " + std::to_string(alpha));
  }
  FilterVerdict verdict;
  verdict.alpha = alpha;
  verdict.prototypes = compute_prototypes(embeddings, labels);
  verdict.consistency.classes = verdict.prototypes.classes;
  verdict.consistency.vectors =
      consistency_transform(embeddings, verdict.prototypes);
  auto deviation = deviation_scores(verdict.consistency.vectors, labels,
                                    verdict.consistency.classes);
  verdict.consistency.reference_patterns =
      std::move(deviation.reference_patterns);
  verdict.scores = std::move(deviation.scores);
  verdict.p_values = conformal_p_values(verdict.scores, labels);
  verdict.benign_indices = filter_benign(verdict.p_values, alpha);
  verdict.benign.assign(labels.size(), false);
  for (std::size_t k : verdict.benign_indices) verdict.benign[k] = true;
  return verdict;
}

std::vector<Matrix> baseline_dp_noise(std::vector<Matrix> embeddings,
                                      double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw ConfigError("dp sigma must be non-negative");
  if (sigma == 0.0) return embeddings;
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (Matrix& m : embeddings) {
    for (double& v : m.values()) v += noise(rng);
  }
  return embeddings;
}

Mlp baseline_magnitude_prune(Mlp model, double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw ConfigError("prune fraction must lie in [0, 1]");
  }
  std::vector<double*> weights;
  for (Layer& layer : model.layers) {
    for (double& w : layer.weight.values()) weights.push_back(&w);
  }
  const auto count = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(weights.size()) + 1e-9));
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return std::abs(*weights[a]) < std::abs(*weights[b]);
                   });
  for (std::size_t i = 0; i < std::min(count, order.size()); ++i) {
    *weights[order[i]] = 0.0;
  }
  return model;
}

}  // namespace splitguard
