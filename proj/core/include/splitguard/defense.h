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

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "splitguard/mlp.h"
#include "splitguard/tensor.h"

namespace splitguard {

enum class DefenseKind { kNone, kProtoguard, kDp, kPrune };

std::string_view to_string(DefenseKind kind);
// Throws ConfigError naming the tag.
DefenseKind parse_defense_kind(std::string_view tag);

struct DefenseSpec {
  DefenseKind kind = DefenseKind::kProtoguard;
  double alpha = 0.5;
  double dp_sigma = 0.1;
  double prune_fraction = 0.2;
};

void validate(const DefenseSpec& spec);

// Server-side filtering of aggregated embeddings by class-conditional
// prototype consistency.
//
// The pipeline has four steps, each exposed separately:
//   1. compute_prototypes: per-class coordinate-wise median embedding.
//   2. consistency_transform: cosine similarity of every embedding to every
//      class prototype.
//   3. deviation_scores: Euclidean distance from each consistency vector to
//      the coordinate-wise median consistency vector of its class.
//   4. conformal_p_values / filter_benign: rank of each score within its
//      class, and the benign rule p > alpha.
//
// None of these functions sees ground-truth poison flags; they only receive
// embeddings and the labels the server already holds.

// Median of the values; an even count averages the two middle values.
// `values` is reordered.
double median_in_place(std::span<double> values);

struct PrototypeSet {
  // Classes present in the input, ascending.
  std::vector<int> classes;
  // Row i is the prototype of classes[i].
  Matrix prototypes;

  std::size_t class_count() const { return classes.size(); }
  // Row of `label` in `prototypes`, or -1 when the class is absent.
  int index_of(int label) const;
};

PrototypeSet compute_prototypes(const Matrix& embeddings,
                                std::span<const int> labels);

// Cosine similarity; 0 when either vector has zero norm. Clamped to [-1, 1].
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Row k holds the cosine of embedding k to every prototype, in
// prototypes.classes order.
Matrix consistency_transform(const Matrix& embeddings,
                             const PrototypeSet& prototypes);

struct ConsistencyMatrix {
  Matrix vectors;
  std::vector<int> classes;
  // Row i is the reference pattern of classes[i].
  Matrix reference_patterns;
};

struct DeviationResult {
  Matrix reference_patterns;
  std::vector<double> scores;
};

// Reference pattern per class = coordinate-wise median of its consistency
// vectors; score = L2 distance to the pattern of the sample's own class.
DeviationResult deviation_scores(const Matrix& consistency,
                                 std::span<const int> labels,
                                 std::span<const int> classes);

// p_k = (#{same-class scores >= s_k} + 1) / (same-class count + 1).
std::vector<double> conformal_p_values(std::span<const double> scores,
                                       std::span<const int> labels);

// Indices with p > alpha, ascending. Throws ConfigError unless 0 < alpha < 1.
std::vector<std::size_t> filter_benign(std::span<const double> p_values,
                                       double alpha);

struct FilterVerdict {
  PrototypeSet prototypes;
  ConsistencyMatrix consistency;
  std::vector<double> scores;
  std::vector<double> p_values;
  std::vector<bool> benign;
  std::vector<std::size_t> benign_indices;
  double alpha = 0.0;
};

FilterVerdict protoguard_filter(const Matrix& embeddings,
                                std::span<const int> labels, double alpha);

// Adds N(0, sigma^2) noise to every entry of every client embedding.
std::vector<Matrix> baseline_dp_noise(std::vector<Matrix> embeddings,
                                      double sigma, std::uint64_t seed);

// Zeroes the floor(fraction * weight count) weights with the smallest
// magnitude across all layers (ties broken by position). Biases are kept.
Mlp baseline_magnitude_prune(Mlp model, double fraction);

}  // namespace splitguard
