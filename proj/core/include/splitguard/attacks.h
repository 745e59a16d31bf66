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
#include <string>
#include <string_view>
#include <vector>

#include "splitguard/tensor.h"

namespace splitguard {

enum class AttackKind { kNone, kEmbeddingAdditive, kEmbeddingSwap, kInputPatch };

std::string_view to_string(AttackKind kind);
// Throws ConfigError naming the tag.
AttackKind parse_attack_kind(std::string_view tag);

struct AttackSpec {
  AttackKind kind = AttackKind::kNone;
  double poison_rate = 0.05;
  double trigger_magnitude = 1.0;
  int target_class = 0;
  // 1-based round from which poisoning is active.
  std::size_t start_round = 20;
  std::uint64_t seed = 0;
  // Keep true labels on poisoned rows instead of relabelling to the target.
  bool clean_label = false;

  bool embedding_space() const {
    return kind == AttackKind::kEmbeddingAdditive ||
           kind == AttackKind::kEmbeddingSwap;
  }
};

void validate(const AttackSpec& spec, int class_count);

// Seeded sample of floor(poison_rate * batch size) rows whose label differs
// from the target class, ascending. Empty before start_round, for kNone, or
// at rate 0. The draw depends on (seed, round, batch_index).
std::vector<std::size_t> select_poison_indices(std::span<const int> labels,
                                               const AttackSpec& spec,
                                               std::size_t round,
                                               std::size_t batch_index = 0);

// Fixed +-1 sign per embedding dimension, drawn once from the attack seed.
struct TriggerPattern {
  std::vector<double> signs;
  double magnitude = 1.0;

  // Per-dimension shift: sign * magnitude * (population std of the column
  // over `rows` of `embeddings`; all rows when `rows` is empty).
  std::vector<double> realize(const Matrix& embeddings,
                              std::span<const std::size_t> rows = {}) const;
};

TriggerPattern make_trigger_pattern(std::size_t dim, const AttackSpec& spec);

struct AttackOutcome {
  std::vector<Matrix> per_client;
  // Training labels after the dirty-label override.
  std::vector<int> labels;
  // Rows actually poisoned (swap may skip some).
  std::vector<std::size_t> poisoned;
};

// Embedding-space attacks by the malicious client.
//  - additive: selected rows += trigger realised on the unselected rows.
//  - swap: selected rows take the malicious embedding of a seeded random
//    unselected target-class row of the same batch; skipped with a warning
//    when the batch has none.
// Other rows and other clients are untouched. kInputPatch and kNone only
// relabel (input patches are applied before the bottom model, see
// apply_input_patch).
AttackOutcome apply_attack(std::vector<Matrix> per_client,
                           std::vector<int> labels,
                           std::size_t malicious_client,
                           std::span<const std::size_t> indices,
                           const AttackSpec& spec,
                           const TriggerPattern& trigger,
                           std::uint64_t swap_seed);

// Number of leading feature columns a patch covers: ceil(10% of width).
std::size_t patch_width(std::size_t feature_width);

// Sets the leading patch_width() columns of the selected rows to 1.0.
Matrix apply_input_patch(Matrix client_features,
                         std::span<const std::size_t> rows);

}  // namespace splitguard
