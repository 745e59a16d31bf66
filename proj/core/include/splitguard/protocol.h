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
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "splitguard/attacks.h"
#include "splitguard/data.h"
#include "splitguard/defense.h"
#include "splitguard/metrics.h"
#include "splitguard/mlp.h"
#include "splitguard/tensor.h"

namespace splitguard {

// What the server holds after one exchange. poison_flags is ground truth for
// metrics and dumps; defenses are handed only `aggregated` and `labels`.
struct EmbeddingBatch {
  std::vector<std::size_t> sample_ids;
  std::vector<Matrix> per_client;
  Matrix aggregated;
  std::vector<int> labels;
  std::vector<bool> poison_flags;
};

struct SplitSystem {
  std::vector<Mlp> bottom_models;
  Mlp top_model;
  VerticalPartition partition;
  std::optional<std::size_t> malicious_client;
  std::size_t round_counter = 0;

  std::vector<std::size_t> embedding_widths() const;
};

struct ModelShape {
  std::vector<std::size_t> bottom_hidden;
  std::size_t embedding_width = 0;
  std::vector<std::size_t> top_hidden;
};

// Bottom models: relu hidden layers, identity embedding layer. Top model:
// relu hidden layers, softmax output. Each model gets its own seed derived
// from `seed`.
SplitSystem make_split_system(const VerticalPartition& partition,
                              int class_count, const ModelShape& shape,
                              std::uint64_t seed,
                              std::optional<std::size_t> malicious_client);

// Checks the width invariants between partition, bottom and top models.
void validate(const SplitSystem& system);

// Column-wise concatenation in client order. Throws ProtocolError when row
// counts differ.
Matrix aggregate_embeddings(std::span<const Matrix> per_client);

// Slices the top-model input gradient back into per-client blocks, zeroing
// rows where benign_mask is false (an empty mask keeps every row).
std::vector<Matrix> split_backward(const Matrix& top_input_gradients,
                                   std::span<const std::size_t> widths,
                                   const std::vector<bool>& benign_mask);

struct TrainingOptions {
  double learning_rate = 0.01;
  std::size_t batch_size = 5000;
  AttackSpec attack;
  TriggerPattern trigger;
  DefenseSpec defense;
  std::uint64_t seed = 0;
};

struct RoundLog {
  // 1-based.
  std::size_t round = 0;
  // Mean over batches of the optimised objective (benign-row cross-entropy
  // summed and divided by the batch size).
  double loss = 0.0;
  std::vector<double> batch_losses;
  std::size_t samples = 0;
  std::size_t poisoned = 0;
  std::size_t filtered = 0;
  FilterCounts counts;
  double precision = 1.0;
  double recall = 1.0;

  friend bool operator==(const RoundLog&, const RoundLog&) = default;
};

// Called once per batch after the defense ran; verdict is null when the
// defense is not the prototype filter.
using BatchObserver =
    std::function<void(std::size_t round, const EmbeddingBatch& batch,
                       const FilterVerdict* verdict)>;

// Seeded permutation of [0, n) chunked into batches, fixed per round.
std::vector<std::vector<std::size_t>> batch_order(std::size_t n,
                                                  std::size_t batch_size,
                                                  std::uint64_t seed,
                                                  std::size_t round);

// One pass over the training set. Advances system.round_counter.
RoundLog train_round(SplitSystem& system, const Dataset& train,
                     const TrainingOptions& options,
                     const BatchObserver& observer = {});

// Clean forward pass of the whole system, returning class predictions.
std::vector<int> predict(const SplitSystem& system, const Matrix& features);

struct Evaluation {
  double main_accuracy = 0.0;
  double attack_success_rate = 0.0;
  std::size_t triggered_samples = 0;
};

// MA on the clean test split; ASR on every non-target test sample carrying
// the attack's test-time trigger (no labels are changed).
Evaluation evaluate(const SplitSystem& system, const Dataset& test,
                    const AttackSpec& attack, const TriggerPattern& trigger);

}  // namespace splitguard
