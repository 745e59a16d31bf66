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
#include <string>
#include <string_view>
#include <vector>

#include "splitguard/attacks.h"
#include "splitguard/data.h"
#include "splitguard/defense.h"

namespace splitguard {

enum class DatasetKind { kSynthetic, kCifar10, kBank };

std::string_view to_string(DatasetKind kind);
DatasetKind parse_dataset_kind(std::string_view tag);

struct DatasetConfig {
  DatasetKind kind = DatasetKind::kSynthetic;
  // Synthetic generator parameters.
  int class_count = 10;
  std::size_t samples_per_class = 500;
  std::size_t test_samples_per_class = 100;
  std::size_t feature_dim = 32;
  double cluster_spread = 0.5;
  double center_scale = 1.0;
  // File or directory for cifar10 / bank; relative paths resolve against
  // $SPLITGUARD_DATA_ROOT when it is set.
  std::string path;
};

// Widths, ReLU activations and Glorot init are our own choice; no published
// architecture exists to check them against.
struct ModelConfig {
  // Bottom model: feature slice -> hidden... -> embedding (4 layers).
  std::vector<std::size_t> bottom_hidden{128, 128, 128};
  std::size_t embedding_width = 16;
  // Top model: concatenated embeddings -> hidden... -> classes (3 layers).
  std::vector<std::size_t> top_hidden{128, 128};
};

struct AttackConfig {
  AttackKind kind = AttackKind::kEmbeddingAdditive;
  double poison_rate = 0.05;
  double trigger_magnitude = 1.0;
  int target_class = 0;
  bool clean_label = false;
};

// Every field defaults to the reference protocol: 4 clients with client 1
// malicious, 80 rounds, poisoning from round 20, SGD at 0.01, batches of
// 5000, 5% poison rate, trigger magnitude 1.0, alpha 0.5.
struct ExperimentConfig {
  std::uint64_t seed = 0;
  DatasetConfig dataset;
  std::size_t clients = 4;
  std::size_t malicious_client = 1;
  // Optional explicit column ranges; empty means an equal contiguous split.
  std::vector<ColumnRange> partition;
  std::size_t rounds = 80;
  std::size_t poison_start_round = 20;
  double learning_rate = 0.01;
  std::size_t batch_size = 5000;
  AttackConfig attack;
  DefenseSpec defense;
  ModelConfig model;
  std::string output = "report.json";
  bool dump_consistency = false;
  // Defaults to <output>.consistency.tsv when empty.
  std::string dump_path;

  AttackSpec attack_spec() const;
  std::string resolved_dump_path() const;
};

// Range and consistency checks. Throws ConfigError.
void validate(const ExperimentConfig& config);

// JSON encoding. Unknown keys and unknown tags are ConfigErrors; missing keys
// keep their defaults.
std::string to_json(const ExperimentConfig& config, int indent = 2);
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::string& path);

// Sets a dotted key ("defense.alpha", "attack.kind", "rounds") to a value
// written as JSON; bare words are taken as strings.
// The result is not validated, so several overrides may pass through an
// inconsistent state.
ExperimentConfig apply_override(const ExperimentConfig& config,
                                std::string_view key, std::string_view value);

// Resolves a dataset path against $SPLITGUARD_DATA_ROOT.
std::string resolve_data_path(const std::string& path);

}  // namespace splitguard
