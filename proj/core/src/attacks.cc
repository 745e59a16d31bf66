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

#include "splitguard/attacks.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

#include "splitguard/errors.h"
#include "splitguard/random.h"

namespace splitguard {

std::string_view to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::kNone:
      return "none";
    case AttackKind::kEmbeddingAdditive:
      return "embedding_additive";
    case AttackKind::kEmbeddingSwap:
      return "embedding_swap";
    case AttackKind::kInputPatch:
      return "input_patch";
  }
  return "none";
}

AttackKind parse_attack_kind(std::string_view tag) {
  for (AttackKind k : {AttackKind::kNone, AttackKind::kEmbeddingAdditive,
                       AttackKind::kEmbeddingSwap, AttackKind::kInputPatch}) {
    if (to_string(k) == tag) return k;
  }
  throw ConfigError("unknown attack kind \"" + std::string(tag) + "\"");
}

void validate(const AttackSpec& spec, int class_count) {
  if (!(spec.poison_rate >= 0.0 && spec.poison_rate <= 1.0)) {
    throw ConfigError("poison_rate must lie in [0, 1]");
  }
  if (!std::isfinite(spec.trigger_magnitude)) {
    throw ConfigError("trigger_magnitude must be finite");
  }
  if (spec.target_class < 0 || spec.target_class >= class_count) {
    throw ConfigError("target_class " + std::to_string(spec.target_class) +
                      " outside [0, " + std::to_string(class_count) + ")");
  }
}

std::vector<std::size_t> select_poison_indices(std::span<const int> labels,
                                               const AttackSpec& spec,
                                               std::size_t round,
                                               std::size_t batch_index) {
  if (spec.kind == AttackKind::kNone || round < spec.start_round ||
      spec.poison_rate <= 0.0) {
    return {};
  }
  std::vector<std::size_t> eligible;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (labels[k] != spec.target_class) eligible.push_back(k);
  }
  // The epsilon keeps products like 0.29 * 100 from flooring to 28.
  const auto wanted = static_cast<std::size_t>(
      std::floor(spec.poison_rate * static_cast<double>(labels.size()) + 1e-9));
  const std::size_t count = std::min(wanted, eligible.size());
  Rng rng(derive_seed(spec.seed, stream::kPoisonSelect,
                      (static_cast<std::uint64_t>(round) << 32) ^ batch_index));
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, eligible.size() - 1);
    std::swap(eligible[i], eligible[pick(rng)]);
  }
  eligible.resize(count);
  std::sort(eligible.begin(), eligible.end());
  return eligible;
}

std::vector<double> TriggerPattern::realize(
    const Matrix& embeddings, std::span<const std::size_t> rows) const {
  if (embeddings.cols() != signs.size()) {
    throw ConfigError("trigger width does not match embedding width");
  }
  std::vector<std::size_t> all;
  if (rows.empty()) {
    all.resize(embeddings.rows());
    std::iota(all.begin(), all.end(), std::size_t{0});
    rows = all;
  }
  std::vector<double> shift(signs.size(), 0.0);
  if (rows.empty()) return shift;
  const double n = static_cast<double>(rows.size());
  for (std::size_t j = 0; j < signs.size(); ++j) {
    double mean = 0.0;
    for (std::size_t r : rows) mean += embeddings(r, j);
    mean /= n;
    double var = 0.0;
    for (std::size_t r : rows) {
      const double d = embeddings(r, j) - mean;
      var += d * d;
    }
    shift[j] = signs[j] * magnitude * std::sqrt(var / n);
  }
  return shift;
}

TriggerPattern make_trigger_pattern(std::size_t dim, const AttackSpec& spec) {
  TriggerPattern t;
  t.magnitude = spec.trigger_magnitude;
  t.signs.resize(dim);
  Rng rng(derive_seed(spec.seed, stream::kTrigger));
  std::bernoulli_distribution coin(0.5);
  for (double& s : t.signs) s = coin(rng) ? 1.0 : -1.0;
  return t;
}

AttackOutcome apply_attack(std::vector<Matrix> per_client,
                           std::vector<int> labels,
                           std::size_t malicious_client,
                           std::span<const std::size_t> indices,
                           const AttackSpec& spec,
                           const TriggerPattern& trigger,
                           std::uint64_t swap_seed) {
  if (malicious_client >= per_client.size()) {
    throw ConfigError("malicious client index out of range");
  }
  Matrix& mine = per_client[malicious_client];
  std::vector<bool> selected(labels.size(), false);
  for (std::size_t k : indices) {
    if (k >= labels.size() || k >= mine.rows()) {
      throw ConfigError("poison index out of range");
    }
    selected[k] = true;
  }
  std::vector<std::size_t> unselected;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (!selected[k]) unselected.push_back(k);
  }

  AttackOutcome out;
  switch (spec.kind) {
    case AttackKind::kNone:
      break;
    case AttackKind::kEmbeddingAdditive: {
      const auto shift = trigger.realize(mine, unselected);
      for (std::size_t k : indices) {
        auto row = mine.row(k);
        for (std::size_t j = 0; j < row.size(); ++j) row[j] += shift[j];
      }
      out.poisoned.assign(indices.begin(), indices.end());
      break;
    }
    case AttackKind::kEmbeddingSwap: {
      std::vector<std::size_t> donors;
      for (std::size_t k : unselected) {
        if (labels[k] == spec.target_class) donors.push_back(k);
      }
      if (donors.empty()) {
        if (!indices.empty()) {
          spdlog::warn("embedding_swap: no target-class sample in batch, "
                       "skipping {} rows",
                       indices.size());
        }
        break;
      }
      const Matrix clean = mine;
      Rng rng(swap_seed);
      std::uniform_int_distribution<std::size_t> pick(0, donors.size() - 1);
      for (std::size_t k : indices) {
        const auto src = clean.row(donors[pick(rng)]);
        std::copy(src.begin(), src.end(), mine.row(k).begin());
      }
      out.poisoned.assign(indices.begin(), indices.end());
      break;
    }
    case AttackKind::kInputPatch:
      out.poisoned.assign(indices.begin(), indices.end());
      break;
  }
  if (!spec.clean_label) {
    for (std::size_t k : out.poisoned) labels[k] = spec.target_class;
  }
  out.per_client = std::move(per_client);
  out.labels = std::move(labels);
  return out;
}

std::size_t patch_width(std::size_t feature_width) {
  return (feature_width + 9) / 10;
}

Matrix apply_input_patch(Matrix client_features,
                         std::span<const std::size_t> rows) {
  const std::size_t width = patch_width(client_features.cols());
  for (std::size_t r : rows) {
    if (r >= client_features.rows()) throw ConfigError("patch row out of range");
    auto row = client_features.row(r);
    std::fill_n(row.begin(), width, 1.0);
  }
  return client_features;
}

}  // namespace splitguard
