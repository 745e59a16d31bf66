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

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "splitguard/config.h"
#include "splitguard/protocol.h"

namespace splitguard {

struct MetricsReport {
  double main_accuracy = 0.0;
  double attack_success_rate = 0.0;
  std::vector<RoundLog> rounds;
  ExperimentConfig config;
  std::uint64_t seed = 0;

  // Precision/recall pooled over all rounds >= from_round.
  FilterConfusion pooled_confusion(std::size_t from_round = 1) const;
};

// Builds data, partition and models from the config, trains for
// config.rounds rounds and evaluates MA and ASR on the test split. When
// config.dump_consistency is set, the filter's view of every batch of the
// final round is written to config.resolved_dump_path().
MetricsReport run_experiment(const ExperimentConfig& config);

// Writes delimiter-separated rows (one per sample) describing the prototype
// filter's view of a batch: round, sample id, label, poison flag, score,
// p-value, benign flag and the consistency vector.
class ConsistencyDumpWriter {
 public:
  explicit ConsistencyDumpWriter(const std::string& path);
  ~ConsistencyDumpWriter();
  ConsistencyDumpWriter(const ConsistencyDumpWriter&) = delete;
  ConsistencyDumpWriter& operator=(const ConsistencyDumpWriter&) = delete;

  void write(std::size_t round, const EmbeddingBatch& batch,
             const FilterVerdict& verdict);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::string to_json(const MetricsReport& report, int indent = 2);
MetricsReport parse_report(std::string_view json_text);

// Tab-separated summary row: ma, asr, pooled precision/recall after the
// poisoning start, followed by the given extra columns.
std::string summary_header(const std::vector<std::string>& extra_columns);
std::string summary_row(const MetricsReport& report,
                        const std::vector<std::string>& extra_values);

}  // namespace splitguard
