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

#include "splitguard/metrics.h"

#include "splitguard/errors.h"

namespace splitguard {

double main_accuracy(std::span<const int> predictions,
                     std::span<const int> labels) {
  if (predictions.empty()) throw EvaluationError("main accuracy of no samples");
  if (predictions.size() != labels.size()) {
    throw EvaluationError("prediction and label counts differ");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    hits += predictions[i] == labels[i] ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double attack_success_rate(std::span<const int> predictions, int target_class,
                           std::span<const int> true_labels) {
  if (predictions.size() != true_labels.size()) {
    throw EvaluationError("prediction and label counts differ");
  }
  std::size_t eligible = 0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < true_labels.size(); ++i) {
    if (true_labels[i] == target_class) continue;
    ++eligible;
    hits += predictions[i] == target_class ? 1 : 0;
  }
  if (eligible == 0) {
    throw EvaluationError("no non-target samples to measure attack success on");
  }
  return static_cast<double>(hits) / static_cast<double>(eligible);
}

FilterCounts& FilterCounts::operator+=(const FilterCounts& other) {
  poisoned += other.poisoned;
  detected += other.detected;
  true_detected += other.true_detected;
  return *this;
}

FilterCounts count_detections(const std::vector<bool>& benign,
                              const std::vector<bool>& poison_flags) {
  if (benign.size() != poison_flags.size()) {
    throw EvaluationError("benign mask and poison flags differ in length");
  }
  FilterCounts c;
  for (std::size_t i = 0; i < benign.size(); ++i) {
    const bool detected = !benign[i];
    c.poisoned += poison_flags[i] ? 1 : 0;
    c.detected += detected ? 1 : 0;
    c.true_detected += detected && poison_flags[i] ? 1 : 0;
  }
  return c;
}

FilterConfusion filter_confusion(const FilterCounts& counts) {
  FilterConfusion out;
  if (counts.detected > 0) {
    out.precision = static_cast<double>(counts.true_detected) /
                    static_cast<double>(counts.detected);
  }
  if (counts.poisoned > 0) {
    out.recall = static_cast<double>(counts.true_detected) /
                 static_cast<double>(counts.poisoned);
  }
  return out;
}

FilterConfusion filter_confusion(const std::vector<bool>& benign,
                                 const std::vector<bool>& poison_flags) {
  return filter_confusion(count_detections(benign, poison_flags));
}

}  // namespace splitguard
