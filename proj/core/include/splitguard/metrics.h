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
#include <span>
#include <vector>

namespace splitguard {

// Fraction of exact matches. Throws EvaluationError on empty or mismatched
// input.
double main_accuracy(std::span<const int> predictions,
                     std::span<const int> labels);

// Fraction of predictions equal to target_class among samples whose true
// label differs from it; target-class samples are dropped here whatever the
// caller passes. Throws EvaluationError when nothing remains.
double attack_success_rate(std::span<const int> predictions, int target_class,
                           std::span<const int> true_labels);

// Detection counts of a filter against ground truth. A sample is "detected"
// when it is outside the benign set.
struct FilterCounts {
  std::size_t poisoned = 0;
  std::size_t detected = 0;
  std::size_t true_detected = 0;

  FilterCounts& operator+=(const FilterCounts& other);
  friend bool operator==(const FilterCounts&, const FilterCounts&) = default;
};

FilterCounts count_detections(const std::vector<bool>& benign,
                              const std::vector<bool>& poison_flags);

struct FilterConfusion {
  double precision = 1.0;
  double recall = 1.0;
};

// Empty denominators give 1.0.
FilterConfusion filter_confusion(const FilterCounts& counts);
FilterConfusion filter_confusion(const std::vector<bool>& benign,
                                 const std::vector<bool>& poison_flags);

}  // namespace splitguard
