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
#include <filesystem>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "splitguard/tensor.h"

namespace splitguard {

enum class Split { kTrain, kTest };

struct Dataset {
  Matrix features;
  std::vector<int> labels;
  int class_count = 0;
  Split split = Split::kTrain;

  std::size_t size() const { return labels.size(); }
  std::size_t feature_dim() const { return features.cols(); }
};

// Throws DataError when labels and rows disagree or a label is out of range.
void validate(const Dataset& dataset);

struct TrainTest {
  Dataset train;
  Dataset test;
};

// Balanced Gaussian blobs. Class centres depend only on the seed (so train and
// test splits share them); each centre coordinate is drawn uniformly from
// [-center_scale, center_scale]. Samples are centre + cluster_spread * N(0, I),
// ordered by class.
Dataset generate_synthetic(int class_count, std::size_t samples_per_class,
                           std::size_t feature_dim, double cluster_spread,
                           std::uint64_t seed, Split split = Split::kTrain,
                           double center_scale = 1.0);

inline constexpr std::size_t kCifarRecordBytes = 3073;
inline constexpr std::size_t kCifarPixels = 3072;

// Parses concatenated CIFAR-10 binary records. Throws FormatError.
Dataset parse_cifar10_records(std::span<const unsigned char> bytes,
                              Split split, std::string_view source = "");

// Reads data_batch_1..5.bin and test_batch.bin from the directory.
// Missing files raise DataError; malformed ones FormatError.
TrainTest load_cifar10(const std::filesystem::path& directory);

// Semicolon-delimited text with a header row and a final "y" column (yes/no).
// Columns whose first data cell is an unquoted number are numeric and are
// min-max scaled with train statistics (clamped to [0, 1]); the rest are
// one-hot encoded in first-appearance order. The 80/20 split is a seeded
// shuffle.
TrainTest parse_bank_marketing(std::string_view text, std::uint64_t seed);
TrainTest load_bank_marketing(const std::filesystem::path& path,
                              std::uint64_t seed);

struct ColumnRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t width() const { return end - begin; }
  friend bool operator==(const ColumnRange&, const ColumnRange&) = default;
};

// One contiguous column range per client, in client order.
class VerticalPartition {
 public:
  VerticalPartition() = default;
  // Validates that the ranges are disjoint, ordered and cover [0, dim).
  VerticalPartition(std::vector<ColumnRange> ranges, std::size_t feature_dim);

  std::size_t client_count() const { return ranges_.size(); }
  std::size_t feature_dim() const { return feature_dim_; }
  const ColumnRange& range(std::size_t client) const { return ranges_.at(client); }
  const std::vector<ColumnRange>& ranges() const { return ranges_; }
  std::vector<std::size_t> widths() const;

  Matrix client_features(const Matrix& features, std::size_t client) const;

 private:
  std::vector<ColumnRange> ranges_;
  std::size_t feature_dim_ = 0;
};

// Equal contiguous ranges; the lowest-index clients take the remainder.
VerticalPartition vertical_split(std::size_t feature_dim,
                                 std::size_t client_count);
VerticalPartition vertical_split(const Dataset& dataset,
                                 std::size_t client_count);

}  // namespace splitguard
