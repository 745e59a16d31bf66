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


#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "splitguard/data.h"
#include "splitguard/errors.h"
#include "splitguard/mlp.h"

namespace splitguard {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("splitguard_data_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<unsigned char> cifar_records(const std::vector<int>& labels,
                                         unsigned char pixel) {
  std::vector<unsigned char> bytes;
  for (int y : labels) {
    bytes.push_back(static_cast<unsigned char>(y));
    bytes.insert(bytes.end(), kCifarPixels, pixel);
  }
  return bytes;
}

void write_bytes(const fs::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

std::string data_root() {
  const char* root = std::getenv("SPLITGUARD_DATA_ROOT");
  return root ? root : "";
}

TEST(Synthetic, SameSeedIsBitwiseIdentical) {
  const Dataset a = generate_synthetic(5, 20, 6, 0.5, 42);
  const Dataset b = generate_synthetic(5, 20, 6, 0.5, 42);
  EXPECT_EQ(a.features, b.features);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_NE(generate_synthetic(5, 20, 6, 0.5, 43).features, a.features);
}

TEST(Synthetic, ZeroSpreadCollapsesToCentres) {
  const Dataset d = generate_synthetic(3, 10, 4, 0.0, 8);
  for (std::size_t r = 0; r < d.size(); ++r) {
    const std::size_t first = static_cast<std::size_t>(d.labels[r]) * 10;
    for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(d.features(r, c), d.features(first, c));
  }
}

TEST(Synthetic, BalancedAndSharedCentresAcrossSplits) {
  const Dataset train = generate_synthetic(4, 25, 3, 0.0, 1, Split::kTrain);
  const Dataset test = generate_synthetic(4, 5, 3, 0.0, 1, Split::kTest);
  std::vector<int> counts(4, 0);
  for (int y : train.labels) ++counts[static_cast<std::size_t>(y)];
  EXPECT_EQ(counts, (std::vector<int>{25, 25, 25, 25}));
  EXPECT_EQ(train.features(0, 0), test.features(0, 0));
  EXPECT_EQ(train.split, Split::kTrain);
  EXPECT_EQ(test.split, Split::kTest);
}

TEST(Synthetic, InvalidSizesAreConfigErrors) {
  EXPECT_THROW(generate_synthetic(0, 10, 4, 0.5, 1), ConfigError);
  EXPECT_THROW(generate_synthetic(3, 0, 4, 0.5, 1), ConfigError);
  EXPECT_THROW(generate_synthetic(3, 10, 4, -1.0, 1), ConfigError);
}

TEST(Synthetic, TwoLayerClassifierSeparatesTenClasses) {
  const Dataset train = generate_synthetic(10, 500, 32, 0.5, 3, Split::kTrain);
  const Dataset test = generate_synthetic(10, 100, 32, 0.5, 3, Split::kTest);
  Mlp model = make_mlp(std::vector<std::size_t>{32, 32, 10}, Activation::kRelu,
                       Activation::kSoftmax, 4);
  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(6);
  for (int epoch = 0; epoch < 20; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += 100) {
      const std::vector<std::size_t> rows(order.begin() + start,
                                          order.begin() + start + 100);
      std::vector<int> y;
      for (std::size_t r : rows) y.push_back(train.labels[r]);
      const auto fwd = mlp_forward(model, gather_rows(train.features, rows));
      const auto lg = mlp_backward(model, fwd.tape, fwd.output, y,
                                   LossKind::kCrossEntropy);
      sgd_update_in_place(model, lg.gradients, 0.1);
    }
  }
  const auto predicted = argmax_rows(mlp_predict(model, test.features));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    correct += predicted[i] == test.labels[i] ? 1 : 0;
  }
  EXPECT_GE(static_cast<double>(correct) / test.size(), 0.95);
}

TEST(Cifar, TruncatedRecordIsFormatError) {
  const std::vector<unsigned char> bytes(3072, 0);
  EXPECT_THROW(parse_cifar10_records(bytes, Split::kTrain), FormatError);
}

TEST(Cifar, LabelAboveNineIsFormatError) {
  EXPECT_THROW(parse_cifar10_records(cifar_records({3, 10}, 0), Split::kTrain),
               FormatError);
}

TEST(Cifar, ParsesLabelsAndScalesPixels) {
  auto bytes = cifar_records({7, 0}, 255);
  bytes[1] = 0;
  bytes[2] = 51;
  const Dataset d = parse_cifar10_records(bytes, Split::kTest);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.feature_dim(), kCifarPixels);
  EXPECT_EQ(d.labels, (std::vector<int>{7, 0}));
  EXPECT_EQ(d.class_count, 10);
  EXPECT_EQ(d.features(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(d.features(0, 1), 0.2);
  EXPECT_EQ(d.features(1, 3071), 1.0);
  for (double v : d.features.values()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Cifar, DirectoryLoaderConcatenatesBatchesAndIsIdempotent) {
  const fs::path dir = scratch_dir("cifar");
  for (int b = 1; b <= 5; ++b) {
    write_bytes(dir / ("data_batch_" + std::to_string(b) + ".bin"),
                cifar_records({b, b - 1}, static_cast<unsigned char>(b)));
  }
  write_bytes(dir / "test_batch.bin", cifar_records({9}, 128));
  const TrainTest first = load_cifar10(dir);
  const TrainTest second = load_cifar10(dir);
  EXPECT_EQ(first.train.size(), 10u);
  EXPECT_EQ(first.test.size(), 1u);
  EXPECT_EQ(first.train.labels, (std::vector<int>{1, 0, 2, 1, 3, 2, 4, 3, 5, 4}));
  EXPECT_EQ(first.train.features, second.train.features);
  EXPECT_EQ(first.test.features, second.test.features);
  fs::remove(dir / "test_batch.bin");
  EXPECT_THROW(load_cifar10(dir), DataError);
  fs::remove_all(dir);
}

TEST(Cifar, PublishedTrainBatchesAreBalanced) {
  const fs::path dir = fs::path(data_root()) / "cifar-10-batches-bin";
  if (data_root().empty() || !fs::exists(dir / "data_batch_1.bin")) {
    GTEST_SKIP() << "CIFAR-10 binaries not present under SPLITGUARD_DATA_ROOT";
  }
  const TrainTest d = load_cifar10(dir);
  ASSERT_EQ(d.train.size(), 50000u);
  ASSERT_EQ(d.test.size(), 10000u);
  std::vector<int> counts(10, 0);
  for (int y : d.train.labels) ++counts[static_cast<std::size_t>(y)];
  for (int c : counts) EXPECT_EQ(c, 5000);
}

constexpr const char* kBankSample =
    "\"age\";\"job\";\"balance\";\"contact\";\"y\"\n"
    "30;\"admin.\";100;\"cellular\";\"no\"\n"
    "45;\"technician\";-20;\"unknown\";\"yes\"\n"
    "52;\"admin.\";3000;\"cellular\";\"no\"\n"
    "23;\"services\";0;\"telephone\";\"yes\"\n"
    "61;\"technician\";50;\"cellular\";\"no\"\n"
    "38;\"services\";75;\"cellular\";\"no\"\n"
    "29;\"admin.\";12;\"unknown\";\"yes\"\n"
    "47;\"services\";900;\"telephone\";\"no\"\n"
    "33;\"technician\";5;\"cellular\";\"no\"\n"
    "41;\"admin.\";410;\"cellular\";\"yes\"\n";

TEST(Bank, EncodesNumericAndOneHotColumns) {
  const TrainTest d = parse_bank_marketing(kBankSample, 1);
  // age, 3 jobs, balance, 3 contacts.
  EXPECT_EQ(d.train.feature_dim(), 8u);
  EXPECT_EQ(d.train.size(), 8u);
  EXPECT_EQ(d.test.size(), 2u);
  EXPECT_EQ(d.train.class_count, 2);
  for (const Dataset* part : {&d.train, &d.test}) {
    for (std::size_t r = 0; r < part->size(); ++r) {
      const auto row = part->features.row(r);
      for (double v : row) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
      }
      EXPECT_EQ(row[1] + row[2] + row[3], 1.0);
      EXPECT_EQ(row[5] + row[6] + row[7], 1.0);
    }
  }
  std::size_t yes = 0;
  for (int y : d.train.labels) yes += y == 1 ? 1 : 0;
  for (int y : d.test.labels) yes += y == 1 ? 1 : 0;
  EXPECT_EQ(yes, 4u);
}

TEST(Bank, CategoryOrderIsFirstAppearance) {
  const std::string text =
      "job;y\n\"b\";yes\n\"a\";no\n\"c\";no\n\"a\";yes\n\"b\";no\n";
  const TrainTest d = parse_bank_marketing(text, 2);
  EXPECT_EQ(d.train.feature_dim(), 3u);
  // Every encoded row is a unit vector over {b, a, c}.
  std::vector<int> seen(3, 0);
  for (const Dataset* part : {&d.train, &d.test}) {
    for (std::size_t r = 0; r < part->size(); ++r) {
      for (std::size_t c = 0; c < 3; ++c) seen[c] += part->features(r, c) == 1.0;
    }
  }
  EXPECT_EQ(seen, (std::vector<int>{2, 2, 1}));
}

TEST(Bank, SameSeedSameMembership) {
  const TrainTest a = parse_bank_marketing(kBankSample, 9);
  const TrainTest b = parse_bank_marketing(kBankSample, 9);
  EXPECT_EQ(a.train.features, b.train.features);
  EXPECT_EQ(a.test.labels, b.test.labels);
}

TEST(Bank, MissingLabelColumnIsFormatError) {
  EXPECT_THROW(parse_bank_marketing("age;job\n1;\"a\"\n", 1), FormatError);
}

TEST(Bank, BadNumericCellNamesTheRow) {
  const std::string text = "age;y\n30;no\n31;yes\nabc;no\n";
  try {
    parse_bank_marketing(text, 1);
    FAIL() << "expected a format error";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos) << e.what();
  }
}

TEST(Bank, BadLabelIsFormatError) {
  EXPECT_THROW(parse_bank_marketing("age;y\n30;maybe\n", 1), FormatError);
}

TEST(Bank, FileLoaderMatchesParserAndMissingFileIsDataError) {
  const fs::path dir = scratch_dir("bank");
  {
    std::ofstream(dir / "bank.csv") << kBankSample;
  }
  const TrainTest a = load_bank_marketing(dir / "bank.csv", 4);
  const TrainTest b = parse_bank_marketing(kBankSample, 4);
  EXPECT_EQ(a.train.features, b.train.features);
  EXPECT_THROW(load_bank_marketing(dir / "absent.csv", 4), DataError);
  fs::remove_all(dir);
}

TEST(Bank, PublishedFileHasAllRows) {
  const fs::path path = fs::path(data_root()) / "bank-full.csv";
  if (data_root().empty() || !fs::exists(path)) {
    GTEST_SKIP() << "bank-full.csv not present under SPLITGUARD_DATA_ROOT";
  }
  const TrainTest d = load_bank_marketing(path, 0);
  EXPECT_EQ(d.train.size() + d.test.size(), 45211u);
}

TEST(VerticalSplit, EvenDivision) {
  EXPECT_EQ(vertical_split(12, 4).widths(), (std::vector<std::size_t>{3, 3, 3, 3}));
}

TEST(VerticalSplit, RemainderGoesToLowestClients) {
  EXPECT_EQ(vertical_split(10, 4).widths(), (std::vector<std::size_t>{3, 3, 2, 2}));
}

TEST(VerticalSplit, SlicesReassembleTheMatrix) {
  const Dataset d = generate_synthetic(2, 3, 10, 1.0, 5);
  const VerticalPartition p = vertical_split(d, 4);
  Matrix rebuilt(d.size(), d.feature_dim());
  for (std::size_t i = 0; i < p.client_count(); ++i) {
    const Matrix slice = p.client_features(d.features, i);
    for (std::size_t r = 0; r < slice.rows(); ++r) {
      for (std::size_t c = 0; c < slice.cols(); ++c) {
        rebuilt(r, p.range(i).begin + c) = slice(r, c);
      }
    }
  }
  EXPECT_EQ(rebuilt, d.features);
}

TEST(VerticalSplit, TooManyClientsIsConfigError) {
  EXPECT_THROW(vertical_split(3, 4), ConfigError);
  EXPECT_THROW(vertical_split(8, 1), ConfigError);
}

TEST(VerticalSplit, DisjointAndCoveringForRandomPairs) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> clients_dist(2, 12);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t clients = clients_dist(rng);
    const std::size_t dim =
        std::uniform_int_distribution<std::size_t>(clients, 300)(rng);
    const VerticalPartition p = vertical_split(dim, clients);
    ASSERT_EQ(p.client_count(), clients);
    std::vector<int> hits(dim, 0);
    std::size_t max_w = 0;
    std::size_t min_w = dim;
    for (std::size_t i = 0; i < clients; ++i) {
      const auto& r = p.range(i);
      for (std::size_t c = r.begin; c < r.end; ++c) ++hits[c];
      if (i > 0) {
        EXPECT_EQ(p.range(i - 1).end, r.begin);
        EXPECT_LE(r.width(), p.range(i - 1).width());
      }
      max_w = std::max(max_w, r.width());
      min_w = std::min(min_w, r.width());
    }
    for (int h : hits) ASSERT_EQ(h, 1);
    EXPECT_LE(max_w - min_w, 1u);
  }
}

TEST(VerticalPartitionRanges, RejectsGapsAndOverlaps) {
  EXPECT_NO_THROW(VerticalPartition({{0, 2}, {2, 5}}, 5));
  EXPECT_THROW(VerticalPartition({{0, 2}, {3, 5}}, 5), ConfigError);
  EXPECT_THROW(VerticalPartition({{0, 3}, {2, 5}}, 5), ConfigError);
  EXPECT_THROW(VerticalPartition({{0, 2}, {2, 4}}, 5), ConfigError);
}

TEST(DatasetValidate, RejectsOutOfRangeLabels) {
  Dataset d = generate_synthetic(2, 2, 2, 0.1, 1);
  EXPECT_NO_THROW(validate(d));
  d.labels[0] = 2;
  EXPECT_THROW(validate(d), DataError);
  d.labels.pop_back();
  EXPECT_THROW(validate(d), DataError);
}

}  // namespace
}  // namespace splitguard
