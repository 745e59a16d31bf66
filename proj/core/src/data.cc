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

#include "splitguard/data.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iterator>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>

#include "splitguard/errors.h"
#include "splitguard/random.h"

namespace splitguard {
namespace {

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Dataset concat(std::vector<Dataset> parts, Split split) {
  std::size_t rows = 0;
  for (const auto& p : parts) rows += p.size();
  const std::size_t cols = parts.empty() ? 0 : parts.front().feature_dim();
  Dataset out;
  out.split = split;
  out.class_count = parts.empty() ? 0 : parts.front().class_count;
  std::vector<double> values;
  values.reserve(rows * cols);
  for (auto& p : parts) {
    auto v = p.features.values();
    values.insert(values.end(), v.begin(), v.end());
    out.labels.insert(out.labels.end(), p.labels.begin(), p.labels.end());
  }
  out.features = Matrix(rows, cols, std::move(values));
  return out;
}

struct Cell {
  std::string text;
  bool quoted = false;
};

std::vector<Cell> split_line(std::string_view line, std::size_t line_no) {
  std::vector<Cell> cells;
  Cell cell;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.text.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        cell.text.push_back(ch);
      }
    } else if (ch == '"') {
      in_quotes = true;
      cell.quoted = true;
    } else if (ch == ';') {
      cells.push_back(std::move(cell));
      cell = Cell{};
    } else if (ch != '\r') {
      cell.text.push_back(ch);
    }
  }
  if (in_quotes) {
    throw FormatError("unterminated quote on line " + std::to_string(line_no));
  }
  cells.push_back(std::move(cell));
  return cells;
}

std::optional<double> parse_number(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

}  // namespace

void validate(const Dataset& dataset) {
  if (dataset.features.rows() != dataset.labels.size()) {
    throw DataError("feature rows and label count differ");
  }
  for (int y : dataset.labels) {
    if (y < 0 || y >= dataset.class_count) {
      throw DataError("label " + std::to_string(y) + " outside [0, " +
                      std::to_string(dataset.class_count) + ")");
    }
  }
}

Dataset generate_synthetic(int class_count, std::size_t samples_per_class,
                           std::size_t feature_dim, double cluster_spread,
                           std::uint64_t seed, Split split,
                           double center_scale) {
  if (class_count <= 0 || samples_per_class == 0 || feature_dim == 0) {
    throw ConfigError("synthetic dataset sizes must be positive");
  }
  if (!(center_scale > 0.0)) throw ConfigError("center_scale must be positive");
  if (!(cluster_spread >= 0.0)) {
    throw ConfigError("cluster_spread must be non-negative");
  }
  Rng center_rng(derive_seed(seed, stream::kDataCenters));
  std::uniform_real_distribution<double> uniform(-center_scale, center_scale);
  Matrix centers(static_cast<std::size_t>(class_count), feature_dim);
  for (double& v : centers.values()) v = uniform(center_rng);

  Rng sample_rng(derive_seed(seed, stream::kDataSamples,
                             split == Split::kTrain ? 0 : 1));
  std::normal_distribution<double> normal(0.0, 1.0);
  Dataset out;
  out.class_count = class_count;
  out.split = split;
  out.features = Matrix(static_cast<std::size_t>(class_count) * samples_per_class,
                        feature_dim);
  out.labels.reserve(out.features.rows());
  std::size_t r = 0;
  for (int c = 0; c < class_count; ++c) {
    const auto center = centers.row(static_cast<std::size_t>(c));
    for (std::size_t i = 0; i < samples_per_class; ++i, ++r) {
      auto row = out.features.row(r);
      for (std::size_t j = 0; j < feature_dim; ++j) {
        row[j] = center[j] + cluster_spread * normal(sample_rng);
      }
      out.labels.push_back(c);
    }
  }
  return out;
}

Dataset parse_cifar10_records(std::span<const unsigned char> bytes,
                              Split split, std::string_view source) {
  const std::string where = source.empty() ? "" : " in " + std::string(source);
  if (bytes.size() % kCifarRecordBytes != 0) {
    throw FormatError("CIFAR-10 data size " + std::to_string(bytes.size()) +
                      " is not a multiple of 3073" + where);
  }
  const std::size_t n = bytes.size() / kCifarRecordBytes;
  Dataset out;
  out.class_count = 10;
  out.split = split;
  out.features = Matrix(n, kCifarPixels);
  out.labels.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    const unsigned char* record = bytes.data() + r * kCifarRecordBytes;
    if (record[0] > 9) {
      throw FormatError("CIFAR-10 record " + std::to_string(r) + where +
                        " has label byte " + std::to_string(record[0]));
    }
    out.labels[r] = record[0];
    auto row = out.features.row(r);
    for (std::size_t j = 0; j < kCifarPixels; ++j) {
      row[j] = static_cast<double>(record[1 + j]) / 255.0;
    }
  }
  return out;
}

TrainTest load_cifar10(const std::filesystem::path& directory) {
  std::vector<Dataset> train_parts;
  for (int i = 1; i <= 5; ++i) {
    const auto path = directory / ("data_batch_" + std::to_string(i) + ".bin");
    const auto bytes = read_file(path);
    train_parts.push_back(
        parse_cifar10_records(bytes, Split::kTrain, path.string()));
  }
  const auto test_path = directory / "test_batch.bin";
  const auto test_bytes = read_file(test_path);
  TrainTest out;
  out.train = concat(std::move(train_parts), Split::kTrain);
  out.test = parse_cifar10_records(test_bytes, Split::kTest, test_path.string());
  return out;
}

TrainTest parse_bank_marketing(std::string_view text, std::uint64_t seed) {
  std::vector<std::vector<Cell>> rows;
  std::vector<Cell> header;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto cells = split_line(line, line_no);
    if (header.empty()) {
      header = std::move(cells);
      continue;
    }
    if (cells.size() != header.size()) {
      throw FormatError("row " + std::to_string(rows.size() + 1) + " has " +
                        std::to_string(cells.size()) + " cells, header has " +
                        std::to_string(header.size()));
    }
    rows.push_back(std::move(cells));
  }
  if (header.empty()) throw FormatError("bank marketing file has no header");
  std::size_t label_col = header.size();
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c].text == "y") label_col = c;
  }
  if (label_col == header.size()) throw FormatError("missing \"y\" column");
  if (rows.empty()) throw FormatError("bank marketing file has no data rows");

  // Column typing from the first data row.
  const std::size_t ncols = header.size();
  std::vector<bool> numeric(ncols, false);
  for (std::size_t c = 0; c < ncols; ++c) {
    if (c == label_col) continue;
    numeric[c] = !rows[0][c].quoted && parse_number(rows[0][c].text).has_value();
  }

  const std::size_t n = rows.size();
  std::vector<int> labels(n);
  std::vector<std::vector<double>> raw_numeric(ncols);
  std::vector<std::vector<int>> category_ids(ncols);
  std::vector<std::unordered_map<std::string, int>> category_maps(ncols);
  for (std::size_t r = 0; r < n; ++r) {
    const std::string& y = rows[r][label_col].text;
    if (y == "yes") {
      labels[r] = 1;
    } else if (y == "no") {
      labels[r] = 0;
    } else {
      throw FormatError("row " + std::to_string(r + 1) + ": label \"" + y +
                        "\" is neither yes nor no");
    }
    for (std::size_t c = 0; c < ncols; ++c) {
      if (c == label_col) continue;
      if (numeric[c]) {
        const auto v = parse_number(rows[r][c].text);
        if (!v || rows[r][c].quoted) {
          throw FormatError("row " + std::to_string(r + 1) + ", column \"" +
                            header[c].text + "\": cannot parse \"" +
                            rows[r][c].text + "\" as a number");
        }
        raw_numeric[c].push_back(*v);
      } else {
        auto& map = category_maps[c];
        const auto [it, inserted] =
            map.emplace(rows[r][c].text, static_cast<int>(map.size()));
        category_ids[c].push_back(it->second);
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, stream::kBankSplit));
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t n_train = n * 4 / 5;

  // Scaling statistics from the train rows only.
  std::vector<double> lo(ncols, 0.0), hi(ncols, 0.0);
  std::size_t width = 0;
  for (std::size_t c = 0; c < ncols; ++c) {
    if (c == label_col) continue;
    if (numeric[c]) {
      const auto& v = raw_numeric[c];
      lo[c] = hi[c] = v[order[0]];
      for (std::size_t i = 0; i < n_train; ++i) {
        lo[c] = std::min(lo[c], v[order[i]]);
        hi[c] = std::max(hi[c], v[order[i]]);
      }
      width += 1;
    } else {
      width += category_maps[c].size();
    }
  }

  auto build = [&](std::size_t first, std::size_t last, Split split) {
    Dataset d;
    d.class_count = 2;
    d.split = split;
    d.features = Matrix(last - first, width);
    for (std::size_t i = first; i < last; ++i) {
      const std::size_t r = order[i];
      auto out = d.features.row(i - first);
      std::size_t offset = 0;
      for (std::size_t c = 0; c < ncols; ++c) {
        if (c == label_col) continue;
        if (numeric[c]) {
          const double span = hi[c] - lo[c];
          const double scaled =
              span > 0.0 ? (raw_numeric[c][r] - lo[c]) / span : 0.0;
          out[offset++] = std::clamp(scaled, 0.0, 1.0);
        } else {
          out[offset + static_cast<std::size_t>(category_ids[c][r])] = 1.0;
          offset += category_maps[c].size();
        }
      }
      d.labels.push_back(labels[r]);
    }
    return d;
  };
  TrainTest out;
  out.train = build(0, n_train, Split::kTrain);
  out.test = build(n_train, n, Split::kTest);
  return out;
}

TrainTest load_bank_marketing(const std::filesystem::path& path,
                              std::uint64_t seed) {
  const auto bytes = read_file(path);
  return parse_bank_marketing(
      std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()),
      seed);
}

VerticalPartition::VerticalPartition(std::vector<ColumnRange> ranges,
                                     std::size_t feature_dim)
    : ranges_(std::move(ranges)), feature_dim_(feature_dim) {
  if (ranges_.empty()) throw ConfigError("partition has no clients");
  std::size_t expected = 0;
  for (std::size_t i = 0; i < ranges_.size(); ++i) {
    const auto& r = ranges_[i];
    if (r.begin != expected || r.end <= r.begin) {
      throw ConfigError("client " + std::to_string(i) +
                        " range is empty, overlapping or leaves a gap");
    }
    expected = r.end;
  }
  if (expected != feature_dim_) {
    throw ConfigError("partition does not cover all " +
                      std::to_string(feature_dim_) + " columns");
  }
}

std::vector<std::size_t> VerticalPartition::widths() const {
  std::vector<std::size_t> w;
  w.reserve(ranges_.size());
  for (const auto& r : ranges_) w.push_back(r.width());
  return w;
}

Matrix VerticalPartition::client_features(const Matrix& features,
                                          std::size_t client) const {
  const auto& r = range(client);
  return slice_columns(features, r.begin, r.end);
}

VerticalPartition vertical_split(std::size_t feature_dim,
                                 std::size_t client_count) {
  if (client_count < 2) throw ConfigError("vertical split needs >= 2 clients");
  if (client_count > feature_dim) {
    throw ConfigError("cannot split " + std::to_string(feature_dim) +
                      " features across " + std::to_string(client_count) +
                      " clients");
  }
  const std::size_t base = feature_dim / client_count;
  const std::size_t extra = feature_dim % client_count;
  std::vector<ColumnRange> ranges;
  std::size_t begin = 0;
  for (std::size_t i = 0; i < client_count; ++i) {
    const std::size_t w = base + (i < extra ? 1 : 0);
    ranges.push_back({begin, begin + w});
    begin += w;
  }
  return VerticalPartition(std::move(ranges), feature_dim);
}

VerticalPartition vertical_split(const Dataset& dataset,
                                 std::size_t client_count) {
  return vertical_split(dataset.feature_dim(), client_count);
}

}  // namespace splitguard
