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

#include "splitguard/tensor.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "splitguard/errors.h"

namespace splitguard {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows * cols) {
    throw ConfigError("matrix of " + std::to_string(rows) + "x" +
                      std::to_string(cols) + " given " +
                      std::to_string(values_.size()) + " values");
  }
}

Matrix Matrix::from_rows(
    std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t n = rows.size();
  const std::size_t c = n == 0 ? 0 : rows.begin()->size();
  std::vector<double> values;
  values.reserve(n * c);
  for (const auto& r : rows) {
    if (r.size() != c) throw ConfigError("ragged matrix literal");
    values.insert(values.end(), r.begin(), r.end());
  }
  return Matrix(n, c, std::move(values));
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ConfigError("matmul: inner dimensions " + std::to_string(a.cols()) +
                      " and " + std::to_string(b.rows()) + " differ");
  }
  Matrix out(a.rows(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double* o = out.row(r).data();
    const double* x = a.row(r).data();
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double s = x[k];
      if (s == 0.0) continue;
      const double* w = b.row(k).data();
      for (std::size_t j = 0; j < n; ++j) o[j] += s * w[j];
    }
  }
  return out;
}

Matrix matmul_transpose_lhs(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw ConfigError("matmul_transpose_lhs: row counts differ");
  }
  Matrix out(a.cols(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const double* x = a.row(r).data();
    const double* g = b.row(r).data();
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double s = x[i];
      if (s == 0.0) continue;
      double* o = out.row(i).data();
      for (std::size_t j = 0; j < n; ++j) o[j] += s * g[j];
    }
  }
  return out;
}

Matrix matmul_transpose_rhs(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw ConfigError("matmul_transpose_rhs: column counts differ");
  }
  Matrix out(a.rows(), b.rows());
  const std::size_t n = a.cols();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const double* x = a.row(r).data();
    double* o = out.row(r).data();
    for (std::size_t i = 0; i < b.rows(); ++i) {
      const double* w = b.row(i).data();
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += x[j] * w[j];
      o[i] = acc;
    }
  }
  return out;
}

Matrix gather_rows(const Matrix& m, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= m.rows()) throw ConfigError("gather_rows: index out of range");
    std::copy_n(m.row(rows[i]).begin(), m.cols(), out.row(i).begin());
  }
  return out;
}

Matrix slice_columns(const Matrix& m, std::size_t begin, std::size_t end) {
  if (begin > end || end > m.cols()) {
    throw ConfigError("slice_columns: range out of bounds");
  }
  Matrix out(m.rows(), end - begin);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto src = m.row(r);
    std::copy(src.begin() + begin, src.begin() + end, out.row(r).begin());
  }
  return out;
}

std::vector<int> argmax_rows(const Matrix& m) {
  std::vector<int> out(m.rows(), 0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    out[r] = static_cast<int>(std::max_element(row.begin(), row.end()) -
                              row.begin());
  }
  return out;
}

}  // namespace splitguard
