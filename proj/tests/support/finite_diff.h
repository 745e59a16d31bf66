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

// Central finite differences over every parameter of a small network.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "splitguard/mlp.h"

namespace splitguard::testing {

struct GradCheckCase {
  Mlp model;
  Matrix inputs;
  std::vector<int> labels;  // cross-entropy when non-empty
  Matrix targets;           // squared error otherwise
};

inline double case_loss(const GradCheckCase& c, const Mlp& model) {
  const Matrix out = mlp_predict(model, c.inputs);
  if (!c.labels.empty()) return cross_entropy_head(out, c.labels).loss;
  return squared_error_head(out, c.targets).loss;
}

// Random network with 1..4 layers, widths <= 16, whose relu pre-activations
// stay at least 1e-3 away from zero on the drawn inputs.
inline GradCheckCase random_grad_case(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> depth_dist(1, 4);
  std::uniform_int_distribution<std::size_t> width_dist(1, 16);
  std::uniform_int_distribution<std::size_t> rows_dist(1, 6);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::bernoulli_distribution use_ce(0.5);
  while (true) {
    const std::size_t depth = depth_dist(rng);
    std::vector<std::size_t> widths{width_dist(rng)};
    for (std::size_t i = 0; i < depth; ++i) widths.push_back(width_dist(rng));
    const bool ce = use_ce(rng);
    if (ce) widths.back() = std::max<std::size_t>(widths.back(), 2);
    GradCheckCase c;
    c.model = make_mlp(widths, Activation::kRelu,
                       ce ? Activation::kSoftmax : Activation::kIdentity, rng());
    for (auto& layer : c.model.layers) {
      for (double& b : layer.bias) b = 0.1 * unit(rng);
    }
    const std::size_t rows = rows_dist(rng);
    c.inputs = Matrix(rows, widths.front());
    for (double& v : c.inputs.values()) v = unit(rng);
    if (ce) {
      std::uniform_int_distribution<int> label(0, static_cast<int>(widths.back()) - 1);
      for (std::size_t r = 0; r < rows; ++r) c.labels.push_back(label(rng));
    } else {
      c.targets = Matrix(rows, widths.back());
      for (double& v : c.targets.values()) v = unit(rng);
    }
    const auto fwd = mlp_forward(c.model, c.inputs);
    bool near_kink = false;
    for (std::size_t l = 0; l + 1 < fwd.tape.pre_activations.size(); ++l) {
      for (double v : fwd.tape.pre_activations[l].values()) {
        near_kink = near_kink || std::abs(v) < 1e-3;
      }
    }
    if (!near_kink) return c;
  }
}

struct GradCheckResult {
  double worst_relative = 0.0;
  std::size_t checked = 0;
  std::size_t failures = 0;
};

inline GradCheckResult check_gradients(const GradCheckCase& c,
                                       double step = 1e-4,
                                       double rel_tol = 1e-4,
                                       double abs_floor = 1e-6) {
  const auto fwd = mlp_forward(c.model, c.inputs);
  const Gradients analytic =
      c.labels.empty()
          ? mlp_backward(c.model, fwd.tape, fwd.output, c.targets,
                         LossKind::kSquaredError)
                .gradients
          : mlp_backward(c.model, fwd.tape, fwd.output, c.labels,
                         LossKind::kCrossEntropy)
                .gradients;
  GradCheckResult result;
  for (std::size_t l = 0; l < c.model.layers.size(); ++l) {
    const std::size_t nw = c.model.layers[l].weight.size();
    const std::size_t nb = c.model.layers[l].bias.size();
    for (std::size_t i = 0; i < nw + nb; ++i) {
      Mlp plus = c.model;
      Mlp minus = c.model;
      double analytic_value;
      if (i < nw) {
        plus.layers[l].weight.values()[i] += step;
        minus.layers[l].weight.values()[i] -= step;
        analytic_value = analytic.layers[l].weight.values()[i];
      } else {
        plus.layers[l].bias[i - nw] += step;
        minus.layers[l].bias[i - nw] -= step;
        analytic_value = analytic.layers[l].bias[i - nw];
      }
      const double numeric =
          (case_loss(c, plus) - case_loss(c, minus)) / (2.0 * step);
      const double diff = std::abs(numeric - analytic_value);
      const double scale = std::max(std::abs(numeric), std::abs(analytic_value));
      ++result.checked;
      // The floor only guards the denominator for near-zero gradients.
      const double rel = diff / std::max(scale, abs_floor);
      result.worst_relative = std::max(result.worst_relative, rel);
      if (rel > rel_tol) ++result.failures;
    }
  }
  return result;
}

}  // namespace splitguard::testing
