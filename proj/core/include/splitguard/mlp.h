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
#include <span>
#include <vector>

#include "splitguard/tensor.h"

namespace splitguard {

enum class Activation { kRelu, kIdentity, kSoftmax };

enum class LossKind { kCrossEntropy, kSquaredError };

// Fully connected layer; weight is (input width x output width).
struct Layer {
  Matrix weight;
  std::vector<double> bias;
  Activation activation = Activation::kIdentity;

  std::size_t input_width() const { return weight.rows(); }
  std::size_t output_width() const { return weight.cols(); }

  friend bool operator==(const Layer&, const Layer&) = default;
};

struct Mlp {
  std::vector<Layer> layers;
  std::uint64_t seed = 0;

  std::size_t input_width() const;
  std::size_t output_width() const;
  std::size_t parameter_count() const;

  friend bool operator==(const Mlp&, const Mlp&) = default;
};

// Builds a network with widths[0] inputs and widths.back() outputs. Weights
// are drawn uniformly from +-sqrt(6 / (fan_in + fan_out)); biases start at 0.
Mlp make_mlp(std::span<const std::size_t> widths, Activation hidden,
             Activation output, std::uint64_t seed);

// Checks width chaining and softmax placement. Throws ConfigError.
void validate(const Mlp& model);

// Intermediates retained by mlp_forward for the backward pass.
struct Tape {
  std::vector<Matrix> layer_inputs;
  std::vector<Matrix> pre_activations;
};

struct ForwardResult {
  Matrix output;
  Tape tape;
};

ForwardResult mlp_forward(const Mlp& model, const Matrix& inputs);
// Forward pass without a tape.
Matrix mlp_predict(const Mlp& model, const Matrix& inputs);

struct LayerGradient {
  Matrix weight;
  std::vector<double> bias;
};

struct Gradients {
  std::vector<LayerGradient> layers;
  Matrix inputs;
};

// Where an upstream gradient is taken: after the final activation, or before
// it (used when the loss is fused with a softmax output).
enum class GradientAt { kOutput, kPreActivation };

Gradients mlp_backward(const Mlp& model, const Tape& tape,
                       const Matrix& upstream,
                       GradientAt at = GradientAt::kOutput);

// Loss value and its gradient with respect to the final pre-activation.
struct HeadGradient {
  double loss = 0.0;
  Matrix gradient;
};

// Cross-entropy against softmax probabilities. Row r contributes with weight
// row_weights[r] (all ones when empty); the sum is divided by normalizer
// (row count when <= 0).
HeadGradient cross_entropy_head(const Matrix& probabilities,
                                std::span<const int> labels,
                                std::span<const double> row_weights = {},
                                double normalizer = 0.0);

// Mean over rows of the summed squared error, for an identity output layer.
HeadGradient squared_error_head(const Matrix& outputs, const Matrix& targets);

struct LossAndGradients {
  double loss = 0.0;
  Gradients gradients;
};

// Convenience wrapper: cross-entropy needs a softmax output layer and class
// labels; squared-error needs an identity output layer and one target column
// per output.
LossAndGradients mlp_backward(const Mlp& model, const Tape& tape,
                              const Matrix& outputs,
                              std::span<const int> labels, LossKind loss);
LossAndGradients mlp_backward(const Mlp& model, const Tape& tape,
                              const Matrix& outputs, const Matrix& targets,
                              LossKind loss);

// w <- w - learning_rate * g for every parameter. Throws TrainingError on a
// non-finite gradient and ConfigError on shape mismatch.
Mlp sgd_update(Mlp model, const Gradients& gradients, double learning_rate);
void sgd_update_in_place(Mlp& model, const Gradients& gradients,
                         double learning_rate);

}  // namespace splitguard
