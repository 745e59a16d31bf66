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

#include "splitguard/mlp.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "splitguard/errors.h"
#include "splitguard/random.h"

namespace splitguard {
namespace {

void apply_activation(Activation activation, Matrix& m) {
  switch (activation) {
    case Activation::kIdentity:
      return;
    case Activation::kRelu:
      for (double& v : m.values()) v = v > 0.0 ? v : 0.0;
      return;
    case Activation::kSoftmax:
      for (std::size_t r = 0; r < m.rows(); ++r) {
        auto row = m.row(r);
        const double peak = *std::max_element(row.begin(), row.end());
        double total = 0.0;
        for (double& v : row) {
          v = std::exp(v - peak);
          total += v;
        }
        for (double& v : row) v /= total;
      }
      return;
  }
}

Matrix affine(const Layer& layer, const Matrix& inputs) {
  Matrix out = matmul(inputs, layer.weight);
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] += layer.bias[j];
  }
  return out;
}

void check_input(const Mlp& model, const Matrix& inputs) {
  if (model.layers.empty()) throw ConfigError("model has no layers");
  if (inputs.cols() != model.input_width()) {
    throw ConfigError("input width " + std::to_string(inputs.cols()) +
                      " does not match model input width " +
                      std::to_string(model.input_width()));
  }
}

}  // namespace

std::size_t Mlp::input_width() const {
  return layers.empty() ? 0 : layers.front().input_width();
}

std::size_t Mlp::output_width() const {
  return layers.empty() ? 0 : layers.back().output_width();
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

Mlp make_mlp(std::span<const std::size_t> widths, Activation hidden,
             Activation output, std::uint64_t seed) {
  if (widths.size() < 2) throw ConfigError("an MLP needs at least two widths");
  Mlp model;
  model.seed = seed;
  Rng rng(seed);
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    const std::size_t fan_in = widths[i];
    const std::size_t fan_out = widths[i + 1];
    if (fan_in == 0 || fan_out == 0) throw ConfigError("zero layer width");
    const double limit =
        std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Layer layer;
    layer.weight = Matrix(fan_in, fan_out);
    for (double& w : layer.weight.values()) w = dist(rng);
    layer.bias.assign(fan_out, 0.0);
    layer.activation = i + 2 == widths.size() ? output : hidden;
    model.layers.push_back(std::move(layer));
  }
  validate(model);
  return model;
}

void validate(const Mlp& model) {
  if (model.layers.empty()) throw ConfigError("model has no layers");
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    const Layer& l = model.layers[i];
    if (l.bias.size() != l.output_width()) {
      throw ConfigError("layer " + std::to_string(i) +
                        ": bias length does not match output width");
    }
    if (i + 1 < model.layers.size()) {
      if (l.activation == Activation::kSoftmax) {
        throw ConfigError("softmax is only allowed on the final layer");
      }
      if (l.output_width() != model.layers[i + 1].input_width()) {
        throw ConfigError("layer " + std::to_string(i) +
                          " output width does not chain into layer " +
                          std::to_string(i + 1));
      }
    }
  }
}

ForwardResult mlp_forward(const Mlp& model, const Matrix& inputs) {
  check_input(model, inputs);
  ForwardResult result;
  result.tape.layer_inputs.reserve(model.layers.size());
  result.tape.pre_activations.reserve(model.layers.size());
  Matrix current = inputs;
  for (const Layer& layer : model.layers) {
    Matrix pre = affine(layer, current);
    result.tape.layer_inputs.push_back(std::move(current));
    current = pre;
    apply_activation(layer.activation, current);
    result.tape.pre_activations.push_back(std::move(pre));
  }
  result.output = std::move(current);
  return result;
}

Matrix mlp_predict(const Mlp& model, const Matrix& inputs) {
  check_input(model, inputs);
  Matrix current = inputs;
  for (const Layer& layer : model.layers) {
    current = affine(layer, current);
    apply_activation(layer.activation, current);
  }
  return current;
}

Gradients mlp_backward(const Mlp& model, const Tape& tape,
                       const Matrix& upstream, GradientAt at) {
  const std::size_t depth = model.layers.size();
  if (tape.layer_inputs.size() != depth || tape.pre_activations.size() != depth) {
    throw ConfigError("tape does not match model depth");
  }
  const Matrix& last_pre = tape.pre_activations.back();
  if (upstream.rows() != last_pre.rows() || upstream.cols() != last_pre.cols()) {
    throw ConfigError("upstream gradient shape does not match model output");
  }

  Gradients grads;
  grads.layers.resize(depth);
  Matrix g = upstream;
  for (std::size_t l = depth; l-- > 0;) {
    const Layer& layer = model.layers[l];
    const Matrix& pre = tape.pre_activations[l];
    const bool fused = l + 1 == depth && at == GradientAt::kPreActivation;
    if (!fused) {
      switch (layer.activation) {
        case Activation::kIdentity:
          break;
        case Activation::kRelu: {
          auto gv = g.values();
          auto pv = pre.values();
          for (std::size_t i = 0; i < gv.size(); ++i) {
            if (!(pv[i] > 0.0)) gv[i] = 0.0;
          }
          break;
        }
        case Activation::kSoftmax: {
          Matrix p = pre;
          apply_activation(Activation::kSoftmax, p);
          for (std::size_t r = 0; r < g.rows(); ++r) {
            auto gr = g.row(r);
            auto pr = p.row(r);
            double dot = 0.0;
            for (std::size_t j = 0; j < gr.size(); ++j) dot += gr[j] * pr[j];
            for (std::size_t j = 0; j < gr.size(); ++j) {
              gr[j] = pr[j] * (gr[j] - dot);
            }
          }
          break;
        }
      }
    }
    LayerGradient& lg = grads.layers[l];
    lg.weight = matmul_transpose_lhs(tape.layer_inputs[l], g);
    lg.bias.assign(layer.output_width(), 0.0);
    for (std::size_t r = 0; r < g.rows(); ++r) {
      const auto gr = g.row(r);
      for (std::size_t j = 0; j < gr.size(); ++j) lg.bias[j] += gr[j];
    }
    g = matmul_transpose_rhs(g, layer.weight);
  }
  grads.inputs = std::move(g);
  return grads;
}

HeadGradient cross_entropy_head(const Matrix& probabilities,
                                std::span<const int> labels,
                                std::span<const double> row_weights,
                                double normalizer) {
  const std::size_t n = probabilities.rows();
  if (labels.size() != n) throw ConfigError("label count does not match rows");
  if (!row_weights.empty() && row_weights.size() != n) {
    throw ConfigError("row weight count does not match rows");
  }
  const double norm = normalizer > 0.0 ? normalizer : static_cast<double>(n);
  HeadGradient head;
  head.gradient = Matrix(n, probabilities.cols());
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const double w = row_weights.empty() ? 1.0 : row_weights[r];
    if (w == 0.0) continue;
    const int y = labels[r];
    if (y < 0 || static_cast<std::size_t>(y) >= probabilities.cols()) {
      throw ConfigError("label " + std::to_string(y) + " out of range");
    }
    const auto p = probabilities.row(r);
    auto gr = head.gradient.row(r);
    total += -w * std::log(std::max(p[y], std::numeric_limits<double>::min()));
    for (std::size_t j = 0; j < p.size(); ++j) {
      gr[j] = w * (p[j] - (static_cast<int>(j) == y ? 1.0 : 0.0)) / norm;
    }
  }
  head.loss = total / norm;
  return head;
}

HeadGradient squared_error_head(const Matrix& outputs, const Matrix& targets) {
  if (outputs.rows() != targets.rows() || outputs.cols() != targets.cols()) {
    throw ConfigError("target shape does not match output shape");
  }
  const double norm = static_cast<double>(std::max<std::size_t>(outputs.rows(), 1));
  HeadGradient head;
  head.gradient = Matrix(outputs.rows(), outputs.cols());
  double total = 0.0;
  auto o = outputs.values();
  auto t = targets.values();
  auto g = head.gradient.values();
  for (std::size_t i = 0; i < o.size(); ++i) {
    const double diff = o[i] - t[i];
    total += diff * diff;
    g[i] = 2.0 * diff / norm;
  }
  head.loss = total / norm;
  return head;
}

LossAndGradients mlp_backward(const Mlp& model, const Tape& tape,
                              const Matrix& outputs,
                              std::span<const int> labels, LossKind loss) {
  if (loss != LossKind::kCrossEntropy) {
    throw ConfigError("class labels require the cross-entropy loss");
  }
  if (model.layers.empty() ||
      model.layers.back().activation != Activation::kSoftmax) {
    throw ConfigError("cross-entropy requires a softmax output layer");
  }
  HeadGradient head = cross_entropy_head(outputs, labels);
  return {head.loss, mlp_backward(model, tape, head.gradient,
                                  GradientAt::kPreActivation)};
}

LossAndGradients mlp_backward(const Mlp& model, const Tape& tape,
                              const Matrix& outputs, const Matrix& targets,
                              LossKind loss) {
  if (loss != LossKind::kSquaredError) {
    throw ConfigError("real-valued targets require the squared-error loss");
  }
  if (model.layers.empty() ||
      model.layers.back().activation != Activation::kIdentity) {
    throw ConfigError("squared-error requires an identity output layer");
  }
  HeadGradient head = squared_error_head(outputs, targets);
  return {head.loss, mlp_backward(model, tape, head.gradient,
                                  GradientAt::kPreActivation)};
}

void sgd_update_in_place(Mlp& model, const Gradients& gradients,
                         double learning_rate) {
  if (gradients.layers.size() != model.layers.size()) {
    throw ConfigError("gradient depth does not match model depth");
  }
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const LayerGradient& g = gradients.layers[l];
    const Layer& layer = model.layers[l];
    if (g.weight.rows() != layer.weight.rows() ||
        g.weight.cols() != layer.weight.cols() ||
        g.bias.size() != layer.bias.size()) {
      throw ConfigError("gradient shape mismatch at layer " + std::to_string(l));
    }
    const bool finite =
        g.weight.all_finite() &&
        std::all_of(g.bias.begin(), g.bias.end(),
                    [](double v) { return std::isfinite(v); });
    if (!finite) {
      throw TrainingError("non-finite gradient at layer " + std::to_string(l) +
                          "; training aborted");
    }
  }
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    Layer& layer = model.layers[l];
    const LayerGradient& g = gradients.layers[l];
    auto w = layer.weight.values();
    auto gw = g.weight.values();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= learning_rate * gw[i];
    for (std::size_t j = 0; j < layer.bias.size(); ++j) {
      layer.bias[j] -= learning_rate * g.bias[j];
    }
  }
}

Mlp sgd_update(Mlp model, const Gradients& gradients, double learning_rate) {
  sgd_update_in_place(model, gradients, learning_rate);
  return model;
}

}  // namespace splitguard
