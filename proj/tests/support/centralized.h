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

// Centralised reference for split training: the bottom models are fused into
// one block-diagonal network stacked under the top model, trained on the
// unsplit feature matrix with off-block gradients masked out. With the same
// initial weights and batch order it must reproduce the split run's losses.

#include <cstddef>
#include <vector>

#include "splitguard/data.h"
#include "splitguard/mlp.h"
#include "splitguard/protocol.h"

namespace splitguard::testing {

struct ComposedNetwork {
  Mlp model;
  // Per fused layer, the (row, col) block each client owns.
  std::vector<std::vector<std::pair<ColumnRange, ColumnRange>>> blocks;
  std::size_t fused_layers = 0;
};

inline ComposedNetwork compose(const SplitSystem& system) {
  ComposedNetwork net;
  const auto& bottoms = system.bottom_models;
  net.fused_layers = bottoms.front().layers.size();
  for (std::size_t l = 0; l < net.fused_layers; ++l) {
    std::size_t in = 0;
    std::size_t out = 0;
    for (const auto& b : bottoms) {
      in += b.layers[l].input_width();
      out += b.layers[l].output_width();
    }
    Layer fused;
    fused.weight = Matrix(in, out);
    fused.bias.assign(out, 0.0);
    fused.activation = bottoms.front().layers[l].activation;
    std::vector<std::pair<ColumnRange, ColumnRange>> layer_blocks;
    std::size_t r0 = 0;
    std::size_t c0 = 0;
    for (const auto& b : bottoms) {
      const Layer& src = b.layers[l];
      for (std::size_t i = 0; i < src.input_width(); ++i) {
        for (std::size_t j = 0; j < src.output_width(); ++j) {
          fused.weight(r0 + i, c0 + j) = src.weight(i, j);
        }
      }
      for (std::size_t j = 0; j < src.output_width(); ++j) {
        fused.bias[c0 + j] = src.bias[j];
      }
      layer_blocks.push_back({{r0, r0 + src.input_width()},
                              {c0, c0 + src.output_width()}});
      r0 += src.input_width();
      c0 += src.output_width();
    }
    net.model.layers.push_back(std::move(fused));
    net.blocks.push_back(std::move(layer_blocks));
  }
  for (const auto& layer : system.top_model.layers) {
    net.model.layers.push_back(layer);
  }
  return net;
}

// Trains the composed network for `rounds` rounds and returns every batch
// loss in order.
inline std::vector<double> train_centralized(ComposedNetwork& net,
                                             const Dataset& train,
                                             std::size_t rounds,
                                             std::size_t batch_size,
                                             double learning_rate,
                                             std::uint64_t seed) {
  std::vector<double> losses;
  for (std::size_t round = 1; round <= rounds; ++round) {
    for (const auto& rows : batch_order(train.size(), batch_size, seed, round)) {
      const Matrix x = gather_rows(train.features, rows);
      std::vector<int> y;
      for (std::size_t r : rows) y.push_back(train.labels[r]);
      const auto fwd = mlp_forward(net.model, x);
      const auto head = cross_entropy_head(fwd.output, y);
      auto grads = mlp_backward(net.model, fwd.tape, head.gradient,
                                GradientAt::kPreActivation);
      for (std::size_t l = 0; l < net.fused_layers; ++l) {
        Matrix& g = grads.layers[l].weight;
        Matrix masked(g.rows(), g.cols());
        for (const auto& [rr, cc] : net.blocks[l]) {
          for (std::size_t i = rr.begin; i < rr.end; ++i) {
            for (std::size_t j = cc.begin; j < cc.end; ++j) masked(i, j) = g(i, j);
          }
        }
        g = std::move(masked);
      }
      sgd_update_in_place(net.model, grads, learning_rate);
      losses.push_back(head.loss);
    }
  }
  return losses;
}

}  // namespace splitguard::testing
