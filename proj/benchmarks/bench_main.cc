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


#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "splitguard/data.h"
#include "splitguard/defense.h"
#include "splitguard/mlp.h"
#include "splitguard/protocol.h"

namespace splitguard {
namespace {

Matrix gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (double& v : m.values()) v = normal(rng);
  return m;
}

std::vector<int> cyclic(std::size_t n, int classes) {
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<int>(i % classes);
  return y;
}

// Batch rows x embedding width, 10 classes.
void BM_ProtoguardFilter(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto d = static_cast<std::size_t>(state.range(1));
  const Matrix e = gaussian(n, d, 1);
  const auto y = cyclic(n, 10);
  for (auto _ : state) {
    benchmark::DoNotOptimize(protoguard_filter(e, y, 0.5));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n));
}
BENCHMARK(BM_ProtoguardFilter)->Args({1000, 64})->Args({5000, 64})->Args({5000, 256});

void BM_ConformalPValues(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix s = gaussian(n, 1, 2);
  const auto y = cyclic(n, 10);
  for (auto _ : state) {
    benchmark::DoNotOptimize(conformal_p_values(s.values(), y));
  }
}
BENCHMARK(BM_ConformalPValues)->Arg(5000)->Arg(50000);

void BM_MlpForwardBackward(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const auto width = static_cast<std::size_t>(state.range(1));
  const Mlp m = make_mlp(std::vector<std::size_t>{64, width, width, 10},
                         Activation::kRelu, Activation::kSoftmax, 3);
  const Matrix x = gaussian(rows, 64, 4);
  const auto y = cyclic(rows, 10);
  for (auto _ : state) {
    const auto fwd = mlp_forward(m, x);
    benchmark::DoNotOptimize(
        mlp_backward(m, fwd.tape, fwd.output, y, LossKind::kCrossEntropy));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(rows));
}
BENCHMARK(BM_MlpForwardBackward)->Args({1000, 64})->Args({1000, 128})->Args({5000, 128});

// One training round of the split system on 5000 synthetic samples.
void BM_TrainRound(benchmark::State& state) {
  const auto width = static_cast<std::size_t>(state.range(0));
  const bool defended = state.range(1) != 0;
  const Dataset train = generate_synthetic(10, 500, 32, 5.0, 5, Split::kTrain, 10.0);
  TrainingOptions o;
  o.batch_size = 1000;
  o.attack.kind = AttackKind::kEmbeddingAdditive;
  o.attack.start_round = 1;
  o.trigger = make_trigger_pattern(16, o.attack);
  o.defense.kind = defended ? DefenseKind::kProtoguard : DefenseKind::kNone;
  SplitSystem system =
      make_split_system(vertical_split(train, 4), 10,
                        ModelShape{{width, width, width}, 16, {width, width}}, 6, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(train_round(system, train, o));
  }
  state.SetItemsProcessed(state.iterations() * 5000);
}
BENCHMARK(BM_TrainRound)->Args({64, 0})->Args({64, 1})->Args({128, 1})
    ->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace splitguard

BENCHMARK_MAIN();
