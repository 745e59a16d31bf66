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

#include <cstdint>
#include <random>

namespace splitguard {

using Rng = std::mt19937_64;

// Mixes a base seed with a stream tag so that independent consumers (data
// generation, batch order, attack sampling, ...) draw from unrelated streams.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag,
                                    std::uint64_t sub) {
  return derive_seed(derive_seed(seed, tag), sub);
}

// Stream tags.
namespace stream {
inline constexpr std::uint64_t kDataCenters = 1;
inline constexpr std::uint64_t kDataSamples = 2;
inline constexpr std::uint64_t kBankSplit = 3;
inline constexpr std::uint64_t kModelInit = 4;
inline constexpr std::uint64_t kBatchOrder = 5;
inline constexpr std::uint64_t kPoisonSelect = 6;
inline constexpr std::uint64_t kTrigger = 7;
inline constexpr std::uint64_t kSwap = 8;
inline constexpr std::uint64_t kDpNoise = 9;
inline constexpr std::uint64_t kTestTrigger = 10;
}  // namespace stream

}  // namespace splitguard
