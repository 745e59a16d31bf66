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

// JSON mapping of configs, shared by the config and report encoders. Not
// installed; the public API exchanges JSON as text.

#include <cstdint>

#include "json.hpp"
#include "splitguard/config.h"
#include "splitguard/random.h"

namespace splitguard {

std::uint64_t derive_attack_seed(std::uint64_t seed);
nlohmann::ordered_json config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::ordered_json& j);

}  // namespace splitguard
