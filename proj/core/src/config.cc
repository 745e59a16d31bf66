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

#include "splitguard/config.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "splitguard/errors.h"
#include "json_io.h"

namespace splitguard {
namespace {

using json = nlohmann::ordered_json;

void reject_unknown(const json& j, std::string_view where,
                    std::initializer_list<std::string_view> known) {
  if (!j.is_object()) {
    throw ConfigError(std::string(where) + " must be a JSON object");
  }
  for (const auto& [key, value] : j.items()) {
    bool found = false;
    for (auto k : known) found = found || k == key;
    if (!found) {
      throw ConfigError("unknown key \"" + key + "\" in " + std::string(where));
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for \"" + std::string(key) + "\": " + e.what());
  }
}

}  // namespace

std::string_view to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kSynthetic:
      return "synthetic";
    case DatasetKind::kCifar10:
      return "cifar10";
    case DatasetKind::kBank:
      return "bank";
  }
  return "synthetic";
}

DatasetKind parse_dataset_kind(std::string_view tag) {
  for (DatasetKind k :
       {DatasetKind::kSynthetic, DatasetKind::kCifar10, DatasetKind::kBank}) {
    if (to_string(k) == tag) return k;
  }
  throw ConfigError("unknown dataset kind \"" + std::string(tag) + "\"");
}

AttackSpec ExperimentConfig::attack_spec() const {
  AttackSpec spec;
  spec.kind = attack.kind;
  spec.poison_rate = attack.poison_rate;
  spec.trigger_magnitude = attack.trigger_magnitude;
  spec.target_class = attack.target_class;
  spec.start_round = poison_start_round;
  spec.clean_label = attack.clean_label;
  spec.seed = derive_attack_seed(seed);
  return spec;
}

std::string ExperimentConfig::resolved_dump_path() const {
  return dump_path.empty() ? output + ".consistency.tsv" : dump_path;
}

void validate(const ExperimentConfig& c) {
  if (c.clients < 2) throw ConfigError("clients must be >= 2");
  if (c.malicious_client >= c.clients) {
    throw ConfigError("malicious_client must be < clients");
  }
  if (!(c.learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (c.batch_size == 0) throw ConfigError("batch_size must be > 0");
  if (c.model.embedding_width == 0) {
    throw ConfigError("model.embedding_width must be > 0");
  }
  for (auto w : c.model.bottom_hidden) {
    if (w == 0) throw ConfigError("model.bottom_hidden widths must be > 0");
  }
  for (auto w : c.model.top_hidden) {
    if (w == 0) throw ConfigError("model.top_hidden widths must be > 0");
  }
  if (!c.partition.empty() && c.partition.size() != c.clients) {
    throw ConfigError("partition must list one range per client");
  }
  if (c.dataset.kind == DatasetKind::kSynthetic) {
    if (c.dataset.class_count < 2) {
      throw ConfigError("dataset.class_count must be >= 2");
    }
    if (c.dataset.samples_per_class == 0 ||
        c.dataset.test_samples_per_class == 0 || c.dataset.feature_dim == 0) {
      throw ConfigError("synthetic dataset sizes must be positive");
    }
    if (c.attack.target_class >= c.dataset.class_count) {
      throw ConfigError("attack.target_class outside the dataset's classes");
    }
  } else if (c.dataset.path.empty()) {
    throw ConfigError("dataset.path is required for " +
                      std::string(to_string(c.dataset.kind)));
  }
  if (c.attack.target_class < 0) throw ConfigError("attack.target_class < 0");
  if (!(c.attack.poison_rate >= 0.0 && c.attack.poison_rate <= 1.0)) {
    throw ConfigError("attack.poison_rate must lie in [0, 1]");
  }
  validate(c.defense);
}

std::string to_json(const ExperimentConfig& c, int indent) {
  return config_to_json(c).dump(indent);
}

ExperimentConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig c = config_from_json(j);
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

ExperimentConfig apply_override(const ExperimentConfig& config,
                                std::string_view key, std::string_view value) {
  json j = config_to_json(config);
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = std::string(value);
  }
  json* node = &j;
  std::string_view rest = key;
  while (true) {
    const auto dot = rest.find('.');
    const std::string part(rest.substr(0, dot));
    if (part.empty() || !node->is_object() || !node->contains(part)) {
      throw ConfigError("unknown config key \"" + std::string(key) + "\"");
    }
    node = &(*node)[part];
    if (dot == std::string_view::npos) break;
    rest = rest.substr(dot + 1);
  }
  *node = parsed;
  return config_from_json(j);
}

std::string resolve_data_path(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  if (const char* root = std::getenv("SPLITGUARD_DATA_ROOT"); root && *root) {
    return (std::filesystem::path(root) / p).string();
  }
  return path;
}

// JSON mapping shared with the report encoder.

std::uint64_t derive_attack_seed(std::uint64_t seed) {
  return derive_seed(seed, 0xa77ac4);
}

nlohmann::ordered_json config_to_json(const ExperimentConfig& c) {
  json partition = json::array();
  for (const auto& r : c.partition) partition.push_back({r.begin, r.end});
  return json{
      {"seed", c.seed},
      {"dataset",
       {{"kind", to_string(c.dataset.kind)},
        {"class_count", c.dataset.class_count},
        {"samples_per_class", c.dataset.samples_per_class},
        {"test_samples_per_class", c.dataset.test_samples_per_class},
        {"feature_dim", c.dataset.feature_dim},
        {"cluster_spread", c.dataset.cluster_spread},
        {"center_scale", c.dataset.center_scale},
        {"path", c.dataset.path}}},
      {"clients", c.clients},
      {"malicious_client", c.malicious_client},
      {"partition", partition},
      {"rounds", c.rounds},
      {"poison_start_round", c.poison_start_round},
      {"learning_rate", c.learning_rate},
      {"batch_size", c.batch_size},
      {"attack",
       {{"kind", to_string(c.attack.kind)},
        {"poison_rate", c.attack.poison_rate},
        {"trigger_magnitude", c.attack.trigger_magnitude},
        {"target_class", c.attack.target_class},
        {"clean_label", c.attack.clean_label}}},
      {"defense",
       {{"kind", to_string(c.defense.kind)},
        {"alpha", c.defense.alpha},
        {"dp_sigma", c.defense.dp_sigma},
        {"prune_fraction", c.defense.prune_fraction}}},
      {"model",
       {{"bottom_hidden", c.model.bottom_hidden},
        {"embedding_width", c.model.embedding_width},
        {"top_hidden", c.model.top_hidden}}},
      {"output", c.output},
      {"dump_consistency", c.dump_consistency},
      {"dump_path", c.dump_path},
  };
}

ExperimentConfig config_from_json(const nlohmann::ordered_json& j) {
  reject_unknown(j, "config",
                 {"seed", "dataset", "clients", "malicious_client", "partition",
                  "rounds", "poison_start_round", "learning_rate", "batch_size",
                  "attack", "defense", "model", "output", "dump_consistency",
                  "dump_path"});
  ExperimentConfig c;
  read(j, "seed", c.seed);
  read(j, "clients", c.clients);
  read(j, "malicious_client", c.malicious_client);
  read(j, "rounds", c.rounds);
  read(j, "poison_start_round", c.poison_start_round);
  read(j, "learning_rate", c.learning_rate);
  read(j, "batch_size", c.batch_size);
  read(j, "output", c.output);
  read(j, "dump_consistency", c.dump_consistency);
  read(j, "dump_path", c.dump_path);
  if (const auto it = j.find("partition"); it != j.end()) {
    if (!it->is_array()) throw ConfigError("partition must be an array");
    for (const auto& r : *it) {
      if (!r.is_array() || r.size() != 2) {
        throw ConfigError("partition entries must be [begin, end] pairs");
      }
      c.partition.push_back({r[0].get<std::size_t>(), r[1].get<std::size_t>()});
    }
  }
  if (const auto it = j.find("dataset"); it != j.end()) {
    reject_unknown(*it, "dataset",
                   {"kind", "class_count", "samples_per_class",
                    "test_samples_per_class", "feature_dim", "cluster_spread",
                    "center_scale", "path"});
    std::string kind(to_string(c.dataset.kind));
    read(*it, "kind", kind);
    c.dataset.kind = parse_dataset_kind(kind);
    read(*it, "class_count", c.dataset.class_count);
    read(*it, "samples_per_class", c.dataset.samples_per_class);
    read(*it, "test_samples_per_class", c.dataset.test_samples_per_class);
    read(*it, "feature_dim", c.dataset.feature_dim);
    read(*it, "cluster_spread", c.dataset.cluster_spread);
    read(*it, "center_scale", c.dataset.center_scale);
    read(*it, "path", c.dataset.path);
  }
  if (const auto it = j.find("attack"); it != j.end()) {
    reject_unknown(*it, "attack",
                   {"kind", "poison_rate", "trigger_magnitude", "target_class",
                    "clean_label"});
    std::string kind(to_string(c.attack.kind));
    read(*it, "kind", kind);
    c.attack.kind = parse_attack_kind(kind);
    read(*it, "poison_rate", c.attack.poison_rate);
    read(*it, "trigger_magnitude", c.attack.trigger_magnitude);
    read(*it, "target_class", c.attack.target_class);
    read(*it, "clean_label", c.attack.clean_label);
  }
  if (const auto it = j.find("defense"); it != j.end()) {
    reject_unknown(*it, "defense",
                   {"kind", "alpha", "dp_sigma", "prune_fraction"});
    std::string kind(to_string(c.defense.kind));
    read(*it, "kind", kind);
    c.defense.kind = parse_defense_kind(kind);
    read(*it, "alpha", c.defense.alpha);
    read(*it, "dp_sigma", c.defense.dp_sigma);
    read(*it, "prune_fraction", c.defense.prune_fraction);
  }
  if (const auto it = j.find("model"); it != j.end()) {
    reject_unknown(*it, "model",
                   {"bottom_hidden", "embedding_width", "top_hidden"});
    read(*it, "bottom_hidden", c.model.bottom_hidden);
    read(*it, "embedding_width", c.model.embedding_width);
    read(*it, "top_hidden", c.model.top_hidden);
  }
  return c;
}

}  // namespace splitguard
