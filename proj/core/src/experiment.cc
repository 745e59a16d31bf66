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

#include "splitguard/experiment.h"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <spdlog/spdlog.h>

#include "json.hpp"
#include "json_io.h"
#include "splitguard/errors.h"
#include "splitguard/random.h"

namespace splitguard {
namespace {

using json = nlohmann::ordered_json;

TrainTest load_datasets(const ExperimentConfig& config) {
  const auto& d = config.dataset;
  switch (d.kind) {
    case DatasetKind::kSynthetic: {
      const auto seed = derive_seed(config.seed, stream::kDataCenters);
      return {generate_synthetic(d.class_count, d.samples_per_class,
                                 d.feature_dim, d.cluster_spread, seed,
                                 Split::kTrain, d.center_scale),
              generate_synthetic(d.class_count, d.test_samples_per_class,
                                 d.feature_dim, d.cluster_spread, seed,
                                 Split::kTest, d.center_scale)};
    }
    case DatasetKind::kCifar10:
      return load_cifar10(resolve_data_path(d.path));
    case DatasetKind::kBank:
      return load_bank_marketing(resolve_data_path(d.path), config.seed);
  }
  throw ConfigError("unhandled dataset kind");
}

std::string format_double(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

}  // namespace

FilterConfusion MetricsReport::pooled_confusion(std::size_t from_round) const {
  FilterCounts total;
  for (const auto& r : rounds) {
    if (r.round >= from_round) total += r.counts;
  }
  return filter_confusion(total);
}

struct ConsistencyDumpWriter::Impl {
  std::ofstream out;
  bool header_written = false;
};

ConsistencyDumpWriter::ConsistencyDumpWriter(const std::string& path)
    : impl_(std::make_unique<Impl>()) {
  impl_->out.open(path);
  if (!impl_->out) throw DataError("cannot write consistency dump " + path);
  impl_->out << std::setprecision(17);
}

ConsistencyDumpWriter::~ConsistencyDumpWriter() = default;

void ConsistencyDumpWriter::write(std::size_t round, const EmbeddingBatch& batch,
                                  const FilterVerdict& verdict) {
  auto& out = impl_->out;
  if (!impl_->header_written) {
    out << "round\tsample_id\tlabel\tpoisoned\tscore\tp_value\tbenign";
    for (int c : verdict.consistency.classes) out << "\tcos_" << c;
    out << '\n';
    impl_->header_written = true;
  }
  for (std::size_t k = 0; k < batch.labels.size(); ++k) {
    out << round << '\t' << batch.sample_ids[k] << '\t' << batch.labels[k]
        << '\t' << (batch.poison_flags[k] ? 1 : 0) << '\t' << verdict.scores[k]
        << '\t' << verdict.p_values[k] << '\t' << (verdict.benign[k] ? 1 : 0);
    for (double v : verdict.consistency.vectors.row(k)) out << '\t' << v;
    out << '\n';
  }
  if (!out) throw DataError("failed writing consistency dump");
}

MetricsReport run_experiment(const ExperimentConfig& config) {
  validate(config);
  const TrainTest data = load_datasets(config);
  validate(data.train);
  validate(data.test);
  const int class_count = data.train.class_count;

  const VerticalPartition partition =
      config.partition.empty()
          ? vertical_split(data.train, config.clients)
          : VerticalPartition(config.partition, data.train.feature_dim());
  if (partition.client_count() != config.clients) {
    throw ConfigError("partition client count does not match clients");
  }

  const ModelShape shape{config.model.bottom_hidden,
                         config.model.embedding_width, config.model.top_hidden};
  SplitSystem system =
      make_split_system(partition, class_count, shape,
                        derive_seed(config.seed, stream::kModelInit),
                        config.malicious_client);

  TrainingOptions options;
  options.learning_rate = config.learning_rate;
  options.batch_size = config.batch_size;
  options.attack = config.attack_spec();
  validate(options.attack, class_count);
  options.trigger =
      make_trigger_pattern(config.model.embedding_width, options.attack);
  options.defense = config.defense;
  options.seed = config.seed;

  std::unique_ptr<ConsistencyDumpWriter> dump;
  BatchObserver observer;
  if (config.dump_consistency) {
    dump = std::make_unique<ConsistencyDumpWriter>(config.resolved_dump_path());
    observer = [&](std::size_t round, const EmbeddingBatch& batch,
                   const FilterVerdict* verdict) {
      if (round != config.rounds) return;
      if (verdict != nullptr) {
        dump->write(round, batch, *verdict);
      } else {
        // Diagnostic only; training is unaffected.
        dump->write(round, batch,
                    protoguard_filter(batch.aggregated, batch.labels,
                                      config.defense.alpha));
      }
    };
  }

  MetricsReport report;
  report.config = config;
  report.seed = config.seed;
  for (std::size_t r = 0; r < config.rounds; ++r) {
    report.rounds.push_back(train_round(system, data.train, options, observer));
    const auto& log = report.rounds.back();
    spdlog::debug("round {} loss {:.6f} poisoned {} filtered {}", log.round,
                  log.loss, log.poisoned, log.filtered);
  }
  if (config.defense.kind == DefenseKind::kPrune) {
    system.top_model =
        baseline_magnitude_prune(std::move(system.top_model),
                                 config.defense.prune_fraction);
  }
  const Evaluation eval =
      evaluate(system, data.test, options.attack, options.trigger);
  report.main_accuracy = eval.main_accuracy;
  report.attack_success_rate = eval.attack_success_rate;
  return report;
}

std::string to_json(const MetricsReport& report, int indent) {
  json rounds = json::array();
  for (const auto& r : report.rounds) {
    rounds.push_back({{"round", r.round},
                      {"loss", r.loss},
                      {"batch_losses", r.batch_losses},
                      {"samples", r.samples},
                      {"poisoned", r.poisoned},
                      {"filtered", r.filtered},
                      {"true_detected", r.counts.true_detected},
                      {"precision", r.precision},
                      {"recall", r.recall}});
  }
  const auto pooled = report.pooled_confusion(report.config.poison_start_round);
  json j{{"main_accuracy", report.main_accuracy},
         {"attack_success_rate", report.attack_success_rate},
         {"filter_precision", pooled.precision},
         {"filter_recall", pooled.recall},
         {"seed", report.seed},
         {"config", config_to_json(report.config)},
         {"rounds", rounds}};
  return j.dump(indent);
}

MetricsReport parse_report(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("report is not valid JSON: ") + e.what());
  }
  try {
    MetricsReport report;
    report.main_accuracy = j.at("main_accuracy").get<double>();
    report.attack_success_rate = j.at("attack_success_rate").get<double>();
    report.seed = j.at("seed").get<std::uint64_t>();
    report.config = config_from_json(j.at("config"));
    for (const auto& r : j.at("rounds")) {
      RoundLog log;
      log.round = r.at("round").get<std::size_t>();
      log.loss = r.at("loss").get<double>();
      log.batch_losses = r.at("batch_losses").get<std::vector<double>>();
      log.samples = r.at("samples").get<std::size_t>();
      log.poisoned = r.at("poisoned").get<std::size_t>();
      log.filtered = r.at("filtered").get<std::size_t>();
      log.counts = {log.poisoned, log.filtered,
                    r.at("true_detected").get<std::size_t>()};
      log.precision = r.at("precision").get<double>();
      log.recall = r.at("recall").get<double>();
      report.rounds.push_back(std::move(log));
    }
    return report;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed report: ") + e.what());
  }
}

std::string summary_header(const std::vector<std::string>& extra_columns) {
  std::string out;
  for (const auto& c : extra_columns) out += c + '\t';
  return out + "main_accuracy\tattack_success_rate\tfilter_precision\tfilter_recall";
}

std::string summary_row(const MetricsReport& report,
                        const std::vector<std::string>& extra_values) {
  std::string out;
  for (const auto& v : extra_values) out += v + '\t';
  const auto pooled = report.pooled_confusion(report.config.poison_start_round);
  return out + format_double(report.main_accuracy) + '\t' +
         format_double(report.attack_success_rate) + '\t' +
         format_double(pooled.precision) + '\t' + format_double(pooled.recall);
}

}  // namespace splitguard
