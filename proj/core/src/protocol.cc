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

#include "splitguard/protocol.h"

#include <algorithm>
#include <numeric>
#include <string>

#include "splitguard/errors.h"
#include "splitguard/random.h"

namespace splitguard {
namespace {

constexpr std::size_t kPredictChunk = 2048;

std::vector<std::size_t> chain(std::size_t in, std::span<const std::size_t> hidden,
                               std::size_t out) {
  std::vector<std::size_t> widths{in};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(out);
  return widths;
}

std::vector<Matrix> bottom_outputs(const SplitSystem& system,
                                   const Matrix& features) {
  std::vector<Matrix> out;
  out.reserve(system.bottom_models.size());
  for (std::size_t i = 0; i < system.bottom_models.size(); ++i) {
    out.push_back(mlp_predict(system.bottom_models[i],
                              system.partition.client_features(features, i)));
  }
  return out;
}

}  // namespace

std::vector<std::size_t> SplitSystem::embedding_widths() const {
  std::vector<std::size_t> w;
  for (const auto& m : bottom_models) w.push_back(m.output_width());
  return w;
}

SplitSystem make_split_system(const VerticalPartition& partition,
                              int class_count, const ModelShape& shape,
                              std::uint64_t seed,
                              std::optional<std::size_t> malicious_client) {
  if (class_count < 2) throw ConfigError("need at least two classes");
  if (malicious_client && *malicious_client >= partition.client_count()) {
    throw ConfigError("malicious client " + std::to_string(*malicious_client) +
                      " outside the " + std::to_string(partition.client_count()) +
                      " clients");
  }
  SplitSystem system;
  system.partition = partition;
  system.malicious_client = malicious_client;
  for (std::size_t i = 0; i < partition.client_count(); ++i) {
    const auto widths = chain(partition.range(i).width(), shape.bottom_hidden,
                              shape.embedding_width);
    system.bottom_models.push_back(make_mlp(widths, Activation::kRelu,
                                            Activation::kIdentity,
                                            derive_seed(seed, i)));
  }
  const auto top = chain(shape.embedding_width * partition.client_count(),
                         shape.top_hidden, static_cast<std::size_t>(class_count));
  system.top_model = make_mlp(top, Activation::kRelu, Activation::kSoftmax,
                              derive_seed(seed, 1u << 20));
  validate(system);
  return system;
}

void validate(const SplitSystem& system) {
  if (system.bottom_models.size() != system.partition.client_count()) {
    throw ConfigError("one bottom model per client is required");
  }
  std::size_t d = 0;
  for (std::size_t i = 0; i < system.bottom_models.size(); ++i) {
    validate(system.bottom_models[i]);
    if (system.bottom_models[i].input_width() !=
        system.partition.range(i).width()) {
      throw ConfigError("bottom model " + std::to_string(i) +
                        " input width does not match its feature slice");
    }
    d += system.bottom_models[i].output_width();
  }
  validate(system.top_model);
  if (system.top_model.input_width() != d) {
    throw ConfigError("top model input width does not match aggregated width");
  }
}

Matrix aggregate_embeddings(std::span<const Matrix> per_client) {
  if (per_client.empty()) throw ProtocolError("no client embeddings to aggregate");
  const std::size_t rows = per_client.front().rows();
  std::size_t width = 0;
  for (const Matrix& m : per_client) {
    if (m.rows() != rows) {
      throw ProtocolError("client embeddings have differing row counts (" +
                          std::to_string(rows) + " vs " +
                          std::to_string(m.rows()) + ")");
    }
    width += m.cols();
  }
  Matrix out(rows, width);
  for (std::size_t r = 0; r < rows; ++r) {
    auto dst = out.row(r).begin();
    for (const Matrix& m : per_client) {
      const auto src = m.row(r);
      dst = std::copy(src.begin(), src.end(), dst);
    }
  }
  return out;
}

std::vector<Matrix> split_backward(const Matrix& top_input_gradients,
                                   std::span<const std::size_t> widths,
                                   const std::vector<bool>& benign_mask) {
  const std::size_t total = std::accumulate(widths.begin(), widths.end(),
                                            std::size_t{0});
  if (top_input_gradients.cols() != total) {
    throw ProtocolError("gradient width " +
                        std::to_string(top_input_gradients.cols()) +
                        " does not match aggregated width " +
                        std::to_string(total));
  }
  if (!benign_mask.empty() && benign_mask.size() != top_input_gradients.rows()) {
    throw ProtocolError("benign mask length does not match gradient rows");
  }
  std::vector<Matrix> out;
  out.reserve(widths.size());
  std::size_t offset = 0;
  for (std::size_t w : widths) {
    Matrix slice = slice_columns(top_input_gradients, offset, offset + w);
    for (std::size_t r = 0; r < slice.rows(); ++r) {
      if (!benign_mask.empty() && !benign_mask[r]) {
        auto row = slice.row(r);
        std::fill(row.begin(), row.end(), 0.0);
      }
    }
    out.push_back(std::move(slice));
    offset += w;
  }
  return out;
}

std::vector<std::vector<std::size_t>> batch_order(std::size_t n,
                                                  std::size_t batch_size,
                                                  std::uint64_t seed,
                                                  std::size_t round) {
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, stream::kBatchOrder, round));
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t begin = 0; begin < n; begin += batch_size) {
    const std::size_t end = std::min(n, begin + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(begin),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

RoundLog train_round(SplitSystem& system, const Dataset& train,
                     const TrainingOptions& options,
                     const BatchObserver& observer) {
  if (!(options.learning_rate > 0.0)) {
    throw ConfigError("learning rate must be positive");
  }
  const std::size_t round = ++system.round_counter;
  const std::size_t clients = system.bottom_models.size();
  const auto widths = system.embedding_widths();

  RoundLog log;
  log.round = round;
  const auto batches =
      batch_order(train.size(), options.batch_size, options.seed, round);
  for (std::size_t b = 0; b < batches.size(); ++b) {
    const auto& rows = batches[b];
    const Matrix features = gather_rows(train.features, rows);
    std::vector<int> labels(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) labels[i] = train.labels[rows[i]];

    std::vector<std::size_t> poison;
    if (system.malicious_client) {
      poison = select_poison_indices(labels, options.attack, round, b);
    }

    // Clients: forward their feature slices.
    std::vector<Tape> tapes(clients);
    std::vector<Matrix> per_client(clients);
    for (std::size_t i = 0; i < clients; ++i) {
      Matrix slice = system.partition.client_features(features, i);
      if (options.attack.kind == AttackKind::kInputPatch &&
          system.malicious_client == i && !poison.empty()) {
        slice = apply_input_patch(std::move(slice), poison);
      }
      auto fwd = mlp_forward(system.bottom_models[i], slice);
      per_client[i] = std::move(fwd.output);
      tapes[i] = std::move(fwd.tape);
    }

    EmbeddingBatch batch;
    batch.sample_ids = rows;
    batch.poison_flags.assign(rows.size(), false);
    if (system.malicious_client && !poison.empty()) {
      auto outcome = apply_attack(
          std::move(per_client), std::move(labels), *system.malicious_client,
          poison, options.attack, options.trigger,
          derive_seed(options.attack.seed, stream::kSwap,
                      (static_cast<std::uint64_t>(round) << 32) ^ b));
      per_client = std::move(outcome.per_client);
      labels = std::move(outcome.labels);
      for (std::size_t k : outcome.poisoned) batch.poison_flags[k] = true;
    }
    if (options.defense.kind == DefenseKind::kDp) {
      per_client = baseline_dp_noise(
          std::move(per_client), options.defense.dp_sigma,
          derive_seed(options.seed, stream::kDpNoise,
                      (static_cast<std::uint64_t>(round) << 32) ^ b));
    }
    batch.aggregated = aggregate_embeddings(per_client);
    batch.per_client = std::move(per_client);
    batch.labels = std::move(labels);

    // Server: defense sees embeddings and labels only.
    std::vector<bool> benign(rows.size(), true);
    std::optional<FilterVerdict> verdict;
    if (options.defense.kind == DefenseKind::kProtoguard) {
      verdict = protoguard_filter(batch.aggregated, batch.labels,
                                  options.defense.alpha);
      benign = verdict->benign;
    }
    if (observer) observer(round, batch, verdict ? &*verdict : nullptr);

    std::vector<double> weights(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) weights[k] = benign[k] ? 1.0 : 0.0;
    auto top = mlp_forward(system.top_model, batch.aggregated);
    const HeadGradient head =
        cross_entropy_head(top.output, batch.labels, weights,
                           static_cast<double>(rows.size()));
    const Gradients top_grads = mlp_backward(system.top_model, top.tape,
                                             head.gradient,
                                             GradientAt::kPreActivation);
    const auto client_grads = split_backward(top_grads.inputs, widths, benign);

    sgd_update_in_place(system.top_model, top_grads, options.learning_rate);
    for (std::size_t i = 0; i < clients; ++i) {
      const Gradients g =
          mlp_backward(system.bottom_models[i], tapes[i], client_grads[i]);
      sgd_update_in_place(system.bottom_models[i], g, options.learning_rate);
    }

    log.batch_losses.push_back(head.loss);
    log.samples += rows.size();
    const FilterCounts counts = count_detections(benign, batch.poison_flags);
    log.poisoned += counts.poisoned;
    log.filtered += counts.detected;
    log.counts += counts;
  }
  if (!log.batch_losses.empty()) {
    double total = 0.0;
    for (double l : log.batch_losses) total += l;
    log.loss = total / static_cast<double>(log.batch_losses.size());
  }
  const FilterConfusion confusion = filter_confusion(log.counts);
  log.precision = confusion.precision;
  log.recall = confusion.recall;
  return log;
}

std::vector<int> predict(const SplitSystem& system, const Matrix& features) {
  std::vector<int> out;
  out.reserve(features.rows());
  for (std::size_t begin = 0; begin < features.rows(); begin += kPredictChunk) {
    std::vector<std::size_t> rows(std::min(kPredictChunk, features.rows() - begin));
    std::iota(rows.begin(), rows.end(), begin);
    const Matrix chunk = gather_rows(features, rows);
    const auto per_client = bottom_outputs(system, chunk);
    const auto probs =
        mlp_predict(system.top_model, aggregate_embeddings(per_client));
    const auto labels = argmax_rows(probs);
    out.insert(out.end(), labels.begin(), labels.end());
  }
  return out;
}

Evaluation evaluate(const SplitSystem& system, const Dataset& test,
                    const AttackSpec& attack, const TriggerPattern& trigger) {
  Evaluation eval;
  eval.main_accuracy = main_accuracy(predict(system, test.features), test.labels);

  // Triggered set: non-target samples only.
  std::vector<std::size_t> eligible;
  std::vector<std::size_t> donors;
  for (std::size_t k = 0; k < test.size(); ++k) {
    (test.labels[k] == attack.target_class ? donors : eligible).push_back(k);
  }
  if (eligible.empty()) {
    throw EvaluationError("test split has no non-target samples");
  }
  eval.triggered_samples = eligible.size();
  const Matrix features = gather_rows(test.features, eligible);
  std::vector<int> true_labels;
  for (std::size_t k : eligible) true_labels.push_back(test.labels[k]);

  const bool active = system.malicious_client.has_value() &&
                      attack.kind != AttackKind::kNone;
  const std::size_t mal = system.malicious_client.value_or(0);

  // Additive trigger scale comes from the clean test embeddings of the
  // malicious client; swap donors are its target-class test embeddings.
  std::vector<double> shift;
  Matrix donor_embeddings;
  if (active && attack.kind == AttackKind::kEmbeddingAdditive) {
    shift = trigger.realize(mlp_predict(
        system.bottom_models[mal],
        system.partition.client_features(test.features, mal)));
  } else if (active && attack.kind == AttackKind::kEmbeddingSwap &&
             !donors.empty()) {
    donor_embeddings = mlp_predict(
        system.bottom_models[mal],
        system.partition.client_features(gather_rows(test.features, donors),
                                         mal));
  }
  Rng swap_rng(derive_seed(attack.seed, stream::kTestTrigger));

  std::vector<int> predictions;
  predictions.reserve(features.rows());
  for (std::size_t begin = 0; begin < features.rows(); begin += kPredictChunk) {
    std::vector<std::size_t> rows(std::min(kPredictChunk, features.rows() - begin));
    std::iota(rows.begin(), rows.end(), begin);
    const Matrix chunk = gather_rows(features, rows);
    std::vector<Matrix> per_client;
    for (std::size_t i = 0; i < system.bottom_models.size(); ++i) {
      Matrix slice = system.partition.client_features(chunk, i);
      if (active && i == mal && attack.kind == AttackKind::kInputPatch) {
        std::vector<std::size_t> all(slice.rows());
        std::iota(all.begin(), all.end(), std::size_t{0});
        slice = apply_input_patch(std::move(slice), all);
      }
      per_client.push_back(mlp_predict(system.bottom_models[i], slice));
    }
    if (active) {
      Matrix& mine = per_client[mal];
      if (!shift.empty()) {
        for (std::size_t r = 0; r < mine.rows(); ++r) {
          auto row = mine.row(r);
          for (std::size_t j = 0; j < row.size(); ++j) row[j] += shift[j];
        }
      } else if (!donor_embeddings.empty()) {
        std::uniform_int_distribution<std::size_t> pick(
            0, donor_embeddings.rows() - 1);
        for (std::size_t r = 0; r < mine.rows(); ++r) {
          const auto src = donor_embeddings.row(pick(swap_rng));
          std::copy(src.begin(), src.end(), mine.row(r).begin());
        }
      }
    }
    const auto labels = argmax_rows(
        mlp_predict(system.top_model, aggregate_embeddings(per_client)));
    predictions.insert(predictions.end(), labels.begin(), labels.end());
  }
  eval.attack_success_rate =
      attack_success_rate(predictions, attack.target_class, true_labels);
  return eval;
}

}  // namespace splitguard
