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

#include "cli.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "splitguard/experiment.h"

namespace splitguard::cli {
namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << text << '\n';
  if (!out) throw DataError("failed writing " + path);
}

std::string summary_line(const MetricsReport& report) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << "MA=" << report.main_accuracy
    << " ASR=" << report.attack_success_rate;
  return s.str();
}

std::string sanitize(std::string text) {
  for (char& c : text) {
    const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '.' ||
                      c == '-' || c == '_';
    if (!keep) c = '_';
  }
  return text;
}

std::string stem_of(const std::string& output) {
  const std::filesystem::path p(output);
  return (p.parent_path() / p.stem()).string();
}

}  // namespace

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
      return kExitConfig;
    case ErrorKind::kFormat:
    case ErrorKind::kData:
      return kExitData;
    case ErrorKind::kProtocol:
    case ErrorKind::kTraining:
      return kExitProtocol;
    case ErrorKind::kEvaluation:
      return kExitEvaluation;
  }
  return kExitInternal;
}

Override parse_override(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("expected key=value, got \"" + text + "\"");
  }
  return {text.substr(0, eq), text.substr(eq + 1)};
}

std::pair<std::string, std::vector<std::string>> parse_sweep_axis(
    const std::string& text) {
  const Override o = parse_override(text);
  std::vector<std::string> values;
  std::string current;
  int depth = 0;
  for (char c : o.value) {
    if (c == '[' || c == '{') ++depth;
    if (c == ']' || c == '}') --depth;
    if (c == ',' && depth == 0) {
      values.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  values.push_back(current);
  for (const auto& v : values) {
    if (v.empty()) throw ConfigError("empty value in sweep over " + o.key);
  }
  return {o.key, values};
}

ExperimentConfig build_config(const std::string& path,
                              const std::vector<Override>& overrides) {
  ExperimentConfig config = path.empty() ? ExperimentConfig{} : load_config(path);
  for (const auto& o : overrides) config = apply_override(config, o.key, o.value);
  validate(config);
  return config;
}

int run_config(const ExperimentConfig& config, std::ostream& out) {
  const MetricsReport report = run_experiment(config);
  write_text(config.output, to_json(report));
  out << summary_line(report) << '\n';
  return kExitOk;
}

int run_sweep(
    const ExperimentConfig& base,
    const std::vector<std::pair<std::string, std::vector<std::string>>>& axes,
    std::size_t jobs, std::ostream& out) {
  if (axes.empty()) throw ConfigError("sweep needs at least one --over axis");
  const std::string stem = stem_of(base.output);

  // Cartesian product in definition order (last axis varies fastest).
  struct Entry {
    ExperimentConfig config;
    std::vector<std::string> values;
  };
  std::vector<Entry> entries{{base, {}}};
  for (const auto& [key, values] : axes) {
    std::vector<Entry> next;
    for (const auto& e : entries) {
      for (const auto& v : values) {
        Entry n{apply_override(e.config, key, v), e.values};
        n.values.push_back(v);
        next.push_back(std::move(n));
      }
    }
    entries = std::move(next);
  }
  for (auto& e : entries) {
    std::string name = stem;
    for (std::size_t i = 0; i < axes.size(); ++i) {
      name += "." + sanitize(axes[i].first) + "-" + sanitize(e.values[i]);
    }
    e.config.output = name + ".json";
    if (e.config.dump_consistency) e.config.dump_path = name + ".consistency.tsv";
  }

  std::vector<std::optional<MetricsReport>> reports(entries.size());
  std::vector<std::exception_ptr> failures(entries.size());
  std::size_t next = 0;
  std::mutex mutex;
  auto worker = [&] {
    while (true) {
      std::size_t i;
      {
        std::lock_guard lock(mutex);
        if (next >= entries.size()) return;
        i = next++;
      }
      try {
        reports[i] = run_experiment(entries[i].config);
        write_text(entries[i].config.output, to_json(*reports[i]));
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, entries.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  std::vector<std::string> columns;
  for (const auto& axis : axes) columns.push_back(axis.first);
  columns.push_back("report");
  std::string table = summary_header(columns) + '\n';
  for (std::size_t i = 0; i < entries.size(); ++i) {
    auto values = entries[i].values;
    values.push_back(entries[i].config.output);
    table += summary_row(*reports[i], values) + '\n';
  }
  std::ofstream tsv(stem + ".sweep.tsv");
  if (!tsv) throw DataError("cannot write " + stem + ".sweep.tsv");
  tsv << table;
  out << table;
  return kExitOk;
}

int run_dump(ExperimentConfig config, const std::string& dump_path,
             std::ostream& out) {
  config.dump_consistency = true;
  config.dump_path = dump_path;
  const int code = run_config(config, out);
  out << "consistency dump written to " << dump_path << '\n';
  return code;
}

int main_with_args(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Vertical split-learning backdoor simulator"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log per-round progress");

  std::string config_path;
  std::vector<std::string> sets;
  std::vector<std::string> overs;
  std::size_t jobs = 1;
  std::string dump_out;

  auto* run = app.add_subcommand("run", "Run one experiment");
  run->add_option("--config", config_path, "JSON config file");
  run->add_option("--set", sets, "Override a config key (key=value)");

  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep");
  sweep->add_option("--config", config_path, "JSON config file");
  sweep->add_option("--set", sets, "Override a config key (key=value)");
  sweep->add_option("--over", overs, "Sweep axis (key=v1,v2,...)")->required();
  sweep->add_option("--jobs", jobs, "Concurrent experiments")
      ->check(CLI::PositiveNumber);

  auto* dump = app.add_subcommand("dump-consistency",
                                  "Run and dump consistency vectors");
  dump->add_option("--config", config_path, "JSON config file");
  dump->add_option("--set", sets, "Override a config key (key=value)");
  dump->add_option("--out", dump_out, "Dump file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::warn);

  try {
    std::vector<Override> overrides;
    for (const auto& s : sets) overrides.push_back(parse_override(s));
    const ExperimentConfig config = build_config(config_path, overrides);
    if (run->parsed()) return run_config(config, out);
    if (sweep->parsed()) {
      std::vector<std::pair<std::string, std::vector<std::string>>> axes;
      for (const auto& o : overs) axes.push_back(parse_sweep_axis(o));
      return run_sweep(config, axes, jobs, out);
    }
    return run_dump(config, dump_out, out);
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace splitguard::cli
