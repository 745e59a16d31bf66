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
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "splitguard/config.h"
#include "splitguard/errors.h"

namespace splitguard::cli {

// Exit codes, by error kind.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitProtocol = 4;
inline constexpr int kExitEvaluation = 5;

int exit_code(ErrorKind kind);

struct Override {
  std::string key;
  std::string value;
};

// "key=value" -> Override. Throws ConfigError.
Override parse_override(const std::string& text);

// "key=v1,v2,[1,2]" -> key and the top-level comma-separated values.
std::pair<std::string, std::vector<std::string>> parse_sweep_axis(
    const std::string& text);

// Loads the config file (or defaults when path is empty) and applies the
// overrides in order.
ExperimentConfig build_config(const std::string& path,
                              const std::vector<Override>& overrides);

// Runs one experiment, writes the report to config.output and a summary line
// to `out`.
int run_config(const ExperimentConfig& config, std::ostream& out);

// Runs the cartesian product of the axes, up to `jobs` at a time. Each run
// writes its own report; a tab-separated summary (one row per run, in
// definition order) goes to <output stem>.sweep.tsv and to `out`.
int run_sweep(const ExperimentConfig& base,
              const std::vector<std::pair<std::string, std::vector<std::string>>>& axes,
              std::size_t jobs, std::ostream& out);

// Runs the experiment with the consistency dump enabled, writing it to
// dump_path.
int run_dump(ExperimentConfig config, const std::string& dump_path,
             std::ostream& out);

// Entry point shared by main() and tests: parses argv, dispatches, and maps
// errors to exit codes.
int main_with_args(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace splitguard::cli
