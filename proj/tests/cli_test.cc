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


#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cli.h"
#include "splitguard/experiment.h"

namespace splitguard {
namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "splitguard");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = cli::main_with_args(static_cast<int>(argv.size()), argv.data(),
                                       out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("splitguard_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string write_config(const fs::path& dir, const std::string& body) {
  const fs::path path = dir / "config.json";
  std::ofstream(path) << body;
  return path.string();
}

std::string minimal_config(const fs::path& dir) {
  return R"({
  "seed": 3,
  "dataset": {"class_count": 3, "samples_per_class": 20,
              "test_samples_per_class": 5, "feature_dim": 6,
              "center_scale": 3.0, "cluster_spread": 1.0},
  "clients": 2,
  "rounds": 2,
  "poison_start_round": 1,
  "batch_size": 30,
  "model": {"bottom_hidden": [6], "embedding_width": 3, "top_hidden": [6]},
  "attack": {"poison_rate": 0.1},
  "output": ")" + (dir / "report.json").string() + R"("
})";
}

TEST(CliRun, WritesReportAndSummary) {
  const fs::path dir = scratch("run");
  const auto r = run_cli({"run", "--config", write_config(dir, minimal_config(dir))});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_EQ(r.out.rfind("MA=", 0), 0u) << r.out;
  EXPECT_NE(r.out.find("ASR="), std::string::npos);
  std::ifstream in(dir / "report.json");
  std::stringstream text;
  text << in.rdbuf();
  const MetricsReport report = parse_report(text.str());
  EXPECT_EQ(report.rounds.size(), 2u);
  EXPECT_GE(report.main_accuracy, 0.0);
  EXPECT_LE(report.attack_success_rate, 1.0);
  fs::remove_all(dir);
}

TEST(CliRun, UnknownAttackTagIsNamedConfigError) {
  const fs::path dir = scratch("teleport");
  const auto path = write_config(dir, R"({"attack": {"kind": "teleport"}})");
  const auto r = run_cli({"run", "--config", path});
  EXPECT_EQ(r.code, cli::kExitConfig);
  EXPECT_NE(r.err.find("teleport"), std::string::npos) << r.err;
  const auto s = run_cli({"run", "--config", write_config(dir, "{}"),
                          "--set", "defense.kind=teleport"});
  EXPECT_EQ(s.code, cli::kExitConfig);
  EXPECT_NE(s.err.find("teleport"), std::string::npos) << s.err;
  fs::remove_all(dir);
}

TEST(CliRun, ErrorKindsMapToExitCodes) {
  const fs::path dir = scratch("codes");
  EXPECT_EQ(run_cli({"run", "--config", (dir / "missing.json").string()}).code,
            cli::kExitConfig);
  const auto data = run_cli({"run", "--config", write_config(dir, minimal_config(dir)),
                             "--set", "dataset.kind=cifar10",
                             "--set", "dataset.path=/nonexistent/cifar"});
  EXPECT_EQ(data.code, cli::kExitData) << data.err;
  EXPECT_EQ(run_cli({"run", "--set", "rounds"}).code, cli::kExitConfig);
  EXPECT_NE(run_cli({"frobnicate"}).code, cli::kExitOk);
  EXPECT_EQ(cli::exit_code(ErrorKind::kTraining), cli::kExitProtocol);
  EXPECT_EQ(cli::exit_code(ErrorKind::kFormat), cli::kExitData);
  EXPECT_EQ(cli::exit_code(ErrorKind::kEvaluation), cli::kExitEvaluation);
  fs::remove_all(dir);
}

TEST(CliSweep, AlphaSweepWritesOneReportEach) {
  const fs::path dir = scratch("sweep");
  const auto r = run_cli({"sweep", "--config", write_config(dir, minimal_config(dir)),
                          "--over", "defense.alpha=0.3,0.5,0.7,0.9", "--jobs", "2"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  for (const char* a : {"0.3", "0.5", "0.7", "0.9"}) {
    const fs::path report = dir / ("report.defense.alpha-" + std::string(a) + ".json");
    ASSERT_TRUE(fs::exists(report)) << report;
    std::ifstream in(report);
    std::stringstream text;
    text << in.rdbuf();
    EXPECT_EQ(parse_report(text.str()).config.defense.alpha, std::stod(a));
  }
  std::ifstream tsv(dir / "report.sweep.tsv");
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(tsv, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[0].rfind("defense.alpha\treport\tmain_accuracy", 0), 0u) << lines[0];
  EXPECT_EQ(lines[1].rfind("0.3\t", 0), 0u);
  EXPECT_EQ(lines[4].rfind("0.9\t", 0), 0u);
  fs::remove_all(dir);
}

TEST(CliSweep, ParallelMatchesSerial) {
  const fs::path a = scratch("sweep_serial");
  const fs::path b = scratch("sweep_parallel");
  const auto serial = run_cli({"sweep", "--config", write_config(a, minimal_config(a)),
                               "--over", "attack.kind=embedding_additive,embedding_swap",
                               "--jobs", "1"});
  const auto parallel = run_cli({"sweep", "--config", write_config(b, minimal_config(b)),
                                 "--over", "attack.kind=embedding_additive,embedding_swap",
                                 "--jobs", "2"});
  ASSERT_EQ(serial.code, 0) << serial.err;
  ASSERT_EQ(parallel.code, 0) << parallel.err;
  for (const char* k : {"embedding_additive", "embedding_swap"}) {
    const std::string name = "report.attack.kind-" + std::string(k) + ".json";
    std::ifstream x(a / name), y(b / name);
    std::stringstream sx, sy;
    sx << x.rdbuf();
    sy << y.rdbuf();
    MetricsReport rx = parse_report(sx.str());
    MetricsReport ry = parse_report(sy.str());
    EXPECT_EQ(rx.main_accuracy, ry.main_accuracy);
    EXPECT_EQ(rx.attack_success_rate, ry.attack_success_rate);
    EXPECT_EQ(rx.rounds, ry.rounds);
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(CliSweep, AxisParsing) {
  const auto [key, values] = cli::parse_sweep_axis("model.top_hidden=[4,4],[8]");
  EXPECT_EQ(key, "model.top_hidden");
  EXPECT_EQ(values, (std::vector<std::string>{"[4,4]", "[8]"}));
  EXPECT_THROW(cli::parse_sweep_axis("clients=2,,4"), ConfigError);
  EXPECT_THROW(cli::parse_override("=3"), ConfigError);
  EXPECT_EQ(cli::parse_override("a.b=c=d").value, "c=d");
}

TEST(CliDump, WritesConsistencyFile) {
  const fs::path dir = scratch("dump");
  const auto r = run_cli({"dump-consistency", "--config",
                          write_config(dir, minimal_config(dir)), "--out",
                          (dir / "v.tsv").string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  std::ifstream in(dir / "v.tsv");
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 61u);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace splitguard
