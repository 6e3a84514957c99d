// Copyright 2026 The tokensel Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

#include <json.hpp>

#include "test_util.hpp"
#include "tokensel/corpus_io.hpp"
#include "tokensel/selector.hpp"
#include "tokensel/synthbench.hpp"

namespace tokensel {
namespace {

using nlohmann::json;
using testing::TempDir;

struct CliRun {
  int code = -1;
  std::string out, err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<json> json_lines(const std::string& text) {
  std::vector<json> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(json::parse(line));
  return out;
}

// Runs the CLI with `args` (already shell-quoted where needed) and an
// optional environment prefix.
CliRun cli(const TempDir& dir, const std::string& args, const std::string& env = "") {
  const auto out = dir / ".stdout", err = dir / ".stderr";
  const std::string cmd = env + (env.empty() ? "" : " ") + "'" + std::string(TOKENSEL_CLI) + "' " + args + " > '" +
                          out + "' 2> '" + err + "'";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

void expect_error_line(const CliRun& r, int code) {
  const auto lines = json_lines(r.err);
  ASSERT_FALSE(lines.empty()) << r.err;
  const auto& last = lines.back();
  EXPECT_TRUE(last.contains("error"));
  EXPECT_TRUE(last.contains("message"));
  EXPECT_EQ(last.value("exit_code", -1), code);
}

// Small token corpora: target, general and pool manifests with one token file each.
void write_token_corpora(const TempDir& dir, std::uint64_t seed = 1) {
  BenchConfig cfg;
  cfg.pool_size = 80;
  cfg.target_train = 40;
  cfg.general_train = 40;
  cfg.lengths = {10, 40};
  cfg.seed = seed;
  write_bench_fixtures(sample_bench_corpora(cfg), dir.path(), false, seed);
}

TEST(Cli, NoSubcommandIsUsageError) {
  TempDir dir("cli");
  const auto r = cli(dir, "");
  EXPECT_EQ(r.code, 2);
  expect_error_line(r, 2);
}

TEST(Cli, UnknownOptionIsUsageError) {
  TempDir dir("cli");
  const auto r = cli(dir, "tau --frobnicate a b");
  EXPECT_EQ(r.code, 2);
  expect_error_line(r, 2);
}

TEST(Cli, MissingInputIsUsageError) {
  TempDir dir("cli");
  const auto r = cli(dir, "train-lm --tokens '" + (dir / "nope.bin") + "' --out '" + (dir / "x.arpa") + "'");
  EXPECT_EQ(r.code, 2);
  expect_error_line(r, 2);
  EXPECT_FALSE(std::filesystem::exists(dir / "x.arpa"));
}

TEST(Cli, ConflictingBudgetsAreUsageError) {
  TempDir dir("cli");
  write_token_corpora(dir);
  const auto r = cli(dir, "select --scores a --manifest b --out c --top-k 3 --budget-fraction 0.1");
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, BadConfigIsUsageError) {
  TempDir dir("cli");
  std::ofstream(dir / "c.json") << R"({"lm": {"order": 3}, "typo": 1})";
  const auto r = cli(dir, "--config '" + (dir / "c.json") + "' validate-config");
  EXPECT_EQ(r.code, 2);
  expect_error_line(r, 2);
}

TEST(Cli, MalformedDataIsRuntimeError) {
  TempDir dir("cli");
  std::ofstream(dir / "s.jsonl") << "{\"utterance_id\": \"a\", \"score\": 1}\nnot json\n";
  const auto r = cli(dir, "tau '" + (dir / "s.jsonl") + "' '" + (dir / "s.jsonl") + "'");
  EXPECT_EQ(r.code, 1);
  expect_error_line(r, 1);
}

TEST(Cli, TrainLmWritesArpaAndProvenance) {
  TempDir dir("cli");
  write_token_corpora(dir);
  const auto arpa = dir / "lm/t.arpa";
  const auto r = cli(dir, "train-lm --order 3 --manifest '" + (dir / "target/manifest.jsonl") + "' --out '" + arpa + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(slurp(arpa).find("ngram 3="), std::string::npos);

  const auto prov = json::parse(slurp(arpa + ".provenance.json"));
  EXPECT_EQ(prov["tool"], "tokensel");
  EXPECT_EQ(prov["stage"], "train-lm");
  EXPECT_EQ(prov["params"]["order"], 3);
  EXPECT_EQ(prov["config_sha256"].get<std::string>().size(), 64u);
  ASSERT_EQ(prov["outputs"].size(), 1u);
  EXPECT_EQ(prov["outputs"][0]["path"], "t.arpa");
  // manifest plus the token file it references
  EXPECT_EQ(prov["inputs"].size(), 2u);
  for (const auto& e : prov["inputs"]) EXPECT_FALSE(std::filesystem::path(e["path"].get<std::string>()).is_absolute());
}

TEST(Cli, FlagsOverrideConfigAndEnvironment) {
  TempDir dir("cli");
  write_token_corpora(dir);
  std::ofstream(dir / "c.json") << R"({"lm": {"order": 2}})";
  const std::string in = " --manifest '" + (dir / "target/manifest.jsonl") + "'";
  ASSERT_EQ(cli(dir, "--config '" + (dir / "c.json") + "' train-lm" + in + " --out '" + (dir / "a.arpa") + "'").code, 0);
  ASSERT_EQ(cli(dir, "--config '" + (dir / "c.json") + "' train-lm --order 4" + in + " --out '" + (dir / "b.arpa") + "'")
                .code,
            0);
  ASSERT_EQ(cli(dir, "train-lm" + in + " --out '" + (dir / "c.arpa") + "'", "TOKENSEL_CONFIG='" + (dir / "c.json") + "'")
                .code,
            0);
  ASSERT_EQ(cli(dir, "train-lm" + in + " --out '" + (dir / "d.arpa") + "'").code, 0);
  auto top_order = [&](const std::string& path) {
    const auto text = slurp(path);
    int best = 0;
    for (int n = 1; n <= 6; ++n)
      if (text.find("ngram " + std::to_string(n) + "=") != std::string::npos) best = n;
    return best;
  };
  EXPECT_EQ(top_order(dir / "a.arpa"), 2);
  EXPECT_EQ(top_order(dir / "b.arpa"), 4);
  EXPECT_EQ(top_order(dir / "c.arpa"), 2);
  EXPECT_EQ(top_order(dir / "d.arpa"), 5);
}

TEST(Cli, SelectOperatingPointOnThousandHours) {
  TempDir dir("cli");
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dur(2, 30), sc(-1, 1);
  std::vector<Utterance> pool;
  std::vector<DomainScore> scores;
  double total = 0;
  while (total < 1000.0 * 3600) {
    const double d = std::min(dur(rng), 1000.0 * 3600 - total + 0.5);
    pool.push_back({"u" + std::to_string(pool.size()), std::nullopt, "pool.bin", d, std::nullopt});
    scores.push_back({pool.back().id, sc(rng), 10, 0, 0});
    total += d;
  }
  write_manifest(dir / "pool.jsonl", pool);
  write_scores(dir / "scores.jsonl", scores);
  const auto r = cli(dir, "select --budget-fraction 0.06 --scores '" + (dir / "scores.jsonl") + "' --manifest '" +
                              (dir / "pool.jsonl") + "' --out '" + (dir / "sel.jsonl") + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  double selected_s = 0, longest = 0;
  std::size_t rows = 0;
  for (const auto& j : json_lines(slurp(dir / "sel.jsonl"))) {
    ++rows;
    longest = std::max(longest, j["duration_s"].get<double>());
    if (j["selected"].get<bool>()) selected_s += j["duration_s"].get<double>();
  }
  EXPECT_EQ(rows, pool.size());
  const double budget_h = 0.06 * total / 3600;
  EXPECT_LE(selected_s / 3600, budget_h);
  EXPECT_GE(selected_s / 3600, budget_h - longest / 3600);
  EXPECT_LE(selected_s / 3600, 60.0 + 1e-6);
  EXPECT_NE(slurp(dir / "sel.summary.tsv").find("selected_hours"), std::string::npos);
  EXPECT_NE(slurp(dir / "sel.histogram.csv").find(','), std::string::npos);
}

TEST(Cli, TauOfScoresWithThemselvesIsOne) {
  TempDir dir("cli");
  std::vector<DomainScore> s;
  for (int i = 0; i < 30; ++i) s.push_back({"u" + std::to_string(i), std::sin(double(i)), 1, 0, 0});
  write_scores(dir / "s.jsonl", s);
  std::reverse(s.begin(), s.end());  // alignment is by id, not position
  write_scores(dir / "r.jsonl", s);
  const auto r = cli(dir, "tau '" + (dir / "s.jsonl") + "' '" + (dir / "r.jsonl") + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["tau"].get<double>(), 1.0);
  EXPECT_EQ(j["n"], 30);
}

TEST(Cli, TokenPipelineSkipsCurrentStages) {
  TempDir dir("cli");
  write_token_corpora(dir);
  std::ofstream(dir / "c.json") << R"({"input": "tokens", "lm": {"order": 3}, "selection": {"top_k": 8},
    "paths": {"target_manifest": "target/manifest.jsonl", "general_manifest": "general/manifest.jsonl",
              "pool_manifest": "pool/manifest.jsonl", "work_dir": "work"}})";
  const std::string args = "--config '" + (dir / "c.json") + "' pipeline";
  auto statuses = [](const CliRun& r) {
    std::map<std::string, std::string> s;
    for (const auto& j : json_lines(r.out))
      if (j.contains("stage")) s[j["stage"]] = j["status"];
    return s;
  };
  const auto first = cli(dir, args);
  ASSERT_EQ(first.code, 0) << first.err;
  for (const auto& [stage, status] : statuses(first)) EXPECT_EQ(status, "ran") << stage;
  EXPECT_EQ(statuses(first).size(), 4u);
  std::size_t selected = 0;
  for (const auto& j : json_lines(slurp(dir / "work/selection/selection.jsonl"))) selected += j["selected"].get<bool>();
  EXPECT_EQ(selected, 8u);

  const auto second = cli(dir, args);
  ASSERT_EQ(second.code, 0) << second.err;
  for (const auto& [stage, status] : statuses(second)) EXPECT_EQ(status, "up-to-date") << stage;

  // Changing the general data re-runs its LM and everything downstream.
  write_token_corpora(dir, 2);
  const auto third = statuses(cli(dir, args));
  EXPECT_EQ(third.at("train-lm:general"), "ran");
  EXPECT_EQ(third.at("score"), "ran");
  EXPECT_EQ(third.at("select"), "ran");
}

TEST(Cli, ValidateConfigReportsDigest) {
  TempDir dir("cli");
  std::ofstream(dir / "c.json") << R"({"seed": 9})";
  const auto r = cli(dir, "validate-config", "TOKENSEL_CONFIG='" + (dir / "c.json") + "'");
  // No manifests configured, so full validation fails.
  EXPECT_EQ(r.code, 2);
  for (const char* name : {"t.jsonl", "g.jsonl", "p.jsonl"}) std::ofstream(dir / name) << "";
  std::ofstream(dir / "c.json") << R"({"seed": 9, "paths": {"target_manifest": "t.jsonl",
    "general_manifest": "g.jsonl", "pool_manifest": "p.jsonl"}})";
  const auto ok = cli(dir, "validate-config", "TOKENSEL_CONFIG='" + (dir / "c.json") + "'");
  ASSERT_EQ(ok.code, 0) << ok.err;
  const auto j = json::parse(ok.out);
  EXPECT_TRUE(j["valid"].get<bool>());
  EXPECT_EQ(j["config"]["quantizer"]["seed"], 9);
  EXPECT_EQ(j["config_sha256"].get<std::string>().size(), 64u);
}

TEST(Cli, SynthBenchReport) {
  TempDir dir("cli");
  const auto r = cli(dir, "synth-bench --pool-size 200 --target-train 60 --general-train 60 --length-min 30"
                          " --length-max 60 --variant tokens --variant tokens:scale=0.5 --trials 2 --out '" +
                              (dir / "rep.json") + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(slurp(dir / "rep.json"));
  EXPECT_EQ(j["summary"]["trials"], 2);
  EXPECT_EQ(j["reports"].size(), 2u);
  EXPECT_EQ(j["reports"][1]["seed"], 2);
  EXPECT_TRUE(std::filesystem::exists(dir / "rep.json.provenance.json"));
  EXPECT_EQ(cli(dir, "synth-bench --variant cepstra").code, 2);
  EXPECT_EQ(cli(dir, "synth-bench --sources nonsense").code, 2);
}

}  // namespace
}  // namespace tokensel
