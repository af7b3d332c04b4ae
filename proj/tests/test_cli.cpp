/*
 * Copyright 2026 The hcs Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Runs the hcs binary as a subprocess.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hcs/data.hpp"
#include "hcs/kernels.hpp"
#include "hcs/mmd.hpp"
#include "stats.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir = fs::temp_directory_path() / ("hcs_cli_" + std::string(info->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  Result run(const std::string& args) const {
    const fs::path out = dir / "stdout.txt";
    const fs::path err = dir / "stderr.txt";
    const std::string cmd = "cd '" + dir.string() + "' && '" HCS_CLI_PATH "' " + args + " >'" +
                            out.string() + "' 2>'" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  void make_toy(std::size_t n = 600) const {
    ASSERT_EQ(run("generate-toy --n-source " + std::to_string(n) + " --n-target " +
                  std::to_string(n) + " --seed 3 -o data")
                  .code,
              0);
  }

  static constexpr const char* kTrainArgs =
      "--source data/source.txt --target data/target.txt --epochs 3 --phi-hidden 4";

  fs::path dir;
};

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

TEST_F(Cli, GenerateToyWritesSparseFiles) {
  make_toy(500);
  const auto s = hcs::read_sparse_file((dir / "data/source.txt").string(), "source");
  const auto t = hcs::read_sparse_file((dir / "data/target.txt").string(), "target");
  EXPECT_EQ(s.size(), 500u);
  EXPECT_EQ(t.size(), 500u);
  EXPECT_EQ(s.feature_dim(), 2u);
  EXPECT_TRUE(t.has_labels());
}

TEST_F(Cli, MmdOfFileWithItselfIsNearZero) {
  make_toy(1000);
  const Result self = run("mmd data/source.txt");
  ASSERT_EQ(self.code, 0) << self.err;
  const double v = std::stod(self.out);

  const auto s = hcs::read_sparse_file((dir / "data/source.txt").string(), "source");
  const hcs::Points x = s.dense();
  const auto perm = stats::permutation_values(hcs::KernelBank::default_bank(), x.topRows(500),
                                              x.bottomRows(500), 100, 7);
  const double sd = stats::summarize(perm).sd;
  EXPECT_LT(std::abs(v), 3.0 * sd);

  const Result same = run("mmd data/source.txt data/../data/source.txt");
  EXPECT_EQ(same.out, self.out);
  const Result cross = run("mmd data/source.txt data/target.txt");
  ASSERT_EQ(cross.code, 0);
  EXPECT_GT(std::stod(cross.out), 10.0 * std::abs(v));
}

TEST_F(Cli, TrainWritesOutputs) {
  make_toy();
  const Result r = run(std::string("train ") + kTrainArgs + " -o run");
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"checkpoint.bin", "metrics.jsonl", "config.json", "snapshot_epoch_1.csv",
                        "snapshot_epoch_2.csv", "snapshot_epoch_3.csv"}) {
    EXPECT_TRUE(fs::exists(dir / "run" / f)) << f;
  }
  const std::string metrics = slurp(dir / "run/metrics.jsonl");
  EXPECT_EQ(count_lines(metrics), 3u);
  std::istringstream in(metrics);
  std::string line;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j.at("schema_version"), 1);
  }
  const std::string csv = slurp(dir / "run/snapshot_epoch_3.csv");
  EXPECT_TRUE(csv.starts_with("sample_id,domain,phi_0,phi_1,phi_2,phi_3,weight,true_label,"
                              "predicted_label\n"));
  EXPECT_EQ(count_lines(csv), 1u + 512u);
  const auto summary = nlohmann::json::parse(r.out);
  EXPECT_EQ(summary.at("epochs"), 3);
}

TEST_F(Cli, TrainIsByteDeterministic) {
  make_toy();
  ASSERT_EQ(run(std::string("train ") + kTrainArgs + " -o a").code, 0);
  ASSERT_EQ(run(std::string("train ") + kTrainArgs + " --threads 1 -o b").code, 0);
  EXPECT_EQ(slurp(dir / "a/metrics.jsonl"), slurp(dir / "b/metrics.jsonl"));
  EXPECT_EQ(slurp(dir / "a/checkpoint.bin"), slurp(dir / "b/checkpoint.bin"));
  ASSERT_EQ(run(std::string("train ") + kTrainArgs + " --seed 9 -o c").code, 0);
  EXPECT_NE(slurp(dir / "a/metrics.jsonl"), slurp(dir / "c/metrics.jsonl"));
}

TEST_F(Cli, FlagsOverrideConfigFile) {
  make_toy(300);
  std::ofstream(dir / "cfg.json") << R"({"lambda": 5.0, "epochs": 1, "phi_hidden": 2,
    "source": "data/source.txt", "target": "data/target.txt", "output_dir": "from_config"})";
  const Result r = run("train -c cfg.json --lambda 0.5 --no-snapshots");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto cfg = nlohmann::json::parse(slurp(dir / "from_config/config.json"));
  EXPECT_EQ(cfg.at("lambda"), 0.5);
  EXPECT_EQ(cfg.at("epochs"), 1);
  EXPECT_EQ(cfg.at("snapshots"), false);
  EXPECT_FALSE(fs::exists(dir / "from_config/snapshot_epoch_1.csv"));
}

TEST_F(Cli, ToyConfigNeedsNoFiles) {
  std::ofstream(dir / "cfg.json")
      << R"({"toy": {"n_source": 300, "n_target": 300, "seed": 1}, "epochs": 1, "phi_hidden": 2})";
  const Result r = run("train -c cfg.json -o toy");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_lines(slurp(dir / "toy/metrics.jsonl")), 1u);
}

TEST_F(Cli, EvaluateCheckpoint) {
  make_toy();
  ASSERT_EQ(run(std::string("train ") + kTrainArgs + " -o run").code, 0);
  const Result r = run("evaluate --checkpoint run/checkpoint.bin --data data/target.txt");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  std::istringstream metrics(slurp(dir / "run/metrics.jsonl"));
  std::string line;
  std::string last_line;
  while (std::getline(metrics, line)) last_line = line;
  const auto last = nlohmann::json::parse(last_line);
  EXPECT_DOUBLE_EQ(j.at("accuracy").get<double>(), last.at("target_accuracy").get<double>());
  EXPECT_EQ(j.at("rows"), 600);

  std::ofstream(dir / "unlabeled.txt") << "#dim 2\n?\t0:0.5 1:0.5\n";
  const Result u = run("evaluate --checkpoint run/checkpoint.bin --data unlabeled.txt");
  EXPECT_EQ(u.code, 2);
  const Result missing = run("evaluate --checkpoint nope.bin --data data/target.txt");
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.err.find("nope.bin"), std::string::npos);
}

TEST_F(Cli, SelectWritesNineRowReport) {
  make_toy(300);
  const Result r = run(
      "select --source data/source.txt --target data/target.txt --epochs 1 --phi-hidden 2 "
      "--lambdas 0.1,1,10 --seeds 0,1,2 --report report.json");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rep = nlohmann::json::parse(slurp(dir / "report.json"));
  EXPECT_EQ(rep.at("schema_version"), 1);
  EXPECT_EQ(rep.at("candidates").size(), 9u);
  EXPECT_TRUE(rep.at("chosen").is_number_integer());
  EXPECT_EQ(nlohmann::json::parse(r.out).at("chosen"), rep.at("chosen"));

  const Result again = run(
      "select --source data/source.txt --target data/target.txt --epochs 1 --phi-hidden 2 "
      "--lambdas 0.1,1,10 --seeds 0,1,2 --parallel --report again.json");
  ASSERT_EQ(again.code, 0);
  EXPECT_EQ(slurp(dir / "again.json"), slurp(dir / "report.json"));
}

TEST_F(Cli, MakeShiftTargetRate) {
  make_toy(2000);
  const Result r =
      run("make-shift --kind target_shift --input data/source.txt --out shifted.txt --p-pos-target 0.9");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto d = hcs::read_sparse_file((dir / "shifted.txt").string(), "x");
  EXPECT_GE(d.size(), 1000u);
  EXPECT_NEAR(d.positive_rate(), 0.9, 0.02);
}

TEST_F(Cli, MakeShiftConceptDrift) {
  make_toy(2000);
  const Result r = run(
      "make-shift --kind concept_drift --d1 data/source.txt --d2 data/target.txt --n-source 400 "
      "--n-target 200 --out-dir drift");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(hcs::read_sparse_file((dir / "drift/source.txt").string(), "s").size(), 400u);
  EXPECT_EQ(hcs::read_sparse_file((dir / "drift/target.txt").string(), "t").size(), 200u);
  EXPECT_EQ(run("make-shift --kind sideways --input data/source.txt --out x.txt").code, 1);
}

TEST_F(Cli, MissingSourceIsDataError) {
  make_toy(100);
  const Result r = run("train --source missing_src.txt --target data/target.txt");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("missing_src.txt"), std::string::npos);
  EXPECT_EQ(count_lines(r.err), 1u);
}

TEST_F(Cli, MalformedDataIsDataError) {
  std::ofstream(dir / "bad.txt") << "#dim 2\n1\t0:abc\n";
  const Result r = run("mmd bad.txt");
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(count_lines(r.err), 1u);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("frobnicate").code, 1);
  EXPECT_EQ(run("train --bogus").code, 1);
  EXPECT_EQ(run("train --source a --target b --lambda -1").code, 1);
  EXPECT_EQ(run("train --source a --target b --mode dann").code, 1);
  EXPECT_EQ(run("train").code, 1);
  std::ofstream(dir / "typo.json") << R"({"lamda": 1})";
  const Result typo = run("train -c typo.json");
  EXPECT_EQ(typo.code, 1);
  EXPECT_NE(typo.err.find("lamda"), std::string::npos);
  std::ofstream(dir / "broken.json") << "{";
  EXPECT_EQ(run("train -c broken.json").code, 1);
  const Result r = run("mmd");
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(count_lines(r.err), 1u);
}

TEST_F(Cli, OverflowIsNumericalError) {
  std::ofstream f(dir / "huge.txt");
  f << "#dim 1\n";
  for (int i = 0; i < 8; ++i) f << "1\t0:" << (i % 2 == 0 ? "1e200" : "-1e200") << "\n";
  f.close();
  const Result r = run("mmd huge.txt");
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(count_lines(r.err), 1u);
}

}  // namespace
