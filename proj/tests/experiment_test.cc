// Copyright 2026 The Decision Authors.
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

#include "decision/experiment.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "decision/commands.h"

namespace decision {
namespace {

namespace fs = std::filesystem;

// A scaled-down moons-3+1 that runs in about a second.
constexpr const char* kSmallConfig = R"(seed: 0
train_fraction: 0.8
model: {hidden: 16, feature_dim: 8}
sources:
  - {name: rot0, generator: two-moons, rotation_deg: 0, noise_std: 0.1, samples: 200, seed: 1}
  - {name: rot20, generator: two-moons, rotation_deg: 20, noise_std: 0.1, samples: 200, seed: 2}
  - {name: rot40, generator: two-moons, rotation_deg: 40, noise_std: 0.1, samples: 200, seed: 3}
  - {name: outlier, generator: two-moons, rotation_deg: 0, noise_std: 0.1, label_noise: 0.9, samples: 200, seed: 4}
target: {name: rot30, generator: two-moons, rotation_deg: 30, noise_std: 0.1, samples: 200, seed: 5}
source_training: {epochs: 5, learning_rate: 0.05}
adaptation: {epochs: 2}
distill: {epochs: 2}
)";

std::string ReadFile(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t CountLines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) n += !line.empty();
  return n;
}

class ExperimentTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::path(::testing::TempDir()) /
           (std::string("decision_") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }

  fs::path WriteConfig(const std::string& text, const std::string& name = "config.yaml") {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  CommandOptions Options(const fs::path& config, const std::string& out) {
    CommandOptions o;
    o.config = config;
    o.out = dir_ / out;
    return o;
  }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

TEST_F(ExperimentTest, MissingTargetIsNamed) {
  std::string text = kSmallConfig;
  text.erase(text.find("target:"), text.find("source_training:") - text.find("target:"));
  try {
    ParseConfig(text);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("target"), std::string::npos) << e.what();
  }
  EXPECT_EQ(CmdTrainSources(Options(WriteConfig(text), "run"), out_, err_), kExitConfigError);
  EXPECT_NE(err_.str().find("target"), std::string::npos);
}

TEST_F(ExperimentTest, UnknownKeysAreRejected) {
  const std::string text = std::string(kSmallConfig) + "adaptaton: {epochs: 3}\n";
  try {
    ParseConfig(text);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("adaptaton"), std::string::npos) << e.what();
  }
  std::string nested = kSmallConfig;
  nested.replace(nested.find("adaptation: {epochs: 2}"), 23, "adaptation: {epochs: 2, lamda: 0.1}");
  EXPECT_THROW(ParseConfig(nested), ConfigError);
}

TEST_F(ExperimentTest, ParsedValuesReachTheConfig) {
  const ExperimentConfig cfg = ParseConfig(kSmallConfig);
  ASSERT_EQ(cfg.sources.size(), 4u);
  EXPECT_EQ(cfg.sources[3].label_noise, 0.9);
  EXPECT_NEAR(cfg.target.rotation, 30.0 * 3.14159265358979323846 / 180.0, 1e-15);
  EXPECT_EQ(cfg.source_training.epochs, 5u);
  EXPECT_EQ(cfg.adaptation.epochs, 2u);
  EXPECT_EQ(cfg.adaptation.lambda, 0.3);
}

TEST_F(ExperimentTest, TrainSourcesIsByteForByteRepeatable) {
  const fs::path config = WriteConfig(kSmallConfig);
  ASSERT_EQ(CmdTrainSources(Options(config, "a"), out_, err_), kExitOk) << err_.str();
  ASSERT_EQ(CmdTrainSources(Options(config, "b"), out_, err_), kExitOk) << err_.str();
  std::size_t count = 0;
  for (const auto& entry : fs::directory_iterator(dir_ / "a" / "checkpoints")) {
    if (entry.path().string().find(".ckpt.json") == std::string::npos) continue;
    ++count;
    EXPECT_EQ(ReadFile(entry.path()), ReadFile(dir_ / "b" / "checkpoints" / entry.path().filename()));
  }
  EXPECT_EQ(count, 4u);
}

TEST_F(ExperimentTest, OnlyDecisionGivesOneRow) {
  const std::string text = std::string(kSmallConfig) +
                           "baselines: {source_best: false, source_worst: false, uniform_ensemble: false, "
                           "shot_best: false, shot_worst: false, shot_ens: false, weights_only: false, "
                           "distill: false}\n";
  const fs::path config = WriteConfig(text);
  ASSERT_EQ(CmdTrainSources(Options(config, "run"), out_, err_), kExitOk) << err_.str();
  ASSERT_EQ(CmdAdapt(Options(config, "run"), out_, err_), kExitOk) << err_.str();
  EXPECT_EQ(CountLines(dir_ / "run" / "methods.csv"), 2u);  // header + DECISION
  EXPECT_NE(ReadFile(dir_ / "run" / "methods.csv").find("DECISION,"), std::string::npos);
}

TEST_F(ExperimentTest, ZeroEpochDecisionEqualsUniformEnsemble) {
  ExperimentConfig cfg = ParseConfig(kSmallConfig);
  cfg.adaptation.epochs = 0;
  cfg.baselines.shot_best = cfg.baselines.shot_worst = cfg.baselines.shot_ens = false;
  cfg.baselines.distill = false;
  const TrainedSources sources = TrainSources(cfg);
  const RunReport report = RunAdaptation(cfg, sources.models);
  EXPECT_EQ(report.Method(methods::kDecision).accuracy, report.Method(methods::kUniformEnsemble).accuracy);
}

TEST_F(ExperimentTest, EveryEnabledMethodHasOneRow) {
  const ExperimentConfig cfg = ParseConfig(kSmallConfig);
  const RunReport report = RunAdaptation(cfg, TrainSources(cfg).models);
  for (const char* name : {methods::kSourceBest, methods::kSourceWorst, methods::kUniformEnsemble, methods::kShotBest,
                           methods::kShotWorst, methods::kShotEns, methods::kWeightsOnly, methods::kDecision,
                           methods::kDistill}) {
    EXPECT_TRUE(report.HasMethod(name)) << name;
  }
  EXPECT_FALSE(report.HasMethod(methods::kEntropyOnly));
  EXPECT_EQ(report.alpha.size(), 4u);
}

TEST_F(ExperimentTest, OracleExitCodes) {
  const fs::path config = WriteConfig(kSmallConfig);
  CommandOptions o = Options(config, "oracle");
  o.trials = 0;
  EXPECT_EQ(CmdOracle(o, out_, err_), kExitOk);
  EXPECT_NE(out_.str().find("\"trials\": 0"), std::string::npos) << out_.str();
  o.trials = 20;
  o.inject_corrupt_predictor = true;
  EXPECT_EQ(CmdOracle(o, out_, err_), kExitViolation);
}

TEST_F(ExperimentTest, ReportAggregatesRunsAndSweeps) {
  const std::string text = std::string(kSmallConfig) + "baselines: {shot_best: false, shot_worst: false, "
                                                       "shot_ens: false, distill: false}\n";
  const fs::path config = WriteConfig(text);
  std::string with_sweep = text;
  with_sweep.replace(with_sweep.find("adaptation: {epochs: 2}"), 23,
                     "adaptation: {epochs: 2, lambda_sweep: [0.0, 0.1, 0.3, 1.0]}");
  const fs::path sweep_config = WriteConfig(with_sweep, "sweep.yaml");
  ASSERT_EQ(CmdTrainSources(Options(config, "run"), out_, err_), kExitOk) << err_.str();
  ASSERT_EQ(CmdAdapt(Options(config, "run"), out_, err_), kExitOk) << err_.str();

  CommandOptions single;
  single.runs = {dir_ / "run"};
  single.out = dir_ / "report1";
  ASSERT_EQ(CmdReport(single, out_, err_), kExitOk) << err_.str();
  // header + Source-best, Source-worst, Uniform-Ens, Weights-only, DECISION
  EXPECT_EQ(CountLines(dir_ / "report1" / "methods.csv"), 6u);
  EXPECT_EQ(CountLines(dir_ / "report1" / "alpha_vs_accuracy.csv"), 5u);
  EXPECT_FALSE(fs::exists(dir_ / "report1" / "lambda_sweep.csv"));

  CommandOptions sweep_opts = Options(sweep_config, "sweep");
  sweep_opts.checkpoints = dir_ / "run" / "checkpoints";
  ASSERT_EQ(CmdAdapt(sweep_opts, out_, err_), kExitOk) << err_.str();
  CommandOptions both;
  both.runs = {dir_ / "run", dir_ / "sweep"};
  both.out = dir_ / "report2";
  ASSERT_EQ(CmdReport(both, out_, err_), kExitOk) << err_.str();
  EXPECT_EQ(CountLines(dir_ / "report2" / "lambda_sweep.csv"), 5u);
  EXPECT_EQ(CountLines(dir_ / "report2" / "methods.csv"), 11u);
}

TEST_F(ExperimentTest, MissingArtifactsAreIoErrors) {
  CommandOptions o;
  o.runs = {dir_ / "does-not-exist"};
  o.out = dir_ / "report";
  EXPECT_EQ(CmdReport(o, out_, err_), kExitIoError);
  const fs::path config = WriteConfig(kSmallConfig);
  EXPECT_EQ(CmdAdapt(Options(config, "empty"), out_, err_), kExitIoError);
  EXPECT_EQ(CmdTrainSources(Options(dir_ / "missing.yaml", "x"), out_, err_), kExitIoError);
}

TEST(SpearmanTest, Examples) {
  const std::vector<double> a{1, 2, 3, 4};
  const std::vector<double> up{10, 20, 30, 40};
  const std::vector<double> down{4, 3, 2, 1};
  const std::vector<double> flat{5, 5, 5, 5};
  const std::vector<double> tied{1, 1, 2, 3};
  EXPECT_NEAR(SpearmanCorrelation(a, up), 1.0, 1e-15);
  EXPECT_NEAR(SpearmanCorrelation(a, down), -1.0, 1e-15);
  EXPECT_EQ(SpearmanCorrelation(a, flat), 0.0);
  // Average ranks (1.5, 1.5, 3, 4) against (1, 2, 3, 4).
  EXPECT_NEAR(SpearmanCorrelation(a, tied), 0.9486832980505138, 1e-12);
}

TEST(SeedStreamTest, StreamsAreDistinct) {
  EXPECT_NE(StreamSeed(0, SeedStream::kInit, 0), StreamSeed(0, SeedStream::kSourceTrain, 0));
  EXPECT_NE(StreamSeed(0, SeedStream::kInit, 0), StreamSeed(0, SeedStream::kInit, 1));
  EXPECT_NE(StreamSeed(0, SeedStream::kInit, 0), StreamSeed(1, SeedStream::kInit, 0));
  EXPECT_EQ(StreamSeed(7, SeedStream::kAdapt, 3), StreamSeed(7, SeedStream::kAdapt, 3));
}

}  // namespace
}  // namespace decision
