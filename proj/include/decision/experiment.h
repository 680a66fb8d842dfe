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

// Experiment configuration and the end-to-end pipeline behind the CLI.

#ifndef DECISION_EXPERIMENT_H_
#define DECISION_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "decision/adaptation.h"
#include "decision/distill.h"
#include "decision/domains.h"
#include "decision/models.h"

namespace decision {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BaselineToggles {
  bool source_best = true;
  bool source_worst = true;
  bool uniform_ensemble = true;
  bool shot_best = true;
  bool shot_worst = true;
  bool shot_ens = true;
  bool weights_only = true;
  bool decision = true;
  bool distill = true;
  bool ablations = false;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::string output_dir = "runs/default";
  ModelShape model;
  // Each spec's seed is a stream id; the data seed is derived from it and
  // the global seed (see ResolveDomain).
  std::vector<DomainSpec> sources;
  DomainSpec target;
  double train_fraction = 0.8;
  SourceTrainConfig source_training;
  AdaptationConfig adaptation;
  StudentConfig distill;
  BaselineToggles baselines;
  std::vector<double> lambda_sweep;
  std::string text;  // the YAML the config was parsed from
};

// Parses YAML. Unknown keys, missing required fields and out-of-range values
// throw ConfigError naming the field path, e.g. "adaptation.lambda".
ExperimentConfig ParseConfig(const std::string& yaml);

// Throws IoError if the file cannot be read, ConfigError if it is invalid.
ExperimentConfig LoadConfig(const std::filesystem::path& path);

// Seed streams derived from the global seed.
enum class SeedStream : std::uint64_t {
  kData = 1,
  kInit = 2,
  kSourceTrain = 3,
  kSplit = 4,
  kAdapt = 5,
  kDistill = 6,
};

std::uint64_t StreamSeed(std::uint64_t global, SeedStream stream, std::uint64_t index = 0);

// The spec with its seed replaced by the derived data seed.
DomainSpec ResolveDomain(const ExperimentConfig& cfg, const DomainSpec& spec);

struct TrainedSources {
  std::vector<SourceModel> models;
  std::vector<SourceTrainMetrics> metrics;
};

// Each source is trained on the train part of its own 80/20 split.
TrainedSources TrainSources(const ExperimentConfig& cfg);

struct TargetData {
  UnlabeledSet train;  // adaptation and distillation input
  LabeledSet eval;     // accuracy only
};

TargetData PrepareTarget(const ExperimentConfig& cfg);

struct MethodResult {
  std::string method;
  double accuracy = 0.0;
  // Entropy of the mean predicted class distribution over the target train
  // split, for methods that produce a single predictor.
  std::optional<double> label_entropy;
};

struct RunReport {
  std::vector<MethodResult> methods;
  std::vector<std::string> source_names;
  std::vector<double> unadapted_accuracy;  // per source, on target eval
  std::vector<double> shot_accuracy;       // per source adapted alone; empty if not run
  std::vector<double> alpha;               // DECISION, final
  std::vector<double> weights_only_alpha;
  std::vector<EpochMetrics> decision_epochs;
  std::vector<std::pair<double, double>> lambda_sweep;  // (lambda, accuracy)
  std::optional<AdaptationResult> decision;
  std::optional<SourceModel> student;
  double student_agreement = 0.0;
  double wall_clock_seconds = 0.0;

  // Throws std::out_of_range if the method did not run.
  const MethodResult& Method(const std::string& name) const;
  bool HasMethod(const std::string& name) const;
};

// Method names as they appear in the tables.
namespace methods {
inline constexpr const char* kSourceBest = "Source-best";
inline constexpr const char* kSourceWorst = "Source-worst";
inline constexpr const char* kUniformEnsemble = "Uniform-Ens";
inline constexpr const char* kShotBest = "SHOT-best";
inline constexpr const char* kShotWorst = "SHOT-worst";
inline constexpr const char* kShotEns = "SHOT-Ens";
inline constexpr const char* kWeightsOnly = "Weights-only";
inline constexpr const char* kDecision = "DECISION";
inline constexpr const char* kDistill = "Distill";
inline constexpr const char* kEntropyOnly = "Ablation-ent";
inline constexpr const char* kEntropyDiversity = "Ablation-ent-div";
inline constexpr const char* kPseudoLabelOnly = "Ablation-pl";
}  // namespace methods

RunReport RunAdaptation(const ExperimentConfig& cfg, const std::vector<SourceModel>& sources);

// Writes run_report.json, methods.csv, metrics.jsonl, alpha.csv,
// per_source.csv, lambda_sweep.csv (when swept) and the adapted models.
void WriteRunArtifacts(const ExperimentConfig& cfg, const RunReport& report, const std::filesystem::path& dir);

// Average-rank Spearman correlation; 0 when either input is constant.
double SpearmanCorrelation(std::span<const double> a, std::span<const double> b);

}  // namespace decision

#endif  // DECISION_EXPERIMENT_H_
