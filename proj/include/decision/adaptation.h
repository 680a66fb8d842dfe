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

// Source-free multi-source adaptation.
//
// The target model is theta_T(x) = sum_j alpha_j psi_j(phi_j(x)) with every
// classifier psi_j frozen. The feature extractors phi_j and the raw weights
// alpha~ are trained jointly on unlabeled target data by minimizing
//
//   L_tot = L_ent - L_div + lambda * L_pl
//
// where L_ent is the mean conditional entropy of softmax(theta_T(x)), L_div
// the entropy of the mean prediction over the batch, and L_pl the cross
// entropy against nearest-centroid pseudo-labels refreshed every epoch.
// The simplex constraint on alpha is handled by the projection
// alpha = normalize(sigmoid(alpha~)) applied after every optimizer step.

#ifndef DECISION_ADAPTATION_H_
#define DECISION_ADAPTATION_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "decision/autodiff.h"
#include "decision/domains.h"
#include "decision/models.h"

namespace decision {

// s_j = 1 / (1 + exp(-raw_j)), alpha_j = s_j / sum_i s_i.
std::vector<double> ProjectToSimplex(std::span<const double> raw);
Var ProjectToSimplex(const Var& raw);

struct AggregationWeights {
  std::vector<double> raw;
  std::vector<double> alpha;

  // raw = 0, hence alpha = 1/n.
  static AggregationWeights Uniform(std::size_t n);
  void Project() { alpha = ProjectToSimplex(raw); }
};

// ---- Losses -------------------------------------------------------------

// Mean over rows of -sum_k p_k log p_k with p = softmax(logits).
Var EntropyLoss(const Var& logits);
double EntropyLoss(const Tensor& logits);

// -sum_k pbar_k log pbar_k with pbar the row-mean of softmax(logits).
Var DiversityLoss(const Var& logits);
double DiversityLoss(const Tensor& logits);

// Mean over rows of -log softmax_{label}(logits).
Var PseudoLabelLoss(const Var& logits, std::span<const int> labels);
double PseudoLabelLoss(const Tensor& logits, std::span<const int> labels);

// Which terms of L_tot are active; the defaults give the full objective.
struct ObjectiveTerms {
  bool entropy = true;
  bool diversity = true;
  bool pseudo_label = true;
};

double TotalLoss(double entropy, double diversity, double pseudo_label, double lambda,
                 const ObjectiveTerms& terms = {});

struct ObjectiveValues {
  double entropy = 0.0;
  double diversity = 0.0;
  double pseudo_label = 0.0;
  double total = 0.0;
};

// Plain evaluation of the objective for fixed models and weights. `labels`
// may be empty when the pseudo-label term is inactive.
ObjectiveValues EvaluateObjective(std::span<const SourceModel> models, std::span<const double> alpha,
                                  const Tensor& x, std::span<const int> labels, double lambda,
                                  const ObjectiveTerms& terms = {});

struct TapeObjective {
  Var entropy;
  Var diversity;
  Var pseudo_label;  // unset when the term is inactive
  Var total;
};

// Records the objective on `tape`. `raw_alpha` is projected on the tape, so
// gradients reach it through the aggregation.
TapeObjective RecordObjective(Tape& tape, std::span<SourceModel> models, const Var& raw_alpha, const Tensor& x,
                              std::span<const int> labels, double lambda, const ObjectiveTerms& terms,
                              bool train_features);

// ---- Pseudo-labels ------------------------------------------------------

// Features and softmax outputs of one source on the whole target set.
struct SourceOutputs {
  Tensor features;  // [N x d]
  Tensor probs;     // [N x K]
};

std::vector<SourceOutputs> ComputeSourceOutputs(std::span<const SourceModel> models, const Tensor& x);

enum class CentroidDistance {
  // sum_j alpha_j ||phi_j(x) - mu_{k,j}||^2
  kPerSource,
  // ||sum_j alpha_j phi_j(x) - mu_k||^2 with mu_k = sum_j alpha_j mu_{k,j}
  kCombined,
};

struct PseudoLabelState {
  std::vector<Tensor> source_centroids;  // n entries of [K x d]
  Tensor combined;                       // [K x d]
  std::vector<bool> populated;           // classes with non-zero centroid mass
  std::vector<int> labels;               // one per target row, empty until assigned
  int round = 0;
};

// Round 0 weights each point by its softmax probability; round r >= 1 uses
// the indicator of the labels in `previous`. A class that receives no points
// in round r >= 1 keeps its centroid from `previous`.
PseudoLabelState ComputeCentroids(std::span<const SourceOutputs> outputs, std::span<const double> alpha, int round,
                                  const PseudoLabelState* previous = nullptr);

// Nearest populated centroid; ties go to the smaller class index.
std::vector<int> AssignPseudoLabels(const PseudoLabelState& state, std::span<const SourceOutputs> outputs,
                                    std::span<const double> alpha,
                                    CentroidDistance distance = CentroidDistance::kPerSource);

// Round 0 followed by `refinement_rounds` indicator rounds.
PseudoLabelState PseudoLabel(std::span<const SourceOutputs> outputs, std::span<const double> alpha,
                             std::size_t refinement_rounds,
                             CentroidDistance distance = CentroidDistance::kPerSource);

// ---- Adaptation loop ----------------------------------------------------

struct AdaptationConfig {
  double lambda = 0.3;
  std::size_t epochs = 15;
  std::size_t batch_size = 32;
  double backbone_lr = 1e-3;
  double alpha_lr = 1e-2;
  double momentum = 0.9;
  double weight_decay = 1e-3;  // not applied to the raw weights
  std::uint64_t seed = 0;
  std::size_t refinement_rounds = 1;
  CentroidDistance distance = CentroidDistance::kPerSource;
  ObjectiveTerms terms;
  bool adapt_features = true;
  bool adapt_weights = true;
  // Throw std::logic_error from inside the loop if alpha leaves the simplex
  // or a frozen classifier changes.
  bool check_invariants = false;

  void Validate() const;
};

struct EpochMetrics {
  std::size_t epoch = 0;  // 1-based
  double entropy = 0.0;   // batch averages over the epoch
  double diversity = 0.0;
  double pseudo_label = 0.0;
  double total = 0.0;
  double full_diversity = 0.0;  // entropy of pbar over the whole target set at epoch start
  std::vector<double> alpha;    // after the epoch
  std::optional<double> target_accuracy;
};

struct StepEvent {
  std::size_t epoch = 0;
  std::size_t iteration = 0;
  std::span<const double> alpha;
  double loss = 0.0;
};

struct AdaptHooks {
  std::function<void(const StepEvent&)> on_step;
  // Optional held-out evaluation called after each epoch. It receives the
  // models and alpha only, never the adaptation data.
  std::function<double(std::span<const SourceModel>, std::span<const double>)> evaluate;
};

struct AdaptationResult {
  std::vector<SourceModel> models;
  std::vector<double> alpha;
  std::vector<EpochMetrics> epochs;
};

AdaptationResult Adapt(std::vector<SourceModel> models, const UnlabeledSet& target, const AdaptationConfig& cfg,
                       const AdaptHooks& hooks = {});

// Feature extractors stay fixed; only the aggregation weights are trained.
AdaptationResult WeightsOnlyAdapt(std::vector<SourceModel> models, const UnlabeledSet& target,
                                  AdaptationConfig cfg, const AdaptHooks& hooks = {});

// ---- Prediction ---------------------------------------------------------

// argmax_k softmax_k(sum_j alpha_j logits_j(x)).
std::vector<int> EnsemblePredict(std::span<const SourceModel> models, std::span<const double> alpha,
                                 const Tensor& x);

// argmax of the uniform average of per-model softmax outputs.
std::vector<int> ShotEnsemblePredict(std::span<const SourceModel> models, const Tensor& x);

}  // namespace decision

#endif  // DECISION_ADAPTATION_H_
