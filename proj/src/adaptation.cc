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

#include "decision/adaptation.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "decision/optim.h"
#include "decision/random.h"

namespace decision {

std::vector<double> ProjectToSimplex(std::span<const double> raw) {
  if (raw.empty()) throw std::invalid_argument("alpha_project: no weights");
  for (double r : raw) {
    if (!std::isfinite(r)) throw DomainError("alpha_project: non-finite raw weight");
  }
  const Tensor s = kernels::Sigmoid(Tensor::Vector({raw.begin(), raw.end()}));
  const double inv = 1.0 / kernels::Sum(s);
  std::vector<double> alpha(raw.size());
  for (std::size_t j = 0; j < alpha.size(); ++j) alpha[j] = inv * s[j];
  return alpha;
}

Var ProjectToSimplex(const Var& raw) { return NormalizeSum(Sigmoid(raw)); }

AggregationWeights AggregationWeights::Uniform(std::size_t n) {
  AggregationWeights w;
  w.raw.assign(n, 0.0);
  w.Project();
  return w;
}

// ---- Losses -------------------------------------------------------------

Var EntropyLoss(const Var& logits) {
  const double b = static_cast<double>(logits.value().rows());
  return Scale(Sum(Mul(Softmax(logits), LogSoftmax(logits))), -1.0 / b);
}

double EntropyLoss(const Tensor& logits) {
  const double b = static_cast<double>(logits.rows());
  return -kernels::Sum(kernels::Mul(kernels::Softmax(logits), kernels::LogSoftmax(logits))) / b;
}

Var DiversityLoss(const Var& logits) { return Entropy(MeanRows(Softmax(logits))); }

double DiversityLoss(const Tensor& logits) {
  return kernels::Entropy(kernels::MeanRows(kernels::Softmax(logits)))[0];
}

Var PseudoLabelLoss(const Var& logits, std::span<const int> labels) {
  if (labels.size() != logits.value().rows()) {
    throw std::invalid_argument("pl_loss: " + std::to_string(labels.size()) + " pseudo-labels for " +
                                std::to_string(logits.value().rows()) + " rows");
  }
  return Scale(Mean(PickColumns(LogSoftmax(logits), labels)), -1.0);
}

double PseudoLabelLoss(const Tensor& logits, std::span<const int> labels) {
  if (labels.size() != logits.rows()) {
    throw std::invalid_argument("pl_loss: " + std::to_string(labels.size()) + " pseudo-labels for " +
                                std::to_string(logits.rows()) + " rows");
  }
  const Tensor lp = kernels::LogSoftmax(logits);
  const std::size_t k = lp.cols();
  double s = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= k) {
      throw std::out_of_range("pl_loss: label " + std::to_string(labels[i]) + " out of range");
    }
    s += lp[i * k + static_cast<std::size_t>(labels[i])];
  }
  return -(s / static_cast<double>(labels.size()));
}

double TotalLoss(double entropy, double diversity, double pseudo_label, double lambda,
                 const ObjectiveTerms& terms) {
  double total = 0.0;
  if (terms.entropy) total += entropy;
  if (terms.diversity) total -= diversity;
  if (terms.pseudo_label) total += lambda * pseudo_label;
  return total;
}

namespace {

bool UsesPseudoLabels(double lambda, const ObjectiveTerms& terms) { return terms.pseudo_label && lambda != 0.0; }

}  // namespace

ObjectiveValues EvaluateObjective(std::span<const SourceModel> models, std::span<const double> alpha,
                                  const Tensor& x, std::span<const int> labels, double lambda,
                                  const ObjectiveTerms& terms) {
  const Tensor z = AggregateLogits(models, alpha, x);
  ObjectiveValues v;
  v.entropy = EntropyLoss(z);
  v.diversity = DiversityLoss(z);
  if (UsesPseudoLabels(lambda, terms)) v.pseudo_label = PseudoLabelLoss(z, labels);
  v.total = TotalLoss(v.entropy, v.diversity, v.pseudo_label, lambda, terms);
  return v;
}

TapeObjective RecordObjective(Tape& tape, std::span<SourceModel> models, const Var& raw_alpha, const Tensor& x,
                              std::span<const int> labels, double lambda, const ObjectiveTerms& terms,
                              bool train_features) {
  if (raw_alpha.value().size() != models.size()) {
    throw std::invalid_argument("objective: " + std::to_string(raw_alpha.value().size()) + " raw weights for " +
                                std::to_string(models.size()) + " models");
  }
  Var xv = tape.Constant(x);
  Var alpha = ProjectToSimplex(raw_alpha);
  std::vector<Var> logits;
  logits.reserve(models.size());
  for (auto& m : models) logits.push_back(ForwardOnTape(tape, m, xv, train_features).logits);
  Var z = WeightedSum(logits, alpha);

  TapeObjective out;
  out.entropy = EntropyLoss(z);
  out.diversity = DiversityLoss(z);
  Var total = tape.Constant(Tensor::Scalar(0.0));
  if (terms.entropy) total = Add(total, out.entropy);
  if (terms.diversity) total = Sub(total, out.diversity);
  if (UsesPseudoLabels(lambda, terms)) {
    out.pseudo_label = PseudoLabelLoss(z, labels);
    total = Add(total, Scale(out.pseudo_label, lambda));
  }
  out.total = total;
  return out;
}

// ---- Pseudo-labels ------------------------------------------------------

std::vector<SourceOutputs> ComputeSourceOutputs(std::span<const SourceModel> models, const Tensor& x) {
  std::vector<SourceOutputs> out;
  out.reserve(models.size());
  for (const auto& m : models) {
    Tensor f = m.Features(x);
    Tensor p = kernels::Softmax(m.classifier.Forward(f));
    out.push_back({std::move(f), std::move(p)});
  }
  return out;
}

namespace {

void RequireOutputs(std::span<const SourceOutputs> outputs, std::span<const double> alpha) {
  if (outputs.empty()) throw std::invalid_argument("pseudo-labels: no sources");
  if (alpha.size() != outputs.size()) {
    throw std::invalid_argument("pseudo-labels: " + std::to_string(alpha.size()) + " weights for " +
                                std::to_string(outputs.size()) + " sources");
  }
  const Shape fs = outputs[0].features.shape();
  const Shape ps = outputs[0].probs.shape();
  for (const auto& o : outputs) {
    if (o.features.shape() != fs) throw ShapeError("pseudo-labels", fs, o.features.shape());
    if (o.probs.shape() != ps) throw ShapeError("pseudo-labels", ps, o.probs.shape());
  }
  if (fs[0] != ps[0]) throw ShapeError("pseudo-labels", fs, ps);
}

Tensor CombineCentroids(const std::vector<Tensor>& source_centroids, std::span<const double> alpha) {
  Tensor combined(source_centroids[0].shape(), 0.0);
  for (std::size_t j = 0; j < source_centroids.size(); ++j) {
    for (std::size_t i = 0; i < combined.size(); ++i) combined[i] += alpha[j] * source_centroids[j][i];
  }
  return combined;
}

}  // namespace

PseudoLabelState ComputeCentroids(std::span<const SourceOutputs> outputs, std::span<const double> alpha, int round,
                                  const PseudoLabelState* previous) {
  RequireOutputs(outputs, alpha);
  if (round < 0) throw std::invalid_argument("compute_centroids: negative round");
  const std::size_t n_rows = outputs[0].features.shape()[0];
  const std::size_t d = outputs[0].features.shape()[1];
  const std::size_t k = outputs[0].probs.shape()[1];
  if (round > 0) {
    if (!previous || previous->labels.size() != n_rows) {
      throw std::invalid_argument("compute_centroids: round " + std::to_string(round) +
                                  " requires labels from the previous round");
    }
  }

  PseudoLabelState state;
  state.round = round;
  state.populated.assign(k, true);
  for (std::size_t j = 0; j < outputs.size(); ++j) {
    const Tensor& f = outputs[j].features;
    const Tensor& p = outputs[j].probs;
    Tensor sums({k, d}, 0.0);
    std::vector<double> mass(k, 0.0);
    for (std::size_t i = 0; i < n_rows; ++i) {
      for (std::size_t c = 0; c < k; ++c) {
        double w = 0.0;
        if (round == 0) {
          w = p[i * k + c];
        } else {
          w = previous->labels[i] == static_cast<int>(c) ? 1.0 : 0.0;
        }
        if (w == 0.0) continue;
        mass[c] += w;
        for (std::size_t t = 0; t < d; ++t) sums[c * d + t] += w * f[i * d + t];
      }
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (mass[c] > 0.0) {
        for (std::size_t t = 0; t < d; ++t) sums[c * d + t] /= mass[c];
      } else if (round > 0) {
        for (std::size_t t = 0; t < d; ++t) sums[c * d + t] = previous->source_centroids[j][c * d + t];
        if (!previous->populated[c]) state.populated[c] = false;
      } else {
        state.populated[c] = false;
      }
    }
    state.source_centroids.push_back(std::move(sums));
  }
  state.combined = CombineCentroids(state.source_centroids, alpha);
  return state;
}

std::vector<int> AssignPseudoLabels(const PseudoLabelState& state, std::span<const SourceOutputs> outputs,
                                    std::span<const double> alpha, CentroidDistance distance) {
  RequireOutputs(outputs, alpha);
  if (state.source_centroids.size() != outputs.size()) {
    throw std::invalid_argument("assign_pseudo_labels: centroid state does not match the sources");
  }
  const std::size_t n_rows = outputs[0].features.shape()[0];
  const std::size_t d = outputs[0].features.shape()[1];
  const std::size_t k = state.combined.shape()[0];
  std::vector<int> labels(n_rows, 0);
  std::vector<double> mixed(d);
  for (std::size_t i = 0; i < n_rows; ++i) {
    if (distance == CentroidDistance::kCombined) {
      std::fill(mixed.begin(), mixed.end(), 0.0);
      for (std::size_t j = 0; j < outputs.size(); ++j) {
        for (std::size_t t = 0; t < d; ++t) mixed[t] += alpha[j] * outputs[j].features[i * d + t];
      }
    }
    double best = std::numeric_limits<double>::infinity();
    int best_k = -1;
    for (std::size_t c = 0; c < k; ++c) {
      if (!state.populated[c]) continue;
      double dist = 0.0;
      if (distance == CentroidDistance::kPerSource) {
        for (std::size_t j = 0; j < outputs.size(); ++j) {
          double sq = 0.0;
          for (std::size_t t = 0; t < d; ++t) {
            const double diff = outputs[j].features[i * d + t] - state.source_centroids[j][c * d + t];
            sq += diff * diff;
          }
          dist += alpha[j] * sq;
        }
      } else {
        for (std::size_t t = 0; t < d; ++t) {
          const double diff = mixed[t] - state.combined[c * d + t];
          dist += diff * diff;
        }
      }
      if (best_k < 0 || dist < best) {
        best = dist;
        best_k = static_cast<int>(c);
      }
    }
    if (best_k < 0) throw std::logic_error("assign_pseudo_labels: no populated class");
    labels[i] = best_k;
  }
  return labels;
}

PseudoLabelState PseudoLabel(std::span<const SourceOutputs> outputs, std::span<const double> alpha,
                             std::size_t refinement_rounds, CentroidDistance distance) {
  PseudoLabelState state = ComputeCentroids(outputs, alpha, 0);
  state.labels = AssignPseudoLabels(state, outputs, alpha, distance);
  for (std::size_t r = 1; r <= refinement_rounds; ++r) {
    PseudoLabelState next = ComputeCentroids(outputs, alpha, static_cast<int>(r), &state);
    next.labels = AssignPseudoLabels(next, outputs, alpha, distance);
    state = std::move(next);
  }
  return state;
}

// ---- Adaptation loop ----------------------------------------------------

void AdaptationConfig::Validate() const {
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda: must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("batch_size: must be >= 1");
  if (!(backbone_lr > 0.0)) throw std::invalid_argument("backbone_lr: must be > 0");
  if (!(alpha_lr > 0.0)) throw std::invalid_argument("alpha_lr: must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("momentum: must lie in [0, 1)");
  if (!(weight_decay >= 0.0)) throw std::invalid_argument("weight_decay: must be >= 0");
}

AdaptationResult Adapt(std::vector<SourceModel> models, const UnlabeledSet& target, const AdaptationConfig& cfg,
                       const AdaptHooks& hooks) {
  cfg.Validate();
  RequireCompatible(models);
  if (target.size() == 0) throw std::invalid_argument("adapt: empty target set");
  if (target.input_dim() != models[0].features.input_dim()) {
    throw ShapeError("adapt", target.inputs.shape(), Shape{0, models[0].features.input_dim()});
  }

  const std::size_t n = models.size();
  for (auto& m : models) m.classifier.Freeze();
  std::vector<std::uint64_t> frozen_sums;
  for (const auto& m : models) frozen_sums.push_back(m.classifier.Checksum());

  AggregationWeights weights = AggregationWeights::Uniform(n);
  Parameter raw_alpha(Tensor::Vector(weights.raw));

  SgdMomentum opt(cfg.momentum);
  if (cfg.adapt_features) {
    for (auto& m : models) opt.AddGroup(m.features.Parameters(), cfg.backbone_lr, cfg.weight_decay);
  }
  const bool train_alpha = cfg.adapt_weights && n > 1;
  if (train_alpha) opt.AddGroup({&raw_alpha}, cfg.alpha_lr, 0.0);

  const std::size_t rows = target.size();
  const std::size_t batches_per_epoch = (rows + cfg.batch_size - 1) / cfg.batch_size;
  const double total_steps = static_cast<double>(std::max<std::size_t>(1, cfg.epochs * batches_per_epoch));
  const bool use_pl = UsesPseudoLabels(cfg.lambda, cfg.terms);

  AdaptationResult result;
  std::size_t step = 0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto outputs = ComputeSourceOutputs(models, target.inputs);
    std::vector<int> pseudo;
    if (use_pl) pseudo = PseudoLabel(outputs, weights.alpha, cfg.refinement_rounds, cfg.distance).labels;

    EpochMetrics metrics;
    metrics.epoch = epoch;
    metrics.full_diversity = DiversityLoss(AggregateLogits(models, weights.alpha, target.inputs));

    const auto batches = MakeBatches(rows, cfg.batch_size, DeriveSeed(cfg.seed, epoch));
    for (std::size_t it = 0; it < batches.size(); ++it) {
      const auto& idx = batches[it];
      const Tensor x = kernels::GatherRows(target.inputs, idx);
      std::vector<int> batch_labels;
      if (use_pl) {
        batch_labels.reserve(idx.size());
        for (auto r : idx) batch_labels.push_back(pseudo[r]);
      }

      Tape tape;
      Var raw = train_alpha ? tape.Watch(raw_alpha) : tape.Constant(raw_alpha.value());
      TapeObjective obj =
          RecordObjective(tape, models, raw, x, batch_labels, cfg.lambda, cfg.terms, cfg.adapt_features);
      opt.ZeroGrad();
      tape.Backward(obj.total);
      opt.Step(ScheduledLearningRate(1.0, static_cast<double>(step) / total_steps));
      ++step;

      weights.raw = raw_alpha.value().data();
      weights.Project();

      metrics.entropy += obj.entropy.value().item();
      metrics.diversity += obj.diversity.value().item();
      if (use_pl) metrics.pseudo_label += obj.pseudo_label.value().item();
      metrics.total += obj.total.value().item();

      if (cfg.check_invariants) {
        double sum = 0.0;
        for (double a : weights.alpha) {
          if (!(a >= 0.0)) throw std::logic_error("adapt: alpha left the simplex (negative entry)");
          sum += a;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw std::logic_error("adapt: alpha sums to " + std::to_string(sum));
        for (std::size_t j = 0; j < n; ++j) {
          if (models[j].classifier.Checksum() != frozen_sums[j]) {
            throw std::logic_error("adapt: frozen classifier " + std::to_string(j) + " changed");
          }
        }
      }
      if (hooks.on_step) hooks.on_step(StepEvent{epoch, it + 1, weights.alpha, obj.total.value().item()});
    }

    const double nb = static_cast<double>(batches.size());
    metrics.entropy /= nb;
    metrics.diversity /= nb;
    metrics.pseudo_label /= nb;
    metrics.total /= nb;
    metrics.alpha = weights.alpha;
    if (hooks.evaluate) metrics.target_accuracy = hooks.evaluate(models, weights.alpha);
    result.epochs.push_back(std::move(metrics));
  }

  result.models = std::move(models);
  result.alpha = weights.alpha;
  return result;
}

AdaptationResult WeightsOnlyAdapt(std::vector<SourceModel> models, const UnlabeledSet& target,
                                  AdaptationConfig cfg, const AdaptHooks& hooks) {
  cfg.adapt_features = false;
  cfg.adapt_weights = true;
  return Adapt(std::move(models), target, cfg, hooks);
}

// ---- Prediction ---------------------------------------------------------

std::vector<int> EnsemblePredict(std::span<const SourceModel> models, std::span<const double> alpha,
                                 const Tensor& x) {
  return kernels::ArgmaxRows(kernels::Softmax(AggregateLogits(models, alpha, x)));
}

std::vector<int> ShotEnsemblePredict(std::span<const SourceModel> models, const Tensor& x) {
  RequireCompatible(models);
  Tensor mean;
  for (std::size_t j = 0; j < models.size(); ++j) {
    Tensor p = kernels::Softmax(models[j].Logits(x));
    mean = j == 0 ? std::move(p) : kernels::Add(mean, p);
  }
  return kernels::ArgmaxRows(kernels::Scale(mean, 1.0 / static_cast<double>(models.size())));
}

}  // namespace decision
