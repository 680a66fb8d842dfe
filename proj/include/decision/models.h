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

// Source models: a trainable feature extractor followed by an affine
// classifier that is frozen during adaptation.

#ifndef DECISION_MODELS_H_
#define DECISION_MODELS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "decision/autodiff.h"
#include "decision/domains.h"
#include "decision/random.h"
#include "decision/tensor.h"

namespace decision {

struct ModelShape {
  std::size_t input_dim = 2;
  std::size_t hidden = 64;
  std::size_t feature_dim = 16;
  std::size_t num_classes = 2;

  friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

// y = x W + b with W of shape [in x out].
class AffineLayer {
 public:
  AffineLayer() = default;
  AffineLayer(std::size_t in, std::size_t out);

  // W, b ~ U[-1/sqrt(in), 1/sqrt(in)].
  void InitUniform(Rng& rng);

  Tensor Forward(const Tensor& x) const;
  // Parameters enter the tape as watched leaves when `trainable`, otherwise
  // as constants.
  Var Forward(Tape& tape, const Var& x, bool trainable);

  std::size_t in() const { return weight_.value().shape()[0]; }
  std::size_t out() const { return weight_.value().shape()[1]; }

  Parameter& weight() { return weight_; }
  Parameter& bias() { return bias_; }
  const Parameter& weight() const { return weight_; }
  const Parameter& bias() const { return bias_; }

 private:
  Parameter weight_;
  Parameter bias_;
};

// Two affine layers, each followed by relu: in -> hidden -> feature_dim.
class FeatureExtractor {
 public:
  FeatureExtractor() = default;
  FeatureExtractor(std::size_t input_dim, std::size_t hidden, std::size_t feature_dim);

  Tensor Forward(const Tensor& x) const;
  Var Forward(Tape& tape, const Var& x, bool trainable);

  std::size_t input_dim() const { return layers_.front().in(); }
  std::size_t feature_dim() const { return layers_.back().out(); }
  std::size_t hidden() const { return layers_.front().out(); }

  std::vector<AffineLayer>& layers() { return layers_; }
  const std::vector<AffineLayer>& layers() const { return layers_; }
  std::vector<Parameter*> Parameters();

 private:
  std::vector<AffineLayer> layers_;
};

class Classifier {
 public:
  Classifier() = default;
  Classifier(std::size_t feature_dim, std::size_t num_classes) : layer_(feature_dim, num_classes) {}

  Tensor Forward(const Tensor& features) const { return layer_.Forward(features); }
  // A frozen classifier always enters the tape as constants.
  Var Forward(Tape& tape, const Var& features) { return layer_.Forward(tape, features, !frozen_); }

  void Freeze() { frozen_ = true; }
  void Unfreeze() { frozen_ = false; }
  bool frozen() const { return frozen_; }
  std::size_t num_classes() const { return layer_.out(); }

  AffineLayer& layer() { return layer_; }
  const AffineLayer& layer() const { return layer_; }
  std::vector<Parameter*> Parameters();

  // FNV-1a over the raw parameter bytes.
  std::uint64_t Checksum() const;

 private:
  AffineLayer layer_;
  bool frozen_ = false;
};

struct SourceModel {
  std::string domain;
  double label_smoothing = 0.1;
  FeatureExtractor features;
  Classifier classifier;

  // Fresh model with seeded uniform initialization.
  static SourceModel Create(std::string domain, const ModelShape& shape, std::uint64_t seed);

  ModelShape shape() const;
  std::size_t num_classes() const { return classifier.num_classes(); }
  std::size_t feature_dim() const { return features.feature_dim(); }

  // Throws ShapeError if x is not [b x input_dim].
  Tensor Features(const Tensor& x) const;
  Tensor Logits(const Tensor& x) const;

  friend bool operator==(const SourceModel& a, const SourceModel& b);
};

struct TapeOutputs {
  Var features;
  Var logits;
};

TapeOutputs ForwardOnTape(Tape& tape, SourceModel& model, const Var& x, bool train_features);

// Throws std::invalid_argument unless every model shares K and the feature
// dimension d.
void RequireCompatible(std::span<const SourceModel> models);

// sum_j alpha_j * logits_j(x).
Tensor AggregateLogits(std::span<const SourceModel> models, std::span<const double> alpha, const Tensor& x);

// Mean over rows of -sum_k q_k log softmax_k(logits) with
// q = (1 - eps) onehot(label) + eps / K.
Var LabelSmoothingCrossEntropy(const Var& logits, std::span<const int> labels, double epsilon);
double LabelSmoothingCrossEntropy(const Tensor& logits, std::span<const int> labels, double epsilon);

double Accuracy(std::span<const int> predicted, std::span<const int> truth);

struct SourceTrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  double learning_rate = 1e-2;
  double momentum = 0.9;
  double weight_decay = 1e-3;
  double label_smoothing = 0.1;
  std::uint64_t seed = 0;
};

struct SourceTrainMetrics {
  std::size_t epochs = 0;
  double final_loss = 0.0;
  double train_accuracy = 0.0;
};

// Supervised training of features and classifier. Leaves the classifier
// unfrozen.
SourceTrainMetrics TrainSource(SourceModel& model, const LabeledSet& data, const SourceTrainConfig& cfg);

}  // namespace decision

#endif  // DECISION_MODELS_H_
