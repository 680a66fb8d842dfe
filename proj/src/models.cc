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

#include "decision/models.h"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "decision/optim.h"

namespace decision {

AffineLayer::AffineLayer(std::size_t in, std::size_t out)
    : weight_(Tensor({in, out}, 0.0)), bias_(Tensor({out}, 0.0)) {}

void AffineLayer::InitUniform(Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in()));
  std::uniform_real_distribution<double> u(-bound, bound);
  for (double& w : weight_.value().values()) w = u(rng);
  for (double& b : bias_.value().values()) b = u(rng);
}

Tensor AffineLayer::Forward(const Tensor& x) const {
  return kernels::AddBias(kernels::MatMul(x, weight_.value()), bias_.value());
}

Var AffineLayer::Forward(Tape& tape, const Var& x, bool trainable) {
  Var w = trainable ? tape.Watch(weight_) : tape.Constant(weight_.value());
  Var b = trainable ? tape.Watch(bias_) : tape.Constant(bias_.value());
  return AddBias(MatMul(x, w), b);
}

FeatureExtractor::FeatureExtractor(std::size_t input_dim, std::size_t hidden, std::size_t feature_dim) {
  layers_.emplace_back(input_dim, hidden);
  layers_.emplace_back(hidden, feature_dim);
}

Tensor FeatureExtractor::Forward(const Tensor& x) const {
  Tensor h = x;
  for (const auto& layer : layers_) h = kernels::Relu(layer.Forward(h));
  return h;
}

Var FeatureExtractor::Forward(Tape& tape, const Var& x, bool trainable) {
  Var h = x;
  for (auto& layer : layers_) h = Relu(layer.Forward(tape, h, trainable));
  return h;
}

std::vector<Parameter*> FeatureExtractor::Parameters() {
  std::vector<Parameter*> out;
  for (auto& layer : layers_) {
    out.push_back(&layer.weight());
    out.push_back(&layer.bias());
  }
  return out;
}

std::vector<Parameter*> Classifier::Parameters() { return {&layer_.weight(), &layer_.bias()}; }

std::uint64_t Classifier::Checksum() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const Tensor& t) {
    for (double v : t.values()) {
      unsigned char bytes[sizeof(double)];
      std::memcpy(bytes, &v, sizeof(double));
      for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
      }
    }
  };
  mix(layer_.weight().value());
  mix(layer_.bias().value());
  return h;
}

SourceModel SourceModel::Create(std::string domain, const ModelShape& shape, std::uint64_t seed) {
  if (shape.input_dim == 0 || shape.hidden == 0 || shape.feature_dim == 0 || shape.num_classes < 2) {
    throw std::invalid_argument("model shape: dimensions must be positive and K >= 2");
  }
  SourceModel m;
  m.domain = std::move(domain);
  m.features = FeatureExtractor(shape.input_dim, shape.hidden, shape.feature_dim);
  m.classifier = Classifier(shape.feature_dim, shape.num_classes);
  Rng rng(seed);
  for (auto& layer : m.features.layers()) layer.InitUniform(rng);
  m.classifier.layer().InitUniform(rng);
  return m;
}

ModelShape SourceModel::shape() const {
  return ModelShape{features.input_dim(), features.hidden(), features.feature_dim(), classifier.num_classes()};
}

Tensor SourceModel::Features(const Tensor& x) const {
  if (x.rank() != 2 || x.cols() != features.input_dim()) {
    throw ShapeError("forward_features", x.shape(), Shape{0, features.input_dim()});
  }
  return features.Forward(x);
}

Tensor SourceModel::Logits(const Tensor& x) const { return classifier.Forward(Features(x)); }

bool operator==(const SourceModel& a, const SourceModel& b) {
  if (a.domain != b.domain || a.label_smoothing != b.label_smoothing) return false;
  auto same = [](const AffineLayer& x, const AffineLayer& y) {
    return x.weight().value() == y.weight().value() && x.bias().value() == y.bias().value();
  };
  if (a.features.layers().size() != b.features.layers().size()) return false;
  for (std::size_t i = 0; i < a.features.layers().size(); ++i) {
    if (!same(a.features.layers()[i], b.features.layers()[i])) return false;
  }
  return same(a.classifier.layer(), b.classifier.layer());
}

TapeOutputs ForwardOnTape(Tape& tape, SourceModel& model, const Var& x, bool train_features) {
  if (x.value().rank() != 2 || x.value().cols() != model.features.input_dim()) {
    throw ShapeError("forward_features", x.value().shape(), Shape{0, model.features.input_dim()});
  }
  Var f = model.features.Forward(tape, x, train_features);
  Var logits = model.classifier.Forward(tape, f);
  return {f, logits};
}

void RequireCompatible(std::span<const SourceModel> models) {
  if (models.empty()) throw std::invalid_argument("at least one source model is required");
  const std::size_t k = models[0].num_classes();
  const std::size_t d = models[0].feature_dim();
  const std::size_t in = models[0].features.input_dim();
  for (std::size_t j = 1; j < models.size(); ++j) {
    if (models[j].num_classes() != k) {
      throw std::invalid_argument("source " + std::to_string(j) + " has K=" +
                                  std::to_string(models[j].num_classes()) + ", expected " + std::to_string(k));
    }
    if (models[j].feature_dim() != d) {
      throw std::invalid_argument("source " + std::to_string(j) + " has feature dim " +
                                  std::to_string(models[j].feature_dim()) + ", expected " + std::to_string(d));
    }
    if (models[j].features.input_dim() != in) {
      throw std::invalid_argument("source " + std::to_string(j) + " has input dim " +
                                  std::to_string(models[j].features.input_dim()) + ", expected " +
                                  std::to_string(in));
    }
  }
}

Tensor AggregateLogits(std::span<const SourceModel> models, std::span<const double> alpha, const Tensor& x) {
  RequireCompatible(models);
  if (alpha.size() != models.size()) {
    throw std::invalid_argument("aggregate_logits: " + std::to_string(alpha.size()) + " weights for " +
                                std::to_string(models.size()) + " models");
  }
  Tensor out;
  for (std::size_t j = 0; j < models.size(); ++j) {
    Tensor lj = kernels::Scale(models[j].Logits(x), alpha[j]);
    out = j == 0 ? std::move(lj) : kernels::Add(out, lj);
  }
  return out;
}

namespace {

Tensor SmoothedTargets(std::span<const int> labels, std::size_t k, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw std::invalid_argument("label smoothing: epsilon must lie in [0, 1)");
  Tensor q({labels.size(), k}, epsilon / static_cast<double>(k));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= k) {
      throw std::out_of_range("label " + std::to_string(labels[i]) + " outside [0," + std::to_string(k) + ")");
    }
    q[i * k + static_cast<std::size_t>(labels[i])] += 1.0 - epsilon;
  }
  return q;
}

}  // namespace

Var LabelSmoothingCrossEntropy(const Var& logits, std::span<const int> labels, double epsilon) {
  const Tensor& z = logits.value();
  if (z.rank() != 2 || z.shape()[0] != labels.size()) {
    throw ShapeError("label_smoothing_ce: " + std::to_string(labels.size()) + " labels for logits " +
                     ShapeToString(z.shape()));
  }
  Var q = logits.tape()->Constant(SmoothedTargets(labels, z.cols(), epsilon));
  Var nll = Sum(Mul(q, LogSoftmax(logits)));
  return Scale(nll, -1.0 / static_cast<double>(labels.size()));
}

double LabelSmoothingCrossEntropy(const Tensor& logits, std::span<const int> labels, double epsilon) {
  if (logits.rank() != 2 || logits.shape()[0] != labels.size()) {
    throw ShapeError("label_smoothing_ce: " + std::to_string(labels.size()) + " labels for logits " +
                     ShapeToString(logits.shape()));
  }
  const Tensor q = SmoothedTargets(labels, logits.cols(), epsilon);
  const Tensor lp = kernels::LogSoftmax(logits);
  return -kernels::Sum(kernels::Mul(q, lp)) / static_cast<double>(labels.size());
}

double Accuracy(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size() || truth.empty()) {
    throw std::invalid_argument("accuracy: size mismatch or empty input");
  }
  std::size_t hit = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hit += predicted[i] == truth[i];
  return static_cast<double>(hit) / static_cast<double>(truth.size());
}

SourceTrainMetrics TrainSource(SourceModel& model, const LabeledSet& data, const SourceTrainConfig& cfg) {
  if (data.size() == 0) throw std::invalid_argument("train_source: empty dataset");
  if (cfg.epochs < 1) throw std::invalid_argument("train_source: epochs must be >= 1");
  if (data.input_dim() != model.features.input_dim()) {
    throw ShapeError("train_source", data.inputs.shape(), Shape{0, model.features.input_dim()});
  }
  model.label_smoothing = cfg.label_smoothing;

  std::vector<Parameter*> params = model.features.Parameters();
  if (!model.classifier.frozen()) {
    for (Parameter* p : model.classifier.Parameters()) params.push_back(p);
  }
  SgdMomentum opt(cfg.momentum);
  opt.AddGroup(params, cfg.learning_rate, cfg.weight_decay);

  const std::size_t n = data.size();
  const std::size_t batches_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
  const double total_steps = static_cast<double>(cfg.epochs * batches_per_epoch);
  std::size_t step = 0;
  double last_loss = 0.0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    double epoch_loss = 0.0;
    const auto batches = MakeBatches(n, cfg.batch_size, DeriveSeed(cfg.seed, epoch));
    for (const auto& rows : batches) {
      const LabeledSet batch = SelectRows(data, rows);
      Tape tape;
      Var x = tape.Constant(batch.inputs);
      TapeOutputs out = ForwardOnTape(tape, model, x, /*train_features=*/true);
      Var loss = LabelSmoothingCrossEntropy(out.logits, batch.labels, cfg.label_smoothing);
      opt.ZeroGrad();
      tape.Backward(loss);
      opt.Step(ScheduledLearningRate(1.0, static_cast<double>(step) / total_steps));
      ++step;
      epoch_loss += loss.value().item() * static_cast<double>(rows.size());
    }
    last_loss = epoch_loss / static_cast<double>(n);
  }

  SourceTrainMetrics m;
  m.epochs = cfg.epochs;
  m.final_loss = last_loss;
  m.train_accuracy = Accuracy(kernels::ArgmaxRows(model.Logits(data.inputs)), data.labels);
  return m;
}

}  // namespace decision
