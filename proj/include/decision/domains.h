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

// Synthetic shifted domains, batching and CSV ingestion.

#ifndef DECISION_DOMAINS_H_
#define DECISION_DOMAINS_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "decision/tensor.h"

namespace decision {

enum class GeneratorKind { kTwoMoons, kGaussianMixture };

std::string ToString(GeneratorKind kind);
GeneratorKind ParseGeneratorKind(const std::string& name);

struct DomainSpec {
  std::string name;
  GeneratorKind kind = GeneratorKind::kTwoMoons;
  double rotation = 0.0;  // radians, about the origin
  std::array<double, 2> translation{0.0, 0.0};
  double noise_std = 0.1;
  double label_noise = 0.0;  // probability of resampling each label uniformly
  std::size_t samples = 1000;
  std::size_t num_classes = 2;  // two-moons is always 2
  std::uint64_t seed = 0;

  // Throws std::invalid_argument naming the offending field.
  void Validate() const;
};

// Inputs with labels in [0, num_classes).
struct LabeledSet {
  Tensor inputs;  // [N x in]
  std::vector<int> labels;
  std::size_t num_classes = 0;

  std::size_t size() const { return labels.size(); }
  std::size_t input_dim() const { return inputs.cols(); }
};

// Inputs only. The adaptation API accepts this type, so target labels cannot
// reach it.
struct UnlabeledSet {
  Tensor inputs;  // [N x in]

  std::size_t size() const { return inputs.rank() == 2 ? inputs.shape()[0] : 0; }
  std::size_t input_dim() const { return inputs.cols(); }
};

UnlabeledSet StripLabels(const LabeledSet& set);

// Two-moons: class 0 on (cos t - 0.5, sin t - 0.25), class 1 on the point
// reflection (0.5 - cos t, 0.25 - sin t), t ~ U[0, pi], exactly N/2 per class
// (class 0 gets the extra point for odd N). Gaussian mixture: K isotropic
// blobs with centers on a circle of radius 2. Gaussian noise is added, then
// rotation, then translation, then label corruption. Rows are shuffled.
LabeledSet GenerateDomain(const DomainSpec& spec);

struct TrainEvalSplit {
  LabeledSet train;
  LabeledSet eval;
};

// Seeded split; the train part receives round(train_fraction * N) rows.
TrainEvalSplit SplitTrainEval(const LabeledSet& set, double train_fraction, std::uint64_t seed);

// Seeded permutation of [0, n) chopped into batches; the last batch may be
// short. Every index appears exactly once.
std::vector<std::vector<std::size_t>> MakeBatches(std::size_t n, std::size_t batch_size,
                                                  std::uint64_t epoch_seed);

LabeledSet SelectRows(const LabeledSet& set, const std::vector<std::size_t>& rows);

class CsvError : public std::runtime_error {
 public:
  CsvError(const std::string& what, std::size_t line)
      : std::runtime_error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Reads a header row plus numeric rows. A final header column named "label"
// yields a LabeledSet (labels must be non-negative integers; K is max + 1),
// otherwise an UnlabeledSet. Line numbers in errors are 1-based and count
// the header.
std::variant<LabeledSet, UnlabeledSet> LoadCsv(const std::filesystem::path& path);

void WriteCsv(const std::filesystem::path& path, const LabeledSet& set);

}  // namespace decision

#endif  // DECISION_DOMAINS_H_
