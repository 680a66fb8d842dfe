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

// Compresses an adapted weighted ensemble into one student model trained on
// the ensemble's hard labels.

#ifndef DECISION_DISTILL_H_
#define DECISION_DISTILL_H_

#include <span>
#include <vector>

#include "decision/domains.h"
#include "decision/models.h"

namespace decision {

class TeacherView {
 public:
  // Throws if alpha is not on the simplex or does not match the models.
  TeacherView(std::span<const SourceModel> models, std::span<const double> alpha);

  // argmax_k softmax_k(sum_j alpha_j logits_j(x)), smallest index on ties.
  std::vector<int> Label(const Tensor& x) const;

  std::span<const SourceModel> models() const { return models_; }
  std::span<const double> alpha() const { return alpha_; }

 private:
  std::span<const SourceModel> models_;
  std::vector<double> alpha_;
};

struct StudentConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  double learning_rate = 1e-2;
  double momentum = 0.9;
  double weight_decay = 1e-3;
  std::uint64_t seed = 0;
};

struct StudentResult {
  SourceModel student;
  double agreement = 0.0;  // fraction of target rows where student == teacher
};

// Fresh model with the teachers' architecture, trained with plain cross
// entropy (no smoothing) on (x, teacher label) pairs.
StudentResult TrainStudent(const TeacherView& teacher, const UnlabeledSet& target, const StudentConfig& cfg);

}  // namespace decision

#endif  // DECISION_DISTILL_H_
