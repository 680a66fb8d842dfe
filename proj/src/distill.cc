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

#include "decision/distill.h"

#include <cmath>
#include <stdexcept>

#include "decision/adaptation.h"

namespace decision {

TeacherView::TeacherView(std::span<const SourceModel> models, std::span<const double> alpha)
    : models_(models), alpha_(alpha.begin(), alpha.end()) {
  RequireCompatible(models_);
  if (alpha_.size() != models_.size()) throw std::invalid_argument("teacher: alpha does not match the models");
  double sum = 0.0;
  for (double a : alpha_) {
    if (!(a >= 0.0)) throw std::invalid_argument("teacher: alpha has a negative entry");
    sum += a;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("teacher: alpha does not sum to 1");
}

std::vector<int> TeacherView::Label(const Tensor& x) const { return EnsemblePredict(models_, alpha_, x); }

StudentResult TrainStudent(const TeacherView& teacher, const UnlabeledSet& target, const StudentConfig& cfg) {
  if (target.size() == 0) throw std::invalid_argument("train_student: empty target set");
  LabeledSet pseudo;
  pseudo.inputs = target.inputs;
  pseudo.labels = teacher.Label(target.inputs);
  pseudo.num_classes = teacher.models()[0].num_classes();

  StudentResult out;
  out.student = SourceModel::Create("student", teacher.models()[0].shape(), cfg.seed);
  out.student.label_smoothing = 0.0;
  if (cfg.epochs > 0) {
    SourceTrainConfig tc;
    tc.epochs = cfg.epochs;
    tc.batch_size = cfg.batch_size;
    tc.learning_rate = cfg.learning_rate;
    tc.momentum = cfg.momentum;
    tc.weight_decay = cfg.weight_decay;
    tc.label_smoothing = 0.0;
    tc.seed = cfg.seed;
    TrainSource(out.student, pseudo, tc);
  }
  out.agreement = Accuracy(kernels::ArgmaxRows(out.student.Logits(target.inputs)), pseudo.labels);
  return out;
}

}  // namespace decision
