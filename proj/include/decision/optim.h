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

#ifndef DECISION_OPTIM_H_
#define DECISION_OPTIM_H_

#include <vector>

#include "decision/autodiff.h"

namespace decision {

struct SgdOptions {
  double learning_rate = 1e-2;
  double momentum = 0.9;
  double weight_decay = 1e-3;
};

// SGD with heavy-ball momentum and coupled weight decay:
//   v <- momentum * v + (grad + weight_decay * param)
//   param <- param - lr * v
// Parameters are grouped; each group has its own learning rate and decay.
// The optimizer holds non-owning pointers, so parameters must outlive it and
// must not be relocated.
class SgdMomentum {
 public:
  explicit SgdMomentum(double momentum = 0.9);

  void AddGroup(std::vector<Parameter*> params, double learning_rate, double weight_decay);

  // Applies one update; `lr_scale` multiplies every group's learning rate
  // (used for schedules).
  void Step(double lr_scale = 1.0);
  void ZeroGrad();

  double momentum() const { return momentum_; }
  std::size_t num_groups() const { return groups_.size(); }

 private:
  struct Group {
    std::vector<Parameter*> params;
    std::vector<Tensor> velocity;
    double learning_rate;
    double weight_decay;
  };

  double momentum_;
  std::vector<Group> groups_;
};

// Annealing schedule lr(p) = initial * (1 + 10 p)^(-0.75), p in [0, 1].
double ScheduledLearningRate(double initial, double progress);

}  // namespace decision

#endif  // DECISION_OPTIM_H_
