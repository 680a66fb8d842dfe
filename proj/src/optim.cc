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

#include "decision/optim.h"

#include <cmath>
#include <stdexcept>

namespace decision {

SgdMomentum::SgdMomentum(double momentum) : momentum_(momentum) {
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw std::invalid_argument("sgd: momentum must lie in [0, 1)");
  }
}

void SgdMomentum::AddGroup(std::vector<Parameter*> params, double learning_rate, double weight_decay) {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("sgd: learning rate must be positive");
  if (!(weight_decay >= 0.0)) throw std::invalid_argument("sgd: weight decay must be non-negative");
  Group g;
  g.learning_rate = learning_rate;
  g.weight_decay = weight_decay;
  for (Parameter* p : params) {
    if (p->grad().shape() != p->value().shape()) {
      throw ShapeError("sgd", p->value().shape(), p->grad().shape());
    }
    g.velocity.emplace_back(p->value().shape(), 0.0);
  }
  g.params = std::move(params);
  groups_.push_back(std::move(g));
}

void SgdMomentum::Step(double lr_scale) {
  for (Group& g : groups_) {
    const double lr = g.learning_rate * lr_scale;
    for (std::size_t k = 0; k < g.params.size(); ++k) {
      Tensor& w = g.params[k]->value();
      const Tensor& grad = g.params[k]->grad();
      Tensor& v = g.velocity[k];
      if (grad.shape() != w.shape()) throw ShapeError("sgd", w.shape(), grad.shape());
      for (std::size_t i = 0; i < w.size(); ++i) {
        v[i] = momentum_ * v[i] + (grad[i] + g.weight_decay * w[i]);
        w[i] -= lr * v[i];
      }
    }
  }
}

void SgdMomentum::ZeroGrad() {
  for (Group& g : groups_) {
    for (Parameter* p : g.params) p->ZeroGrad();
  }
}

double ScheduledLearningRate(double initial, double progress) {
  if (!(progress >= 0.0 && progress <= 1.0)) {
    throw std::invalid_argument("lr schedule: progress must lie in [0, 1]");
  }
  return initial * std::pow(1.0 + 10.0 * progress, -0.75);
}

}  // namespace decision
