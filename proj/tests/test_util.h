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

// Shared helpers for the unit and acceptance tests: finite-difference
// gradient checking and random fixtures.

#ifndef DECISION_TESTS_TEST_UTIL_H_
#define DECISION_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "decision/autodiff.h"
#include "decision/models.h"
#include "decision/random.h"
#include "decision/tensor.h"

namespace decision::testing {

// |a - b| / max(|a|, |b|, 1e-6). The floor keeps gradients that are zero up
// to round-off from dominating the ratio.
inline double RelativeError(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

// Builds the scalar objective on a fresh tape, watching whichever
// parameters it needs.
using Objective = std::function<Var(Tape&)>;

inline double Evaluate(const Objective& f) {
  Tape tape;
  return f(tape).value().item();
}

// Largest relative error between reverse-mode gradients and central
// differences with step h, over every entry of every parameter.
inline double MaxGradientError(const std::vector<Parameter*>& params, const Objective& f, double h = 1e-5) {
  for (Parameter* p : params) p->ZeroGrad();
  {
    Tape tape;
    Var root = f(tape);
    tape.Backward(root);
  }
  double worst = 0.0;
  for (Parameter* p : params) {
    const Tensor analytic = p->grad();
    for (std::size_t i = 0; i < p->value().size(); ++i) {
      const double saved = p->value()[i];
      p->value()[i] = saved + h;
      const double plus = Evaluate(f);
      p->value()[i] = saved - h;
      const double minus = Evaluate(f);
      p->value()[i] = saved;
      worst = std::max(worst, RelativeError(analytic[i], (plus - minus) / (2.0 * h)));
    }
  }
  return worst;
}

inline Tensor RandomTensor(Rng& rng, Shape shape, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = n(rng);
  return t;
}

// Smallest |pre-activation| over both hidden layers; finite differences are
// only meaningful away from the relu kink.
inline double MinAbsPreActivation(const SourceModel& m, const Tensor& x) {
  double lo = INFINITY;
  Tensor h = x;
  for (const auto& layer : m.features.layers()) {
    const Tensor z = layer.Forward(h);
    for (double v : z.values()) lo = std::min(lo, std::abs(v));
    h = kernels::Relu(z);
  }
  return lo;
}

}  // namespace decision::testing

#endif  // DECISION_TESTS_TEST_UTIL_H_
