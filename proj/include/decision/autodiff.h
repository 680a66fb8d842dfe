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

// Reverse-mode automatic differentiation over Tensor.
//
// A Tape owns an append-only list of nodes. Each op appends one node whose
// parents are already on the tape, so tape order is a topological order and
// Backward() is a single reverse sweep. Trainable state lives in Parameter
// objects outside the tape; Tape::Watch() binds a Parameter to a leaf node and
// Backward() accumulates the leaf's gradient into Parameter::grad().
//
// A tape is single-writer. Build one per forward/backward pass.

#ifndef DECISION_AUTODIFF_H_
#define DECISION_AUTODIFF_H_

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "decision/tensor.h"

namespace decision {

class Parameter {
 public:
  Parameter() = default;
  explicit Parameter(Tensor value) : value_(std::move(value)), grad_(value_.shape()) {}

  Tensor& value() { return value_; }
  const Tensor& value() const { return value_; }
  Tensor& grad() { return grad_; }
  const Tensor& grad() const { return grad_; }
  void ZeroGrad() { grad_.Fill(0.0); }

 private:
  Tensor value_;
  Tensor grad_;
};

class Tape;

// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;
  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  // Receives the gradient flowing into the node and one gradient buffer per
  // parent (nullptr for parents that do not require gradients).
  using BackwardFn = std::function<void(const Tensor& grad_out, std::span<Tensor* const> parent_grads)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var Constant(Tensor value);
  Var Watch(Parameter& param);

  // Appends an op node. `backward` may be empty when no parent requires
  // gradients.
  Var Record(Tensor value, std::vector<Var> parents, BackwardFn backward);

  // Seeds d(root)/d(root) = 1 and sweeps the tape once in reverse. Parameter
  // gradients are accumulated (not overwritten).
  void Backward(const Var& root);

  // Gradient of a node after Backward(); zeros if none reached it.
  Tensor Grad(const Var& v) const;

  std::size_t size() const { return nodes_.size(); }

 private:
  friend class Var;

  struct Node {
    Tensor value;
    Tensor grad;
    bool has_grad = false;
    bool requires_grad = false;
    std::vector<std::size_t> parents;
    BackwardFn backward;
    Parameter* param = nullptr;
  };

  const Node& node(const Var& v) const;

  std::vector<Node> nodes_;
};

// Differentiable ops. Operands must live on the same tape.
Var MatMul(const Var& a, const Var& b);
Var AddBias(const Var& x, const Var& bias);
Var Add(const Var& a, const Var& b);
Var Sub(const Var& a, const Var& b);
Var Mul(const Var& a, const Var& b);
Var Scale(const Var& a, double c);
Var Relu(const Var& a);
Var Exp(const Var& a);
Var Log(const Var& a);
Var Sigmoid(const Var& a);
Var Sum(const Var& a);
Var Mean(const Var& a);
Var Softmax(const Var& logits);
Var LogSoftmax(const Var& logits);
Var MeanRows(const Var& a);

// v / sum(v) for a vector with positive sum.
Var NormalizeSum(const Var& v);

// Entropy of a probability vector, 0 log 0 = 0. Entries that are exactly zero
// contribute neither value nor gradient.
Var Entropy(const Var& probs);

// sum_j weights[j] * terms[j]; all terms share one shape, weights is [n].
Var WeightedSum(std::span<const Var> terms, const Var& weights);

// out[i] = a[i, index[i]] for a [rows x cols] matrix; returns [rows].
Var PickColumns(const Var& a, std::span<const int> index);

}  // namespace decision

#endif  // DECISION_AUTODIFF_H_
