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

#ifndef DECISION_TENSOR_H_
#define DECISION_TENSOR_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace decision {

using Shape = std::vector<std::size_t>;

std::string ShapeToString(const Shape& shape);
std::size_t NumElements(const Shape& shape);

// Raised when operand shapes do not conform. The message names both shapes.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
  ShapeError(const std::string& op, const Shape& a, const Shape& b);
};

// Raised for arguments outside an operation's mathematical domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Dense row-major array of doubles. Value semantics; no autodiff state.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor Scalar(double v) { return Tensor({1}, {v}); }
  static Tensor Vector(std::vector<double> v);
  static Tensor Matrix(std::initializer_list<std::initializer_list<double>> rows);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return values_.size(); }
  std::size_t rows() const;
  std::size_t cols() const;
  bool is_scalar() const { return values_.size() == 1; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  const std::vector<double>& data() const { return values_; }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& at(std::size_t r, std::size_t c) { return values_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }
  double item() const;

  std::span<double> row(std::size_t r);
  std::span<const double> row(std::size_t r) const;

  void Fill(double v);
  bool AllFinite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> values_;
};

// Plain (non-recording) kernels. The autodiff ops in autodiff.h are built on
// these and agree with them bit-for-bit in the forward direction.
namespace kernels {

Tensor MatMul(const Tensor& a, const Tensor& b);
Tensor MatMulTransA(const Tensor& a, const Tensor& b);  // a^T b
Tensor MatMulTransB(const Tensor& a, const Tensor& b);  // a b^T
Tensor AddBias(const Tensor& x, const Tensor& bias);
Tensor Add(const Tensor& a, const Tensor& b);
Tensor Sub(const Tensor& a, const Tensor& b);
Tensor Mul(const Tensor& a, const Tensor& b);
Tensor Scale(const Tensor& a, double c);
Tensor Relu(const Tensor& a);
Tensor Exp(const Tensor& a);
Tensor Log(const Tensor& a);
Tensor Sigmoid(const Tensor& a);
double Sum(const Tensor& a);
double Mean(const Tensor& a);

// Last-axis softmax with max subtraction.
Tensor Softmax(const Tensor& logits);
Tensor LogSoftmax(const Tensor& logits);

// Mean over rows of a [rows x cols] tensor; returns [cols].
Tensor MeanRows(const Tensor& a);

// Shannon entropy in nats of the last axis, 0 log 0 = 0. Returns one value
// per slice.
std::vector<double> Entropy(const Tensor& probs);

// Index of the largest entry per row; smallest index wins ties.
std::vector<int> ArgmaxRows(const Tensor& a);

Tensor GatherRows(const Tensor& a, std::span<const std::size_t> rows);

}  // namespace kernels
}  // namespace decision

#endif  // DECISION_TENSOR_H_
