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

#include "decision/tensor.h"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace decision {

std::string ShapeToString(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::size_t NumElements(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

ShapeError::ShapeError(const std::string& op, const Shape& a, const Shape& b)
    : std::invalid_argument(op + ": shape mismatch " + ShapeToString(a) +
                            " vs " + ShapeToString(b)) {}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), values_(NumElements(shape_), fill) {
  for (auto d : shape_) {
    if (d == 0) throw ShapeError("Tensor: zero-sized dimension in " + ShapeToString(shape_));
  }
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  for (auto d : shape_) {
    if (d == 0) throw ShapeError("Tensor: zero-sized dimension in " + ShapeToString(shape_));
  }
  if (values_.size() != NumElements(shape_)) {
    throw ShapeError("Tensor: " + std::to_string(values_.size()) +
                     " values do not fill shape " + ShapeToString(shape_));
  }
}

Tensor Tensor::Vector(std::vector<double> v) {
  Shape s{v.size()};
  return Tensor(std::move(s), std::move(v));
}

Tensor Tensor::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  std::size_t r = rows.size();
  std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> v;
  v.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("Tensor::Matrix: ragged rows");
    v.insert(v.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(v));
}

std::size_t Tensor::rows() const {
  if (shape_.size() == 1) return 1;
  if (shape_.size() != 2) throw ShapeError("rows() on tensor of shape " + ShapeToString(shape_));
  return shape_[0];
}

std::size_t Tensor::cols() const {
  if (shape_.empty()) throw ShapeError("cols() on empty tensor");
  return shape_.back();
}

double Tensor::item() const {
  if (values_.size() != 1) throw ShapeError("item() on tensor of shape " + ShapeToString(shape_));
  return values_[0];
}

std::span<double> Tensor::row(std::size_t r) {
  std::size_t c = cols();
  return std::span<double>(values_).subspan(r * c, c);
}

std::span<const double> Tensor::row(std::size_t r) const {
  std::size_t c = cols();
  return std::span<const double>(values_).subspan(r * c, c);
}

void Tensor::Fill(double v) { std::fill(values_.begin(), values_.end(), v); }

bool Tensor::AllFinite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

namespace kernels {
namespace {

void RequireMatrix(const char* op, const Tensor& a) {
  if (a.rank() != 2) throw ShapeError(std::string(op) + ": expected a matrix, got " + ShapeToString(a.shape()));
}

void RequireSameShape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) throw ShapeError(op, a.shape(), b.shape());
}

template <typename F>
Tensor Map(const Tensor& a, F f) {
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
  return out;
}

template <typename F>
Tensor Zip(const char* op, const Tensor& a, const Tensor& b, F f) {
  RequireSameShape(op, a, b);
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i], b[i]);
  return out;
}

}  // namespace

Tensor MatMul(const Tensor& a, const Tensor& b) {
  RequireMatrix("matmul", a);
  RequireMatrix("matmul", b);
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  if (b.shape()[0] != k) throw ShapeError("matmul", a.shape(), b.shape());
  Tensor out({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += aip * b[p * n + j];
    }
  }
  return out;
}

Tensor MatMulTransA(const Tensor& a, const Tensor& b) {
  RequireMatrix("matmul_trans_a", a);
  RequireMatrix("matmul_trans_a", b);
  const std::size_t k = a.shape()[0], m = a.shape()[1], n = b.shape()[1];
  if (b.shape()[0] != k) throw ShapeError("matmul_trans_a", a.shape(), b.shape());
  Tensor out({m, n});
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t i = 0; i < m; ++i) {
      const double api = a[p * m + i];
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += api * b[p * n + j];
    }
  }
  return out;
}

Tensor MatMulTransB(const Tensor& a, const Tensor& b) {
  RequireMatrix("matmul_trans_b", a);
  RequireMatrix("matmul_trans_b", b);
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[0];
  if (b.shape()[1] != k) throw ShapeError("matmul_trans_b", a.shape(), b.shape());
  Tensor out({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[j * k + p];
      out[i * n + j] = s;
    }
  }
  return out;
}

Tensor AddBias(const Tensor& x, const Tensor& bias) {
  RequireMatrix("add_bias", x);
  const std::size_t n = x.shape()[1];
  if (bias.rank() != 1 || bias.size() != n) throw ShapeError("add_bias", x.shape(), bias.shape());
  Tensor out = x;
  for (std::size_t i = 0; i < x.shape()[0]; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] += bias[j];
  }
  return out;
}

Tensor Add(const Tensor& a, const Tensor& b) {
  return Zip("add", a, b, [](double x, double y) { return x + y; });
}

Tensor Sub(const Tensor& a, const Tensor& b) {
  return Zip("sub", a, b, [](double x, double y) { return x - y; });
}

Tensor Mul(const Tensor& a, const Tensor& b) {
  return Zip("mul", a, b, [](double x, double y) { return x * y; });
}

Tensor Scale(const Tensor& a, double c) {
  return Map(a, [c](double x) { return c * x; });
}

Tensor Relu(const Tensor& a) {
  return Map(a, [](double x) { return x > 0.0 ? x : 0.0; });
}

Tensor Exp(const Tensor& a) {
  return Map(a, [](double x) { return std::exp(x); });
}

Tensor Log(const Tensor& a) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i] > 0.0)) {
      throw DomainError("log: non-positive input " + std::to_string(a[i]) + " at index " +
                        std::to_string(i));
    }
  }
  return Map(a, [](double x) { return std::log(x); });
}

Tensor Sigmoid(const Tensor& a) {
  return Map(a, [](double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  });
}

double Sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.values()) s += v;
  return s;
}

double Mean(const Tensor& a) { return Sum(a) / static_cast<double>(a.size()); }

Tensor Softmax(const Tensor& logits) {
  const std::size_t k = logits.cols();
  Tensor out(logits.shape());
  for (std::size_t r = 0; r < logits.size() / k; ++r) {
    const double* in = logits.values().data() + r * k;
    double* o = out.values().data() + r * k;
    const double mx = *std::max_element(in, in + k);
    double z = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      o[j] = std::exp(in[j] - mx);
      z += o[j];
    }
    for (std::size_t j = 0; j < k; ++j) o[j] /= z;
  }
  return out;
}

Tensor LogSoftmax(const Tensor& logits) {
  const std::size_t k = logits.cols();
  Tensor out(logits.shape());
  for (std::size_t r = 0; r < logits.size() / k; ++r) {
    const double* in = logits.values().data() + r * k;
    double* o = out.values().data() + r * k;
    const double mx = *std::max_element(in, in + k);
    double z = 0.0;
    for (std::size_t j = 0; j < k; ++j) z += std::exp(in[j] - mx);
    const double lse = mx + std::log(z);
    for (std::size_t j = 0; j < k; ++j) o[j] = in[j] - lse;
  }
  return out;
}

Tensor MeanRows(const Tensor& a) {
  RequireMatrix("mean_rows", a);
  const std::size_t r = a.shape()[0], c = a.shape()[1];
  Tensor out({c});
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) out[j] += a[i * c + j];
  }
  for (std::size_t j = 0; j < c; ++j) out[j] /= static_cast<double>(r);
  return out;
}

std::vector<double> Entropy(const Tensor& probs) {
  const std::size_t k = probs.cols();
  std::vector<double> out(probs.size() / k, 0.0);
  for (std::size_t r = 0; r < out.size(); ++r) {
    double h = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double p = probs[r * k + j];
      if (p > 0.0) h -= p * std::log(p);
    }
    out[r] = h;
  }
  return out;
}

std::vector<int> ArgmaxRows(const Tensor& a) {
  const std::size_t k = a.cols();
  std::vector<int> out(a.size() / k);
  for (std::size_t r = 0; r < out.size(); ++r) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < k; ++j) {
      if (a[r * k + j] > a[r * k + best]) best = j;
    }
    out[r] = static_cast<int>(best);
  }
  return out;
}

Tensor GatherRows(const Tensor& a, std::span<const std::size_t> rows) {
  RequireMatrix("gather_rows", a);
  const std::size_t c = a.shape()[1];
  if (rows.empty()) throw ShapeError("gather_rows: empty row selection");
  Tensor out({rows.size(), c});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= a.shape()[0]) {
      throw std::out_of_range("gather_rows: row " + std::to_string(rows[i]) + " out of range");
    }
    std::copy_n(a.values().data() + rows[i] * c, c, out.values().data() + i * c);
  }
  return out;
}

}  // namespace kernels
}  // namespace decision
