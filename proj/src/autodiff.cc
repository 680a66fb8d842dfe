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

#include "decision/autodiff.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace decision {

const Tensor& Var::value() const {
  if (!tape_) throw std::logic_error("Var: not bound to a tape");
  return tape_->node(*this).value;
}

bool Var::requires_grad() const { return tape_ && tape_->node(*this).requires_grad; }

const Tape::Node& Tape::node(const Var& v) const {
  if (v.tape_ != this || v.id_ >= nodes_.size()) {
    throw std::invalid_argument("Tape: variable does not belong to this tape");
  }
  return nodes_[v.id_];
}

Var Tape::Constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::Watch(Parameter& param) {
  Node n;
  n.value = param.value();
  n.requires_grad = true;
  n.param = &param;
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::Record(Tensor value, std::vector<Var> parents, BackwardFn backward) {
  Node n;
  n.value = std::move(value);
  n.parents.reserve(parents.size());
  for (const Var& p : parents) {
    const Node& pn = node(p);
    n.parents.push_back(p.id_);
    n.requires_grad = n.requires_grad || pn.requires_grad;
  }
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

void Tape::Backward(const Var& root) {
  const Node& r = node(root);
  if (!r.value.is_scalar()) {
    throw ShapeError("backward: root must be a scalar, got " + ShapeToString(r.value.shape()));
  }
  for (Node& n : nodes_) {
    n.has_grad = false;
    n.grad = Tensor();
  }
  Node& seed = nodes_[root.id_];
  if (!seed.requires_grad) return;
  seed.grad = Tensor(seed.value.shape(), 1.0);
  seed.has_grad = true;

  std::vector<Tensor*> parent_grads;
  for (std::size_t i = root.id_ + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.has_grad || !n.requires_grad) continue;
    if (n.param) {
      Tensor& g = n.param->grad();
      for (std::size_t k = 0; k < g.size(); ++k) g[k] += n.grad[k];
    }
    if (!n.backward) continue;
    parent_grads.assign(n.parents.size(), nullptr);
    for (std::size_t k = 0; k < n.parents.size(); ++k) {
      Node& p = nodes_[n.parents[k]];
      if (!p.requires_grad) continue;
      if (!p.has_grad) {
        p.grad = Tensor(p.value.shape(), 0.0);
        p.has_grad = true;
      }
      parent_grads[k] = &p.grad;
    }
    n.backward(n.grad, parent_grads);
  }
}

Tensor Tape::Grad(const Var& v) const {
  const Node& n = node(v);
  if (n.has_grad) return n.grad;
  return Tensor(n.value.shape(), 0.0);
}

namespace {

Tape& SameTape(const Var& a, const Var& b) {
  if (!a.tape() || a.tape() != b.tape()) throw std::invalid_argument("autodiff: operands on different tapes");
  return *a.tape();
}

void Accumulate(Tensor* dst, const Tensor& src) {
  if (!dst) return;
  for (std::size_t i = 0; i < src.size(); ++i) (*dst)[i] += src[i];
}

}  // namespace

Var MatMul(const Var& a, const Var& b) {
  Tape& t = SameTape(a, b);
  Tensor av = a.value(), bv = b.value();
  Tensor out = kernels::MatMul(av, bv);
  return t.Record(std::move(out), {a, b}, [av, bv](const Tensor& g, std::span<Tensor* const> pg) {
    if (pg[0]) Accumulate(pg[0], kernels::MatMulTransB(g, bv));
    if (pg[1]) Accumulate(pg[1], kernels::MatMulTransA(av, g));
  });
}

Var AddBias(const Var& x, const Var& bias) {
  Tape& t = SameTape(x, bias);
  Tensor out = kernels::AddBias(x.value(), bias.value());
  return t.Record(std::move(out), {x, bias}, [](const Tensor& g, std::span<Tensor* const> pg) {
    Accumulate(pg[0], g);
    if (pg[1]) {
      const std::size_t c = g.cols();
      for (std::size_t i = 0; i < g.size(); ++i) (*pg[1])[i % c] += g[i];
    }
  });
}

Var Add(const Var& a, const Var& b) {
  Tape& t = SameTape(a, b);
  return t.Record(kernels::Add(a.value(), b.value()), {a, b},
                  [](const Tensor& g, std::span<Tensor* const> pg) {
                    Accumulate(pg[0], g);
                    Accumulate(pg[1], g);
                  });
}

Var Sub(const Var& a, const Var& b) {
  Tape& t = SameTape(a, b);
  return t.Record(kernels::Sub(a.value(), b.value()), {a, b},
                  [](const Tensor& g, std::span<Tensor* const> pg) {
                    Accumulate(pg[0], g);
                    if (pg[1]) Accumulate(pg[1], kernels::Scale(g, -1.0));
                  });
}

Var Mul(const Var& a, const Var& b) {
  Tape& t = SameTape(a, b);
  Tensor av = a.value(), bv = b.value();
  Tensor out = kernels::Mul(av, bv);
  return t.Record(std::move(out), {a, b}, [av, bv](const Tensor& g, std::span<Tensor* const> pg) {
    if (pg[0]) Accumulate(pg[0], kernels::Mul(g, bv));
    if (pg[1]) Accumulate(pg[1], kernels::Mul(g, av));
  });
}

Var Scale(const Var& a, double c) {
  return a.tape()->Record(kernels::Scale(a.value(), c), {a},
                          [c](const Tensor& g, std::span<Tensor* const> pg) {
                            Accumulate(pg[0], kernels::Scale(g, c));
                          });
}

Var Relu(const Var& a) {
  Tensor av = a.value();
  return a.tape()->Record(kernels::Relu(av), {a}, [av](const Tensor& g, std::span<Tensor* const> pg) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (av[i] > 0.0) (*pg[0])[i] += g[i];
    }
  });
}

Var Exp(const Var& a) {
  Tensor out = kernels::Exp(a.value());
  Tensor saved = out;
  return a.tape()->Record(std::move(out), {a}, [saved](const Tensor& g, std::span<Tensor* const> pg) {
    Accumulate(pg[0], kernels::Mul(g, saved));
  });
}

Var Log(const Var& a) {
  Tensor av = a.value();
  Tensor out = kernels::Log(av);
  return a.tape()->Record(std::move(out), {a}, [av](const Tensor& g, std::span<Tensor* const> pg) {
    for (std::size_t i = 0; i < g.size(); ++i) (*pg[0])[i] += g[i] / av[i];
  });
}

Var Sigmoid(const Var& a) {
  Tensor out = kernels::Sigmoid(a.value());
  Tensor s = out;
  return a.tape()->Record(std::move(out), {a}, [s](const Tensor& g, std::span<Tensor* const> pg) {
    for (std::size_t i = 0; i < g.size(); ++i) (*pg[0])[i] += g[i] * s[i] * (1.0 - s[i]);
  });
}

Var Sum(const Var& a) {
  return a.tape()->Record(Tensor::Scalar(kernels::Sum(a.value())), {a},
                          [](const Tensor& g, std::span<Tensor* const> pg) {
                            const double gi = g[0];
                            for (std::size_t i = 0; i < pg[0]->size(); ++i) (*pg[0])[i] += gi;
                          });
}

Var Mean(const Var& a) {
  const double inv = 1.0 / static_cast<double>(a.value().size());
  return a.tape()->Record(Tensor::Scalar(kernels::Mean(a.value())), {a},
                          [inv](const Tensor& g, std::span<Tensor* const> pg) {
                            const double gi = g[0] * inv;
                            for (std::size_t i = 0; i < pg[0]->size(); ++i) (*pg[0])[i] += gi;
                          });
}

Var Softmax(const Var& logits) {
  Tensor p = kernels::Softmax(logits.value());
  Tensor saved = p;
  return logits.tape()->Record(std::move(p), {logits}, [saved](const Tensor& g, std::span<Tensor* const> pg) {
    // dL/dz_j = p_j (g_j - sum_i g_i p_i)
    const std::size_t k = saved.cols();
    for (std::size_t r = 0; r < saved.size() / k; ++r) {
      double dot = 0.0;
      for (std::size_t j = 0; j < k; ++j) dot += g[r * k + j] * saved[r * k + j];
      for (std::size_t j = 0; j < k; ++j) {
        (*pg[0])[r * k + j] += saved[r * k + j] * (g[r * k + j] - dot);
      }
    }
  });
}

Var LogSoftmax(const Var& logits) {
  Tensor lp = kernels::LogSoftmax(logits.value());
  Tensor p = kernels::Softmax(logits.value());
  return logits.tape()->Record(std::move(lp), {logits}, [p](const Tensor& g, std::span<Tensor* const> pg) {
    // dL/dz_j = g_j - p_j sum_i g_i
    const std::size_t k = p.cols();
    for (std::size_t r = 0; r < p.size() / k; ++r) {
      double gs = 0.0;
      for (std::size_t j = 0; j < k; ++j) gs += g[r * k + j];
      for (std::size_t j = 0; j < k; ++j) (*pg[0])[r * k + j] += g[r * k + j] - p[r * k + j] * gs;
    }
  });
}

Var MeanRows(const Var& a) {
  const Shape shape = a.value().shape();
  Tensor out = kernels::MeanRows(a.value());
  return a.tape()->Record(std::move(out), {a}, [shape](const Tensor& g, std::span<Tensor* const> pg) {
    const std::size_t r = shape[0], c = shape[1];
    const double inv = 1.0 / static_cast<double>(r);
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) (*pg[0])[i * c + j] += g[j] * inv;
    }
  });
}

Var NormalizeSum(const Var& v) {
  const Tensor& vv = v.value();
  if (vv.rank() != 1) throw ShapeError("normalize_sum: expected a vector, got " + ShapeToString(vv.shape()));
  const double s = kernels::Sum(vv);
  if (!(s > 0.0)) throw DomainError("normalize_sum: non-positive total " + std::to_string(s));
  Tensor out = kernels::Scale(vv, 1.0 / s);
  Tensor saved = out;
  return v.tape()->Record(std::move(out), {v}, [saved, s](const Tensor& g, std::span<Tensor* const> pg) {
    // d(v_i/s)/dv_j = (delta_ij - out_i) / s
    double dot = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) dot += g[i] * saved[i];
    for (std::size_t j = 0; j < g.size(); ++j) (*pg[0])[j] += (g[j] - dot) / s;
  });
}

Var Entropy(const Var& probs) {
  const Tensor& p = probs.value();
  if (p.rank() != 1) throw ShapeError("entropy: expected a vector, got " + ShapeToString(p.shape()));
  for (double v : p.values()) {
    if (v < 0.0) throw DomainError("entropy: negative probability " + std::to_string(v));
  }
  Tensor saved = p;
  const double h = kernels::Entropy(p)[0];
  return probs.tape()->Record(Tensor::Scalar(h), {probs}, [saved](const Tensor& g, std::span<Tensor* const> pg) {
    for (std::size_t i = 0; i < saved.size(); ++i) {
      if (saved[i] > 0.0) (*pg[0])[i] -= g[0] * (std::log(saved[i]) + 1.0);
    }
  });
}

Var WeightedSum(std::span<const Var> terms, const Var& weights) {
  if (terms.empty()) throw std::invalid_argument("weighted_sum: no terms");
  const Tensor& w = weights.value();
  if (w.rank() != 1 || w.size() != terms.size()) {
    throw ShapeError("weighted_sum: " + std::to_string(terms.size()) + " terms but weights of shape " +
                     ShapeToString(w.shape()));
  }
  const Shape& shape = terms[0].value().shape();
  std::vector<Var> parents;
  std::vector<Tensor> saved;
  parents.reserve(terms.size() + 1);
  saved.reserve(terms.size());
  Tensor out(shape, 0.0);
  for (std::size_t j = 0; j < terms.size(); ++j) {
    SameTape(terms[j], weights);
    const Tensor& tv = terms[j].value();
    if (tv.shape() != shape) throw ShapeError("weighted_sum", shape, tv.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += w[j] * tv[i];
    parents.push_back(terms[j]);
    saved.push_back(tv);
  }
  parents.push_back(weights);
  Tensor wv = w;
  return weights.tape()->Record(
      std::move(out), std::move(parents), [saved, wv](const Tensor& g, std::span<Tensor* const> pg) {
        const std::size_t n = saved.size();
        for (std::size_t j = 0; j < n; ++j) {
          if (pg[j]) {
            for (std::size_t i = 0; i < g.size(); ++i) (*pg[j])[i] += wv[j] * g[i];
          }
          if (pg[n]) {
            double dot = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) dot += g[i] * saved[j][i];
            (*pg[n])[j] += dot;
          }
        }
      });
}

Var PickColumns(const Var& a, std::span<const int> index) {
  const Tensor& av = a.value();
  if (av.rank() != 2 || av.shape()[0] != index.size()) {
    throw ShapeError("pick_columns: " + std::to_string(index.size()) + " indices for matrix " +
                     ShapeToString(av.shape()));
  }
  const std::size_t c = av.shape()[1];
  Tensor out({index.size()});
  std::vector<int> idx(index.begin(), index.end());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || static_cast<std::size_t>(idx[i]) >= c) {
      throw std::out_of_range("pick_columns: index " + std::to_string(idx[i]) + " outside [0," +
                              std::to_string(c) + ")");
    }
    out[i] = av[i * c + static_cast<std::size_t>(idx[i])];
  }
  return a.tape()->Record(std::move(out), {a}, [idx, c](const Tensor& g, std::span<Tensor* const> pg) {
    for (std::size_t i = 0; i < idx.size(); ++i) (*pg[0])[i * c + static_cast<std::size_t>(idx[i])] += g[i];
  });
}

}  // namespace decision
