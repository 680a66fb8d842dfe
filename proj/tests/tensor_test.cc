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

#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <random>

#include "test_util.h"

namespace decision {
namespace {

using Quad = boost::multiprecision::cpp_bin_float_quad;

TEST(TensorTest, ShapeAndValuesMustAgree) {
  EXPECT_THROW(Tensor({2, 2}, std::vector<double>{1, 2, 3}), ShapeError);
  EXPECT_THROW(Tensor({0, 3}), ShapeError);
  Tensor t({2, 3}, 1.5);
  EXPECT_EQ(t.size(), 6u);
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.cols(), 3u);
}

TEST(KernelsTest, MatMulByIdentity) {
  const Tensor a = Tensor::Matrix({{1, 2}, {3, 4}});
  const Tensor eye = Tensor::Matrix({{1, 0}, {0, 1}});
  EXPECT_EQ(kernels::MatMul(a, eye), a);
}

TEST(KernelsTest, MatMulShapeMismatchNamesBothShapes) {
  const Tensor a({2, 3});
  const Tensor b({2, 3});
  try {
    kernels::MatMul(a, b);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("[2x3]"), std::string::npos) << msg;
    EXPECT_NE(msg.find("matmul"), std::string::npos) << msg;
  }
}

TEST(KernelsTest, TransposedProductsMatchExplicitTranspose) {
  const Tensor a = Tensor::Matrix({{1, 2, 3}, {4, 5, 6}});
  const Tensor b = Tensor::Matrix({{1, 0}, {2, 1}});
  const Tensor at = Tensor::Matrix({{1, 4}, {2, 5}, {3, 6}});
  EXPECT_EQ(kernels::MatMulTransA(b, a), kernels::MatMul(Tensor::Matrix({{1, 2}, {0, 1}}), a));
  EXPECT_EQ(kernels::MatMulTransB(at, at), kernels::MatMul(at, a));
}

TEST(KernelsTest, ReluAndMean) {
  EXPECT_EQ(kernels::Relu(Tensor::Vector({-1, 0, 2})), Tensor::Vector({0, 0, 2}));
  EXPECT_EQ(kernels::Mean(Tensor::Vector({2, 4, 6})), 4.0);
}

TEST(KernelsTest, LogOfNonPositiveIsDomainError) {
  EXPECT_THROW(kernels::Log(Tensor::Vector({1.0, 0.0})), DomainError);
  EXPECT_THROW(kernels::Log(Tensor::Vector({-2.0})), DomainError);
  EXPECT_DOUBLE_EQ(kernels::Log(Tensor::Vector({std::exp(2.0)}))[0], 2.0);
}

TEST(KernelsTest, AddBiasBroadcastsOverRows) {
  const Tensor x = Tensor::Matrix({{1, 2}, {3, 4}});
  EXPECT_EQ(kernels::AddBias(x, Tensor::Vector({10, 20})), Tensor::Matrix({{11, 22}, {13, 24}}));
  EXPECT_THROW(kernels::AddBias(x, Tensor::Vector({1, 2, 3})), ShapeError);
}

TEST(SoftmaxTest, UniformLogits) {
  const Tensor p = kernels::Softmax(Tensor::Matrix({{0, 0, 0, 0}}));
  for (double v : p.values()) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(SoftmaxTest, AnalyticCase) {
  const Tensor p = kernels::Softmax(Tensor::Matrix({{std::log(1.0), std::log(3.0)}}));
  EXPECT_NEAR(p[0], 0.25, 1e-15);
  EXPECT_NEAR(p[1], 0.75, 1e-15);
}

TEST(SoftmaxTest, LargeLogitsAgainstQuadPrecision) {
  const Tensor p = kernels::Softmax(Tensor::Matrix({{1000, 0}}));
  ASSERT_TRUE(p.AllFinite());
  const Quad e = boost::multiprecision::exp(Quad(-1000));
  const Quad p0 = 1 / (1 + e);
  const Quad p1 = e / (1 + e);
  EXPECT_EQ(p[0], static_cast<double>(p0));
  EXPECT_EQ(p[1], static_cast<double>(p1));  // 5e-435 rounds to 0 in double
  const Tensor lp = kernels::LogSoftmax(Tensor::Matrix({{1000, 0}}));
  EXPECT_NEAR(lp[1], static_cast<double>(boost::multiprecision::log(p1)), 1e-12);
}

TEST(SoftmaxTest, RandomRowsSumToOneAndAreShiftInvariant) {
  Rng rng(7);
  std::uniform_real_distribution<double> shift(-50.0, 50.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Tensor z = testing::RandomTensor(rng, {5, 4}, 10.0);
    const double c = shift(rng);
    Tensor zc = z;
    for (double& v : zc.values()) v += c;
    const Tensor p = kernels::Softmax(z);
    const Tensor pc = kernels::Softmax(zc);
    for (std::size_t r = 0; r < 5; ++r) {
      double s = 0.0;
      for (double v : p.row(r)) {
        EXPECT_GE(v, 0.0);
        s += v;
      }
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(p[i], pc[i], 1e-9);
  }
}

TEST(SoftmaxTest, ArgmaxAgreesWithLogits) {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const Tensor z = testing::RandomTensor(rng, {8, 3}, 3.0);
    EXPECT_EQ(kernels::ArgmaxRows(kernels::Softmax(z)), kernels::ArgmaxRows(z));
  }
}

TEST(KernelsTest, ArgmaxTiesGoToSmallestIndex) {
  EXPECT_EQ(kernels::ArgmaxRows(Tensor::Matrix({{1, 3, 3}, {2, 2, 2}})), (std::vector<int>{1, 0}));
}

TEST(KernelsTest, EntropyUsesZeroLogZeroConvention) {
  const std::vector<double> h = kernels::Entropy(Tensor::Matrix({{1, 0}, {0.5, 0.5}}));
  EXPECT_EQ(h[0], 0.0);
  EXPECT_NEAR(h[1], std::log(2.0), 1e-15);
}

TEST(KernelsTest, GatherRowsAndMeanRows) {
  const Tensor a = Tensor::Matrix({{1, 2}, {3, 4}, {5, 6}});
  const std::vector<std::size_t> idx{2, 0};
  EXPECT_EQ(kernels::GatherRows(a, idx), Tensor::Matrix({{5, 6}, {1, 2}}));
  EXPECT_EQ(kernels::MeanRows(a), Tensor::Vector({3, 4}));
}

}  // namespace
}  // namespace decision
