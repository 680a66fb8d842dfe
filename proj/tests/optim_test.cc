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

#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>

#include "test_util.h"

namespace decision {
namespace {

using Quad = boost::multiprecision::cpp_bin_float_quad;

TEST(SgdTest, PlainStep) {
  Parameter p(Tensor::Scalar(5.0));
  SgdMomentum opt(0.0);
  opt.AddGroup({&p}, 1.0, 0.0);
  p.grad()[0] = 2.0;
  opt.Step();
  EXPECT_EQ(p.value().item(), 3.0);
}

TEST(SgdTest, MomentumRecurrence) {
  Parameter p(Tensor::Scalar(0.0));
  SgdMomentum opt(0.9);
  opt.AddGroup({&p}, 1.0, 0.0);
  p.grad()[0] = 1.0;
  opt.Step();
  EXPECT_EQ(p.value().item(), -1.0);
  p.grad()[0] = 1.0;
  opt.Step();
  EXPECT_NEAR(p.value().item(), -2.9, 1e-15);
}

TEST(SgdTest, DecayOnly) {
  Parameter p(Tensor::Scalar(1.0));
  SgdMomentum opt(0.9);
  opt.AddGroup({&p}, 1e-2, 1e-3);
  opt.Step();
  EXPECT_NEAR(p.value().item(), 0.99999, 1e-15);
}

TEST(SgdTest, ZeroMomentumMatchesHandRolledLoopBitForBit) {
  Rng rng(5);
  Parameter p(testing::RandomTensor(rng, {3, 2}));
  Tensor mirror = p.value();
  SgdMomentum opt(0.0);
  opt.AddGroup({&p}, 0.05, 0.0);
  for (int step = 0; step < 50; ++step) {
    const Tensor g = testing::RandomTensor(rng, {3, 2});
    p.grad() = g;
    opt.Step();
    for (std::size_t i = 0; i < mirror.size(); ++i) mirror[i] -= 0.05 * g[i];
    ASSERT_EQ(p.value(), mirror) << "step " << step;
  }
}

TEST(SgdTest, LearningRateScaleMultipliesEveryGroup) {
  Parameter a(Tensor::Scalar(1.0));
  Parameter b(Tensor::Scalar(1.0));
  SgdMomentum opt(0.0);
  opt.AddGroup({&a}, 0.1, 0.0);
  opt.AddGroup({&b}, 1.0, 0.0);
  a.grad()[0] = 1.0;
  b.grad()[0] = 1.0;
  opt.Step(0.5);
  EXPECT_NEAR(a.value().item(), 0.95, 1e-15);
  EXPECT_NEAR(b.value().item(), 0.5, 1e-15);
  EXPECT_EQ(opt.num_groups(), 2u);
}

TEST(SgdTest, ZeroGradClearsEveryParameter) {
  Parameter a(Tensor::Vector({1, 2}));
  SgdMomentum opt;
  opt.AddGroup({&a}, 0.1, 0.0);
  a.grad() = Tensor::Vector({3, 4});
  opt.ZeroGrad();
  EXPECT_EQ(a.grad(), Tensor::Vector({0, 0}));
}

TEST(SgdTest, RejectsInvalidHyperparameters) {
  EXPECT_THROW(SgdMomentum(1.0), std::invalid_argument);
  EXPECT_THROW(SgdMomentum(-0.1), std::invalid_argument);
  Parameter a(Tensor::Scalar(0.0));
  SgdMomentum opt;
  EXPECT_THROW(opt.AddGroup({&a}, 0.0, 0.0), std::invalid_argument);
  EXPECT_THROW(opt.AddGroup({&a}, 0.1, -1.0), std::invalid_argument);
}

TEST(ScheduleTest, StartsAtInitialRate) { EXPECT_EQ(ScheduledLearningRate(0.01, 0.0), 0.01); }

TEST(ScheduleTest, EndpointMatchesQuadPrecision) {
  const Quad expected = Quad("0.01") * boost::multiprecision::pow(Quad(11), Quad("-0.75"));
  EXPECT_NEAR(ScheduledLearningRate(0.01, 1.0), static_cast<double>(expected), 1e-17);
  EXPECT_NEAR(ScheduledLearningRate(0.01, 1.0), 0.0016556, 1e-7);
}

TEST(ScheduleTest, DecaysMonotonically) {
  for (double initial : {1e-4, 1e-2, 1.0, 7.5}) {
    EXPECT_GT(ScheduledLearningRate(initial, 0.5), ScheduledLearningRate(initial, 1.0));
  }
}

TEST(ScheduleTest, RejectsProgressOutsideUnitInterval) {
  EXPECT_THROW(ScheduledLearningRate(0.01, -0.1), std::invalid_argument);
  EXPECT_THROW(ScheduledLearningRate(0.01, 1.5), std::invalid_argument);
}

}  // namespace
}  // namespace decision
