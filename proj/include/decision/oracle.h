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

// Exact finite-support checks of the multi-source combination guarantee.
//
// Each source k is a joint distribution Q_k(x) P_k(y|x) over m inputs and K
// labels; the target is the mixture Q_T = sum_k lambda_k Q_k. With theta_k the
// loss-optimal predictor of source k, the density-ratio combination
//
//   theta_T(x) = sum_k [lambda_k Q_k(x) / sum_j lambda_j Q_j(x)] theta_k(x)
//
// satisfies L(Q_T, theta_T) <= min_j L(Q_T, theta_j). The proof chain is
//
//   L(Q_T, theta_T) <= J                          (convexity)
//   J = sum_i lambda_i L(Q_i, theta_i)            (needs shared P(y|x))
//   sum_i lambda_i L(Q_i, theta_i) <= sum_i lambda_i L(Q_i, theta_j)
//                                  = L(Q_T, theta_j)
//
// with J = sum_x sum_y Q_T(x, y) sum_i w_i(x) L(theta_i(x), y). Every link is
// evaluated separately by CheckLemmaInstance.

#ifndef DECISION_ORACLE_H_
#define DECISION_ORACLE_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "decision/tensor.h"

namespace decision::oracle {

enum class LossKind {
  kCrossEntropy,  // -log p_y
  kSquared,       // sum_k (p_k - [k == y])^2
};

// Stand-in for +infinity so reports stay numeric.
inline constexpr double kInfiniteLoss = 1e18;

struct DiscreteDomain {
  std::vector<double> marginal;  // Q(x), length m
  Tensor conditional;            // P(y|x), [m x K]

  std::size_t support_size() const { return marginal.size(); }
  std::size_t num_classes() const { return conditional.cols(); }
  // Throws std::invalid_argument unless Q and every row of P are on the
  // simplex (tolerance 1e-9).
  void Validate() const;
};

struct TabularPredictor {
  Tensor rows;  // theta(x), [m x K], each row on the simplex
};

struct LossValue {
  double value = 0.0;  // kInfiniteLoss when infinite
  bool infinite = false;
};

double PointLoss(std::span<const double> prediction, std::size_t label, LossKind kind);

// The conditional P(y|x) where Q(x) > 0, uniform elsewhere.
TabularPredictor OptimalPredictor(const DiscreteDomain& domain, LossKind kind = LossKind::kCrossEntropy);

// sum_x Q(x) sum_y P(y|x) L(theta(x), y); zero-mass terms are skipped.
LossValue ExpectedLoss(const DiscreteDomain& domain, const TabularPredictor& predictor,
                       LossKind kind = LossKind::kCrossEntropy);

// Joint mixture sum_k lambda_k Q_k(x) P_k(y|x), re-expressed as a marginal
// and a conditional (uniform rows off the target support).
DiscreteDomain MixDomains(std::span<const DiscreteDomain> domains, std::span<const double> lambda);

// Per-input weights w_k(x) = lambda_k Q_k(x) / sum_j lambda_j Q_j(x), [m x n].
// Rows off the target support are all zero.
Tensor LemmaWeights(std::span<const DiscreteDomain> domains, std::span<const double> lambda);

// Density-ratio-weighted combination; uniform rows off the target support.
TabularPredictor LemmaTargetPredictor(std::span<const DiscreteDomain> domains, std::span<const double> lambda,
                                      std::span<const TabularPredictor> predictors);

// alpha_k = lambda_k c_k / sum_j lambda_j c_j. Throws unless every c_k > 0.
std::vector<double> UniformReductionWeights(std::span<const double> lambda, std::span<const double> scale);

struct LemmaCheck {
  double target_loss = 0.0;                   // L(Q_T, theta_T)
  std::vector<double> source_on_target;       // L(Q_T, theta_j)
  double best_source_loss = 0.0;              // min_j of the above
  std::size_t best_source = 0;                // beta, smallest index on ties
  double jensen_bound = 0.0;                  // J
  double mixture_of_source_losses = 0.0;      // sum_i lambda_i L(Q_i, theta_i)
  std::vector<double> mixture_substitution;   // sum_i lambda_i L(Q_i, theta_j)
  bool shared_conditionals = false;           // P_k(y|x) equal wherever Q_k(x) > 0
  bool strict_hypothesis = false;
  bool strict_holds = false;
  double max_excess = 0.0;                    // largest LHS - RHS over checked inequalities
  std::vector<std::string> violations;
};

struct CheckOptions {
  LossKind loss = LossKind::kCrossEntropy;
  double slack = 1e-9;
  // Replace theta_T by a deliberately bad predictor (detector sanity check).
  bool corrupt_target_predictor = false;
};

LemmaCheck CheckLemmaInstance(std::span<const DiscreteDomain> domains, std::span<const double> lambda,
                              const CheckOptions& options = {});

struct SuiteOptions {
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  std::size_t max_support = 6;
  std::size_t max_classes = 3;
  std::size_t max_sources = 4;
  CheckOptions check;
};

struct SuiteReport {
  std::size_t trials = 0;
  std::vector<std::string> violations;  // "trial N: ..." per violated check
  double max_slack_used = 0.0;
  std::size_t strict_cases_checked = 0;
  std::size_t shared_conditional_cases = 0;
  std::size_t chain_links_checked = 0;
  // Instances with differing conditionals where the intermediate bound
  // L(Q_T, theta_T) <= sum_i lambda_i L(Q_i, theta_i) fails. Informational:
  // that bound needs shared conditionals.
  std::size_t intermediate_bound_gaps = 0;
  std::size_t uniform_reduction_checked = 0;
  double uniform_reduction_max_error = 0.0;
};

// Random instances alternate between shared and differing conditionals;
// every other instance draws lambda strictly positive by rejection. Each trial
// also checks the uniform-marginal reduction on a derived instance.
SuiteReport RunLemmaSuite(const SuiteOptions& options);

std::string ToJson(const SuiteReport& report);

}  // namespace decision::oracle

#endif  // DECISION_ORACLE_H_
