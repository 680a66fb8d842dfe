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

#include "decision/oracle.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "decision/random.h"
#include "json.hpp"

namespace decision::oracle {
namespace {

constexpr double kSimplexTol = 1e-9;

void RequireSimplex(std::span<const double> v, const std::string& what) {
  double s = 0.0;
  for (double x : v) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument(what + ": negative or non-finite entry");
    s += x;
  }
  if (std::abs(s - 1.0) > kSimplexTol) {
    throw std::invalid_argument(what + ": sums to " + std::to_string(s) + ", expected 1");
  }
}

void RequireFamily(std::span<const DiscreteDomain> domains, std::span<const double> lambda) {
  if (domains.empty()) throw std::invalid_argument("lemma: no source domains");
  if (lambda.size() != domains.size()) throw std::invalid_argument("lemma: lambda does not match the domains");
  RequireSimplex(lambda, "lambda");
  for (const auto& d : domains) {
    d.Validate();
    if (d.support_size() != domains[0].support_size() || d.num_classes() != domains[0].num_classes()) {
      throw std::invalid_argument("lemma: domains disagree on support size or K");
    }
  }
}

LossValue Finite(double v) { return {v, false}; }
LossValue Infinite() { return {kInfiniteLoss, true}; }

// sum_i w_i L_i with 0 * inf = 0.
LossValue WeightedSum(std::span<const double> w, std::span<const LossValue> losses) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] == 0.0) continue;
    if (losses[i].infinite) return Infinite();
    s += w[i] * losses[i].value;
  }
  return Finite(s);
}

struct Comparison {
  bool holds;
  double excess;  // lhs - rhs when both finite, else 0
};

Comparison LessEq(const LossValue& lhs, const LossValue& rhs, double slack) {
  if (rhs.infinite) return {true, 0.0};
  if (lhs.infinite) return {false, kInfiniteLoss};
  return {lhs.value <= rhs.value + slack, lhs.value - rhs.value};
}

bool StrictlyLess(const LossValue& lhs, const LossValue& rhs) {
  if (lhs.infinite) return false;
  if (rhs.infinite) return true;
  return lhs.value < rhs.value;
}

bool NearlyEqual(const LossValue& a, const LossValue& b, double slack) {
  if (a.infinite || b.infinite) return a.infinite == b.infinite;
  return std::abs(a.value - b.value) <= slack * std::max(1.0, std::abs(b.value));
}

std::string Fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

void DiscreteDomain::Validate() const {
  if (marginal.empty()) throw std::invalid_argument("domain: empty support");
  if (conditional.rank() != 2 || conditional.shape()[0] != marginal.size()) {
    throw std::invalid_argument("domain: conditional table does not match the support");
  }
  RequireSimplex(marginal, "domain marginal");
  for (std::size_t x = 0; x < marginal.size(); ++x) RequireSimplex(conditional.row(x), "domain conditional row");
}

double PointLoss(std::span<const double> prediction, std::size_t label, LossKind kind) {
  if (label >= prediction.size()) throw std::out_of_range("point loss: label out of range");
  if (kind == LossKind::kCrossEntropy) {
    const double p = prediction[label];
    return p > 0.0 ? -std::log(p) : kInfiniteLoss;
  }
  double s = 0.0;
  for (std::size_t k = 0; k < prediction.size(); ++k) {
    const double d = prediction[k] - (k == label ? 1.0 : 0.0);
    s += d * d;
  }
  return s;
}

TabularPredictor OptimalPredictor(const DiscreteDomain& domain, LossKind) {
  domain.Validate();
  const std::size_t m = domain.support_size(), k = domain.num_classes();
  TabularPredictor out{Tensor({m, k}, 1.0 / static_cast<double>(k))};
  for (std::size_t x = 0; x < m; ++x) {
    if (domain.marginal[x] > 0.0) std::copy_n(domain.conditional.row(x).begin(), k, out.rows.row(x).begin());
  }
  return out;
}

LossValue ExpectedLoss(const DiscreteDomain& domain, const TabularPredictor& predictor, LossKind kind) {
  domain.Validate();
  if (predictor.rows.shape() != domain.conditional.shape()) {
    throw ShapeError("expected_loss", domain.conditional.shape(), predictor.rows.shape());
  }
  double total = 0.0;
  for (std::size_t x = 0; x < domain.support_size(); ++x) {
    if (domain.marginal[x] == 0.0) continue;
    for (std::size_t y = 0; y < domain.num_classes(); ++y) {
      const double mass = domain.marginal[x] * domain.conditional.at(x, y);
      if (mass == 0.0) continue;
      const double l = PointLoss(predictor.rows.row(x), y, kind);
      if (l >= kInfiniteLoss) return Infinite();
      total += mass * l;
    }
  }
  return Finite(total);
}

DiscreteDomain MixDomains(std::span<const DiscreteDomain> domains, std::span<const double> lambda) {
  RequireFamily(domains, lambda);
  const std::size_t m = domains[0].support_size(), k = domains[0].num_classes();
  DiscreteDomain out;
  out.marginal.assign(m, 0.0);
  out.conditional = Tensor({m, k}, 0.0);
  for (std::size_t x = 0; x < m; ++x) {
    for (std::size_t j = 0; j < domains.size(); ++j) {
      const double w = lambda[j] * domains[j].marginal[x];
      out.marginal[x] += w;
      for (std::size_t y = 0; y < k; ++y) out.conditional.at(x, y) += w * domains[j].conditional.at(x, y);
    }
    if (out.marginal[x] > 0.0) {
      for (std::size_t y = 0; y < k; ++y) out.conditional.at(x, y) /= out.marginal[x];
    } else {
      for (std::size_t y = 0; y < k; ++y) out.conditional.at(x, y) = 1.0 / static_cast<double>(k);
    }
  }
  return out;
}

Tensor LemmaWeights(std::span<const DiscreteDomain> domains, std::span<const double> lambda) {
  RequireFamily(domains, lambda);
  const std::size_t m = domains[0].support_size(), n = domains.size();
  Tensor w({m, n}, 0.0);
  for (std::size_t x = 0; x < m; ++x) {
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) z += lambda[j] * domains[j].marginal[x];
    if (z <= 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) w.at(x, j) = lambda[j] * domains[j].marginal[x] / z;
  }
  return w;
}

TabularPredictor LemmaTargetPredictor(std::span<const DiscreteDomain> domains, std::span<const double> lambda,
                                      std::span<const TabularPredictor> predictors) {
  if (predictors.size() != domains.size()) throw std::invalid_argument("lemma: one predictor per domain required");
  const Tensor w = LemmaWeights(domains, lambda);
  const std::size_t m = domains[0].support_size(), k = domains[0].num_classes();
  TabularPredictor out{Tensor({m, k}, 0.0)};
  for (std::size_t x = 0; x < m; ++x) {
    double total = 0.0;
    for (std::size_t j = 0; j < domains.size(); ++j) total += w.at(x, j);
    if (total == 0.0) {
      for (std::size_t y = 0; y < k; ++y) out.rows.at(x, y) = 1.0 / static_cast<double>(k);
      continue;
    }
    for (std::size_t j = 0; j < domains.size(); ++j) {
      for (std::size_t y = 0; y < k; ++y) out.rows.at(x, y) += w.at(x, j) * predictors[j].rows.at(x, y);
    }
  }
  return out;
}

std::vector<double> UniformReductionWeights(std::span<const double> lambda, std::span<const double> scale) {
  if (lambda.size() != scale.size() || lambda.empty()) {
    throw std::invalid_argument("uniform_reduction: lambda and c must have the same positive length");
  }
  double z = 0.0;
  for (std::size_t k = 0; k < scale.size(); ++k) {
    if (!(scale[k] > 0.0)) throw std::invalid_argument("uniform_reduction: scaling factors must be positive");
    z += lambda[k] * scale[k];
  }
  if (!(z > 0.0)) throw std::invalid_argument("uniform_reduction: lambda has no mass");
  std::vector<double> alpha(scale.size());
  for (std::size_t k = 0; k < scale.size(); ++k) alpha[k] = lambda[k] * scale[k] / z;
  return alpha;
}

LemmaCheck CheckLemmaInstance(std::span<const DiscreteDomain> domains, std::span<const double> lambda,
                              const CheckOptions& options) {
  RequireFamily(domains, lambda);
  const std::size_t n = domains.size(), m = domains[0].support_size(), k = domains[0].num_classes();
  const LossKind kind = options.loss;
  const double slack = options.slack;

  std::vector<TabularPredictor> optimal;
  for (const auto& d : domains) optimal.push_back(OptimalPredictor(d, kind));
  const DiscreteDomain target = MixDomains(domains, lambda);
  TabularPredictor theta_t = LemmaTargetPredictor(domains, lambda, optimal);
  if (options.corrupt_target_predictor) {
    for (std::size_t x = 0; x < m; ++x) {
      auto row = target.conditional.row(x);
      const auto worst = static_cast<std::size_t>(std::min_element(row.begin(), row.end()) - row.begin());
      for (std::size_t y = 0; y < k; ++y) theta_t.rows.at(x, y) = y == worst ? 1.0 : 0.0;
    }
  }

  LemmaCheck c;
  const LossValue lhs = ExpectedLoss(target, theta_t, kind);
  c.target_loss = lhs.value;

  std::vector<LossValue> on_target(n);
  for (std::size_t j = 0; j < n; ++j) {
    on_target[j] = ExpectedLoss(target, optimal[j], kind);
    c.source_on_target.push_back(on_target[j].value);
  }
  c.best_source = 0;
  for (std::size_t j = 1; j < n; ++j) {
    if (StrictlyLess(on_target[j], on_target[c.best_source])) c.best_source = j;
  }
  const LossValue best = on_target[c.best_source];
  c.best_source_loss = best.value;

  // cross[i][j] = L(Q_i, theta_j)
  std::vector<std::vector<LossValue>> cross(n, std::vector<LossValue>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) cross[i][j] = ExpectedLoss(domains[i], optimal[j], kind);
  }
  std::vector<LossValue> own(n);
  for (std::size_t i = 0; i < n; ++i) own[i] = cross[i][i];
  const LossValue mixture = WeightedSum(lambda, own);
  c.mixture_of_source_losses = mixture.value;

  const Tensor w = LemmaWeights(domains, lambda);
  LossValue jensen = Finite(0.0);
  for (std::size_t x = 0; x < m && !jensen.infinite; ++x) {
    for (std::size_t y = 0; y < k; ++y) {
      const double mass = target.marginal[x] * target.conditional.at(x, y);
      if (mass == 0.0) continue;
      for (std::size_t i = 0; i < n; ++i) {
        if (w.at(x, i) == 0.0) continue;
        const double l = PointLoss(optimal[i].rows.row(x), y, kind);
        if (l >= kInfiniteLoss) {
          jensen = Infinite();
          break;
        }
        jensen.value += mass * w.at(x, i) * l;
      }
      if (jensen.infinite) break;
    }
  }
  c.jensen_bound = jensen.value;

  c.shared_conditionals = true;
  for (std::size_t x = 0; x < m && c.shared_conditionals; ++x) {
    const DiscreteDomain* ref = nullptr;
    for (const auto& d : domains) {
      if (d.marginal[x] == 0.0) continue;
      if (!ref) {
        ref = &d;
        continue;
      }
      for (std::size_t y = 0; y < k; ++y) {
        if (d.conditional.at(x, y) != ref->conditional.at(x, y)) c.shared_conditionals = false;
      }
    }
  }

  auto record = [&c](const Comparison& cmp, const std::string& what) {
    c.max_excess = std::max(c.max_excess, cmp.excess);
    if (!cmp.holds) c.violations.push_back(what);
  };

  record(LessEq(lhs, best, slack), "main inequality: L(Q_T,theta_T)=" + Fmt(lhs.value) +
                                       " > min_j L(Q_T,theta_j)=" + Fmt(best.value));
  record(LessEq(lhs, jensen, slack),
         "convexity link: L(Q_T,theta_T)=" + Fmt(lhs.value) + " > J=" + Fmt(jensen.value));
  if (c.shared_conditionals && !NearlyEqual(jensen, mixture, slack)) {
    c.violations.push_back("mixture link: J=" + Fmt(jensen.value) + " != sum_i lambda_i L(Q_i,theta_i)=" +
                           Fmt(mixture.value));
  }
  if (c.shared_conditionals) {
    record(LessEq(lhs, mixture, slack), "intermediate bound: L(Q_T,theta_T)=" + Fmt(lhs.value) +
                                            " > sum_i lambda_i L(Q_i,theta_i)=" + Fmt(mixture.value));
  }
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<LossValue> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = cross[i][j];
    const LossValue sub = WeightedSum(lambda, col);
    c.mixture_substitution.push_back(sub.value);
    record(LessEq(mixture, sub, slack), "optimality link (j=" + std::to_string(j) + "): " + Fmt(mixture.value) +
                                            " > " + Fmt(sub.value));
    if (!NearlyEqual(sub, on_target[j], slack)) {
      c.violations.push_back("linearity link (j=" + std::to_string(j) + "): " + Fmt(sub.value) +
                             " != " + Fmt(on_target[j].value));
    }
  }

  const bool all_positive = std::all_of(lambda.begin(), lambda.end(), [](double l) { return l > 0.0; });
  if (all_positive) {
    for (std::size_t i = 0; i < n && !c.strict_hypothesis; ++i) {
      const LossValue& a = cross[i][i];
      const LossValue& b = cross[i][c.best_source];
      if (!a.infinite && (b.infinite || a.value < b.value - slack)) c.strict_hypothesis = true;
    }
  }
  c.strict_holds = StrictlyLess(lhs, best);
  if (c.strict_hypothesis && !c.strict_holds) {
    c.violations.push_back("strictness: hypothesis holds but L(Q_T,theta_T)=" + Fmt(lhs.value) +
                           " is not < " + Fmt(best.value));
  }
  return c;
}

namespace {

std::vector<double> RandomSimplex(Rng& rng, std::size_t n, double zero_prob) {
  std::exponential_distribution<double> e(1.0);
  std::bernoulli_distribution zero(zero_prob);
  std::vector<double> v(n);
  double s = 0.0;
  while (s == 0.0) {
    s = 0.0;
    for (auto& x : v) {
      x = zero(rng) ? 0.0 : e(rng);
      s += x;
    }
  }
  for (auto& x : v) x /= s;
  return v;
}

Tensor RandomConditional(Rng& rng, std::size_t m, std::size_t k) {
  std::bernoulli_distribution deterministic(0.2);
  std::uniform_int_distribution<std::size_t> cls(0, k - 1);
  Tensor t({m, k}, 0.0);
  for (std::size_t x = 0; x < m; ++x) {
    if (deterministic(rng)) {
      t.at(x, cls(rng)) = 1.0;
    } else {
      auto row = RandomSimplex(rng, k, 0.0);
      std::copy(row.begin(), row.end(), t.row(x).begin());
    }
  }
  return t;
}

}  // namespace

SuiteReport RunLemmaSuite(const SuiteOptions& options) {
  SuiteReport report;
  report.trials = options.trials;
  for (std::size_t trial = 0; trial < options.trials; ++trial) {
    Rng rng(DeriveSeed(options.seed, trial));
    std::uniform_int_distribution<std::size_t> pick_m(1, options.max_support);
    std::uniform_int_distribution<std::size_t> pick_k(2, options.max_classes);
    std::uniform_int_distribution<std::size_t> pick_n(1, options.max_sources);
    const std::size_t m = pick_m(rng), k = pick_k(rng), n = pick_n(rng);
    const bool shared = trial % 2 == 0;
    const bool strict_lambda = (trial / 2) % 2 == 0;

    std::vector<DiscreteDomain> domains(n);
    const Tensor common = RandomConditional(rng, m, k);
    for (auto& d : domains) {
      d.marginal = RandomSimplex(rng, m, 0.25);
      d.conditional = shared ? common : RandomConditional(rng, m, k);
    }
    std::vector<double> lambda;
    if (strict_lambda) {
      do {
        lambda = RandomSimplex(rng, n, 0.0);
      } while (*std::min_element(lambda.begin(), lambda.end()) <= 1e-6);
    } else {
      lambda = RandomSimplex(rng, n, 0.3);
    }

    const LemmaCheck c = CheckLemmaInstance(domains, lambda, options.check);
    report.max_slack_used = std::max(report.max_slack_used, c.max_excess);
    report.chain_links_checked += 2 + 2 * n + (c.shared_conditionals ? 2 : 0);
    if (c.shared_conditionals) ++report.shared_conditional_cases;
    if (c.strict_hypothesis) ++report.strict_cases_checked;
    if (!c.shared_conditionals) {
      const LossValue lhs{c.target_loss, c.target_loss >= kInfiniteLoss};
      const LossValue mix{c.mixture_of_source_losses, c.mixture_of_source_losses >= kInfiniteLoss};
      if (!LessEq(lhs, mix, options.check.slack).holds) ++report.intermediate_bound_gaps;
    }
    for (const auto& v : c.violations) report.violations.push_back("trial " + std::to_string(trial) + ": " + v);

    // Uniform-marginal variant: Q_k = c_k / m0 on a shared m0-point support,
    // the remaining 1 - c_k on one extra point outside it.
    const std::size_t m0 = std::min<std::size_t>(m, 4);
    std::uniform_real_distribution<double> pick_c(0.05, 1.0);
    std::vector<double> scale(n);
    std::vector<DiscreteDomain> uniform(n);
    for (std::size_t j = 0; j < n; ++j) {
      scale[j] = pick_c(rng);
      uniform[j].marginal.assign(m0 + 1, scale[j] / static_cast<double>(m0));
      uniform[j].marginal[m0] = 1.0 - scale[j];
      uniform[j].conditional = Tensor({m0 + 1, k}, 1.0 / static_cast<double>(k));
    }
    const std::vector<double> expected = UniformReductionWeights(lambda, scale);
    const Tensor w = LemmaWeights(uniform, lambda);
    double err = 0.0;
    for (std::size_t x = 0; x < m0; ++x) {
      for (std::size_t j = 0; j < n; ++j) err = std::max(err, std::abs(w.at(x, j) - expected[j]));
    }
    ++report.uniform_reduction_checked;
    report.uniform_reduction_max_error = std::max(report.uniform_reduction_max_error, err);
    if (err > 1e-12) {
      report.violations.push_back("trial " + std::to_string(trial) + ": uniform reduction error " + Fmt(err));
    }
  }
  return report;
}

std::string ToJson(const SuiteReport& report) {
  nlohmann::json j;
  j["trials"] = report.trials;
  j["violations"] = report.violations;
  j["max_slack_used"] = report.max_slack_used;
  j["strict_cases_checked"] = report.strict_cases_checked;
  j["shared_conditional_cases"] = report.shared_conditional_cases;
  j["chain_links_checked"] = report.chain_links_checked;
  j["intermediate_bound_gaps"] = report.intermediate_bound_gaps;
  j["uniform_reduction_checked"] = report.uniform_reduction_checked;
  j["uniform_reduction_max_error"] = report.uniform_reduction_max_error;
  return j.dump(2) + "\n";
}

}  // namespace decision::oracle
