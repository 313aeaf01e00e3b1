/*
 * Copyright 2026 The AEDA Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "aeda/attack/attack.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <random>
#include <stdexcept>

#include "aeda/nn/loss.hpp"
#include "aeda/util.hpp"

namespace aeda::attack {

namespace {

using nn::Tensor;

using GradFn = std::function<Tensor(const Tensor&, std::span<const int>, std::span<const int>,
                                    std::vector<double>*)>;
using LogitFn = std::function<Tensor(const Tensor&)>;

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

AttackResult run_attack(const data::GroupedDataset& source, std::span<const std::size_t> indices,
                        std::span<const int> b_attack, const AttackConfig& cfg,
                        const GradFn& grad_fn, const LogitFn& bias_logits,
                        const LogitFn* target_logits) {
  cfg.validate();
  if (indices.size() != b_attack.size()) {
    throw std::invalid_argument("one attack label per attacked example is required");
  }
  for (int b : b_attack) {
    if (b != 0 && b != 1) throw std::invalid_argument("attack label must be 0 or 1");
  }
  AttackResult result;
  result.log.reserve(indices.size());
  if (cfg.record_loss_trace) result.loss_trace.reserve(indices.size());
  std::size_t successes = 0;
  std::size_t preserved = 0;
  const std::size_t bs = static_cast<std::size_t>(std::max(1, cfg.batch_size));

  for (std::size_t start = 0; start < indices.size(); start += bs) {
    const std::size_t end = std::min(indices.size(), start + bs);
    std::span<const std::size_t> chunk = indices.subspan(start, end - start);
    std::span<const int> labels = b_attack.subspan(start, end - start);
    const std::vector<int> targets = source.targets(chunk);
    const Tensor x0 = source.batch(chunk);
    Tensor x = x0;

    std::vector<int> pre_target;
    if (target_logits != nullptr) pre_target = nn::argmax_rows((*target_logits)(x0));

    std::vector<std::vector<double>> trace(chunk.size());
    std::vector<double> losses;
    for (int step = 0; step < cfg.steps; ++step) {
      const Tensor g = grad_fn(x, labels, targets, cfg.record_loss_trace ? &losses : nullptr);
      if (cfg.record_loss_trace) {
        for (std::size_t i = 0; i < chunk.size(); ++i) trace[i].push_back(losses[i]);
      }
      double* xv = x.data();
      const double* x0v = x0.data();
      const double* gv = g.data();
      for (std::size_t k = 0; k < x.size(); ++k) {
        double v = xv[k] - cfg.alpha * sign(gv[k]);
        v = std::clamp(v, x0v[k] - cfg.epsilon, x0v[k] + cfg.epsilon);
        xv[k] = std::clamp(v, cfg.clip_min, cfg.clip_max);
      }
    }
    if (cfg.record_loss_trace) {
      grad_fn(x, labels, targets, &losses);
      for (std::size_t i = 0; i < chunk.size(); ++i) {
        trace[i].push_back(losses[i]);
        result.loss_trace.push_back(std::move(trace[i]));
      }
    }

    const std::vector<int> post_bias = nn::argmax_rows(bias_logits(x));
    std::vector<int> post_target;
    if (target_logits != nullptr) post_target = nn::argmax_rows((*target_logits)(x));

    for (std::size_t i = 0; i < chunk.size(); ++i) {
      const data::LabeledExample& src = source[chunk[i]];
      AttackRecord rec;
      rec.source_id = src.source_id;
      rec.b_attack = labels[i];
      rec.success = post_bias[i] == labels[i];
      auto xi = x.sample(static_cast<int>(i));
      auto x0i = x0.sample(static_cast<int>(i));
      for (std::size_t k = 0; k < xi.size(); ++k) {
        rec.linf = std::max(rec.linf, std::fabs(xi[k] - x0i[k]));
      }
      if (target_logits != nullptr) {
        rec.pre_target = pre_target[i];
        rec.post_target = post_target[i];
        if (pre_target[i] == post_target[i]) ++preserved;
      }
      successes += rec.success;
      if (rec.success || cfg.success_rule == SuccessRule::kKeepAll) {
        result.examples.push_back({src.source_id, src.target, labels[i],
                                   data::Provenance::kAdversarial,
                                   std::vector<double>(xi.begin(), xi.end())});
      }
      result.log.push_back(rec);
    }
  }

  if (!indices.empty()) {
    result.success_rate = static_cast<double>(successes) / static_cast<double>(indices.size());
    if (target_logits != nullptr) {
      result.target_preservation_rate =
          static_cast<double>(preserved) / static_cast<double>(indices.size());
    }
  }
  if (!indices.empty() && result.examples.empty()) {
    result.failed = true;
    result.warnings.push_back("no adversarial example satisfied the success rule");
  }
  return result;
}

}  // namespace

std::string to_string(SuccessRule r) {
  return r == SuccessRule::kKeepAll ? "keep-all" : "require-bias-flip";
}

SuccessRule parse_success_rule(const std::string& s) {
  if (s == "keep-all") return SuccessRule::kKeepAll;
  if (s == "require-bias-flip") return SuccessRule::kRequireBiasFlip;
  throw std::invalid_argument("unknown success rule '" + s + "'");
}

void AttackConfig::validate() const {
  if (!(epsilon >= 0.0)) throw std::invalid_argument("attack epsilon must be >= 0");
  if (!(alpha > 0.0)) throw std::invalid_argument("attack alpha must be > 0");
  if (epsilon > 0.0 && alpha > epsilon) {
    throw std::invalid_argument("attack alpha must not exceed epsilon");
  }
  if (steps < 1) throw std::invalid_argument("attack needs at least one step");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must lie in [0,1]");
  if (!(clip_min < clip_max)) throw std::invalid_argument("empty clip range");
}

Tensor CoupledObjective::gradient(const Tensor& x, std::span<const int> b_attack,
                                  std::span<const int> targets, double lambda,
                                  std::vector<double>* losses) const {
  std::vector<nn::LossTerm> terms{
      {nn::Partition::kBiasHead, {b_attack.begin(), b_attack.end()}, lambda},
      {nn::Partition::kTargetHead, {targets.begin(), targets.end()}, 1.0 - lambda}};
  return model_.gradient_wrt_input(x, terms, losses);
}

Tensor CoupledObjective::bias_logits(const Tensor& x) const { return model_.forward_bias(x); }

Tensor CoupledObjective::target_logits(const Tensor& x) const {
  return model_.forward_target(x);
}

Tensor SplitObjective::gradient(const Tensor& x, std::span<const int> b_attack,
                                std::span<const int> targets, double lambda,
                                std::vector<double>* losses) const {
  Tensor g(x.batch(), x.shape());
  if (losses != nullptr) losses->assign(x.batch(), 0.0);
  std::vector<double> part;
  if (lambda != 0.0) {
    const Tensor gb = bias_.input_gradient(x, b_attack, losses ? &part : nullptr);
    for (std::size_t k = 0; k < g.size(); ++k) g.data()[k] += lambda * gb.data()[k];
    if (losses) for (std::size_t i = 0; i < part.size(); ++i) (*losses)[i] += lambda * part[i];
  }
  if (lambda != 1.0) {
    const Tensor gt = target_.input_gradient(x, targets, losses ? &part : nullptr);
    for (std::size_t k = 0; k < g.size(); ++k) g.data()[k] += (1.0 - lambda) * gt.data()[k];
    if (losses) {
      for (std::size_t i = 0; i < part.size(); ++i) (*losses)[i] += (1.0 - lambda) * part[i];
    }
  }
  return g;
}

Tensor SplitObjective::bias_logits(const Tensor& x) const { return bias_.logits(x); }
Tensor SplitObjective::target_logits(const Tensor& x) const { return target_.logits(x); }

AttackResult ifgsm_bias_attack(const nn::DifferentiableClassifier& bias_classifier,
                               const data::GroupedDataset& source,
                               std::span<const std::size_t> indices,
                               std::span<const int> b_attack, const AttackConfig& config) {
  GradFn grad = [&](const Tensor& x, std::span<const int> labels, std::span<const int>,
                    std::vector<double>* losses) {
    return bias_classifier.input_gradient(x, labels, losses);
  };
  LogitFn bias = [&](const Tensor& x) { return bias_classifier.logits(x); };
  return run_attack(source, indices, b_attack, config, grad, bias, nullptr);
}

AttackResult joint_attack(const JointObjective& objective, const data::GroupedDataset& source,
                          std::span<const std::size_t> indices, std::span<const int> b_attack,
                          const AttackConfig& config) {
  GradFn grad = [&](const Tensor& x, std::span<const int> labels, std::span<const int> targets,
                    std::vector<double>* losses) {
    return objective.gradient(x, labels, targets, config.lambda, losses);
  };
  LogitFn bias = [&](const Tensor& x) { return objective.bias_logits(x); };
  LogitFn target = [&](const Tensor& x) { return objective.target_logits(x); };
  AttackResult result = run_attack(source, indices, b_attack, config, grad, bias, &target);
  if (config.lambda == 0.0) {
    result.warnings.push_back("lambda = 0: objective only reinforces the target label");
  }
  return result;
}

AttackResult joint_attack(const nn::CompositeClassifier& model,
                          const data::GroupedDataset& source,
                          std::span<const std::size_t> indices, std::span<const int> b_attack,
                          const AttackConfig& config) {
  return joint_attack(CoupledObjective(model), source, indices, b_attack, config);
}

std::vector<PlanEntry> plan_balancing_attack(const data::GroupedDataset& dataset,
                                             std::uint64_t seed) {
  const int k = dataset.num_classes();
  std::vector<std::array<std::vector<std::size_t>, 2>> cells(k);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const data::LabeledExample& ex = dataset[i];
    if (ex.provenance == data::Provenance::kOriginal) cells[ex.target][ex.bias].push_back(i);
  }
  std::vector<PlanEntry> plan;
  for (int t = 0; t < k; ++t) {
    const std::size_t n0 = cells[t][0].size();
    const std::size_t n1 = cells[t][1].size();
    if (n0 == n1) continue;
    const int majority = n1 > n0 ? 1 : 0;
    std::vector<std::size_t> pool = cells[t][majority];
    const std::size_t deficit = std::min(pool.size(), n1 > n0 ? n1 - n0 : n0 - n1);
    std::mt19937_64 rng(derive_seed(seed, "balancing_plan", static_cast<std::uint64_t>(t)));
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(deficit);
    std::sort(pool.begin(), pool.end());
    for (std::size_t i : pool) plan.push_back({dataset[i].source_id, i, 1 - majority});
  }
  return plan;
}

void write_attack_log(const AttackResult& result, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  out << "source_id,b_attack,success,linf,pre_target,post_target\n";
  char buf[64];
  for (const AttackRecord& r : result.log) {
    std::snprintf(buf, sizeof(buf), "%.9g", r.linf);
    out << r.source_id << ',' << r.b_attack << ',' << (r.success ? 1 : 0) << ',' << buf << ',';
    if (r.pre_target) out << *r.pre_target;
    out << ',';
    if (r.post_target) out << *r.post_target;
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed to write attack log " + path.string());
}

}  // namespace aeda::attack
