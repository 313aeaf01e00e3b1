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

#ifndef AEDA_ATTACK_ATTACK_HPP_
#define AEDA_ATTACK_ATTACK_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aeda/data/dataset.hpp"
#include "aeda/nn/composite.hpp"

namespace aeda::attack {

enum class SuccessRule { kRequireBiasFlip, kKeepAll };

std::string to_string(SuccessRule r);
SuccessRule parse_success_rule(const std::string& s);

struct AttackConfig {
  double epsilon = 8.0 / 255.0;  // L-infinity budget
  double alpha = 2.0 / 255.0;    // per-step size
  int steps = 10;
  // Weight of the bias term; 1 - lambda weighs target preservation.
  double lambda = 0.7;
  double clip_min = 0.0;
  double clip_max = 1.0;
  SuccessRule success_rule = SuccessRule::kKeepAll;
  int batch_size = 128;
  bool record_loss_trace = false;

  // Throws std::invalid_argument. epsilon = 0 is accepted with any positive
  // alpha (the projection then pins every iterate to the input).
  void validate() const;

  friend bool operator==(const AttackConfig&, const AttackConfig&) = default;
};

// One row of the attack log.
struct AttackRecord {
  std::uint64_t source_id = 0;
  int b_attack = 0;
  bool success = false;
  double linf = 0.0;
  std::optional<int> pre_target;
  std::optional<int> post_target;
};

struct AttackResult {
  // Emitted examples: provenance adversarial, bias label = b_attack, target
  // label of the source. With kRequireBiasFlip only successes are emitted.
  std::vector<data::LabeledExample> examples;
  std::vector<AttackRecord> log;  // one per attacked input, input order
  double success_rate = 0.0;
  std::optional<double> target_preservation_rate;
  // loss_trace[i][k]: objective of input i at iterate k (k = 0..steps);
  // filled only when AttackConfig::record_loss_trace is set.
  std::vector<std::vector<double>> loss_trace;
  std::vector<std::string> warnings;
  bool failed = false;
};

// Objective of the joint attack:
//   lambda * L_bias(x, b_attack) + (1 - lambda) * L_target(x, t)
class JointObjective {
 public:
  virtual ~JointObjective() = default;
  virtual nn::Tensor gradient(const nn::Tensor& x, std::span<const int> b_attack,
                              std::span<const int> targets, double lambda,
                              std::vector<double>* losses) const = 0;
  virtual nn::Tensor bias_logits(const nn::Tensor& x) const = 0;
  virtual nn::Tensor target_logits(const nn::Tensor& x) const = 0;
};

// Both heads on the composite model's shared extractor.
class CoupledObjective final : public JointObjective {
 public:
  explicit CoupledObjective(const nn::CompositeClassifier& model) : model_(model) {}
  nn::Tensor gradient(const nn::Tensor& x, std::span<const int> b_attack,
                      std::span<const int> targets, double lambda,
                      std::vector<double>* losses) const override;
  nn::Tensor bias_logits(const nn::Tensor& x) const override;
  nn::Tensor target_logits(const nn::Tensor& x) const override;

 private:
  const nn::CompositeClassifier& model_;
};

// Separately trained bias and target classifiers.
class SplitObjective final : public JointObjective {
 public:
  SplitObjective(const nn::DifferentiableClassifier& bias,
                 const nn::DifferentiableClassifier& target)
      : bias_(bias), target_(target) {}
  nn::Tensor gradient(const nn::Tensor& x, std::span<const int> b_attack,
                      std::span<const int> targets, double lambda,
                      std::vector<double>* losses) const override;
  nn::Tensor bias_logits(const nn::Tensor& x) const override;
  nn::Tensor target_logits(const nn::Tensor& x) const override;

 private:
  const nn::DifferentiableClassifier& bias_;
  const nn::DifferentiableClassifier& target_;
};

// Targeted I-FGSM against a bias classifier (the lambda of `config` is
// ignored):
//   x <- clip_[min,max](clip_eps-ball(x - alpha * sign(grad L_bias(x, b_attack))))
// `indices` select examples of `source`; `b_attack` holds one attack label
// per selected example.
AttackResult ifgsm_bias_attack(const nn::DifferentiableClassifier& bias_classifier,
                               const data::GroupedDataset& source,
                               std::span<const std::size_t> indices,
                               std::span<const int> b_attack, const AttackConfig& config);

// Same iteration on the joint objective; also records target preservation.
AttackResult joint_attack(const JointObjective& objective, const data::GroupedDataset& source,
                          std::span<const std::size_t> indices, std::span<const int> b_attack,
                          const AttackConfig& config);

AttackResult joint_attack(const nn::CompositeClassifier& model,
                          const data::GroupedDataset& source,
                          std::span<const std::size_t> indices, std::span<const int> b_attack,
                          const AttackConfig& config);

struct PlanEntry {
  std::uint64_t source_id = 0;
  std::size_t index = 0;  // position in the planned dataset
  int b_attack = 0;
};

// For each class, draws |n(t, majority) - n(t, minority)| original examples
// from the majority-bias cell (uniformly, without replacement) to be attacked
// into the minority bias value. Balanced classes contribute nothing.
std::vector<PlanEntry> plan_balancing_attack(const data::GroupedDataset& dataset,
                                             std::uint64_t seed);

// CSV: source_id,b_attack,success,linf,pre_target,post_target
void write_attack_log(const AttackResult& result, const std::filesystem::path& path);

}  // namespace aeda::attack

#endif  // AEDA_ATTACK_ATTACK_HPP_
