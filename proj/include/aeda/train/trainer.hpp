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

#ifndef AEDA_TRAIN_TRAINER_HPP_
#define AEDA_TRAIN_TRAINER_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aeda/attack/attack.hpp"
#include "aeda/data/dataset.hpp"
#include "aeda/metrics/bias_report.hpp"
#include "aeda/metrics/probe.hpp"
#include "aeda/nn/composite.hpp"
#include "aeda/nn/optimizer.hpp"

namespace aeda::train {

enum class Method {
  kOriginal,
  kDownsampling,
  kReweighting,
  kAdvDebias,
  kAedaPre,
  kAedaOnce,
  kAedaOnline,
  kAedaRobust,
};

std::string to_string(Method m);
Method parse_method(const std::string& s);
bool uses_attack(Method m);

// Labels carried by adversarial examples in the robust bias-head step.
enum class AdvLabelMode { kOriginal, kAttacked };
std::string to_string(AdvLabelMode m);
AdvLabelMode parse_adv_label_mode(const std::string& s);

enum class RunStatus { kConverged, kEpochLimit, kAbortedDivergence, kInapplicable };
std::string to_string(RunStatus s);

// Stops training once the target loss plateaus: with L the per-epoch train
// losses, fires at epoch m >= min_epochs - 1 when
// (L[m - window] - L[m]) / |L[m - window]| < threshold.
struct ConvergenceRule {
  bool enabled = true;
  int window = 5;
  double threshold = 1e-3;
  int min_epochs = 20;

  friend bool operator==(const ConvergenceRule&, const ConvergenceRule&) = default;
};

bool has_converged(const ConvergenceRule& rule, std::span<const double> losses);

struct TrainConfig {
  Method method = Method::kOriginal;
  int epochs = 60;
  int batch_size = 64;
  nn::OptimizerSpec optimizer;
  int adv_interval = 2;  // k: adversarial bias-head batch after every k clean ones
  ConvergenceRule convergence;
  std::uint64_t seed = 0;
  // Regeneration of adversarial examples stops from this epoch on.
  std::optional<int> online_cutoff_epoch;
  double reversal_strength = 1.0;  // adv_debias
  AdvLabelMode robust_labels = AdvLabelMode::kOriginal;
  bool pre_finetune = false;       // aeda_pre: continue from the preliminary model
  int bias_classifier_epochs = 5;  // aeda_pre: standalone bias classifier budget
  metrics::ProbeConfig probe;

  // Throws std::invalid_argument.
  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct EpochRecord {
  int epoch = 0;
  double target_loss = 0.0;
  std::optional<double> bacc;
  std::optional<double> overall_bias;  // raw sum of per-class gaps
  std::optional<double> transfer_acc;  // r^(m), percent
  std::optional<double> attack_success;
  std::optional<double> target_preservation;
  std::optional<std::size_t> adversarial_count;
  double wall_seconds = 0.0;
};

// Partition hashes after a named step.
struct JournalEntry {
  int epoch = 0;
  std::string step;
  std::array<std::uint64_t, 4> hashes{};
};

struct AttackLog {
  int epoch = 0;
  attack::AttackResult result;  // examples stripped
};

struct TrainResult {
  RunStatus status = RunStatus::kEpochLimit;
  std::string message;
  std::vector<EpochRecord> records;
  std::vector<JournalEntry> journal;
  std::vector<AttackLog> attacks;
  std::vector<data::LabeledExample> adversarial;  // last generated set
  std::vector<std::string> warnings;
  std::optional<metrics::BiasReport> final_report;
};

// All procedures train `model` in place and evaluate on `test` after
// every epoch.
TrainResult train_original(const data::GroupedDataset& train, const data::GroupedDataset& test,
                           nn::CompositeClassifier& model, const TrainConfig& config);
TrainResult train_downsampling(const data::GroupedDataset& train,
                               const data::GroupedDataset& test, nn::CompositeClassifier& model,
                               const TrainConfig& config);
TrainResult train_reweighting(const data::GroupedDataset& train,
                              const data::GroupedDataset& test, nn::CompositeClassifier& model,
                              const TrainConfig& config);
TrainResult train_adv_debias(const data::GroupedDataset& train, const data::GroupedDataset& test,
                             nn::CompositeClassifier& model, const TrainConfig& config);
TrainResult train_aeda_pre(const data::GroupedDataset& train, const data::GroupedDataset& test,
                           nn::CompositeClassifier& model, const TrainConfig& config,
                           const attack::AttackConfig& attack_config);
TrainResult train_aeda_once(const data::GroupedDataset& train, const data::GroupedDataset& test,
                            nn::CompositeClassifier& model, const TrainConfig& config,
                            const attack::AttackConfig& attack_config);
TrainResult train_aeda_online(const data::GroupedDataset& train,
                              const data::GroupedDataset& test, nn::CompositeClassifier& model,
                              const TrainConfig& config,
                              const attack::AttackConfig& attack_config);
TrainResult train_aeda_robust(const data::GroupedDataset& train,
                              const data::GroupedDataset& test, nn::CompositeClassifier& model,
                              const TrainConfig& config,
                              const attack::AttackConfig& attack_config);

// Dispatches on config.method.
TrainResult run_method(const data::GroupedDataset& train, const data::GroupedDataset& test,
                       nn::CompositeClassifier& model, const TrainConfig& config,
                       const attack::AttackConfig& attack_config);

// Per-example weights 1/count(t, b), scaled so the weights of the nonempty
// cells average to 1. Absent when some class has an empty cell.
std::optional<std::vector<double>> reweighting_weights(const data::GroupedDataset& train);

}  // namespace aeda::train

#endif  // AEDA_TRAIN_TRAINER_HPP_
