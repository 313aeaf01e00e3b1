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

#ifndef AEDA_TRAIN_SWITCH_HPP_
#define AEDA_TRAIN_SWITCH_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aeda/attack/attack.hpp"
#include "aeda/data/dataset.hpp"
#include "aeda/nn/composite.hpp"
#include "aeda/nn/optimizer.hpp"

namespace aeda::train {

struct SwitchConfig {
  nn::Architecture architecture;
  int epochs = 5;         // g_ori and every g_switch
  int robust_epochs = 3;  // adversarial fine-tuning of g_robust
  int batch_size = 64;
  nn::OptimizerSpec optimizer;
  std::uint64_t seed = 0;
};

struct SwitchRow {
  std::string setting;  // hard_switch, adv_switch, adv_switch_robust
  double accuracy = 0.0;  // percent, original test images, true bias labels
  std::optional<double> attack_success;
  std::size_t train_size = 0;
};

struct SwitchTable {
  double reference_accuracy = 0.0;  // g_ori on the test split
  double robust_reference_accuracy = 0.0;  // g_robust on the test split
  std::vector<SwitchRow> rows;
};

// Bias classifiers trained on switched labels: flipped labels on original
// images, attacked labels on adversarial images of g_ori, and the same for
// an adversarially trained g_robust. Every g_switch starts from the same
// initialization. Requires binary bias labels.
SwitchTable run_switch_experiments(const data::GroupedDataset& train,
                                   const data::GroupedDataset& test, const SwitchConfig& config,
                                   const attack::AttackConfig& attack_config);

}  // namespace aeda::train

#endif  // AEDA_TRAIN_SWITCH_HPP_
