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

#ifndef AEDA_TRAIN_BIAS_CLASSIFIER_HPP_
#define AEDA_TRAIN_BIAS_CLASSIFIER_HPP_

#include <cstdint>
#include <span>

#include "aeda/attack/attack.hpp"
#include "aeda/data/dataset.hpp"
#include "aeda/nn/composite.hpp"
#include "aeda/nn/optimizer.hpp"

namespace aeda::train {

// Mini-batch SGD of a standalone classifier on the given labels (one per
// example of `data`). Returns the last epoch's mean loss.
double fit_bias_classifier(nn::StandaloneBiasClassifier& classifier,
                           const data::GroupedDataset& data, std::span<const int> labels,
                           int epochs, int batch_size, const nn::OptimizerSpec& optimizer,
                           std::uint64_t seed);

// Adversarial training: every batch is attacked towards the opposite bias
// label with the current weights, then the clean and attacked copies are
// fitted with their true labels. Returns the last epoch's mean loss.
double adversarial_finetune(nn::StandaloneBiasClassifier& classifier,
                            const data::GroupedDataset& data, int epochs, int batch_size,
                            const nn::OptimizerSpec& optimizer,
                            const attack::AttackConfig& attack_config, std::uint64_t seed);

}  // namespace aeda::train

#endif  // AEDA_TRAIN_BIAS_CLASSIFIER_HPP_
