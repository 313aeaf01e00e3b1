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

#ifndef AEDA_METRICS_PROBE_HPP_
#define AEDA_METRICS_PROBE_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "aeda/data/dataset.hpp"
#include "aeda/nn/composite.hpp"

namespace aeda::metrics {

struct ProbeConfig {
  bool enabled = false;
  int probe_epochs = 3;
  int cadence = 1;  // probe every cadence-th epoch
  int batch_size = 64;
  double learning_rate = 0.01;
  double momentum = 0.9;

  friend bool operator==(const ProbeConfig&, const ProbeConfig&) = default;
};

// Extractor outputs for a list of examples, flattened to 1x1xD samples.
nn::Tensor frozen_features(const nn::CompositeClassifier& model,
                           std::span<const data::LabeledExample> examples,
                           int batch_size = 256);

// Resets the probe head, fits it on frozen features of `adversarial` with
// their (attacked) bias labels and returns the percentage of `test` whose
// true bias label {f; probe} recovers. Only the probe head is modified.
// Absent when `adversarial` is empty.
std::optional<double> transferability_probe(nn::CompositeClassifier& model,
                                            std::span<const data::LabeledExample> adversarial,
                                            const data::GroupedDataset& test,
                                            const ProbeConfig& config, std::uint64_t seed);

}  // namespace aeda::metrics

#endif  // AEDA_METRICS_PROBE_HPP_
