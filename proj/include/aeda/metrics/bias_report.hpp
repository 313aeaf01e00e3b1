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

#ifndef AEDA_METRICS_BIAS_REPORT_HPP_
#define AEDA_METRICS_BIAS_REPORT_HPP_

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aeda/data/dataset.hpp"
#include "aeda/nn/composite.hpp"

namespace aeda::metrics {

// Equality-of-opportunity bias report. All probabilities are ratios of the
// integer counts stored alongside them.
struct BiasReport {
  int num_classes = 0;
  // |P(t^=t | b=0, t*=t) - P(t^=t | b=1, t*=t)|; absent when either group
  // of class t has no examples.
  std::vector<std::optional<double>> per_class_bias;
  double overall_bias = 0.0;  // sum of the defined per-class values
  // Unweighted mean of defined cell recalls, in percent.
  std::optional<double> bacc;
  // group_confusion[b][true][predicted]
  std::array<std::vector<std::vector<std::size_t>>, 2> group_confusion;
  std::vector<std::array<std::size_t, 2>> n_per_cell;
  std::vector<std::array<std::size_t, 2>> correct_per_cell;
  std::vector<std::array<std::optional<double>, 2>> group_accuracy;
  std::vector<std::string> excluded_cells;

  // Overall bias on the display scale (x100).
  double display_bias() const { return overall_bias * 100.0; }
};

// Report from a prediction log. Throws std::invalid_argument on length
// mismatch or out-of-range labels.
BiasReport bias_report(std::span<const int> targets, std::span<const int> biases,
                       std::span<const int> predictions, int num_classes);

// Eval-mode target predictions of the model over a dataset.
std::vector<int> predict_targets(const nn::CompositeClassifier& model,
                                 const data::GroupedDataset& dataset, int batch_size = 256);

BiasReport evaluate(const nn::CompositeClassifier& model, const data::GroupedDataset& test,
                    int batch_size = 256);

// Accuracy (percent) of a classifier's argmax against the dataset's bias labels.
double bias_accuracy(const nn::DifferentiableClassifier& classifier,
                     const data::GroupedDataset& dataset, int batch_size = 256);

}  // namespace aeda::metrics

#endif  // AEDA_METRICS_BIAS_REPORT_HPP_
