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

#include "aeda/metrics/bias_report.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "aeda/nn/loss.hpp"

namespace aeda::metrics {

BiasReport bias_report(std::span<const int> targets, std::span<const int> biases,
                       std::span<const int> predictions, int num_classes) {
  if (targets.size() != biases.size() || targets.size() != predictions.size()) {
    throw std::invalid_argument("prediction log columns differ in length");
  }
  const int k = num_classes;
  BiasReport r;
  r.num_classes = k;
  for (auto& m : r.group_confusion) m.assign(k, std::vector<std::size_t>(k, 0));
  r.n_per_cell.assign(k, {0, 0});
  r.correct_per_cell.assign(k, {0, 0});
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const int t = targets[i], b = biases[i], p = predictions[i];
    if (t < 0 || t >= k || p < 0 || p >= k || (b != 0 && b != 1)) {
      throw std::invalid_argument("prediction log entry out of range");
    }
    ++r.group_confusion[b][t][p];
    ++r.n_per_cell[t][b];
    if (p == t) ++r.correct_per_cell[t][b];
  }

  r.group_accuracy.assign(k, {std::nullopt, std::nullopt});
  r.per_class_bias.assign(k, std::nullopt);
  double acc_sum = 0.0;
  int acc_cells = 0;
  for (int t = 0; t < k; ++t) {
    for (int b = 0; b < 2; ++b) {
      const std::size_t n = r.n_per_cell[t][b];
      if (n == 0) {
        r.excluded_cells.push_back("t=" + std::to_string(t) + ",b=" + std::to_string(b));
        continue;
      }
      const double acc = static_cast<double>(r.correct_per_cell[t][b]) / static_cast<double>(n);
      r.group_accuracy[t][b] = acc;
      acc_sum += acc;
      ++acc_cells;
    }
    if (r.group_accuracy[t][0] && r.group_accuracy[t][1]) {
      r.per_class_bias[t] = std::fabs(*r.group_accuracy[t][0] - *r.group_accuracy[t][1]);
      r.overall_bias += *r.per_class_bias[t];
    }
  }
  if (acc_cells > 0) r.bacc = 100.0 * acc_sum / acc_cells;
  return r;
}

std::vector<int> predict_targets(const nn::CompositeClassifier& model,
                                 const data::GroupedDataset& dataset, int batch_size) {
  std::vector<int> out;
  out.reserve(dataset.size());
  const std::vector<std::size_t> idx = data::all_indices(dataset);
  for (std::size_t start = 0; start < idx.size(); start += batch_size) {
    const std::size_t end = std::min(idx.size(), start + batch_size);
    std::span<const std::size_t> chunk(idx.data() + start, end - start);
    const std::vector<int> pred = nn::argmax_rows(model.forward_target(dataset.batch(chunk)));
    out.insert(out.end(), pred.begin(), pred.end());
  }
  return out;
}

BiasReport evaluate(const nn::CompositeClassifier& model, const data::GroupedDataset& test,
                    int batch_size) {
  const std::vector<std::size_t> idx = data::all_indices(test);
  return bias_report(test.targets(idx), test.biases(idx), predict_targets(model, test, batch_size),
                     test.num_classes());
}

double bias_accuracy(const nn::DifferentiableClassifier& classifier,
                     const data::GroupedDataset& dataset, int batch_size) {
  if (dataset.empty()) return 0.0;
  const std::vector<std::size_t> idx = data::all_indices(dataset);
  std::size_t correct = 0;
  for (std::size_t start = 0; start < idx.size(); start += batch_size) {
    const std::size_t end = std::min(idx.size(), start + batch_size);
    std::span<const std::size_t> chunk(idx.data() + start, end - start);
    const std::vector<int> pred = nn::argmax_rows(classifier.logits(dataset.batch(chunk)));
    const std::vector<int> truth = dataset.biases(chunk);
    for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == truth[i];
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(dataset.size());
}

}  // namespace aeda::metrics
