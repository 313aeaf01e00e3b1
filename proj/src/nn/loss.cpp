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

#include "aeda/nn/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace aeda::nn {

namespace {

void check_labels(const Tensor& logits, std::span<const int> labels) {
  if (static_cast<int>(labels.size()) != logits.batch()) {
    throw ShapeError("label count " + std::to_string(labels.size()) +
                     " does not match batch " + std::to_string(logits.batch()));
  }
  const int classes = static_cast<int>(logits.sample_size());
  for (int label : labels) {
    if (label < 0 || label >= classes) {
      throw ShapeError("label " + std::to_string(label) + " outside [0," +
                       std::to_string(classes) + ")");
    }
  }
}

// log-sum-exp of one row, shifted by the row maximum.
double log_sum_exp(std::span<const double> row) {
  const double mx = *std::max_element(row.begin(), row.end());
  double s = 0.0;
  for (double v : row) s += std::exp(v - mx);
  return mx + std::log(s);
}

}  // namespace

Tensor softmax(const Tensor& logits) {
  Tensor out(logits.batch(), logits.shape());
  for (int i = 0; i < logits.batch(); ++i) {
    auto row = logits.sample(i);
    const double lse = log_sum_exp(row);
    auto dst = out.sample(i);
    for (std::size_t c = 0; c < row.size(); ++c) dst[c] = std::exp(row[c] - lse);
  }
  return out;
}

std::vector<double> cross_entropy_per_example(const Tensor& logits,
                                              std::span<const int> labels) {
  check_labels(logits, labels);
  std::vector<double> out(labels.size());
  for (int i = 0; i < logits.batch(); ++i) {
    auto row = logits.sample(i);
    out[i] = log_sum_exp(row) - row[labels[i]];
  }
  return out;
}

LossResult softmax_cross_entropy(const Tensor& logits, std::span<const int> labels,
                                 std::span<const double> weights, Reduction reduction) {
  check_labels(logits, labels);
  if (!weights.empty() && weights.size() != labels.size()) {
    throw ShapeError("weight count does not match batch");
  }
  const int n = logits.batch();
  LossResult result;
  result.grad = Tensor(n, logits.shape());
  if (n == 0) return result;
  const double scale = reduction == Reduction::kMean ? 1.0 / n : 1.0;
  for (int i = 0; i < n; ++i) {
    auto row = logits.sample(i);
    const double lse = log_sum_exp(row);
    const double w = weights.empty() ? 1.0 : weights[i];
    result.value += w * (lse - row[labels[i]]);
    auto g = result.grad.sample(i);
    for (std::size_t c = 0; c < row.size(); ++c) {
      g[c] = w * scale * std::exp(row[c] - lse);
    }
    g[labels[i]] -= w * scale;
  }
  result.value *= scale;
  return result;
}

std::vector<int> argmax_rows(const Tensor& logits) {
  std::vector<int> out(logits.batch());
  for (int i = 0; i < logits.batch(); ++i) {
    auto row = logits.sample(i);
    out[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

}  // namespace aeda::nn
