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

#ifndef AEDA_NN_LOSS_HPP_
#define AEDA_NN_LOSS_HPP_

#include <span>
#include <vector>

#include "aeda/nn/tensor.hpp"

namespace aeda::nn {

enum class Reduction { kMean, kSum };

struct LossResult {
  double value = 0.0;
  Tensor grad;  // d value / d logits
};

// Row-wise softmax of a {1,1,C} logit batch.
Tensor softmax(const Tensor& logits);

// Cross-entropy of each row against its label.
std::vector<double> cross_entropy_per_example(const Tensor& logits,
                                              std::span<const int> labels);

// Weighted softmax cross-entropy. `weights` may be empty (all ones). With
// kMean the weighted sum is divided by the batch size, not by the weight
// total, so reweighted losses stay on the same scale as unweighted ones.
LossResult softmax_cross_entropy(const Tensor& logits, std::span<const int> labels,
                                 std::span<const double> weights = {},
                                 Reduction reduction = Reduction::kMean);

std::vector<int> argmax_rows(const Tensor& logits);

}  // namespace aeda::nn

#endif  // AEDA_NN_LOSS_HPP_
