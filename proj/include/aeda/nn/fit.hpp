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

#ifndef AEDA_NN_FIT_HPP_
#define AEDA_NN_FIT_HPP_

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "aeda/nn/network.hpp"
#include "aeda/nn/optimizer.hpp"

namespace aeda::nn {

// Gathers rows of a batch tensor.
Tensor gather_rows(const Tensor& source, std::span<const std::size_t> rows);

// One SGD step of cross-entropy on a single batch. Returns the batch mean loss.
double fit_batch(Network& net, Sgd& optimizer, double learning_rate, const Tensor& inputs,
                 std::span<const int> labels);

// One pass of mini-batch SGD on cross-entropy for a network fed with
// precomputed inputs (typically frozen features). Returns the mean loss.
double fit_epoch(Network& net, Sgd& optimizer, double learning_rate, const Tensor& inputs,
                 std::span<const int> labels, int batch_size, std::mt19937_64& rng);

}  // namespace aeda::nn

#endif  // AEDA_NN_FIT_HPP_
