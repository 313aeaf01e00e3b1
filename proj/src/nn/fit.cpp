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

#include "aeda/nn/fit.hpp"

#include <algorithm>
#include <numeric>

#include "aeda/nn/loss.hpp"

namespace aeda::nn {

Tensor gather_rows(const Tensor& source, std::span<const std::size_t> rows) {
  Tensor out(static_cast<int>(rows.size()), source.shape());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto src = source.sample(static_cast<int>(rows[i]));
    std::copy(src.begin(), src.end(), out.sample(static_cast<int>(i)).begin());
  }
  return out;
}

double fit_batch(Network& net, Sgd& optimizer, double learning_rate, const Tensor& inputs,
                 std::span<const int> labels) {
  Network::Trace trace;
  const Tensor logits = net.forward(inputs, &trace);
  const LossResult loss = softmax_cross_entropy(logits, labels);
  std::vector<double> grad(net.num_parameters(), 0.0);
  net.backward(trace, loss.grad, grad, false);
  optimizer.step(net.parameters(), grad, learning_rate);
  return loss.value;
}

double fit_epoch(Network& net, Sgd& optimizer, double learning_rate, const Tensor& inputs,
                 std::span<const int> labels, int batch_size, std::mt19937_64& rng) {
  const std::size_t n = static_cast<std::size_t>(inputs.batch());
  if (n == 0) return 0.0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  double total = 0.0;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(n, start + batch_size);
    std::span<const std::size_t> rows(order.data() + start, end - start);
    std::vector<int> y;
    y.reserve(rows.size());
    for (std::size_t r : rows) y.push_back(labels[r]);
    const double loss = fit_batch(net, optimizer, learning_rate, gather_rows(inputs, rows), y);
    total += loss * static_cast<double>(rows.size());
  }
  return total / static_cast<double>(n);
}

}  // namespace aeda::nn
