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

#include "aeda/nn/optimizer.hpp"

#include <stdexcept>

namespace aeda::nn {

double learning_rate_at(const OptimizerSpec& spec, int epoch, int total_epochs) {
  if (spec.decay_at < 1.0 && total_epochs > 0 &&
      epoch >= static_cast<int>(spec.decay_at * total_epochs)) {
    return spec.learning_rate * spec.decay_factor;
  }
  return spec.learning_rate;
}

void Sgd::step(std::span<double> params, std::span<const double> grads, double lr) {
  if (params.size() != grads.size()) throw std::invalid_argument("gradient length mismatch");
  if (velocity_.size() != params.size()) velocity_.assign(params.size(), 0.0);
  const double mu = spec_.momentum;
  const double wd = spec_.weight_decay;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = wd != 0.0 ? grads[i] + wd * params[i] : grads[i];
    velocity_[i] = mu * velocity_[i] + g;
    params[i] -= lr * velocity_[i];
  }
}

}  // namespace aeda::nn
