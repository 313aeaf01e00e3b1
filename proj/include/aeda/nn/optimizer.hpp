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

#ifndef AEDA_NN_OPTIMIZER_HPP_
#define AEDA_NN_OPTIMIZER_HPP_

#include <span>
#include <string>
#include <vector>

namespace aeda::nn {

struct OptimizerSpec {
  std::string name = "sgd";
  double learning_rate = 0.01;
  double momentum = 0.9;
  double weight_decay = 0.0;
  // Learning rate is multiplied by `decay_factor` once training passes
  // `decay_at` (fraction of total epochs); decay_at >= 1 disables it.
  double decay_factor = 0.1;
  double decay_at = 2.0 / 3.0;

  friend bool operator==(const OptimizerSpec&, const OptimizerSpec&) = default;
};

double learning_rate_at(const OptimizerSpec& spec, int epoch, int total_epochs);

// Heavy-ball SGD over one flat parameter buffer:
//   v <- momentum * v + (g + wd * w);  w <- w - lr * v
class Sgd {
 public:
  explicit Sgd(OptimizerSpec spec = {}) : spec_(std::move(spec)) {}

  void step(std::span<double> params, std::span<const double> grads, double lr);

  const OptimizerSpec& spec() const { return spec_; }

 private:
  OptimizerSpec spec_;
  std::vector<double> velocity_;
};

}  // namespace aeda::nn

#endif  // AEDA_NN_OPTIMIZER_HPP_
