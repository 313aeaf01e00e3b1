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

#include "aeda/metrics/probe.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

#include "aeda/nn/fit.hpp"
#include "aeda/nn/loss.hpp"
#include "aeda/nn/optimizer.hpp"
#include "aeda/util.hpp"

namespace aeda::metrics {

nn::Tensor frozen_features(const nn::CompositeClassifier& model,
                           std::span<const data::LabeledExample> examples, int batch_size) {
  const nn::Architecture& arch = model.architecture();
  const nn::Shape in = arch.input;
  const nn::Shape feat = model.network(nn::Partition::kExtractor).output_shape();
  nn::Tensor out(static_cast<int>(examples.size()), nn::Shape{1, 1, static_cast<int>(feat.size())});
  for (std::size_t start = 0; start < examples.size(); start += batch_size) {
    const std::size_t end = std::min(examples.size(), start + static_cast<std::size_t>(batch_size));
    nn::Tensor x(static_cast<int>(end - start), in);
    for (std::size_t i = start; i < end; ++i) {
      const auto& px = examples[i].pixels;
      if (px.size() != in.size()) throw nn::ShapeError("example does not match model input");
      std::copy(px.begin(), px.end(), x.sample(static_cast<int>(i - start)).begin());
    }
    const nn::Tensor f = model.features(x);
    std::copy(f.values().begin(), f.values().end(),
              out.data() + start * static_cast<std::size_t>(feat.size()));
  }
  return out;
}

std::optional<double> transferability_probe(nn::CompositeClassifier& model,
                                            std::span<const data::LabeledExample> adversarial,
                                            const data::GroupedDataset& test,
                                            const ProbeConfig& config, std::uint64_t seed) {
  if (adversarial.empty() || test.empty()) return std::nullopt;
  if (config.probe_epochs < 1) throw std::invalid_argument("probe_epochs must be >= 1");
  model.reset_head(nn::Partition::kProbeHead, derive_seed(seed, "probe_head"));
  nn::Network& probe = model.network(nn::Partition::kProbeHead);

  const nn::Tensor adv_feats = frozen_features(model, adversarial);
  std::vector<int> labels;
  labels.reserve(adversarial.size());
  for (const auto& ex : adversarial) labels.push_back(ex.bias);

  nn::OptimizerSpec spec;
  spec.learning_rate = config.learning_rate;
  spec.momentum = config.momentum;
  nn::Sgd opt(spec);
  std::mt19937_64 rng(derive_seed(seed, "probe_order"));
  for (int e = 0; e < config.probe_epochs; ++e) {
    nn::fit_epoch(probe, opt, config.learning_rate, adv_feats, labels, config.batch_size, rng);
  }

  const nn::Tensor test_feats = frozen_features(model, test.examples());
  const std::vector<int> pred = nn::argmax_rows(probe.forward(test_feats));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) correct += pred[i] == test[i].bias;
  return 100.0 * static_cast<double>(correct) / static_cast<double>(test.size());
}

}  // namespace aeda::metrics
