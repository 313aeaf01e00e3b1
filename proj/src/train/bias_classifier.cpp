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

#include "aeda/train/bias_classifier.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>
#include <vector>

#include "aeda/nn/loss.hpp"
#include "aeda/util.hpp"

namespace aeda::train {

namespace {

struct Trainer {
  explicit Trainer(nn::StandaloneBiasClassifier& c, const nn::OptimizerSpec& spec)
      : clf(c),
        opt_f(spec),
        opt_h(spec),
        gf(c.extractor().num_parameters()),
        gh(c.head().num_parameters()) {}

  double step(const nn::Tensor& x, std::span<const int> y, double lr) {
    nn::Network& f = clf.extractor();
    nn::Network& h = clf.head();
    nn::Network::Trace ft, ht;
    const nn::Tensor feats = f.forward(x, &ft);
    const nn::LossResult loss = nn::softmax_cross_entropy(h.forward(feats, &ht), y);
    std::fill(gf.begin(), gf.end(), 0.0);
    std::fill(gh.begin(), gh.end(), 0.0);
    const nn::Tensor dfeat = h.backward(ht, loss.grad, gh, true);
    f.backward(ft, dfeat, gf, false);
    opt_f.step(f.parameters(), gf, lr);
    opt_h.step(h.parameters(), gh, lr);
    return loss.value;
  }

  nn::StandaloneBiasClassifier& clf;
  nn::Sgd opt_f, opt_h;
  std::vector<double> gf, gh;
};

}  // namespace

double fit_bias_classifier(nn::StandaloneBiasClassifier& classifier,
                           const data::GroupedDataset& data, std::span<const int> labels,
                           int epochs, int batch_size, const nn::OptimizerSpec& optimizer,
                           std::uint64_t seed) {
  if (labels.size() != data.size()) throw std::invalid_argument("one label per example required");
  Trainer tr(classifier, optimizer);
  std::mt19937_64 rng(derive_seed(seed, "bias_classifier_order"));
  std::vector<std::size_t> order = data::all_indices(data);
  const std::size_t bs = static_cast<std::size_t>(std::max(1, batch_size));
  double last = 0.0;
  for (int e = 0; e < epochs; ++e) {
    const double lr = nn::learning_rate_at(optimizer, e, epochs);
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t end = std::min(order.size(), start + bs);
      std::span<const std::size_t> chunk(order.data() + start, end - start);
      std::vector<int> y;
      for (std::size_t i : chunk) y.push_back(labels[i]);
      total += tr.step(data.batch(chunk), y, lr) * static_cast<double>(chunk.size());
    }
    last = order.empty() ? 0.0 : total / static_cast<double>(order.size());
  }
  return last;
}

double adversarial_finetune(nn::StandaloneBiasClassifier& classifier,
                            const data::GroupedDataset& data, int epochs, int batch_size,
                            const nn::OptimizerSpec& optimizer,
                            const attack::AttackConfig& attack_config, std::uint64_t seed) {
  attack::AttackConfig acfg = attack_config;
  acfg.success_rule = attack::SuccessRule::kKeepAll;
  acfg.record_loss_trace = false;
  Trainer tr(classifier, optimizer);
  std::mt19937_64 rng(derive_seed(seed, "adversarial_finetune_order"));
  std::vector<std::size_t> order = data::all_indices(data);
  const std::size_t bs = static_cast<std::size_t>(std::max(1, batch_size));
  const std::size_t sample = data.image_shape().size();
  double last = 0.0;
  for (int e = 0; e < epochs; ++e) {
    const double lr = nn::learning_rate_at(optimizer, e, epochs);
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t end = std::min(order.size(), start + bs);
      std::span<const std::size_t> chunk(order.data() + start, end - start);
      const std::vector<int> b = data.biases(chunk);
      std::vector<int> flipped(b.size());
      for (std::size_t i = 0; i < b.size(); ++i) flipped[i] = 1 - b[i];
      const attack::AttackResult adv =
          attack::ifgsm_bias_attack(classifier, data, chunk, flipped, acfg);
      const int n = static_cast<int>(chunk.size());
      nn::Tensor x(2 * n, data.image_shape());
      const nn::Tensor clean = data.batch(chunk);
      std::copy(clean.values().begin(), clean.values().end(), x.data());
      for (int i = 0; i < n; ++i) {
        const auto& px = adv.examples[i].pixels;
        std::copy(px.begin(), px.end(), x.data() + static_cast<std::size_t>(n + i) * sample);
      }
      std::vector<int> y = b;
      y.insert(y.end(), b.begin(), b.end());
      total += tr.step(x, y, lr) * static_cast<double>(chunk.size());
    }
    last = order.empty() ? 0.0 : total / static_cast<double>(order.size());
  }
  return last;
}

}  // namespace aeda::train
