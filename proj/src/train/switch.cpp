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

#include "aeda/train/switch.hpp"

#include "aeda/metrics/bias_report.hpp"
#include "aeda/train/bias_classifier.hpp"
#include "aeda/util.hpp"

namespace aeda::train {

namespace {

SwitchRow fit_switch(const data::GroupedDataset& data, const std::vector<int>& labels,
                     const data::GroupedDataset& test, const SwitchConfig& cfg,
                     std::string setting) {
  nn::StandaloneBiasClassifier g(cfg.architecture, derive_seed(cfg.seed, "g_switch"));
  fit_bias_classifier(g, data, labels, cfg.epochs, cfg.batch_size, cfg.optimizer,
                      derive_seed(cfg.seed, "g_switch"));
  SwitchRow row;
  row.setting = std::move(setting);
  row.accuracy = metrics::bias_accuracy(g, test);
  row.train_size = data.size();
  return row;
}

SwitchRow adv_switch(const nn::StandaloneBiasClassifier& attacked,
                     const data::GroupedDataset& train, const std::vector<int>& flipped,
                     const data::GroupedDataset& test, const SwitchConfig& cfg,
                     const attack::AttackConfig& acfg, std::string setting) {
  const std::vector<std::size_t> idx = data::all_indices(train);
  attack::AttackResult adv = attack::ifgsm_bias_attack(attacked, train, idx, flipped, acfg);
  data::GroupedDataset set(train.split(), train.image_shape(), train.num_classes());
  std::vector<int> labels;
  for (data::LabeledExample& ex : adv.examples) {
    labels.push_back(ex.bias);
    set.add(std::move(ex));
  }
  SwitchRow row = fit_switch(set, labels, test, cfg, std::move(setting));
  row.attack_success = adv.success_rate;
  return row;
}

}  // namespace

SwitchTable run_switch_experiments(const data::GroupedDataset& train,
                                   const data::GroupedDataset& test, const SwitchConfig& cfg,
                                   const attack::AttackConfig& acfg) {
  acfg.validate();
  const std::vector<int> b = train.biases(data::all_indices(train));
  std::vector<int> flipped(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) flipped[i] = 1 - b[i];

  nn::StandaloneBiasClassifier g_ori(cfg.architecture, derive_seed(cfg.seed, "g_ori"));
  fit_bias_classifier(g_ori, train, b, cfg.epochs, cfg.batch_size, cfg.optimizer,
                      derive_seed(cfg.seed, "g_ori"));
  SwitchTable table;
  table.reference_accuracy = metrics::bias_accuracy(g_ori, test);

  table.rows.push_back(fit_switch(train, flipped, test, cfg, "hard_switch"));
  table.rows.push_back(adv_switch(g_ori, train, flipped, test, cfg, acfg, "adv_switch"));

  nn::StandaloneBiasClassifier g_robust = g_ori;
  adversarial_finetune(g_robust, train, cfg.robust_epochs, cfg.batch_size, cfg.optimizer, acfg,
                       derive_seed(cfg.seed, "g_robust"));
  table.robust_reference_accuracy = metrics::bias_accuracy(g_robust, test);
  table.rows.push_back(adv_switch(g_robust, train, flipped, test, cfg, acfg, "adv_switch_robust"));
  return table;
}

}  // namespace aeda::train
