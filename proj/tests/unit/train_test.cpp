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

#include <climits>
#include <map>

#include <gtest/gtest.h>

#include "aeda/metrics/bias_report.hpp"
#include "aeda/train/bias_classifier.hpp"
#include "aeda/train/switch.hpp"
#include "aeda/train/trainer.hpp"
#include "fixtures.hpp"

namespace aeda::train {
namespace {

using data::GroupedDataset;
using nn::CompositeClassifier;

struct Data {
  GroupedDataset train;
  GroupedDataset test;
};

const Data& extreme() {
  static const Data d = [] {
    auto [tr, te] = testing::small_cmnist(data::split_plan(10, 0.0, 1.0));
    return Data{std::move(tr), std::move(te)};
  }();
  return d;
}

// Exactly balanced cells.
const Data& balanced() {
  static const Data d = [] {
    auto [tr, te] = testing::small_cmnist(data::uniform_plan(10, 0.5), 4);
    GroupedDataset even = data::inject_imbalance(tr, data::uniform_plan(10, 0.5), 1);
    return Data{std::move(even), std::move(te)};
  }();
  return d;
}

TrainConfig quick(Method m, int epochs = 2) {
  TrainConfig c;
  c.method = m;
  c.epochs = epochs;
  c.batch_size = 32;
  c.seed = 5;
  c.convergence.enabled = false;
  return c;
}

attack::AttackConfig quick_attack() {
  attack::AttackConfig a;
  a.epsilon = 0.3;
  a.alpha = 0.1;
  a.steps = 3;
  return a;
}

void expect_same_records(const TrainResult& a, const TrainResult& b) {
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const EpochRecord& x = a.records[i];
    const EpochRecord& y = b.records[i];
    EXPECT_EQ(x.epoch, y.epoch);
    EXPECT_EQ(x.target_loss, y.target_loss);
    EXPECT_EQ(x.bacc, y.bacc);
    EXPECT_EQ(x.overall_bias, y.overall_bias);
    EXPECT_EQ(x.transfer_acc, y.transfer_acc);
    EXPECT_EQ(x.attack_success, y.attack_success);
    EXPECT_EQ(x.adversarial_count, y.adversarial_count);
  }
}

// Hashes of f and h_t after every "target" step.
std::vector<std::array<std::uint64_t, 2>> target_trajectory(const TrainResult& r) {
  std::vector<std::array<std::uint64_t, 2>> out;
  for (const JournalEntry& e : r.journal) {
    if (e.step == "target") out.push_back({e.hashes[0], e.hashes[1]});
  }
  return out;
}

TEST(Names, RoundTrip) {
  for (int i = 0; i < 8; ++i) {
    const Method m = static_cast<Method>(i);
    EXPECT_EQ(parse_method(to_string(m)), m);
  }
  EXPECT_THROW(parse_method("aeda"), std::invalid_argument);
  EXPECT_TRUE(uses_attack(Method::kAedaOnce));
  EXPECT_FALSE(uses_attack(Method::kAdvDebias));
  EXPECT_EQ(parse_adv_label_mode("attacked"), AdvLabelMode::kAttacked);
  EXPECT_EQ(to_string(RunStatus::kEpochLimit), "epoch-limit");
}

TEST(Config, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.adv_interval = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.epochs = -1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.optimizer.name = "adam";
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Convergence, RuleByHand) {
  ConvergenceRule rule;
  rule.window = 2;
  rule.min_epochs = 4;
  rule.threshold = 0.01;
  std::vector<double> l{1.0, 0.5, 0.4, 0.399};
  // (0.5 - 0.399) / 0.5 = 0.202: still improving.
  EXPECT_FALSE(has_converged(rule, l));
  l = {1.0, 0.5, 0.4, 0.4, 0.398};
  // (0.4 - 0.398) / 0.4 = 0.005.
  EXPECT_TRUE(has_converged(rule, l));
  std::vector<double> early{1.0, 1.0, 1.0};
  EXPECT_FALSE(has_converged(rule, early));  // below min_epochs
  rule.enabled = false;
  EXPECT_FALSE(has_converged(rule, l));
}

TEST(Reweighting, WeightsByHand) {
  // Raw 1/60 and 1/20 normalized to mean 1 over the two cells.
  GroupedDataset ds = testing::counted_dataset({{60, 20}});
  const auto w = reweighting_weights(ds);
  ASSERT_TRUE(w.has_value());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    EXPECT_NEAR((*w)[i], ds[i].bias == 0 ? 0.5 : 1.5, 1e-12);
  }
  GroupedDataset even = testing::counted_dataset({{5, 5}, {5, 5}});
  const auto ones = reweighting_weights(even);
  for (double v : *ones) EXPECT_NEAR(v, 1.0, 1e-12);
  EXPECT_FALSE(reweighting_weights(testing::counted_dataset({{5, 0}, {5, 5}})).has_value());
}

TEST(Baselines, InapplicableOnExtremeRegime) {
  CompositeClassifier model(testing::tiny_arch(), 1);
  const CompositeClassifier before = model;
  EXPECT_EQ(train_downsampling(extreme().train, extreme().test, model, quick(Method::kDownsampling))
                .status,
            RunStatus::kInapplicable);
  EXPECT_EQ(train_reweighting(extreme().train, extreme().test, model, quick(Method::kReweighting))
                .status,
            RunStatus::kInapplicable);
  EXPECT_EQ(model, before);
}

TEST(Baselines, DownsamplingKeepsMinorityCountTwice) {
  auto [tr, te] = testing::small_cmnist(data::uniform_plan(10, 0.5), 4);
  GroupedDataset skewed = data::inject_imbalance(tr, data::uniform_plan(10, 0.75), 2);
  std::size_t expected = 0;
  for (int t = 0; t < 10; ++t) {
    expected += 2 * std::min(skewed.group_counts().count(t, 0), skewed.group_counts().count(t, 1));
  }
  CompositeClassifier model(testing::tiny_arch(), 1);
  const TrainResult r = train_downsampling(skewed, te, model, quick(Method::kDownsampling, 1));
  ASSERT_EQ(r.status, RunStatus::kEpochLimit);
  ASSERT_FALSE(r.warnings.empty());
  EXPECT_EQ(r.warnings[0], "down-sampled to " + std::to_string(expected) + " of " +
                               std::to_string(skewed.size()) + " examples");
}

TEST(Baselines, BalancedDownsamplingEqualsOriginal) {
  CompositeClassifier a(testing::tiny_arch(), 2), b(testing::tiny_arch(), 2);
  train_original(balanced().train, balanced().test, a, quick(Method::kOriginal));
  train_downsampling(balanced().train, balanced().test, b, quick(Method::kDownsampling));
  EXPECT_EQ(a, b);
}

TEST(Training, ZeroEpochsLeavesModelUnchanged) {
  for (int i = 0; i < 8; ++i) {
    const Method m = static_cast<Method>(i);
    if (m == Method::kDownsampling || m == Method::kReweighting) continue;
    CompositeClassifier model(testing::tiny_arch(), 3);
    const CompositeClassifier before = model;
    const TrainResult r =
        run_method(extreme().train, extreme().test, model, quick(m, 0), quick_attack());
    EXPECT_EQ(model, before) << to_string(m);
    EXPECT_TRUE(r.records.empty());
  }
}

TEST(Training, RecordsAreContiguous) {
  CompositeClassifier model(testing::tiny_arch(), 3);
  const TrainResult r = train_original(extreme().train, extreme().test, model, quick(Method::kOriginal, 3));
  ASSERT_EQ(r.records.size(), 3u);
  for (int m = 0; m < 3; ++m) {
    EXPECT_EQ(r.records[m].epoch, m);
    EXPECT_TRUE(r.records[m].bacc.has_value());
    EXPECT_FALSE(r.records[m].attack_success.has_value());
  }
  EXPECT_EQ(r.status, RunStatus::kEpochLimit);
  ASSERT_TRUE(r.final_report.has_value());
}

TEST(Training, ConvergenceStopsEarly) {
  CompositeClassifier model(testing::tiny_arch(), 3);
  TrainConfig c = quick(Method::kOriginal, 30);
  c.convergence = {true, 1, 10.0, 3};  // any epoch counts as a plateau
  const TrainResult r = train_original(extreme().train, extreme().test, model, c);
  EXPECT_EQ(r.status, RunStatus::kConverged);
  EXPECT_EQ(r.records.size(), 3u);
}

TEST(Training, DivergenceAborts) {
  CompositeClassifier model(testing::tiny_arch(), 3);
  TrainConfig c = quick(Method::kOriginal, 5);
  c.optimizer.learning_rate = 1e200;
  const TrainResult r = train_original(extreme().train, extreme().test, model, c);
  EXPECT_EQ(r.status, RunStatus::kAbortedDivergence);
  EXPECT_LT(r.records.size(), 5u);
}

TEST(Training, StepsRespectFrozenPartitions) {
  CompositeClassifier model(testing::tiny_arch(), 4);
  TrainConfig c = quick(Method::kAedaRobust, 3);
  c.probe.enabled = true;
  c.probe.probe_epochs = 1;
  const auto h0 = [&] {
    std::array<std::uint64_t, 4> h{};
    for (nn::Partition p : nn::kAllPartitions) h[static_cast<int>(p)] = model.partition_hash(p);
    return h;
  }();
  const TrainResult r = train_aeda_robust(extreme().train, extreme().test, model, c, quick_attack());
  // Partitions each step may modify: f, h_t, h_b, probe.
  const std::map<std::string, std::array<bool, 4>> mutable_parts{
      {"target", {true, true, false, false}},
      {"bias_head", {false, false, true, false}},
      {"attack", {false, false, false, false}},
      {"probe", {false, false, false, true}}};
  std::vector<std::string> order;
  auto prev = h0;
  for (const JournalEntry& e : r.journal) {
    if (e.epoch == 0) order.push_back(e.step);
    const auto& allowed = mutable_parts.at(e.step);
    for (int p = 0; p < 4; ++p) {
      if (!allowed[p]) EXPECT_EQ(e.hashes[p], prev[p]) << e.step << " epoch " << e.epoch;
    }
    prev = e.hashes;
  }
  EXPECT_EQ(order, (std::vector<std::string>{"target", "bias_head", "attack", "probe"}));
}

TEST(Reduction, RobustWithHugeIntervalIsOnline) {
  CompositeClassifier a(testing::tiny_arch(), 6), b(testing::tiny_arch(), 6);
  TrainConfig c = quick(Method::kAedaRobust, 3);
  c.adv_interval = INT_MAX;
  const TrainResult ra = train_aeda_robust(extreme().train, extreme().test, a, c, quick_attack());
  c.method = Method::kAedaOnline;
  const TrainResult rb = train_aeda_online(extreme().train, extreme().test, b, c, quick_attack());
  EXPECT_EQ(a, b);
  expect_same_records(ra, rb);
  ASSERT_EQ(ra.journal.size(), rb.journal.size());
  for (std::size_t i = 0; i < ra.journal.size(); ++i) {
    EXPECT_EQ(ra.journal[i].hashes, rb.journal[i].hashes);
  }
}

TEST(Reduction, RobustWithSmallIntervalDiffers) {
  CompositeClassifier a(testing::tiny_arch(), 6), b(testing::tiny_arch(), 6);
  TrainConfig c = quick(Method::kAedaRobust, 2);
  c.adv_interval = 1;
  train_aeda_robust(extreme().train, extreme().test, a, c, quick_attack());
  train_aeda_online(extreme().train, extreme().test, b, c, quick_attack());
  EXPECT_NE(a.partition_hash(nn::Partition::kBiasHead), b.partition_hash(nn::Partition::kBiasHead));
}

TEST(Reduction, AdvDebiasWithoutReversalIsOriginal) {
  CompositeClassifier a(testing::tiny_arch(), 7), b(testing::tiny_arch(), 7);
  TrainConfig c = quick(Method::kAdvDebias, 3);
  c.reversal_strength = 0.0;
  const TrainResult ra = train_adv_debias(extreme().train, extreme().test, a, c);
  const TrainResult rb = train_original(extreme().train, extreme().test, b, quick(Method::kOriginal, 3));
  EXPECT_EQ(target_trajectory(ra), target_trajectory(rb));
  expect_same_records(ra, rb);
  // The bias head still trains on its own.
  EXPECT_NE(a.partition_hash(nn::Partition::kBiasHead), b.partition_hash(nn::Partition::kBiasHead));
}

TEST(Reduction, AdvDebiasWithReversalDiffers) {
  CompositeClassifier a(testing::tiny_arch(), 7), b(testing::tiny_arch(), 7);
  train_adv_debias(extreme().train, extreme().test, a, quick(Method::kAdvDebias, 1));
  train_original(extreme().train, extreme().test, b, quick(Method::kOriginal, 1));
  EXPECT_NE(a.partition_hash(nn::Partition::kExtractor), b.partition_hash(nn::Partition::kExtractor));
}

TEST(Reduction, BalancedPreIsOriginal) {
  CompositeClassifier a(testing::tiny_arch(), 8), b(testing::tiny_arch(), 8);
  const TrainResult ra =
      train_aeda_pre(balanced().train, balanced().test, a, quick(Method::kAedaPre), quick_attack());
  const TrainResult rb = train_original(balanced().train, balanced().test, b, quick(Method::kOriginal));
  EXPECT_EQ(a, b);
  expect_same_records(ra, rb);
  EXPECT_FALSE(ra.warnings.empty());
}

TEST(Reduction, BalancedOnlineNeverAttacks) {
  CompositeClassifier a(testing::tiny_arch(), 8), b(testing::tiny_arch(), 8);
  const TrainResult ra = train_aeda_online(balanced().train, balanced().test, a,
                                           quick(Method::kAedaOnline), quick_attack());
  const TrainResult rb = train_original(balanced().train, balanced().test, b, quick(Method::kOriginal));
  EXPECT_TRUE(ra.attacks.empty());
  EXPECT_EQ(target_trajectory(ra), target_trajectory(rb));
}

TEST(Aeda, OnceAttacksOnlyAtFirstEpoch) {
  CompositeClassifier model(testing::tiny_arch(), 9);
  TrainConfig c = quick(Method::kAedaOnce, 3);
  c.optimizer.decay_at = 2.0;  // same learning rate for both run lengths
  const TrainResult r = train_aeda_once(extreme().train, extreme().test, model, c, quick_attack());
  ASSERT_EQ(r.attacks.size(), 1u);
  EXPECT_EQ(r.attacks[0].epoch, 0);
  for (const EpochRecord& rec : r.records) {
    EXPECT_EQ(rec.adversarial_count, r.records[0].adversarial_count);
    EXPECT_EQ(rec.attack_success.has_value(), rec.epoch == 0);
  }
  // The surviving set is the epoch-0 one: rerunning one epoch reproduces it.
  CompositeClassifier again(testing::tiny_arch(), 9);
  c.epochs = 1;
  const TrainResult one = train_aeda_once(extreme().train, extreme().test, again, c, quick_attack());
  EXPECT_TRUE(one.adversarial == r.adversarial);
}

TEST(Aeda, OnlineAttacksEveryEpochUntilCutoff) {
  CompositeClassifier model(testing::tiny_arch(), 9);
  TrainConfig c = quick(Method::kAedaOnline, 3);
  c.online_cutoff_epoch = 2;
  const TrainResult r = train_aeda_online(extreme().train, extreme().test, model, c, quick_attack());
  ASSERT_EQ(r.attacks.size(), 2u);
  EXPECT_EQ(r.attacks[1].epoch, 1);
  // Extreme regime: every training example is attacked.
  EXPECT_EQ(r.attacks[0].result.log.size(), extreme().train.size());
  for (const data::LabeledExample& ex : r.adversarial) {
    const auto src = extreme().train.find(ex.source_id, data::Provenance::kOriginal);
    ASSERT_TRUE(src.has_value());
    EXPECT_EQ(ex.bias, 1 - extreme().train[*src].bias);
    EXPECT_EQ(ex.target, extreme().train[*src].target);
  }
}

TEST(Aeda, ZeroBudgetKeepsPixels) {
  CompositeClassifier model(testing::tiny_arch(), 10);
  attack::AttackConfig a = quick_attack();
  a.epsilon = 0.0;
  const TrainResult r = train_aeda_online(extreme().train, extreme().test, model,
                                          quick(Method::kAedaOnline, 1), a);
  ASSERT_EQ(r.adversarial.size(), extreme().train.size());
  for (const data::LabeledExample& ex : r.adversarial) {
    const auto& src = extreme().train[*extreme().train.find(ex.source_id, data::Provenance::kOriginal)];
    EXPECT_EQ(ex.pixels, src.pixels);
    EXPECT_EQ(ex.bias, 1 - src.bias);
  }
}

TEST(Aeda, PreRecordsAttackOnFirstEpoch) {
  CompositeClassifier model(testing::tiny_arch(), 11);
  TrainConfig c = quick(Method::kAedaPre, 2);
  c.bias_classifier_epochs = 1;
  c.probe.enabled = true;
  c.probe.probe_epochs = 1;
  const TrainResult r = train_aeda_pre(extreme().train, extreme().test, model, c, quick_attack());
  ASSERT_EQ(r.records.size(), 2u);
  EXPECT_TRUE(r.records[0].attack_success.has_value());
  EXPECT_FALSE(r.records[1].attack_success.has_value());
  EXPECT_TRUE(r.records[1].transfer_acc.has_value());
  EXPECT_EQ(r.attacks.size(), 1u);
}

TEST(Determinism, SameSeedSameRun) {
  TrainConfig c = quick(Method::kAedaRobust, 2);
  c.probe.enabled = true;
  c.probe.probe_epochs = 1;
  CompositeClassifier a(testing::tiny_arch(), 12), b(testing::tiny_arch(), 12);
  const TrainResult ra = train_aeda_robust(extreme().train, extreme().test, a, c, quick_attack());
  const TrainResult rb = train_aeda_robust(extreme().train, extreme().test, b, c, quick_attack());
  EXPECT_EQ(a, b);
  expect_same_records(ra, rb);
  EXPECT_TRUE(ra.adversarial == rb.adversarial);
  c.seed = 6;
  CompositeClassifier d(testing::tiny_arch(), 12);
  train_aeda_robust(extreme().train, extreme().test, d, c, quick_attack());
  EXPECT_NE(a, d);
}

TEST(BiasClassifier, LearnsColor) {
  nn::StandaloneBiasClassifier clf(testing::tiny_arch(), 1);
  const auto idx = data::all_indices(balanced().train);
  fit_bias_classifier(clf, balanced().train, balanced().train.biases(idx), 5, 32,
                      nn::OptimizerSpec{}, 2);
  EXPECT_GE(metrics::bias_accuracy(clf, balanced().test), 90.0);
}

TEST(BiasClassifier, AdversarialFinetuneChangesWeights) {
  nn::StandaloneBiasClassifier clf(testing::tiny_arch(), 1);
  const nn::StandaloneBiasClassifier before = clf;
  adversarial_finetune(clf, balanced().train, 1, 32, nn::OptimizerSpec{}, quick_attack(), 3);
  EXPECT_NE(nn::hash_values(clf.head().parameters()), nn::hash_values(before.head().parameters()));
}

TEST(Switch, ProducesThreeSettings) {
  SwitchConfig sc;
  sc.architecture = testing::tiny_arch();
  sc.epochs = 1;
  sc.robust_epochs = 1;
  sc.batch_size = 32;
  sc.seed = 3;
  const SwitchTable table = run_switch_experiments(extreme().train, extreme().test, sc, quick_attack());
  ASSERT_EQ(table.rows.size(), 3u);
  EXPECT_EQ(table.rows[0].setting, "hard_switch");
  EXPECT_EQ(table.rows[1].setting, "adv_switch");
  EXPECT_EQ(table.rows[2].setting, "adv_switch_robust");
  EXPECT_EQ(table.rows[0].train_size, extreme().train.size());
  EXPECT_FALSE(table.rows[0].attack_success.has_value());
  for (const SwitchRow& row : table.rows) {
    EXPECT_GE(row.accuracy, 0.0);
    EXPECT_LE(row.accuracy, 100.0);
  }
}

}  // namespace
}  // namespace aeda::train
