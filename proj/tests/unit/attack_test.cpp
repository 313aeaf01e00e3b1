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

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "aeda/attack/attack.hpp"
#include "aeda/nn/loss.hpp"
#include "aeda/train/bias_classifier.hpp"
#include "fixtures.hpp"

namespace aeda::attack {
namespace {

using data::GroupedDataset;
using data::LabeledExample;

struct Fixture {
  GroupedDataset train;
  GroupedDataset test;
  std::vector<std::size_t> idx;
  std::vector<int> flipped;
};

Fixture make_fixture(std::size_t n = 40) {
  auto [train, test] = testing::small_cmnist(data::split_plan(10, 0.0, 1.0));
  Fixture f{std::move(train), std::move(test), {}, {}};
  for (std::size_t i = 0; i < n; ++i) {
    f.idx.push_back(i * 3);
    f.flipped.push_back(1 - f.train[i * 3].bias);
  }
  return f;
}

void expect_contracts(const AttackResult& r, const GroupedDataset& src, const AttackConfig& cfg) {
  for (const LabeledExample& adv : r.examples) {
    auto j = src.find(adv.source_id, data::Provenance::kOriginal);
    ASSERT_TRUE(j.has_value());
    const LabeledExample& ori = src[*j];
    EXPECT_EQ(adv.target, ori.target);
    EXPECT_EQ(adv.provenance, data::Provenance::kAdversarial);
    for (std::size_t k = 0; k < adv.pixels.size(); ++k) {
      EXPECT_LE(std::fabs(adv.pixels[k] - ori.pixels[k]), cfg.epsilon + 1e-12);
      EXPECT_GE(adv.pixels[k], cfg.clip_min);
      EXPECT_LE(adv.pixels[k], cfg.clip_max);
    }
  }
  for (const AttackRecord& rec : r.log) EXPECT_LE(rec.linf, cfg.epsilon + 1e-12);
}

TEST(AttackConfig, Validation) {
  AttackConfig c;
  EXPECT_NO_THROW(c.validate());
  c.alpha = c.epsilon * 2;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.steps = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.lambda = 1.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.epsilon = 0.0;  // any positive step is fine with no budget
  EXPECT_NO_THROW(c.validate());
  c.alpha = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_EQ(parse_success_rule("keep-all"), SuccessRule::kKeepAll);
  EXPECT_EQ(parse_success_rule(to_string(SuccessRule::kRequireBiasFlip)),
            SuccessRule::kRequireBiasFlip);
  EXPECT_THROW(parse_success_rule("maybe"), std::invalid_argument);
}

TEST(Attack, StaysInsideBudgetAndClipRange) {
  Fixture f = make_fixture();
  nn::CompositeClassifier model(testing::tiny_arch(), 1);
  for (double eps : {0.02, 0.1, 0.3}) {
    AttackConfig cfg;
    cfg.epsilon = eps;
    cfg.alpha = eps / 3;
    cfg.steps = 6;
    cfg.batch_size = 16;
    const AttackResult joint = joint_attack(model, f.train, f.idx, f.flipped, cfg);
    EXPECT_EQ(joint.examples.size(), f.idx.size());
    expect_contracts(joint, f.train, cfg);
    nn::CoupledBiasView view(model);
    expect_contracts(ifgsm_bias_attack(view, f.train, f.idx, f.flipped, cfg), f.train, cfg);
  }
  AttackConfig narrow;
  narrow.epsilon = 0.3;
  narrow.alpha = 0.1;
  narrow.clip_min = 0.1;
  narrow.clip_max = 0.8;
  expect_contracts(joint_attack(model, f.train, f.idx, f.flipped, narrow), f.train, narrow);
}

TEST(Attack, ZeroBudgetIsIdentity) {
  Fixture f = make_fixture();
  nn::CompositeClassifier model(testing::tiny_arch(), 2);
  AttackConfig cfg;
  cfg.epsilon = 0.0;
  const AttackResult r = joint_attack(model, f.train, f.idx, f.flipped, cfg);
  ASSERT_EQ(r.examples.size(), f.idx.size());
  const std::vector<int> pred = nn::argmax_rows(model.forward_bias(f.train.batch(f.idx)));
  for (std::size_t i = 0; i < f.idx.size(); ++i) {
    EXPECT_EQ(r.examples[i].pixels, f.train[f.idx[i]].pixels);
    EXPECT_EQ(r.examples[i].bias, f.flipped[i]);
    EXPECT_EQ(r.log[i].success, pred[i] == f.flipped[i]);
  }
}

TEST(Attack, SingleStepIsSignedGradientStep) {
  Fixture f = make_fixture(8);
  nn::CompositeClassifier model(testing::tiny_arch(), 3);
  AttackConfig cfg;
  cfg.epsilon = 0.05;
  cfg.alpha = 0.05;
  cfg.steps = 1;
  nn::CoupledBiasView view(model);
  const AttackResult r = ifgsm_bias_attack(view, f.train, f.idx, f.flipped, cfg);
  const nn::Tensor x = f.train.batch(f.idx);
  const nn::Tensor g = view.input_gradient(x, f.flipped);
  for (std::size_t i = 0; i < f.idx.size(); ++i) {
    auto xi = x.sample(static_cast<int>(i));
    auto gi = g.sample(static_cast<int>(i));
    for (std::size_t k = 0; k < xi.size(); ++k) {
      const double s = gi[k] > 0 ? 1.0 : (gi[k] < 0 ? -1.0 : 0.0);
      EXPECT_EQ(r.examples[i].pixels[k], std::clamp(xi[k] - 0.05 * s, 0.0, 1.0));
    }
  }
}

TEST(Attack, JointWithLambdaOneEqualsBiasAttack) {
  Fixture f = make_fixture();
  nn::CompositeClassifier model(testing::tiny_arch(), 4);
  AttackConfig cfg;
  cfg.epsilon = 0.2;
  cfg.alpha = 0.05;
  cfg.steps = 5;
  cfg.lambda = 1.0;
  const AttackResult joint = joint_attack(model, f.train, f.idx, f.flipped, cfg);
  nn::CoupledBiasView view(model);
  const AttackResult plain = ifgsm_bias_attack(view, f.train, f.idx, f.flipped, cfg);
  ASSERT_EQ(joint.examples.size(), plain.examples.size());
  for (std::size_t i = 0; i < joint.examples.size(); ++i) {
    EXPECT_EQ(joint.examples[i], plain.examples[i]);
    EXPECT_EQ(joint.log[i].success, plain.log[i].success);
  }
  EXPECT_EQ(joint.success_rate, plain.success_rate);
}

TEST(Attack, SplitObjectiveMatchesLambdaWeighting) {
  Fixture f = make_fixture(6);
  nn::CompositeClassifier model(testing::tiny_arch(), 5);
  nn::StandaloneBiasClassifier bias(testing::tiny_arch(), 6);
  nn::StandaloneTargetView target(model);
  SplitObjective split(bias, target);
  const nn::Tensor x = f.train.batch(f.idx);
  const std::vector<int> t = f.train.targets(f.idx);
  const nn::Tensor g = split.gradient(x, f.flipped, t, 0.3, nullptr);
  const nn::Tensor gb = bias.input_gradient(x, f.flipped);
  const nn::Tensor gt = target.input_gradient(x, t);
  for (std::size_t k = 0; k < g.size(); ++k) {
    EXPECT_NEAR(g.data()[k], 0.3 * gb.data()[k] + 0.7 * gt.data()[k], 1e-15);
  }
}

TEST(Attack, SuccessRuleFiltersAndReportsRate) {
  Fixture f = make_fixture();
  nn::CompositeClassifier model(testing::tiny_arch(), 7);
  AttackConfig cfg;
  cfg.epsilon = 0.1;
  cfg.alpha = 0.05;
  cfg.steps = 3;
  cfg.success_rule = SuccessRule::kRequireBiasFlip;
  const AttackResult r = joint_attack(model, f.train, f.idx, f.flipped, cfg);
  std::size_t successes = 0;
  for (const AttackRecord& rec : r.log) successes += rec.success;
  EXPECT_EQ(r.examples.size(), successes);
  EXPECT_DOUBLE_EQ(r.success_rate, static_cast<double>(successes) / f.idx.size());
  // Forward-pass oracle: every emitted example is classified as its attack label.
  for (const LabeledExample& ex : r.examples) {
    nn::Tensor one(1, f.train.image_shape());
    std::copy(ex.pixels.begin(), ex.pixels.end(), one.data());
    EXPECT_EQ(nn::argmax_rows(model.forward_bias(one))[0], ex.bias);
  }
  ASSERT_TRUE(r.target_preservation_rate.has_value());
  std::size_t kept = 0;
  for (const AttackRecord& rec : r.log) kept += rec.pre_target == rec.post_target;
  EXPECT_DOUBLE_EQ(*r.target_preservation_rate, static_cast<double>(kept) / f.idx.size());
}

TEST(Attack, LambdaZeroWarns) {
  Fixture f = make_fixture(4);
  nn::CompositeClassifier model(testing::tiny_arch(), 8);
  AttackConfig cfg;
  cfg.lambda = 0.0;
  const AttackResult r = joint_attack(model, f.train, f.idx, f.flipped, cfg);
  EXPECT_FALSE(r.warnings.empty());
}

TEST(Attack, RejectsMismatchedLabels) {
  Fixture f = make_fixture(4);
  nn::CompositeClassifier model(testing::tiny_arch(), 8);
  std::vector<int> short_labels{0, 1};
  EXPECT_THROW(joint_attack(model, f.train, f.idx, short_labels, AttackConfig{}),
               std::invalid_argument);
  std::vector<int> bad{0, 1, 2, 0};
  EXPECT_THROW(joint_attack(model, f.train, f.idx, bad, AttackConfig{}), std::invalid_argument);
}

TEST(Attack, LossTraceDecreasesOnAverage) {
  Fixture f = make_fixture(20);
  nn::CompositeClassifier model(testing::tiny_arch(), 9);
  AttackConfig cfg;
  cfg.epsilon = 0.3;
  cfg.alpha = 0.05;
  cfg.steps = 6;
  cfg.lambda = 1.0;
  cfg.record_loss_trace = true;
  const AttackResult r = joint_attack(model, f.train, f.idx, f.flipped, cfg);
  ASSERT_EQ(r.loss_trace.size(), f.idx.size());
  double first = 0, last = 0;
  for (const auto& tr : r.loss_trace) {
    ASSERT_EQ(tr.size(), 7u);
    first += tr.front();
    last += tr.back();
  }
  EXPECT_LT(last, first);
}

TEST(Attack, TrainedColorClassifierIsFlipped) {
  Fixture f = make_fixture(60);
  nn::StandaloneBiasClassifier clf(testing::tiny_arch(), 10);
  const auto all = data::all_indices(f.train);
  nn::OptimizerSpec opt;
  opt.decay_at = 2.0;
  train::fit_bias_classifier(clf, f.train, f.train.biases(all), 3, 32, opt, 1);
  AttackConfig cfg;
  // A fitted color classifier at this resolution resists an 8/255 budget,
  // so the check uses the budget of the training presets.
  cfg.epsilon = 0.3;
  cfg.alpha = 0.05;
  cfg.steps = 10;
  const AttackResult r = ifgsm_bias_attack(clf, f.train, f.idx, f.flipped, cfg);
  EXPECT_GE(r.success_rate, 0.9);
  // Every reported success flips the classifier's argmax.
  for (std::size_t i = 0; i < r.log.size(); ++i) {
    nn::Tensor one(1, f.train.image_shape());
    std::copy(r.examples[i].pixels.begin(), r.examples[i].pixels.end(), one.data());
    EXPECT_EQ(nn::argmax_rows(clf.logits(one))[0] == f.flipped[i], r.log[i].success);
  }
}

TEST(Attack, LargerBudgetDoesNotHurt) {
  Fixture f = make_fixture(60);
  nn::StandaloneBiasClassifier clf(testing::tiny_arch(), 11);
  const auto all = data::all_indices(f.train);
  train::fit_bias_classifier(clf, f.train, f.train.biases(all), 3, 32, nn::OptimizerSpec{}, 2);
  double prev = -1.0;
  for (double eps : {0.01, 0.02, 0.04, 0.08}) {
    AttackConfig cfg;
    cfg.epsilon = eps;
    cfg.alpha = 0.005;
    cfg.steps = static_cast<int>(std::ceil(eps / 0.005)) + 1;
    const double rate = ifgsm_bias_attack(clf, f.train, f.idx, f.flipped, cfg).success_rate;
    EXPECT_GE(rate, prev - 0.02) << "eps " << eps;
    prev = rate;
  }
}

TEST(Plan, CountsPerClass) {
  GroupedDataset ds = testing::counted_dataset({{0, 0}, {0, 0}, {50, 50}, {0, 0}, {0, 0},
                                                {10, 40}, {0, 0}, {0, 100}});
  const auto plan = plan_balancing_attack(ds, 3);
  std::map<int, std::vector<PlanEntry>> by_class;
  for (const PlanEntry& e : plan) by_class[ds[e.index].target].push_back(e);
  EXPECT_FALSE(by_class.count(2));
  ASSERT_EQ(by_class[7].size(), 100u);
  for (const PlanEntry& e : by_class[7]) EXPECT_EQ(e.b_attack, 0);
  ASSERT_EQ(by_class[5].size(), 30u);
  for (const PlanEntry& e : by_class[5]) {
    EXPECT_EQ(ds[e.index].bias, 1);
    EXPECT_EQ(e.b_attack, 0);
    EXPECT_EQ(ds[e.index].source_id, e.source_id);
  }
  // Recount after augmenting with the planned examples relabeled.
  std::vector<LabeledExample> adv;
  for (const PlanEntry& e : plan) {
    LabeledExample ex = ds[e.index];
    ex.provenance = data::Provenance::kAdversarial;
    ex.bias = e.b_attack;
    adv.push_back(ex);
  }
  const GroupedDataset aug = data::augment(ds, adv);
  EXPECT_EQ(aug.group_counts().count(5, 0), 40u);
  EXPECT_EQ(aug.group_counts().count(5, 1), 40u);
  EXPECT_EQ(aug.group_counts().count(7, 0), 100u);
  // Same seed, same plan; every entry distinct.
  const auto again = plan_balancing_attack(ds, 3);
  ASSERT_EQ(again.size(), plan.size());
  std::set<std::size_t> seen;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    EXPECT_EQ(plan[i].index, again[i].index);
    seen.insert(plan[i].index);
  }
  EXPECT_EQ(seen.size(), plan.size());
}

TEST(Plan, ExtremeRegimeAttacksEveryExample) {
  Fixture f = make_fixture(1);
  EXPECT_EQ(plan_balancing_attack(f.train, 1).size(), f.train.size());
}

}  // namespace
}  // namespace aeda::attack
