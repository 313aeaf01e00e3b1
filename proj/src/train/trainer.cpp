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

#include "aeda/train/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "aeda/data/synth.hpp"
#include "aeda/nn/fit.hpp"
#include "aeda/nn/loss.hpp"
#include "aeda/train/bias_classifier.hpp"
#include "aeda/util.hpp"

namespace aeda::train {

namespace {

using Clock = std::chrono::steady_clock;
using data::GroupedDataset;
using nn::Partition;
using nn::Tensor;

constexpr const char* kMethodNames[] = {"original",  "downsampling", "reweighting",
                                        "adv_debias", "aeda_pre",     "aeda_once",
                                        "aeda_online", "aeda_robust"};

std::array<std::uint64_t, 4> hashes_of(const nn::CompositeClassifier& model) {
  std::array<std::uint64_t, 4> h{};
  for (Partition p : nn::kAllPartitions) h[static_cast<int>(p)] = model.partition_hash(p);
  return h;
}

TrainResult inapplicable(std::string why) {
  TrainResult r;
  r.status = RunStatus::kInapplicable;
  r.message = std::move(why);
  return r;
}

// Optimizer state, data-order streams and bookkeeping of one training run.
class Session {
 public:
  Session(nn::CompositeClassifier& model, const TrainConfig& cfg, const GroupedDataset& test)
      : model_(model),
        cfg_(cfg),
        test_(test),
        opt_f_(cfg.optimizer),
        opt_t_(cfg.optimizer),
        opt_b_(cfg.optimizer),
        target_rng_(derive_seed(cfg.seed, "target_order")),
        bias_rng_(derive_seed(cfg.seed, "bias_order")),
        adv_rng_(derive_seed(cfg.seed, "adv_order")) {}

  TrainResult& result() { return result_; }

  double lr(int epoch) const {
    return nn::learning_rate_at(cfg_.optimizer, epoch, cfg_.epochs);
  }

  void journal(int epoch, const char* step) {
    result_.journal.push_back({epoch, step, hashes_of(model_)});
  }

  // One pass of (f, h_t) over `ds`. With `reversal` set, h_b trains on the
  // same batches and its feature gradient enters f scaled by -reversal.
  double target_epoch(const GroupedDataset& ds, std::span<const double> weights, double lr,
                      std::optional<double> reversal) {
    nn::Network& f = model_.network(Partition::kExtractor);
    nn::Network& ht = model_.network(Partition::kTargetHead);
    nn::Network& hb = model_.network(Partition::kBiasHead);
    std::vector<std::size_t> order = data::all_indices(ds);
    std::shuffle(order.begin(), order.end(), target_rng_);
    std::vector<double> gf(f.num_parameters()), gt(ht.num_parameters()), gb(hb.num_parameters());
    const std::size_t bs = static_cast<std::size_t>(cfg_.batch_size);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t end = std::min(order.size(), start + bs);
      std::span<const std::size_t> chunk(order.data() + start, end - start);
      const Tensor x = ds.batch(chunk);
      const std::vector<int> y = ds.targets(chunk);
      std::vector<double> w;
      if (!weights.empty()) {
        for (std::size_t i : chunk) w.push_back(weights[i]);
      }
      nn::Network::Trace ft, tt;
      const Tensor feats = f.forward(x, &ft);
      const nn::LossResult loss = nn::softmax_cross_entropy(ht.forward(feats, &tt), y, w);
      std::fill(gf.begin(), gf.end(), 0.0);
      std::fill(gt.begin(), gt.end(), 0.0);
      Tensor dfeat = ht.backward(tt, loss.grad, gt, true);
      if (reversal) {
        std::fill(gb.begin(), gb.end(), 0.0);
        nn::Network::Trace bt;
        const nn::LossResult lb =
            nn::softmax_cross_entropy(hb.forward(feats, &bt), ds.biases(chunk));
        const Tensor db = hb.backward(bt, lb.grad, gb, *reversal != 0.0);
        if (*reversal != 0.0) {
          for (std::size_t k = 0; k < dfeat.size(); ++k) dfeat.data()[k] -= *reversal * db.data()[k];
        }
      }
      f.backward(ft, dfeat, gf, false);
      opt_f_.step(f.parameters(), gf, lr);
      opt_t_.step(ht.parameters(), gt, lr);
      if (reversal) opt_b_.step(hb.parameters(), gb, lr);
      total += loss.value * static_cast<double>(chunk.size());
    }
    return order.empty() ? 0.0 : total / static_cast<double>(order.size());
  }

  // One pass of h_b over frozen features. When `adv` is given, a batch of
  // it follows every adv_interval-th clean batch.
  void bias_epoch(const Tensor& feats, std::span<const int> labels, const Tensor* adv,
                  std::span<const int> adv_labels, double lr) {
    nn::Network& hb = model_.network(Partition::kBiasHead);
    std::vector<std::size_t> order(static_cast<std::size_t>(feats.batch()));
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), bias_rng_);
    const std::size_t bs = static_cast<std::size_t>(cfg_.batch_size);
    const bool with_adv = adv != nullptr && adv->batch() > 0;
    std::vector<std::size_t> adv_order;
    std::size_t adv_pos = 0;
    if (with_adv) {
      adv_order.resize(static_cast<std::size_t>(adv->batch()));
      std::iota(adv_order.begin(), adv_order.end(), std::size_t{0});
      std::shuffle(adv_order.begin(), adv_order.end(), adv_rng_);
    }
    long long batches = 0;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t end = std::min(order.size(), start + bs);
      std::span<const std::size_t> rows(order.data() + start, end - start);
      std::vector<int> y;
      for (std::size_t r : rows) y.push_back(labels[r]);
      nn::fit_batch(hb, opt_b_, lr, nn::gather_rows(feats, rows), y);
      ++batches;
      if (with_adv && batches % cfg_.adv_interval == 0) {
        std::vector<std::size_t> arows;
        while (arows.size() < bs && arows.size() < adv_order.size()) {
          if (adv_pos == adv_order.size()) {
            std::shuffle(adv_order.begin(), adv_order.end(), adv_rng_);
            adv_pos = 0;
          }
          arows.push_back(adv_order[adv_pos++]);
        }
        std::vector<int> ay;
        for (std::size_t r : arows) ay.push_back(adv_labels[r]);
        nn::fit_batch(hb, opt_b_, lr, nn::gather_rows(*adv, arows), ay);
      }
    }
  }

  // Evaluates, appends the record and applies the stopping rules. Returns
  // true when training must stop.
  bool finish_epoch(EpochRecord rec, Clock::time_point start) {
    if (!test_.empty()) {
      metrics::BiasReport report = metrics::evaluate(model_, test_);
      rec.bacc = report.bacc;
      rec.overall_bias = report.overall_bias;
      result_.final_report = std::move(report);
    }
    rec.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    losses_.push_back(rec.target_loss);
    result_.records.push_back(rec);
    if (!std::isfinite(rec.target_loss)) {
      result_.status = RunStatus::kAbortedDivergence;
      result_.message = "target loss diverged at epoch " + std::to_string(rec.epoch);
      return true;
    }
    if (has_converged(cfg_.convergence, losses_)) {
      result_.status = RunStatus::kConverged;
      result_.message = "target loss plateaued at epoch " + std::to_string(rec.epoch);
      return true;
    }
    return false;
  }

 private:
  nn::CompositeClassifier& model_;
  const TrainConfig& cfg_;
  const GroupedDataset& test_;
  nn::Sgd opt_f_, opt_t_, opt_b_;
  std::mt19937_64 target_rng_, bias_rng_, adv_rng_;
  std::vector<double> losses_;
  TrainResult result_;
};

TrainResult run_plain(const GroupedDataset& train, const GroupedDataset& test,
                      nn::CompositeClassifier& model, const TrainConfig& cfg,
                      std::span<const double> weights, std::optional<double> reversal) {
  cfg.validate();
  Session s(model, cfg, test);
  for (int m = 0; m < cfg.epochs; ++m) {
    const auto start = Clock::now();
    EpochRecord rec;
    rec.epoch = m;
    rec.target_loss = s.target_epoch(train, weights, s.lr(m), reversal);
    s.journal(m, "target");
    if (s.finish_epoch(rec, start)) break;
  }
  return std::move(s.result());
}

struct Plan {
  std::vector<std::size_t> indices;
  std::vector<int> labels;
};

Plan make_plan(const GroupedDataset& train, std::uint64_t seed) {
  Plan p;
  for (const attack::PlanEntry& e : attack::plan_balancing_attack(train, derive_seed(seed, "plan"))) {
    p.indices.push_back(e.index);
    p.labels.push_back(e.b_attack);
  }
  return p;
}

std::vector<int> bias_labels(const GroupedDataset& ds) {
  return ds.biases(data::all_indices(ds));
}

// Keeps the attack outcome; returns the examples to train on.
std::vector<data::LabeledExample> absorb_attack(TrainResult& result, EpochRecord& rec,
                                                attack::AttackResult ar) {
  rec.attack_success = ar.success_rate;
  rec.target_preservation = ar.target_preservation_rate;
  const std::string tag = "epoch " + std::to_string(rec.epoch) + ": ";
  for (const std::string& w : ar.warnings) result.warnings.push_back(tag + w);
  std::vector<data::LabeledExample> out = std::move(ar.examples);
  ar.examples.clear();
  if (ar.success_rate == 0.0 && !ar.log.empty()) {
    result.warnings.push_back(tag + "attack success rate 0; no augmentation this round");
    out.clear();
  }
  result.attacks.push_back({rec.epoch, std::move(ar)});
  return out;
}

enum class Variant { kOnce, kOnline, kRobust };

TrainResult run_coupled(const GroupedDataset& train, const GroupedDataset& test,
                        nn::CompositeClassifier& model, const TrainConfig& cfg,
                        const attack::AttackConfig& acfg, Variant variant) {
  cfg.validate();
  acfg.validate();
  Session s(model, cfg, test);
  const Plan plan = make_plan(train, cfg.seed);
  if (plan.indices.empty()) {
    s.result().warnings.push_back("training set is balanced; nothing to attack");
  }
  const std::vector<int> b_ori = bias_labels(train);
  std::vector<data::LabeledExample> x_adv;
  GroupedDataset augmented;

  for (int m = 0; m < cfg.epochs; ++m) {
    const auto start = Clock::now();
    const double lr = s.lr(m);
    EpochRecord rec;
    rec.epoch = m;

    // (1) f and h_t on X_ori plus the previous round's adversarial set.
    rec.target_loss = s.target_epoch(x_adv.empty() ? train : augmented, {}, lr, std::nullopt);
    s.journal(m, "target");

    // (2) h_b on frozen features.
    const Tensor feats = metrics::frozen_features(model, train.examples());
    Tensor adv_feats;
    std::vector<int> adv_labels;
    const bool robust = variant == Variant::kRobust && !x_adv.empty();
    if (robust) {
      adv_feats = metrics::frozen_features(model, x_adv);
      for (const data::LabeledExample& ex : x_adv) {
        if (cfg.robust_labels == AdvLabelMode::kAttacked) {
          adv_labels.push_back(ex.bias);
        } else {
          adv_labels.push_back(train[*train.find(ex.source_id, data::Provenance::kOriginal)].bias);
        }
      }
    }
    s.bias_epoch(feats, b_ori, robust ? &adv_feats : nullptr, adv_labels, lr);
    s.journal(m, "bias_head");

    // (3) regenerate adversarial examples against {f; h_b}.
    const bool regenerate = !plan.indices.empty() && (variant != Variant::kOnce || m == 0) &&
                            (!cfg.online_cutoff_epoch || m < *cfg.online_cutoff_epoch);
    if (regenerate) {
      x_adv = absorb_attack(s.result(), rec,
                            attack::joint_attack(model, train, plan.indices, plan.labels, acfg));
      s.journal(m, "attack");
      augmented = x_adv.empty() ? GroupedDataset() : data::augment(train, x_adv);
    }
    rec.adversarial_count = x_adv.size();

    if (cfg.probe.enabled && m % cfg.probe.cadence == 0) {
      rec.transfer_acc = metrics::transferability_probe(model, x_adv, test, cfg.probe,
                                                        derive_seed(cfg.seed, "probe", m));
      s.journal(m, "probe");
    }
    if (s.finish_epoch(rec, start)) break;
  }
  s.result().adversarial = std::move(x_adv);
  return std::move(s.result());
}

}  // namespace

std::string to_string(Method m) { return kMethodNames[static_cast<int>(m)]; }

Method parse_method(const std::string& s) {
  for (int i = 0; i < 8; ++i) {
    if (s == kMethodNames[i]) return static_cast<Method>(i);
  }
  throw std::invalid_argument("unknown method '" + s + "'");
}

bool uses_attack(Method m) {
  return m == Method::kAedaPre || m == Method::kAedaOnce || m == Method::kAedaOnline ||
         m == Method::kAedaRobust;
}

std::string to_string(AdvLabelMode m) {
  return m == AdvLabelMode::kOriginal ? "original" : "attacked";
}

AdvLabelMode parse_adv_label_mode(const std::string& s) {
  if (s == "original") return AdvLabelMode::kOriginal;
  if (s == "attacked") return AdvLabelMode::kAttacked;
  throw std::invalid_argument("unknown adversarial label mode '" + s + "'");
}

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::kConverged:
      return "converged";
    case RunStatus::kEpochLimit:
      return "epoch-limit";
    case RunStatus::kAbortedDivergence:
      return "aborted-divergence";
    case RunStatus::kInapplicable:
      return "inapplicable";
  }
  return "unknown";
}

bool has_converged(const ConvergenceRule& rule, std::span<const double> losses) {
  if (!rule.enabled || losses.empty()) return false;
  const std::size_t m = losses.size() - 1;
  if (losses.size() < static_cast<std::size_t>(std::max(rule.min_epochs, 1))) return false;
  if (m < static_cast<std::size_t>(rule.window)) return false;
  const double prev = losses[m - rule.window];
  const double cur = losses[m];
  if (!std::isfinite(prev) || !std::isfinite(cur)) return false;
  if (prev == 0.0) return cur <= 0.0;
  return (prev - cur) / std::fabs(prev) < rule.threshold;
}

void TrainConfig::validate() const {
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (adv_interval < 1) throw std::invalid_argument("adversarial interval k must be >= 1");
  if (!(optimizer.learning_rate > 0.0)) throw std::invalid_argument("learning rate must be > 0");
  if (optimizer.name != "sgd") throw std::invalid_argument("unknown optimizer '" + optimizer.name + "'");
  if (convergence.window < 1) throw std::invalid_argument("convergence window must be >= 1");
  if (reversal_strength < 0.0) throw std::invalid_argument("reversal strength must be >= 0");
  if (bias_classifier_epochs < 0) throw std::invalid_argument("bias classifier epochs must be >= 0");
  if (probe.probe_epochs < 1) throw std::invalid_argument("probe epochs must be >= 1");
  if (probe.cadence < 1) throw std::invalid_argument("probe cadence must be >= 1");
}

std::optional<std::vector<double>> reweighting_weights(const GroupedDataset& train) {
  const data::GroupStats& st = train.group_counts();
  double inv_sum = 0.0;
  int cells = 0;
  for (int t = 0; t < st.num_classes(); ++t) {
    if (st.class_total(t) == 0) continue;
    for (int b = 0; b < 2; ++b) {
      if (st.count(t, b) == 0) return std::nullopt;
      inv_sum += 1.0 / static_cast<double>(st.count(t, b));
      ++cells;
    }
  }
  std::vector<double> w(train.size());
  if (cells == 0) return w;
  const double mean = inv_sum / cells;
  for (std::size_t i = 0; i < train.size(); ++i) {
    w[i] = 1.0 / static_cast<double>(st.count(train[i].target, train[i].bias)) / mean;
  }
  return w;
}

TrainResult train_original(const GroupedDataset& train, const GroupedDataset& test,
                           nn::CompositeClassifier& model, const TrainConfig& config) {
  return run_plain(train, test, model, config, {}, std::nullopt);
}

TrainResult train_downsampling(const GroupedDataset& train, const GroupedDataset& test,
                               nn::CompositeClassifier& model, const TrainConfig& config) {
  const data::GroupStats& st = train.group_counts();
  for (int t = 0; t < st.num_classes(); ++t) {
    if (st.class_total(t) > 0 && (st.count(t, 0) == 0 || st.count(t, 1) == 0)) {
      return inapplicable("class " + std::to_string(t) + " has an empty bias group");
    }
  }
  const GroupedDataset kept =
      data::inject_imbalance(train, data::uniform_plan(train.num_classes(), 0.5),
                             derive_seed(config.seed, "downsample"));
  TrainResult r = run_plain(kept, test, model, config, {}, std::nullopt);
  r.warnings.push_back("down-sampled to " + std::to_string(kept.size()) + " of " +
                       std::to_string(train.size()) + " examples");
  return r;
}

TrainResult train_reweighting(const GroupedDataset& train, const GroupedDataset& test,
                              nn::CompositeClassifier& model, const TrainConfig& config) {
  const auto weights = reweighting_weights(train);
  if (!weights) return inapplicable("some class has an empty bias group");
  return run_plain(train, test, model, config, *weights, std::nullopt);
}

TrainResult train_adv_debias(const GroupedDataset& train, const GroupedDataset& test,
                             nn::CompositeClassifier& model, const TrainConfig& config) {
  return run_plain(train, test, model, config, {}, config.reversal_strength);
}

TrainResult train_aeda_pre(const GroupedDataset& train, const GroupedDataset& test,
                           nn::CompositeClassifier& model, const TrainConfig& config,
                           const attack::AttackConfig& attack_config) {
  config.validate();
  attack_config.validate();
  const Plan plan = make_plan(train, config.seed);
  if (plan.indices.empty()) {
    TrainResult r = train_original(train, test, model, config);
    r.warnings.push_back("training set is balanced; trained on the original data only");
    return r;
  }

  // Preliminary target model and standalone bias classifier.
  nn::CompositeClassifier prelim = model;
  TrainConfig pre_cfg = config;
  pre_cfg.probe.enabled = false;
  const TrainResult pre = run_plain(train, GroupedDataset(), prelim, pre_cfg, {}, std::nullopt);
  if (pre.status == RunStatus::kAbortedDivergence) {
    TrainResult r;
    r.status = pre.status;
    r.message = "preliminary model: " + pre.message;
    return r;
  }
  nn::StandaloneBiasClassifier g(model.architecture(), derive_seed(config.seed, "pre_bias"));
  fit_bias_classifier(g, train, bias_labels(train), config.bias_classifier_epochs,
                      config.batch_size, config.optimizer, derive_seed(config.seed, "pre_bias"));

  Session s(model, config, test);
  EpochRecord first;
  const nn::StandaloneTargetView target_view(prelim);
  std::vector<data::LabeledExample> x_adv = absorb_attack(
      s.result(), first,
      attack::joint_attack(attack::SplitObjective(g, target_view), train, plan.indices,
                           plan.labels, attack_config));
  if (config.pre_finetune) model = prelim;
  const GroupedDataset augmented = x_adv.empty() ? train : data::augment(train, x_adv);

  for (int m = 0; m < config.epochs; ++m) {
    const auto start = Clock::now();
    EpochRecord rec = m == 0 ? first : EpochRecord{};
    rec.epoch = m;
    rec.target_loss = s.target_epoch(augmented, {}, s.lr(m), std::nullopt);
    s.journal(m, "target");
    rec.adversarial_count = x_adv.size();
    if (config.probe.enabled && m % config.probe.cadence == 0) {
      rec.transfer_acc = metrics::transferability_probe(model, x_adv, test, config.probe,
                                                        derive_seed(config.seed, "probe", m));
      s.journal(m, "probe");
    }
    if (s.finish_epoch(rec, start)) break;
  }
  s.result().adversarial = std::move(x_adv);
  return std::move(s.result());
}

TrainResult train_aeda_once(const GroupedDataset& train, const GroupedDataset& test,
                            nn::CompositeClassifier& model, const TrainConfig& config,
                            const attack::AttackConfig& attack_config) {
  return run_coupled(train, test, model, config, attack_config, Variant::kOnce);
}

TrainResult train_aeda_online(const GroupedDataset& train, const GroupedDataset& test,
                              nn::CompositeClassifier& model, const TrainConfig& config,
                              const attack::AttackConfig& attack_config) {
  return run_coupled(train, test, model, config, attack_config, Variant::kOnline);
}

TrainResult train_aeda_robust(const GroupedDataset& train, const GroupedDataset& test,
                              nn::CompositeClassifier& model, const TrainConfig& config,
                              const attack::AttackConfig& attack_config) {
  return run_coupled(train, test, model, config, attack_config, Variant::kRobust);
}

TrainResult run_method(const GroupedDataset& train, const GroupedDataset& test,
                       nn::CompositeClassifier& model, const TrainConfig& config,
                       const attack::AttackConfig& attack_config) {
  switch (config.method) {
    case Method::kOriginal:
      return train_original(train, test, model, config);
    case Method::kDownsampling:
      return train_downsampling(train, test, model, config);
    case Method::kReweighting:
      return train_reweighting(train, test, model, config);
    case Method::kAdvDebias:
      return train_adv_debias(train, test, model, config);
    case Method::kAedaPre:
      return train_aeda_pre(train, test, model, config, attack_config);
    case Method::kAedaOnce:
      return train_aeda_once(train, test, model, config, attack_config);
    case Method::kAedaOnline:
      return train_aeda_online(train, test, model, config, attack_config);
    case Method::kAedaRobust:
      return train_aeda_robust(train, test, model, config, attack_config);
  }
  throw std::invalid_argument("unknown method");
}

}  // namespace aeda::train
