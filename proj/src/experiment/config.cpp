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

#include "aeda/experiment/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "aeda/util.hpp"

namespace aeda::experiment {

namespace {

using nlohmann::json;

const char* const kPlotKinds[] = {"bias_vs_ratio", "transferability_curves", "confusion_grids",
                                  "bias_curves"};

json rgb(const data::Rgb& c) { return json::array({c[0], c[1], c[2]}); }

data::Rgb parse_rgb(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("colors must be [r, g, b]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json to_tree(const ExperimentConfig& c) {
  const auto& d = c.dataset;
  json plan;
  if (!d.ratio_plan.empty() && d.ratio_plan.front() == '{') {
    plan = json::parse(d.ratio_plan);
  } else {
    plan = d.ratio_plan;
  }
  const train::TrainConfig& m = c.method;
  const attack::AttackConfig& a = c.attack;
  json tree;
  tree["dataset"] = {
      {"format", d.corpus.format},
      {"path", d.corpus.path},
      {"label_column", d.corpus.label_column},
      {"side", d.corpus.side},
      {"test_fraction", d.corpus.test_fraction},
      {"downsample", d.corpus.downsample},
      {"max_train_per_class", d.corpus.max_train_per_class},
      {"max_test_per_class", d.corpus.max_test_per_class},
      {"color_b0", rgb(d.colors.color_map[0])},
      {"color_b1", rgb(d.colors.color_map[1])},
      {"background_mode",
       d.colors.background_mode == data::BackgroundMode::kReplaceBackground ? "replace" : "tint"},
      {"luminance_threshold", d.colors.luminance_threshold},
      {"ratio_plan", plan},
      {"seed", d.seed},
  };
  tree["model"] = {{"preset", c.model.preset},
                   {"feature_dim", c.model.feature_dim},
                   {"head_hidden", c.model.head_hidden}};
  tree["method"] = {
      {"name", train::to_string(m.method)},
      {"epochs", m.epochs},
      {"batch_size", m.batch_size},
      {"optimizer", m.optimizer.name},
      {"learning_rate", m.optimizer.learning_rate},
      {"momentum", m.optimizer.momentum},
      {"weight_decay", m.optimizer.weight_decay},
      {"decay_factor", m.optimizer.decay_factor},
      {"decay_at", m.optimizer.decay_at},
      {"k", m.adv_interval},
      {"convergence", m.convergence.enabled},
      {"convergence_window", m.convergence.window},
      {"convergence_threshold", m.convergence.threshold},
      {"min_epochs", m.convergence.min_epochs},
      {"seed", m.seed},
      {"online_cutoff_epoch",
       m.online_cutoff_epoch ? json(*m.online_cutoff_epoch) : json(nullptr)},
      {"reversal_strength", m.reversal_strength},
      {"robust_labels", train::to_string(m.robust_labels)},
      {"pre_finetune", m.pre_finetune},
      {"bias_classifier_epochs", m.bias_classifier_epochs},
  };
  tree["attack"] = {{"epsilon", a.epsilon},       {"alpha", a.alpha},
                    {"steps", a.steps},           {"lambda", a.lambda},
                    {"clip_min", a.clip_min},     {"clip_max", a.clip_max},
                    {"success_rule", attack::to_string(a.success_rule)},
                    {"batch_size", a.batch_size}};
  const metrics::ProbeConfig& p = m.probe;
  tree["probe"] = {{"enabled", p.enabled},       {"probe_epochs", p.probe_epochs},
                   {"cadence", p.cadence},       {"batch_size", p.batch_size},
                   {"learning_rate", p.learning_rate}, {"momentum", p.momentum}};
  tree["switch"] = {{"epochs", c.switching.epochs}, {"robust_epochs", c.switching.robust_epochs}};
  tree["output"] = {{"root", c.output.root}, {"name", c.output.name}, {"plots", c.output.plots}};
  return tree;
}

template <typename T>
T take(const json& section, const char* key) {
  try {
    return section.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

ExperimentConfig from_tree(const json& t) {
  ExperimentConfig c;
  const json& d = t.at("dataset");
  c.dataset.corpus.format = take<std::string>(d, "format");
  c.dataset.corpus.path = take<std::string>(d, "path");
  c.dataset.corpus.label_column = take<std::string>(d, "label_column");
  c.dataset.corpus.side = take<int>(d, "side");
  c.dataset.corpus.test_fraction = take<double>(d, "test_fraction");
  c.dataset.corpus.downsample = take<int>(d, "downsample");
  c.dataset.corpus.max_train_per_class = take<int>(d, "max_train_per_class");
  c.dataset.corpus.max_test_per_class = take<int>(d, "max_test_per_class");
  c.dataset.colors.color_map = {parse_rgb(d.at("color_b0")), parse_rgb(d.at("color_b1"))};
  const std::string mode = take<std::string>(d, "background_mode");
  if (mode != "replace" && mode != "tint") throw ConfigError("background_mode must be replace or tint");
  c.dataset.colors.background_mode =
      mode == "replace" ? data::BackgroundMode::kReplaceBackground : data::BackgroundMode::kTint;
  c.dataset.colors.luminance_threshold = take<double>(d, "luminance_threshold");
  const json& plan = d.at("ratio_plan");
  c.dataset.ratio_plan = plan.is_string() ? plan.get<std::string>() : plan.dump();
  c.dataset.seed = take<std::uint64_t>(d, "seed");

  const json& mo = t.at("model");
  c.model.preset = take<std::string>(mo, "preset");
  c.model.feature_dim = take<int>(mo, "feature_dim");
  c.model.head_hidden = take<int>(mo, "head_hidden");

  const json& m = t.at("method");
  train::TrainConfig& tc = c.method;
  try {
    tc.method = train::parse_method(take<std::string>(m, "name"));
    tc.robust_labels = train::parse_adv_label_mode(take<std::string>(m, "robust_labels"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  tc.epochs = take<int>(m, "epochs");
  tc.batch_size = take<int>(m, "batch_size");
  tc.optimizer.name = take<std::string>(m, "optimizer");
  tc.optimizer.learning_rate = take<double>(m, "learning_rate");
  tc.optimizer.momentum = take<double>(m, "momentum");
  tc.optimizer.weight_decay = take<double>(m, "weight_decay");
  tc.optimizer.decay_factor = take<double>(m, "decay_factor");
  tc.optimizer.decay_at = take<double>(m, "decay_at");
  tc.adv_interval = take<int>(m, "k");
  tc.convergence.enabled = take<bool>(m, "convergence");
  tc.convergence.window = take<int>(m, "convergence_window");
  tc.convergence.threshold = take<double>(m, "convergence_threshold");
  tc.convergence.min_epochs = take<int>(m, "min_epochs");
  tc.seed = take<std::uint64_t>(m, "seed");
  if (!m.at("online_cutoff_epoch").is_null()) {
    tc.online_cutoff_epoch = take<int>(m, "online_cutoff_epoch");
  }
  tc.reversal_strength = take<double>(m, "reversal_strength");
  tc.pre_finetune = take<bool>(m, "pre_finetune");
  tc.bias_classifier_epochs = take<int>(m, "bias_classifier_epochs");

  const json& a = t.at("attack");
  c.attack.epsilon = take<double>(a, "epsilon");
  c.attack.alpha = take<double>(a, "alpha");
  c.attack.steps = take<int>(a, "steps");
  c.attack.lambda = take<double>(a, "lambda");
  c.attack.clip_min = take<double>(a, "clip_min");
  c.attack.clip_max = take<double>(a, "clip_max");
  try {
    c.attack.success_rule = attack::parse_success_rule(take<std::string>(a, "success_rule"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  c.attack.batch_size = take<int>(a, "batch_size");

  const json& p = t.at("probe");
  tc.probe.enabled = take<bool>(p, "enabled");
  tc.probe.probe_epochs = take<int>(p, "probe_epochs");
  tc.probe.cadence = take<int>(p, "cadence");
  tc.probe.batch_size = take<int>(p, "batch_size");
  tc.probe.learning_rate = take<double>(p, "learning_rate");
  tc.probe.momentum = take<double>(p, "momentum");

  const json& s = t.at("switch");
  c.switching.epochs = take<int>(s, "epochs");
  c.switching.robust_epochs = take<int>(s, "robust_epochs");

  const json& o = t.at("output");
  c.output.root = take<std::string>(o, "root");
  c.output.name = take<std::string>(o, "name");
  c.output.plots = take<std::vector<std::string>>(o, "plots");
  return c;
}

// Overlays `user` onto the default tree, rejecting unknown keys.
json merge(json base, const json& user) {
  if (!user.is_object()) throw ConfigError("config root must be an object");
  for (const auto& [section, body] : user.items()) {
    if (!base.contains(section)) throw ConfigError("unknown config section '" + section + "'");
    if (!body.is_object()) throw ConfigError("section '" + section + "' must be an object");
    for (const auto& [key, value] : body.items()) {
      if (!base[section].contains(key)) {
        throw ConfigError("unknown key '" + section + "." + key + "'");
      }
      base[section][key] = value;
    }
  }
  return base;
}

}  // namespace

std::string to_json_text(const ExperimentConfig& config) { return to_tree(config).dump(2); }

ExperimentConfig from_json_text(const std::string& text) {
  json user;
  try {
    user = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return from_tree(merge(to_tree(ExperimentConfig{}), user));
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

ExperimentConfig apply_overrides(const ExperimentConfig& config,
                                 const std::vector<std::string>& assignments) {
  json tree = to_tree(config);
  json user = json::object();
  for (const std::string& a : assignments) {
    const auto eq = a.find('=');
    const auto dot = a.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
      throw ConfigError("override must look like section.key=value: '" + a + "'");
    }
    const std::string section = a.substr(0, dot);
    const std::string key = a.substr(dot + 1, eq - dot - 1);
    const std::string raw = a.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    user[section][key] = value;
  }
  return from_tree(merge(tree, user));
}

data::RatioPlan resolve_ratio_plan(const std::string& spec, int num_classes) {
  data::RatioPlan plan;
  try {
    if (spec == "extreme") {
      plan = data::split_plan(num_classes, 0.0, 1.0);
    } else if (spec == "balanced") {
      plan = data::uniform_plan(num_classes, 0.5);
    } else if (spec.rfind("uniform:", 0) == 0) {
      plan = data::uniform_plan(num_classes, std::stod(spec.substr(8)));
    } else if (spec.rfind("split:", 0) == 0) {
      const std::string rest = spec.substr(6);
      const auto colon = rest.find(':');
      if (colon == std::string::npos) throw ConfigError("split plan needs low:high");
      plan = data::split_plan(num_classes, std::stod(rest.substr(0, colon)),
                              std::stod(rest.substr(colon + 1)));
    } else if (!spec.empty() && spec.front() == '{') {
      const json obj = json::parse(spec);
      for (const auto& [k, v] : obj.items()) plan[std::stoi(k)] = v.get<double>();
    } else {
      throw ConfigError("unknown ratio plan '" + spec + "'");
    }
    data::validate_plan(plan, num_classes);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("invalid ratio plan '" + spec + "': " + e.what());
  }
  return plan;
}

nn::Architecture architecture_for(const ExperimentConfig& config, int num_classes) {
  nn::Architecture arch;
  arch.preset = config.model.preset;
  arch.feature_dim = config.model.feature_dim;
  arch.head_hidden = config.model.head_hidden;
  arch.num_classes = num_classes;
  const int ds = std::max(1, config.dataset.corpus.downsample);
  arch.input = nn::Shape{config.dataset.corpus.side / ds, config.dataset.corpus.side / ds, 3};
  return arch;
}

train::SwitchConfig switch_config_for(const ExperimentConfig& config, int num_classes) {
  train::SwitchConfig s;
  s.architecture = architecture_for(config, num_classes);
  s.epochs = config.switching.epochs;
  s.robust_epochs = config.switching.robust_epochs;
  s.batch_size = config.method.batch_size;
  s.optimizer = config.method.optimizer;
  s.seed = config.method.seed;
  return s;
}

void validate(const ExperimentConfig& config) {
  try {
    config.method.validate();
    config.attack.validate();
    nn::resolve_architecture(architecture_for(config, 10));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (config.method.epochs < 1) throw ConfigError("method.epochs must be >= 1");
  if (config.model.feature_dim < 1) throw ConfigError("model.feature_dim must be >= 1");
  if (config.dataset.corpus.side < 1 || config.dataset.corpus.downsample < 1) {
    throw ConfigError("dataset.side and dataset.downsample must be >= 1");
  }
  resolve_ratio_plan(config.dataset.ratio_plan, 10);
  if (config.switching.epochs < 1 || config.switching.robust_epochs < 0) {
    throw ConfigError("switch epochs must be >= 1 and robust_epochs >= 0");
  }
  for (const std::string& kind : config.output.plots) {
    if (std::find(std::begin(kPlotKinds), std::end(kPlotKinds), kind) == std::end(kPlotKinds)) {
      throw ConfigError("unknown plot kind '" + kind + "'");
    }
  }
  if (config.output.root.empty() && std::getenv(kOutputRootEnv) == nullptr) {
    throw ConfigError("output.root must not be empty");
  }
}

std::string config_hash(const ExperimentConfig& config) {
  return hex64(fnv1a(to_tree(config).dump()));
}

std::string dataset_hash(const ExperimentConfig& config) {
  return hex64(fnv1a(to_tree(config)["dataset"].dump()));
}

std::filesystem::path output_root(const ExperimentConfig& config) {
  if (const char* env = std::getenv(kOutputRootEnv); env != nullptr && *env != '\0') return env;
  return config.output.root;
}

}  // namespace aeda::experiment
