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

#ifndef AEDA_EXPERIMENT_CONFIG_HPP_
#define AEDA_EXPERIMENT_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "aeda/attack/attack.hpp"
#include "aeda/data/corpus.hpp"
#include "aeda/data/synth.hpp"
#include "aeda/metrics/probe.hpp"
#include "aeda/nn/composite.hpp"
#include "aeda/train/switch.hpp"
#include "aeda/train/trainer.hpp"

namespace aeda::experiment {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bundled 5k-digit subset at half resolution.
inline data::CorpusSpec desk_corpus() {
  data::CorpusSpec spec;
  spec.path = "data/mnist_5k.csv.gz";
  spec.downsample = 2;
  return spec;
}

struct DatasetSection {
  data::CorpusSpec corpus = desk_corpus();
  data::ColorSpec colors;
  // "extreme", "balanced", "uniform:<r>", "split:<low>:<high>" or an
  // explicit {"<class>": ratio} object (kept as JSON text).
  std::string ratio_plan = "extreme";
  std::uint64_t seed = 0;

  friend bool operator==(const DatasetSection&, const DatasetSection&) = default;
};

struct ModelSection {
  std::string preset = "small_cnn";
  int feature_dim = 128;
  int head_hidden = 0;

  friend bool operator==(const ModelSection&, const ModelSection&) = default;
};

struct SwitchSection {
  int epochs = 5;
  int robust_epochs = 3;

  friend bool operator==(const SwitchSection&, const SwitchSection&) = default;
};

struct OutputSection {
  std::string root = "runs";
  std::string name;  // empty: <method>-s<seed>-<config hash prefix>
  std::vector<std::string> plots;  // plot kinds emitted into the run directory

  friend bool operator==(const OutputSection&, const OutputSection&) = default;
};

struct ExperimentConfig {
  DatasetSection dataset;
  ModelSection model;
  train::TrainConfig method;  // method.probe is the probe section
  attack::AttackConfig attack;
  SwitchSection switching;
  OutputSection output;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// Environment variable that replaces output.root when set.
inline constexpr const char* kOutputRootEnv = "AEDA_OUTPUT_ROOT";

// Canonical JSON text (sorted keys, fixed float formatting).
std::string to_json_text(const ExperimentConfig& config);
// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig from_json_text(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Applies "section.key=value" overrides; the value is parsed as JSON and
// falls back to a plain string.
ExperimentConfig apply_overrides(const ExperimentConfig& config,
                                 const std::vector<std::string>& assignments);

// Throws ConfigError for inconsistent settings.
void validate(const ExperimentConfig& config);

data::RatioPlan resolve_ratio_plan(const std::string& spec, int num_classes);
nn::Architecture architecture_for(const ExperimentConfig& config, int num_classes);
train::SwitchConfig switch_config_for(const ExperimentConfig& config, int num_classes);

std::string config_hash(const ExperimentConfig& config);
std::string dataset_hash(const ExperimentConfig& config);

std::filesystem::path output_root(const ExperimentConfig& config);

}  // namespace aeda::experiment

#endif  // AEDA_EXPERIMENT_CONFIG_HPP_
