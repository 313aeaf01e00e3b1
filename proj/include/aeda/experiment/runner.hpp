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

#ifndef AEDA_EXPERIMENT_RUNNER_HPP_
#define AEDA_EXPERIMENT_RUNNER_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aeda/data/dataset.hpp"
#include "aeda/experiment/config.hpp"
#include "aeda/metrics/bias_report.hpp"
#include "aeda/train/trainer.hpp"

namespace aeda::experiment {

struct Datasets {
  data::GroupedDataset train;
  data::GroupedDataset test;
};

// Loads the corpus and applies the colour/ratio recipe of the config.
Datasets build_datasets(const ExperimentConfig& config);

struct RunSummary {
  std::filesystem::path dir;
  std::optional<train::RunStatus> status;  // absent when a stage failed
  std::string message;
  std::string failed_stage;
  std::string config_hash;
};

// Run directory contents:
//   config.json      canonical config echo
//   dataset.json     group counts, ratios, notes, dataset hash
//   records.csv      one row per epoch record
//   timings.csv      wall time per epoch (not part of the determinism contract)
//   journal.csv      partition hashes after every step
//   attacks/         one log per attack round
//   adversarial/     last adversarial set, dataset layout
//   report.json      final bias report
//   model.ckpt       final checkpoint
//   status.json      status, warnings, hashes
//   manifest.json    content hash of every other file
// Stage failures are recorded in status.json and leave earlier artifacts.
RunSummary run_experiment(const ExperimentConfig& config);

// 0 converged, 10 epoch limit, 11 aborted on divergence, 12 inapplicable,
// 1 failed stage.
int exit_code(const RunSummary& summary);

std::string report_json(const metrics::BiasReport& report, const std::string& config_hash);

// CSV with a header row; absent values are empty fields.
std::string records_csv(const std::vector<train::EpochRecord>& records);

// Writes manifest.json for every regular file under `dir` except the
// volatile ones, which are listed without a hash.
void write_manifest(const std::filesystem::path& dir, const std::string& config_hash,
                    const std::vector<std::string>& volatile_files);

std::string file_hash(const std::filesystem::path& path);

}  // namespace aeda::experiment

#endif  // AEDA_EXPERIMENT_RUNNER_HPP_
