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

#ifndef AEDA_EXPERIMENT_PLOTS_HPP_
#define AEDA_EXPERIMENT_PLOTS_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace aeda::experiment {

class RunDirError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parsed contents of a finished run directory.
struct RunData {
  std::filesystem::path dir;
  std::string name;
  std::string method;
  std::uint64_t seed = 0;
  std::string status;
  std::string config_hash;
  std::string dataset_hash;
  std::vector<std::map<std::string, std::string>> records;  // records.csv rows
  std::string report_text;   // report.json, may be empty
  std::string dataset_text;  // dataset.json, may be empty

  // Value of a record column; absent when the field is empty or missing.
  std::optional<double> value(std::size_t row, const std::string& column) const;
};

RunData load_run(const std::filesystem::path& dir);

struct ComparisonRow {
  std::string run;
  std::string method;
  std::uint64_t seed = 0;
  std::string status;
  std::optional<double> bacc;
  std::optional<double> bias;  // display scale
};

struct MethodMean {
  std::string method;
  std::size_t runs = 0;
  std::optional<double> bacc;
  std::optional<double> bias;
};

struct OrderingFlag {
  std::string name;
  std::optional<bool> holds;  // absent when a method is missing
};

struct Comparison {
  std::string dataset_hash;
  std::vector<ComparisonRow> rows;
  std::vector<MethodMean> means;
  std::vector<OrderingFlag> flags;
};

// Final-epoch bACC and bias from each run's records. Throws RunDirError for
// an empty list or runs built on different datasets.
Comparison compare_runs(const std::vector<std::filesystem::path>& run_dirs);

std::string comparison_csv(const Comparison& c);
std::string comparison_text(const Comparison& c);

// Writes the tabular data of one figure kind into out_dir and returns the
// written files. Kinds: bias_vs_ratio, transferability_curves,
// confusion_grids, bias_curves. Throws RunDirError for an empty run list or
// an unknown kind.
std::vector<std::filesystem::path> emit_plot_data(const std::vector<std::filesystem::path>& runs,
                                                  const std::string& kind,
                                                  const std::filesystem::path& out_dir);

}  // namespace aeda::experiment

#endif  // AEDA_EXPERIMENT_PLOTS_HPP_
