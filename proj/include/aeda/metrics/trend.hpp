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

#ifndef AEDA_METRICS_TREND_HPP_
#define AEDA_METRICS_TREND_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "aeda/data/dataset.hpp"
#include "aeda/metrics/bias_report.hpp"

namespace aeda::metrics {

// One trained model: the bias ratio of each class in its training data and
// its test report.
struct RatioRun {
  std::vector<std::optional<double>> bias_ratio;
  BiasReport report;
};

RatioRun make_ratio_run(const data::GroupedDataset& train, BiasReport report);

struct RatioPoint {
  std::size_t run = 0;
  int target = 0;
  double bias_ratio = 0.0;
  double imbalance = 0.0;  // |ratio - 0.5|
  double bias = 0.0;
};

struct TrendReport {
  std::vector<RatioPoint> rows;  // classes with a defined ratio and bias
  // Spearman correlation of (imbalance, bias); absent when either side is
  // constant.
  std::optional<double> rank_correlation;
  // Paired sign test: each point against the same class in its least
  // imbalanced run. Ties and self-pairs are dropped.
  std::size_t sign_positive = 0;
  std::size_t sign_negative = 0;
  std::optional<double> sign_test_p;  // one-sided, P(X >= positive)
};

TrendReport bias_vs_ratio_report(std::span<const RatioRun> runs);

// Average-rank Spearman correlation; absent for fewer than two points or a
// constant input.
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

// P(X >= k) for X ~ Binomial(n, 1/2).
double binomial_upper_tail(std::size_t k, std::size_t n);

}  // namespace aeda::metrics

#endif  // AEDA_METRICS_TREND_HPP_
