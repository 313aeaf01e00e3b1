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

#include "aeda/metrics/trend.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace aeda::metrics {

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

RatioRun make_ratio_run(const data::GroupedDataset& train, BiasReport report) {
  RatioRun run;
  for (int t = 0; t < train.num_classes(); ++t) run.bias_ratio.push_back(train.bias_ratio(t));
  run.report = std::move(report);
  return run;
}

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("spearman: length mismatch");
  if (x.size() < 2) return std::nullopt;
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / rx.size();
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / ry.size();
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

double binomial_upper_tail(std::size_t k, std::size_t n) {
  if (k == 0) return 1.0;
  if (k > n) return 0.0;
  double p = 0.0;
  for (std::size_t i = k; i <= n; ++i) {
    const double log_c = std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0);
    p += std::exp(log_c - static_cast<double>(n) * std::log(2.0));
  }
  return std::min(1.0, p);
}

TrendReport bias_vs_ratio_report(std::span<const RatioRun> runs) {
  TrendReport out;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const RatioRun& run = runs[r];
    const int k = run.report.num_classes;
    for (int t = 0; t < k && t < static_cast<int>(run.bias_ratio.size()); ++t) {
      if (!run.bias_ratio[t] || !run.report.per_class_bias[t]) continue;
      const double rho = *run.bias_ratio[t];
      out.rows.push_back({r, t, rho, std::fabs(rho - 0.5), *run.report.per_class_bias[t]});
    }
  }
  std::vector<double> xs, ys;
  for (const RatioPoint& p : out.rows) {
    xs.push_back(p.imbalance);
    ys.push_back(p.bias);
  }
  out.rank_correlation = spearman(xs, ys);

  for (const RatioPoint& p : out.rows) {
    const RatioPoint* ref = nullptr;
    for (const RatioPoint& q : out.rows) {
      if (q.target == p.target && (ref == nullptr || q.imbalance < ref->imbalance)) ref = &q;
    }
    if (ref == nullptr || ref == &p || ref->imbalance == p.imbalance) continue;
    if (p.bias > ref->bias) ++out.sign_positive;
    if (p.bias < ref->bias) ++out.sign_negative;
  }
  const std::size_t n = out.sign_positive + out.sign_negative;
  if (n > 0) out.sign_test_p = binomial_upper_tail(out.sign_positive, n);
  return out;
}

}  // namespace aeda::metrics
