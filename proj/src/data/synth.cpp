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

#include "aeda/data/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "aeda/util.hpp"

namespace aeda::data {

namespace {

// Half-up rounding with a small guard so that values like 12.4999999999
// produced by (1 - 0.8) / 0.8 * 50 round the way the exact value would.
std::size_t round_half_up(double x) {
  return static_cast<std::size_t>(std::floor(x + 0.5 + 1e-9));
}

}  // namespace

void validate_plan(const RatioPlan& plan, int num_classes) {
  for (int t = 0; t < num_classes; ++t) {
    auto it = plan.find(t);
    if (it == plan.end()) {
      throw DatasetError("ratio plan has no entry for class " + std::to_string(t));
    }
    if (!(it->second >= 0.0 && it->second <= 1.0)) {
      throw DatasetError("ratio for class " + std::to_string(t) + " is outside [0,1]");
    }
  }
  for (const auto& [t, r] : plan) {
    if (t < 0 || t >= num_classes) {
      throw DatasetError("ratio plan names unknown class " + std::to_string(t));
    }
  }
}

RatioPlan split_plan(int num_classes, double low, double high) {
  RatioPlan plan;
  for (int t = 0; t < num_classes; ++t) plan[t] = t < num_classes / 2 ? low : high;
  return plan;
}

RatioPlan uniform_plan(int num_classes, double ratio) {
  RatioPlan plan;
  for (int t = 0; t < num_classes; ++t) plan[t] = ratio;
  return plan;
}

std::vector<double> colorize(const std::vector<double>& gray, const ColorSpec& spec,
                             int bias) {
  const Rgb& color = spec.color_map.at(bias);
  std::vector<double> out(gray.size() * 3);
  for (std::size_t i = 0; i < gray.size(); ++i) {
    const double v = std::clamp(gray[i], 0.0, 1.0);
    for (int c = 0; c < 3; ++c) {
      double px = 0.0;
      if (spec.background_mode == BackgroundMode::kReplaceBackground) {
        px = v < spec.luminance_threshold ? color[c] : v;
      } else {
        px = color[c] * (1.0 - v) + v;
      }
      out[i * 3 + c] = std::clamp(px, 0.0, 1.0);
    }
  }
  return out;
}

std::pair<GroupedDataset, GroupedDataset> build_cmnist(const GrayscaleCorpus& corpus,
                                                      const ColorSpec& colors,
                                                      const RatioPlan& ratio_plan,
                                                      std::uint64_t seed) {
  if (colors.color_map[0] == colors.color_map[1]) {
    throw DatasetError("the two bias colors must differ");
  }
  const int k = corpus.num_classes;
  validate_plan(ratio_plan, k);
  const nn::Shape shape{corpus.height, corpus.width, 3};
  GroupedDataset train(Split::kTrain, shape, k);
  GroupedDataset test(Split::kTest, shape, k);

  std::mt19937_64 rng(derive_seed(seed, "cmnist_train"));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const GrayImage& img : corpus.train) {
    const int b = unit(rng) < ratio_plan.at(img.label) ? 1 : 0;
    train.add({img.source_id, img.label, b, Provenance::kOriginal, colorize(img.pixels, colors, b)});
  }

  // Test: per class, a seeded permutation alternates the two colors.
  std::vector<std::vector<std::size_t>> by_class(k);
  for (std::size_t i = 0; i < corpus.test.size(); ++i) by_class[corpus.test[i].label].push_back(i);
  std::vector<int> test_bias(corpus.test.size(), 0);
  for (int t = 0; t < k; ++t) {
    std::vector<std::size_t> order = by_class[t];
    std::mt19937_64 crng(derive_seed(seed, "cmnist_test", static_cast<std::uint64_t>(t)));
    std::shuffle(order.begin(), order.end(), crng);
    for (std::size_t r = 0; r < order.size(); ++r) test_bias[order[r]] = static_cast<int>(r % 2);
  }
  for (std::size_t i = 0; i < corpus.test.size(); ++i) {
    const GrayImage& img = corpus.test[i];
    test.add({img.source_id, img.label, test_bias[i], Provenance::kOriginal,
              colorize(img.pixels, colors, test_bias[i])});
  }

  for (int t = 0; t < k; ++t) {
    for (GroupedDataset* ds : {&train, &test}) {
      if (ds->group_counts().class_total(t) == 0) {
        ds->notes().push_back("class " + std::to_string(t) + " is empty in the " +
                              to_string(ds->split()) + " split");
      }
    }
  }
  return {std::move(train), std::move(test)};
}

std::array<std::size_t, 2> balanced_keep_counts(std::size_t n0, std::size_t n1, double ratio) {
  if (ratio >= 1.0) return {0, n1};
  if (ratio <= 0.0) return {n0, 0};
  if (n0 == 0 || n1 == 0) return {n0, n1};  // unattainable; caller records it
  // Keep every b=1 example if the b=0 cell can supply the complement.
  const std::size_t k0 = round_half_up(static_cast<double>(n1) * (1.0 - ratio) / ratio);
  if (k0 <= n0) return {k0, n1};
  const std::size_t k1 = round_half_up(static_cast<double>(n0) * ratio / (1.0 - ratio));
  return {n0, std::min(k1, n1)};
}

GroupedDataset inject_imbalance(const GroupedDataset& dataset, const RatioPlan& ratio_plan,
                                std::uint64_t seed) {
  const int k = dataset.num_classes();
  validate_plan(ratio_plan, k);
  std::vector<std::array<std::vector<std::size_t>, 2>> cells(k);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    cells[dataset[i].target][dataset[i].bias].push_back(i);
  }

  std::set<std::size_t> keep;
  std::vector<Shortfall> shortfalls;
  for (int t = 0; t < k; ++t) {
    const std::size_t n0 = cells[t][0].size();
    const std::size_t n1 = cells[t][1].size();
    const double requested = ratio_plan.at(t);
    const auto kept = balanced_keep_counts(n0, n1, requested);
    for (int b = 0; b < 2; ++b) {
      std::vector<std::size_t> order = cells[t][b];
      std::mt19937_64 rng(derive_seed(seed, "inject_imbalance",
                                      static_cast<std::uint64_t>(t * 2 + b)));
      std::shuffle(order.begin(), order.end(), rng);
      keep.insert(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(kept[b]));
    }
    const std::size_t total = kept[0] + kept[1];
    std::optional<double> achieved;
    if (total > 0) achieved = static_cast<double>(kept[1]) / static_cast<double>(total);
    if (!achieved || *achieved != requested) {
      Shortfall s;
      s.target = t;
      s.requested = requested;
      s.achieved = achieved;
      s.dropped = n0 + n1 - total;
      if (n0 + n1 == 0) {
        s.reason = "empty class";
      } else if (requested > 0.0 && requested < 1.0 && (n0 == 0 || n1 == 0)) {
        s.reason = "a required cell is empty; class kept unchanged";
      } else {
        s.reason = "integer rounding";
      }
      shortfalls.push_back(s);
    }
  }

  GroupedDataset out(dataset.split(), dataset.image_shape(), k);
  for (std::size_t i : keep) out.add(dataset[i]);
  out.notes() = dataset.notes();
  out.shortfalls() = std::move(shortfalls);
  return out;
}

}  // namespace aeda::data
