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

#ifndef AEDA_DATA_SYNTH_HPP_
#define AEDA_DATA_SYNTH_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "aeda/data/corpus.hpp"
#include "aeda/data/dataset.hpp"

namespace aeda::data {

using Rgb = std::array<double, 3>;

enum class BackgroundMode { kReplaceBackground, kTint };

// Colors assigned to the two bias groups. Defaults: b=0 red, b=1 brown.
struct ColorSpec {
  std::array<Rgb, 2> color_map{Rgb{0.86, 0.08, 0.08}, Rgb{0.55, 0.35, 0.17}};
  BackgroundMode background_mode = BackgroundMode::kReplaceBackground;
  // Grayscale intensities below this are background (replace mode only).
  double luminance_threshold = 0.2;

  friend bool operator==(const ColorSpec&, const ColorSpec&) = default;
};

// Target class -> requested fraction of b=1 examples.
using RatioPlan = std::map<int, double>;

// Throws DatasetError if the plan misses a class or a ratio lies outside [0,1].
void validate_plan(const RatioPlan& plan, int num_classes);

// Classes [0, num_classes/2) get `low`, the rest `high`.
RatioPlan split_plan(int num_classes, double low, double high);
RatioPlan uniform_plan(int num_classes, double ratio);

// Turns a grayscale image into HWC RGB with the given bias group's color.
std::vector<double> colorize(const std::vector<double>& gray, const ColorSpec& spec, int bias);

// Colored-digit datasets. Each training image of class t receives b=1 with
// probability ratio_plan[t]; the test split assigns both colors to every
// class in equal proportion (cell counts differ by at most one). Empty
// classes are reported in the datasets' notes.
std::pair<GroupedDataset, GroupedDataset> build_cmnist(const GrayscaleCorpus& corpus,
                                                      const ColorSpec& colors,
                                                      const RatioPlan& ratio_plan,
                                                      std::uint64_t seed);

// Subsamples each (t, b) cell so class t reaches the requested ratio while
// keeping as many examples as possible. Only drops; never duplicates or
// relabels. Fractional counts round half up. Classes whose ratio cannot be
// met are kept as close as possible and listed in shortfalls().
GroupedDataset inject_imbalance(const GroupedDataset& dataset, const RatioPlan& ratio_plan,
                                std::uint64_t seed);

// Number of examples kept in each cell: {keep_b0, keep_b1}.
std::array<std::size_t, 2> balanced_keep_counts(std::size_t n0, std::size_t n1, double ratio);

}  // namespace aeda::data

#endif  // AEDA_DATA_SYNTH_HPP_
