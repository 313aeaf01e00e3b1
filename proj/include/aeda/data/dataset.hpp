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

#ifndef AEDA_DATA_DATASET_HPP_
#define AEDA_DATA_DATASET_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "aeda/nn/tensor.hpp"

namespace aeda::data {

enum class Split { kTrain, kTest };
enum class Provenance { kOriginal, kAdversarial };

std::string to_string(Split s);
std::string to_string(Provenance p);
Split parse_split(const std::string& s);
Provenance parse_provenance(const std::string& s);

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LabeledExample {
  std::uint64_t source_id = 0;
  int target = 0;
  int bias = 0;
  Provenance provenance = Provenance::kOriginal;
  std::vector<double> pixels;  // HWC, every value in [0,1]

  friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

// Per-(t, b) example counts.
class GroupStats {
 public:
  GroupStats() = default;
  explicit GroupStats(int num_classes) : counts_(num_classes, {0, 0}) {}

  int num_classes() const { return static_cast<int>(counts_.size()); }
  std::size_t count(int target, int bias) const { return counts_.at(target).at(bias); }
  std::size_t class_total(int target) const {
    return counts_.at(target)[0] + counts_.at(target)[1];
  }
  std::size_t total() const;

  // Fraction of b=1 among class t; absent when the class is empty.
  std::optional<double> bias_ratio(int target) const;

  void increment(int target, int bias) { ++counts_.at(target).at(bias); }

  friend bool operator==(const GroupStats&, const GroupStats&) = default;

 private:
  std::vector<std::array<std::size_t, 2>> counts_;
};

// Bookkeeping for a class whose requested bias ratio could not be met.
struct Shortfall {
  int target = 0;
  double requested = 0.0;
  std::optional<double> achieved;
  std::size_t dropped = 0;
  std::string reason;
};

// Examples of one split, deduplicated by (source_id, provenance), with
// incrementally maintained group counts.
class GroupedDataset {
 public:
  GroupedDataset() = default;
  GroupedDataset(Split split, nn::Shape image_shape, int num_classes);

  Split split() const { return split_; }
  const nn::Shape& image_shape() const { return shape_; }
  int num_classes() const { return num_classes_; }

  // Returns false (and leaves the dataset unchanged) for a duplicate
  // (source_id, provenance). Throws DatasetError for invalid labels, a
  // wrong pixel count or pixels outside [0,1].
  bool add(LabeledExample example);

  std::size_t size() const { return examples_.size(); }
  bool empty() const { return examples_.empty(); }
  const LabeledExample& operator[](std::size_t i) const { return examples_[i]; }
  std::span<const LabeledExample> examples() const { return examples_; }

  const GroupStats& group_counts() const { return stats_; }
  std::optional<double> bias_ratio(int target) const { return stats_.bias_ratio(target); }

  std::vector<std::string>& notes() { return notes_; }
  const std::vector<std::string>& notes() const { return notes_; }
  std::vector<Shortfall>& shortfalls() { return shortfalls_; }
  const std::vector<Shortfall>& shortfalls() const { return shortfalls_; }

  // Gathers the given examples into an NHWC batch.
  nn::Tensor batch(std::span<const std::size_t> indices) const;
  std::vector<int> targets(std::span<const std::size_t> indices) const;
  std::vector<int> biases(std::span<const std::size_t> indices) const;

  // Index of the example with the given key, if present.
  std::optional<std::size_t> find(std::uint64_t source_id, Provenance provenance) const;

 private:
  Split split_ = Split::kTrain;
  nn::Shape shape_;
  int num_classes_ = 0;
  std::vector<LabeledExample> examples_;
  std::map<std::pair<std::uint64_t, int>, std::size_t> keys_;
  GroupStats stats_;
  std::vector<std::string> notes_;
  std::vector<Shortfall> shortfalls_;
};

// Recomputes group counts with a full pass over the examples.
GroupStats group_stats(const GroupedDataset& dataset);

// D_ori plus adversarial examples. Every adversarial example must resolve to
// an original in `base` with the same target label.
GroupedDataset augment(const GroupedDataset& base, std::span<const LabeledExample> adversarial);

std::vector<std::size_t> all_indices(const GroupedDataset& dataset);

}  // namespace aeda::data

#endif  // AEDA_DATA_DATASET_HPP_
