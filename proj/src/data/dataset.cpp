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

#include "aeda/data/dataset.hpp"

#include <algorithm>
#include <numeric>

namespace aeda::data {

std::string to_string(Split s) { return s == Split::kTrain ? "train" : "test"; }

std::string to_string(Provenance p) {
  return p == Provenance::kOriginal ? "original" : "adversarial";
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "test") return Split::kTest;
  throw DatasetError("unknown split '" + s + "'");
}

Provenance parse_provenance(const std::string& s) {
  if (s == "original") return Provenance::kOriginal;
  if (s == "adversarial") return Provenance::kAdversarial;
  throw DatasetError("unknown provenance '" + s + "'");
}

std::size_t GroupStats::total() const {
  std::size_t n = 0;
  for (const auto& c : counts_) n += c[0] + c[1];
  return n;
}

std::optional<double> GroupStats::bias_ratio(int target) const {
  const std::size_t n = class_total(target);
  if (n == 0) return std::nullopt;
  return static_cast<double>(count(target, 1)) / static_cast<double>(n);
}

GroupedDataset::GroupedDataset(Split split, nn::Shape image_shape, int num_classes)
    : split_(split), shape_(image_shape), num_classes_(num_classes), stats_(num_classes) {
  if (num_classes < 1) throw DatasetError("dataset needs at least one class");
}

bool GroupedDataset::add(LabeledExample example) {
  if (example.target < 0 || example.target >= num_classes_) {
    throw DatasetError("target label " + std::to_string(example.target) + " out of range");
  }
  if (example.bias != 0 && example.bias != 1) {
    throw DatasetError("bias label must be 0 or 1, got " + std::to_string(example.bias));
  }
  if (example.pixels.size() != shape_.size()) {
    throw DatasetError("example " + std::to_string(example.source_id) + " has " +
                       std::to_string(example.pixels.size()) + " pixels, expected " +
                       std::to_string(shape_.size()));
  }
  for (double v : example.pixels) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw DatasetError("example " + std::to_string(example.source_id) +
                         " has a pixel outside [0,1]");
    }
  }
  auto key = std::make_pair(example.source_id, static_cast<int>(example.provenance));
  if (!keys_.emplace(key, examples_.size()).second) return false;
  stats_.increment(example.target, example.bias);
  examples_.push_back(std::move(example));
  return true;
}

nn::Tensor GroupedDataset::batch(std::span<const std::size_t> indices) const {
  nn::Tensor t(static_cast<int>(indices.size()), shape_);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto& px = examples_.at(indices[i]).pixels;
    std::copy(px.begin(), px.end(), t.sample(static_cast<int>(i)).begin());
  }
  return t;
}

std::vector<int> GroupedDataset::targets(std::span<const std::size_t> indices) const {
  std::vector<int> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(examples_.at(i).target);
  return out;
}

std::vector<int> GroupedDataset::biases(std::span<const std::size_t> indices) const {
  std::vector<int> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(examples_.at(i).bias);
  return out;
}

std::optional<std::size_t> GroupedDataset::find(std::uint64_t source_id,
                                                Provenance provenance) const {
  auto it = keys_.find({source_id, static_cast<int>(provenance)});
  if (it == keys_.end()) return std::nullopt;
  return it->second;
}

GroupStats group_stats(const GroupedDataset& dataset) {
  GroupStats stats(dataset.num_classes());
  for (const LabeledExample& ex : dataset.examples()) stats.increment(ex.target, ex.bias);
  return stats;
}

GroupedDataset augment(const GroupedDataset& base, std::span<const LabeledExample> adversarial) {
  GroupedDataset out = base;
  for (const LabeledExample& adv : adversarial) {
    if (adv.provenance != Provenance::kAdversarial) {
      throw DatasetError("augment expects adversarial examples only");
    }
    const auto idx = base.find(adv.source_id, Provenance::kOriginal);
    if (!idx) {
      throw DatasetError("adversarial example " + std::to_string(adv.source_id) +
                         " has no original in the base dataset");
    }
    if (base[*idx].target != adv.target) {
      throw DatasetError("adversarial example " + std::to_string(adv.source_id) +
                         " changed its target label");
    }
    out.add(adv);
  }
  return out;
}

std::vector<std::size_t> all_indices(const GroupedDataset& dataset) {
  std::vector<std::size_t> idx(dataset.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

}  // namespace aeda::data
