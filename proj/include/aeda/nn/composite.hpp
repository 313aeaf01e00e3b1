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

#ifndef AEDA_NN_COMPOSITE_HPP_
#define AEDA_NN_COMPOSITE_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "aeda/nn/network.hpp"

namespace aeda::nn {

// The four disjoint parameter groups of a composite classifier.
enum class Partition { kExtractor = 0, kTargetHead = 1, kBiasHead = 2, kProbeHead = 3 };
inline constexpr std::array<Partition, 4> kAllPartitions = {
    Partition::kExtractor, Partition::kTargetHead, Partition::kBiasHead,
    Partition::kProbeHead};

std::string to_string(Partition p);

// Which bias head a bias forward pass goes through.
enum class BiasHead { kMain, kProbe };

struct Architecture {
  std::string preset = "small_cnn";
  Shape input{14, 14, 3};
  int feature_dim = 128;
  int num_classes = 10;
  int head_hidden = 0;  // 0: heads are a single dense layer
  std::vector<LayerSpec> extractor;  // filled from the preset when empty

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

// Resolves `preset` into extractor layers. Known presets: "tiny" (one conv
// plus one dense layer), "small_cnn" (two conv blocks plus dense) and
// "vgg16" (needs at least 32x32 input). Throws std::invalid_argument for an
// unknown preset.
Architecture resolve_architecture(Architecture arch);

std::vector<LayerSpec> head_layers(int hidden, int outputs);

// 64-bit FNV-1a over the raw bytes of a double buffer.
std::uint64_t hash_values(std::span<const double> values);

// One term of an input-gradient objective: weight * sum_i CE(head(x_i), label_i).
struct LossTerm {
  Partition head = Partition::kBiasHead;
  std::vector<int> labels;
  double weight = 1.0;
};

// Image -> logits model that exposes d(summed cross-entropy)/d(input).
class DifferentiableClassifier {
 public:
  virtual ~DifferentiableClassifier() = default;
  virtual Tensor logits(const Tensor& batch) const = 0;
  // Gradient of sum_i CE(logits_i, labels_i); per-example losses are written
  // to `losses` when given.
  virtual Tensor input_gradient(const Tensor& batch, std::span<const int> labels,
                                std::vector<double>* losses = nullptr) const = 0;
};

// Shared feature extractor f with target head h_t, bias head h_b and a probe
// head used only for transferability measurements.
class CompositeClassifier {
 public:
  CompositeClassifier() = default;
  CompositeClassifier(const Architecture& arch, std::uint64_t seed);

  const Architecture& architecture() const { return arch_; }

  Network& network(Partition p) { return nets_[static_cast<int>(p)]; }
  const Network& network(Partition p) const { return nets_[static_cast<int>(p)]; }

  Tensor features(const Tensor& batch) const;
  Tensor head_logits(Partition head, const Tensor& features) const;

  Tensor forward_target(const Tensor& batch) const;
  Tensor forward_bias(const Tensor& batch, BiasHead head = BiasHead::kMain) const;

  // Gradient of sum_terms weight * sum_i CE w.r.t. the input pixels.
  // Throws std::invalid_argument for an empty objective, a term on the
  // extractor partition, or mismatched label counts.
  // Per-example objective values go to `losses` when given.
  Tensor gradient_wrt_input(const Tensor& batch, std::span<const LossTerm> terms,
                            std::vector<double>* losses = nullptr) const;

  std::uint64_t partition_hash(Partition p) const;
  std::size_t num_parameters() const;

  // Draws fresh weights for one head.
  void reset_head(Partition head, std::uint64_t seed);

  friend bool operator==(const CompositeClassifier&, const CompositeClassifier&) = default;

 private:
  Architecture arch_;
  std::array<Network, 4> nets_;
};

// Read-only {f; h_b} (or {f; probe}) view of a composite model.
class CoupledBiasView final : public DifferentiableClassifier {
 public:
  explicit CoupledBiasView(const CompositeClassifier& model,
                           BiasHead head = BiasHead::kMain)
      : model_(model), head_(head) {}
  Tensor logits(const Tensor& batch) const override;
  Tensor input_gradient(const Tensor& batch, std::span<const int> labels,
                        std::vector<double>* losses = nullptr) const override;

 private:
  const CompositeClassifier& model_;
  BiasHead head_;
};

// Self-contained image -> {0,1} classifier with its own extractor and head.
class StandaloneBiasClassifier final : public DifferentiableClassifier {
 public:
  StandaloneBiasClassifier() = default;
  StandaloneBiasClassifier(const Architecture& arch, std::uint64_t seed);

  Network& extractor() { return extractor_; }
  const Network& extractor() const { return extractor_; }
  Network& head() { return head_; }
  const Network& head() const { return head_; }

  Tensor logits(const Tensor& batch) const override;
  Tensor input_gradient(const Tensor& batch, std::span<const int> labels,
                        std::vector<double>* losses = nullptr) const override;

 private:
  Network extractor_;
  Network head_;
};

// Read-only {f; h_t} view of a composite model.
class StandaloneTargetView final : public DifferentiableClassifier {
 public:
  explicit StandaloneTargetView(const CompositeClassifier& model) : model_(model) {}
  Tensor logits(const Tensor& batch) const override;
  Tensor input_gradient(const Tensor& batch, std::span<const int> labels,
                        std::vector<double>* losses = nullptr) const override;

 private:
  const CompositeClassifier& model_;
};

}  // namespace aeda::nn

#endif  // AEDA_NN_COMPOSITE_HPP_
