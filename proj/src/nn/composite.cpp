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

#include "aeda/nn/composite.hpp"

#include <stdexcept>

#include "aeda/nn/loss.hpp"
#include "aeda/util.hpp"

namespace aeda::nn {

namespace {

Tensor flatten_features(Tensor t) {
  t.reshape(Shape{1, 1, static_cast<int>(t.sample_size())});
  return t;
}

// Summed cross-entropy input gradient through extractor + head.
Tensor two_stage_input_gradient(const Network& extractor, const Network& head,
                                const Tensor& batch, std::span<const int> labels,
                                std::vector<double>* losses) {
  Network::Trace ft;
  Network::Trace ht;
  Tensor feats = extractor.forward(batch, &ft);
  Tensor logits = head.forward(feats, &ht);
  LossResult loss = softmax_cross_entropy(logits, labels, {}, Reduction::kSum);
  if (losses != nullptr) *losses = cross_entropy_per_example(logits, labels);
  Tensor dfeat = head.backward(ht, loss.grad, {}, true);
  return extractor.backward(ft, dfeat, {}, true);
}

}  // namespace

std::string to_string(Partition p) {
  switch (p) {
    case Partition::kExtractor:
      return "extractor";
    case Partition::kTargetHead:
      return "target_head";
    case Partition::kBiasHead:
      return "bias_head";
    case Partition::kProbeHead:
      return "probe_head";
  }
  return "unknown";
}

Architecture resolve_architecture(Architecture arch) {
  if (!arch.extractor.empty()) return arch;
  const int d = arch.feature_dim;
  if (arch.preset == "tiny") {
    arch.extractor = {Conv2d{4, 3, 0}, Relu{}, Dense{d}, Relu{}};
  } else if (arch.preset == "small_cnn") {
    arch.extractor = {Conv2d{16, 3, 1}, Relu{}, MaxPool2d{2},
                      Conv2d{32, 3, 1}, Relu{}, MaxPool2d{2},
                      Dense{d},         Relu{}};
  } else if (arch.preset == "vgg16") {
    const int widths[5] = {64, 128, 256, 512, 512};
    const int reps[5] = {2, 2, 3, 3, 3};
    for (int block = 0; block < 5; ++block) {
      for (int r = 0; r < reps[block]; ++r) {
        arch.extractor.push_back(Conv2d{widths[block], 3, 1});
        arch.extractor.push_back(Relu{});
      }
      arch.extractor.push_back(MaxPool2d{2});
    }
    arch.extractor.push_back(Dense{d});
    arch.extractor.push_back(Relu{});
  } else {
    throw std::invalid_argument("unknown backbone preset '" + arch.preset + "'");
  }
  return arch;
}

std::vector<LayerSpec> head_layers(int hidden, int outputs) {
  if (hidden > 0) return {Dense{hidden}, Relu{}, Dense{outputs}};
  return {Dense{outputs}};
}

std::uint64_t hash_values(std::span<const double> values) {
  return fnv1a(values.data(), values.size() * sizeof(double));
}

CompositeClassifier::CompositeClassifier(const Architecture& arch, std::uint64_t seed)
    : arch_(resolve_architecture(arch)) {
  if (arch_.num_classes < 2) throw std::invalid_argument("need at least two target classes");
  Network& f = nets_[0];
  f = Network(arch_.input, arch_.extractor);
  f.initialize(derive_seed(seed, "extractor"));
  const Shape feat = f.output_shape();
  if (feat.height != 1 || feat.width != 1) {
    throw ShapeError("extractor must end in a dense layer, got " + to_string(feat));
  }
  nets_[1] = Network(feat, head_layers(arch_.head_hidden, arch_.num_classes));
  nets_[2] = Network(feat, head_layers(arch_.head_hidden, 2));
  nets_[3] = Network(feat, head_layers(arch_.head_hidden, 2));
  nets_[1].initialize(derive_seed(seed, "target_head"));
  nets_[2].initialize(derive_seed(seed, "bias_head"));
  nets_[3].initialize(derive_seed(seed, "probe_head"));
}

Tensor CompositeClassifier::features(const Tensor& batch) const {
  return flatten_features(network(Partition::kExtractor).forward(batch));
}

Tensor CompositeClassifier::head_logits(Partition head, const Tensor& features) const {
  if (head == Partition::kExtractor) throw std::invalid_argument("extractor is not a head");
  return network(head).forward(features);
}

Tensor CompositeClassifier::forward_target(const Tensor& batch) const {
  return head_logits(Partition::kTargetHead, features(batch));
}

Tensor CompositeClassifier::forward_bias(const Tensor& batch, BiasHead head) const {
  return head_logits(head == BiasHead::kMain ? Partition::kBiasHead : Partition::kProbeHead,
                     features(batch));
}

Tensor CompositeClassifier::gradient_wrt_input(const Tensor& batch,
                                               std::span<const LossTerm> terms,
                                               std::vector<double>* losses) const {
  if (terms.empty()) throw std::invalid_argument("input gradient needs at least one loss term");
  for (const LossTerm& term : terms) {
    if (term.head == Partition::kExtractor) {
      throw std::invalid_argument("loss term must reference a head, not the extractor");
    }
    if (static_cast<int>(term.labels.size()) != batch.batch()) {
      throw std::invalid_argument("loss term label count does not match batch");
    }
  }
  const Network& f = network(Partition::kExtractor);
  Network::Trace ft;
  Tensor feats = f.forward(batch, &ft);
  Tensor dfeat(feats.batch(), feats.shape());
  if (losses != nullptr) losses->assign(batch.batch(), 0.0);
  for (const LossTerm& term : terms) {
    if (term.weight == 0.0) continue;
    const Network& h = network(term.head);
    Network::Trace ht;
    Tensor logits = h.forward(feats, &ht);
    LossResult loss = softmax_cross_entropy(logits, term.labels, {}, Reduction::kSum);
    if (losses != nullptr) {
      const std::vector<double> per = cross_entropy_per_example(logits, term.labels);
      for (std::size_t i = 0; i < per.size(); ++i) (*losses)[i] += term.weight * per[i];
    }
    Tensor g = h.backward(ht, loss.grad, {}, true);
    for (std::size_t k = 0; k < g.size(); ++k) dfeat.data()[k] += term.weight * g.data()[k];
  }
  return f.backward(ft, dfeat, {}, true);
}

std::uint64_t CompositeClassifier::partition_hash(Partition p) const {
  return hash_values(network(p).parameters());
}

std::size_t CompositeClassifier::num_parameters() const {
  std::size_t n = 0;
  for (const Network& net : nets_) n += net.num_parameters();
  return n;
}

void CompositeClassifier::reset_head(Partition head, std::uint64_t seed) {
  if (head == Partition::kExtractor) throw std::invalid_argument("extractor is not a head");
  network(head).initialize(seed);
}

Tensor CoupledBiasView::logits(const Tensor& batch) const {
  return model_.forward_bias(batch, head_);
}

Tensor CoupledBiasView::input_gradient(const Tensor& batch, std::span<const int> labels,
                                       std::vector<double>* losses) const {
  const Partition p = head_ == BiasHead::kMain ? Partition::kBiasHead : Partition::kProbeHead;
  return two_stage_input_gradient(model_.network(Partition::kExtractor), model_.network(p),
                                  batch, labels, losses);
}

StandaloneBiasClassifier::StandaloneBiasClassifier(const Architecture& arch,
                                                   std::uint64_t seed) {
  const Architecture a = resolve_architecture(arch);
  extractor_ = Network(a.input, a.extractor);
  extractor_.initialize(derive_seed(seed, "standalone_extractor"));
  head_ = Network(extractor_.output_shape(), head_layers(a.head_hidden, 2));
  head_.initialize(derive_seed(seed, "standalone_head"));
}

Tensor StandaloneBiasClassifier::logits(const Tensor& batch) const {
  return head_.forward(extractor_.forward(batch));
}

Tensor StandaloneBiasClassifier::input_gradient(const Tensor& batch,
                                                std::span<const int> labels,
                                                std::vector<double>* losses) const {
  return two_stage_input_gradient(extractor_, head_, batch, labels, losses);
}

Tensor StandaloneTargetView::logits(const Tensor& batch) const {
  return model_.forward_target(batch);
}

Tensor StandaloneTargetView::input_gradient(const Tensor& batch,
                                            std::span<const int> labels,
                                            std::vector<double>* losses) const {
  return two_stage_input_gradient(model_.network(Partition::kExtractor),
                                  model_.network(Partition::kTargetHead), batch, labels,
                                  losses);
}

}  // namespace aeda::nn
