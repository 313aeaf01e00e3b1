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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "aeda/nn/checkpoint.hpp"
#include "aeda/nn/composite.hpp"
#include "aeda/nn/loss.hpp"
#include "aeda/nn/optimizer.hpp"
#include "fixtures.hpp"

namespace aeda::nn {
namespace {

Tensor random_batch(int n, Shape shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  Tensor t(n, shape);
  for (double& v : t.values()) v = u(rng);
  return t;
}

// Summed cross-entropy of the weighted terms, by forward passes only.
double objective(const CompositeClassifier& m, const Tensor& x, const std::vector<LossTerm>& terms) {
  const Tensor feats = m.features(x);
  double total = 0.0;
  for (const LossTerm& term : terms) {
    const std::vector<double> ce =
        cross_entropy_per_example(m.head_logits(term.head, feats), term.labels);
    for (double v : ce) total += term.weight * v;
  }
  return total;
}

TEST(Architecture, SmallCnnProducesFeatureVector) {
  Architecture a;
  CompositeClassifier m(a, 1);
  EXPECT_EQ(m.network(Partition::kExtractor).output_shape(), (Shape{1, 1, 128}));
  EXPECT_EQ(m.network(Partition::kTargetHead).output_shape(), (Shape{1, 1, 10}));
  EXPECT_EQ(m.network(Partition::kBiasHead).output_shape(), (Shape{1, 1, 2}));
}

TEST(Architecture, RejectsUnknownPresetAndTooSmallVgg) {
  Architecture a;
  a.preset = "resnet";
  EXPECT_THROW(resolve_architecture(a), std::invalid_argument);
  a.preset = "vgg16";
  EXPECT_THROW(CompositeClassifier(a, 0), ShapeError);
}

TEST(Gradient, InputGradientMatchesCentralDifferences) {
  const CompositeClassifier m(testing::tiny_arch(), 11);
  const Shape in = m.architecture().input;
  std::mt19937_64 rng(99);
  const double h = 1e-3;
  for (int batch = 0; batch < 5; ++batch) {
    Tensor x = random_batch(3, in, 100 + batch);
    std::vector<LossTerm> terms{{Partition::kBiasHead, {0, 1, 1}, 0.3},
                                {Partition::kTargetHead, {2, 7, 4}, 0.7}};
    const Tensor g = m.gradient_wrt_input(x, terms);
    std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
    for (int k = 0; k < 10; ++k) {
      const std::size_t i = pick(rng);
      const double keep = x.data()[i];
      x.data()[i] = keep + h;
      const double up = objective(m, x, terms);
      x.data()[i] = keep - h;
      const double down = objective(m, x, terms);
      x.data()[i] = keep;
      const double fd = (up - down) / (2.0 * h);
      const double scale = std::max({std::fabs(fd), std::fabs(g.data()[i]), 1e-6});
      EXPECT_LE(std::fabs(fd - g.data()[i]) / scale, 1e-2) << "batch " << batch << " coord " << i;
    }
  }
}

TEST(Gradient, ParameterGradientMatchesCentralDifferences) {
  Network net(Shape{6, 6, 2}, {Conv2d{3, 3, 1}, Relu{}, MaxPool2d{2}, Dense{4}});
  net.initialize(5);
  const Tensor x = random_batch(2, net.input_shape(), 6);
  const std::vector<int> y{1, 3};
  Network::Trace trace;
  const LossResult loss = softmax_cross_entropy(net.forward(x, &trace), y, {}, Reduction::kSum);
  std::vector<double> grad(net.num_parameters(), 0.0);
  net.backward(trace, loss.grad, grad, false);
  const double h = 1e-5;
  for (std::size_t i = 0; i < net.num_parameters(); i += 7) {
    const double keep = net.parameters()[i];
    net.parameters()[i] = keep + h;
    const double up = softmax_cross_entropy(net.forward(x), y, {}, Reduction::kSum).value;
    net.parameters()[i] = keep - h;
    const double down = softmax_cross_entropy(net.forward(x), y, {}, Reduction::kSum).value;
    net.parameters()[i] = keep;
    const double fd = (up - down) / (2.0 * h);
    EXPECT_NEAR(grad[i], fd, 1e-6 + 1e-4 * std::fabs(fd)) << "parameter " << i;
  }
}

TEST(Gradient, RejectsMalformedObjectives) {
  const CompositeClassifier m(testing::tiny_arch(), 1);
  const Tensor x = random_batch(2, m.architecture().input, 1);
  EXPECT_THROW(m.gradient_wrt_input(x, {}), std::invalid_argument);
  std::vector<LossTerm> bad{{Partition::kExtractor, {0, 1}, 1.0}};
  EXPECT_THROW(m.gradient_wrt_input(x, bad), std::invalid_argument);
  std::vector<LossTerm> short_labels{{Partition::kBiasHead, {0}, 1.0}};
  EXPECT_THROW(m.gradient_wrt_input(x, short_labels), std::invalid_argument);
}

TEST(Loss, CrossEntropyByHand) {
  Tensor logits(2, Shape{1, 1, 2});
  logits.values() = {0.0, 0.0, std::log(3.0), 0.0};
  const std::vector<int> y{0, 0};
  const LossResult mean = softmax_cross_entropy(logits, y);
  EXPECT_NEAR(mean.value, (std::log(2.0) + std::log(4.0 / 3.0)) / 2.0, 1e-12);
  const std::vector<double> w{2.0, 0.0};
  const LossResult weighted = softmax_cross_entropy(logits, y, w);
  EXPECT_NEAR(weighted.value, std::log(2.0), 1e-12);
  EXPECT_DOUBLE_EQ(weighted.grad.data()[2], 0.0);
  EXPECT_NEAR(mean.grad.data()[0], (0.5 - 1.0) / 2.0, 1e-12);
}

TEST(Optimizer, MomentumStepsByHand) {
  OptimizerSpec spec;
  spec.momentum = 0.5;
  Sgd sgd(spec);
  std::vector<double> w{1.0};
  const std::vector<double> g{2.0};
  sgd.step(w, g, 0.1);
  EXPECT_DOUBLE_EQ(w[0], 1.0 - 0.1 * 2.0);
  sgd.step(w, g, 0.1);
  EXPECT_DOUBLE_EQ(w[0], 0.8 - 0.1 * (0.5 * 2.0 + 2.0));
}

TEST(Optimizer, StepDecayAtTwoThirds) {
  const OptimizerSpec spec;
  EXPECT_DOUBLE_EQ(learning_rate_at(spec, 39, 60), 0.01);
  EXPECT_DOUBLE_EQ(learning_rate_at(spec, 40, 60), 0.01 * 0.1);
  OptimizerSpec flat = spec;
  flat.decay_at = 1.0;
  EXPECT_DOUBLE_EQ(learning_rate_at(flat, 59, 60), 0.01);
}

TEST(Composite, SeedsAndPartitionsAreIndependent) {
  const CompositeClassifier a(testing::tiny_arch(), 4);
  const CompositeClassifier b(testing::tiny_arch(), 4);
  const CompositeClassifier c(testing::tiny_arch(), 5);
  EXPECT_EQ(a, b);
  EXPECT_NE(a.partition_hash(Partition::kExtractor), c.partition_hash(Partition::kExtractor));
  CompositeClassifier d = a;
  d.reset_head(Partition::kProbeHead, 77);
  for (Partition p : kAllPartitions) {
    EXPECT_EQ(d.partition_hash(p) == a.partition_hash(p), p != Partition::kProbeHead);
  }
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const CompositeClassifier m(testing::tiny_arch(), 8);
  const auto path = std::filesystem::temp_directory_path() / "aeda_ckpt_test.bin";
  save_checkpoint(m, path);
  const CompositeClassifier back = load_checkpoint(path);
  EXPECT_EQ(back, m);
  EXPECT_EQ(model_hash(back), model_hash(m));
  std::ofstream(path, std::ios::binary) << "garbage";
  EXPECT_THROW(load_checkpoint(path), std::runtime_error);
  std::filesystem::remove(path);
}

TEST(Checkpoint, ArchitectureJsonRoundTrip) {
  Architecture a;
  a.head_hidden = 32;
  const Architecture resolved = resolve_architecture(a);
  EXPECT_EQ(parse_architecture_json(architecture_json(a)), resolved);
}

}  // namespace
}  // namespace aeda::nn
