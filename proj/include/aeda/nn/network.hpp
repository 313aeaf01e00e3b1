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

#ifndef AEDA_NN_NETWORK_HPP_
#define AEDA_NN_NETWORK_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "aeda/nn/tensor.hpp"

namespace aeda::nn {

// Stride-1 convolution; input channels are inferred from the previous layer.
struct Conv2d {
  int out_channels = 8;
  int kernel = 3;
  int padding = 1;
  friend bool operator==(const Conv2d&, const Conv2d&) = default;
};

struct Relu {
  friend bool operator==(const Relu&, const Relu&) = default;
};

// Non-overlapping max pooling; trailing rows/columns that do not fill a
// window are dropped.
struct MaxPool2d {
  int size = 2;
  friend bool operator==(const MaxPool2d&, const MaxPool2d&) = default;
};

// Fully connected layer over the flattened sample.
struct Dense {
  int out_features = 10;
  friend bool operator==(const Dense&, const Dense&) = default;
};

using LayerSpec = std::variant<Conv2d, Relu, MaxPool2d, Dense>;

std::string describe(const LayerSpec& spec);

// A feed-forward stack of layers whose parameters live in one flat buffer.
// Forward and backward passes never mutate the network, so a const Network
// can be shared by concurrent readers; parameter gradients go to a
// caller-owned buffer of the same length as parameters().
class Network {
 public:
  // Per-pass cache needed by backward().
  struct Trace {
    std::vector<Tensor> inputs;
    std::vector<Buffer> columns;
    std::vector<std::vector<int>> argmax;
  };

  Network() = default;
  Network(Shape input, std::vector<LayerSpec> layers);

  // He-normal weights, zero biases.
  void initialize(std::uint64_t seed);

  const Shape& input_shape() const { return input_shape_; }
  const Shape& output_shape() const { return shapes_.back(); }
  const std::vector<LayerSpec>& layers() const { return layers_; }

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }
  std::size_t num_parameters() const { return params_.size(); }

  Tensor forward(const Tensor& x, Trace* trace = nullptr) const;

  // Backpropagates grad_out through the trace of a previous forward().
  // Parameter gradients are accumulated into param_grad unless it is empty.
  // Returns the input gradient when want_input_grad is set, otherwise an
  // empty tensor.
  Tensor backward(const Trace& trace, const Tensor& grad_out,
                  std::span<double> param_grad, bool want_input_grad) const;

  friend bool operator==(const Network&, const Network&) = default;

 private:
  struct Slot {
    std::size_t weight_offset = 0;
    std::size_t weight_count = 0;
    std::size_t bias_offset = 0;
    std::size_t bias_count = 0;
    friend bool operator==(const Slot&, const Slot&) = default;
  };

  Shape input_shape_;
  std::vector<LayerSpec> layers_;
  std::vector<Shape> shapes_;  // shapes_[i] is the input of layer i
  std::vector<Slot> slots_;
  Buffer params_;
};

}  // namespace aeda::nn

#endif  // AEDA_NN_NETWORK_HPP_
