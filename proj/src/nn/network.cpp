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

#include "aeda/nn/network.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <sstream>

namespace aeda::nn {

namespace {

using MatMap = Eigen::Map<Eigen::MatrixXd>;
using ConstMatMap = Eigen::Map<const Eigen::MatrixXd>;
using VecMap = Eigen::Map<Eigen::VectorXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

Shape conv_output(const Shape& in, const Conv2d& c) {
  Shape out{in.height + 2 * c.padding - c.kernel + 1,
            in.width + 2 * c.padding - c.kernel + 1, c.out_channels};
  if (out.height <= 0 || out.width <= 0) {
    throw ShapeError("convolution kernel larger than padded input " +
                     to_string(in));
  }
  return out;
}

// Lays out every receptive field as one column of a (k*k*C) x (N*H'*W')
// column-major matrix; the column order matches the NHWC output order.
void im2col(const Tensor& in, const Conv2d& c, const Shape& out,
            Buffer& cols) {
  const Shape& s = in.shape();
  const int k = c.kernel;
  const std::size_t rows = static_cast<std::size_t>(k) * k * s.channels;
  const std::size_t m = static_cast<std::size_t>(in.batch()) * out.height * out.width;
  cols.assign(rows * m, 0.0);
  std::size_t j = 0;
  for (int n = 0; n < in.batch(); ++n) {
    const double* src = in.sample(n).data();
    for (int oy = 0; oy < out.height; ++oy) {
      for (int ox = 0; ox < out.width; ++ox, ++j) {
        double* col = cols.data() + j * rows;
        for (int ky = 0; ky < k; ++ky) {
          const int iy = oy + ky - c.padding;
          if (iy < 0 || iy >= s.height) continue;
          for (int kx = 0; kx < k; ++kx) {
            const int ix = ox + kx - c.padding;
            if (ix < 0 || ix >= s.width) continue;
            const double* px = src + (static_cast<std::size_t>(iy) * s.width + ix) * s.channels;
            double* dst = col + static_cast<std::size_t>(ky * k + kx) * s.channels;
            for (int ch = 0; ch < s.channels; ++ch) dst[ch] = px[ch];
          }
        }
      }
    }
  }
}

void col2im(const Buffer& cols, const Conv2d& c, const Shape& out,
            Tensor& grad_in) {
  const Shape& s = grad_in.shape();
  const int k = c.kernel;
  const std::size_t rows = static_cast<std::size_t>(k) * k * s.channels;
  std::size_t j = 0;
  for (int n = 0; n < grad_in.batch(); ++n) {
    double* dst = grad_in.sample(n).data();
    for (int oy = 0; oy < out.height; ++oy) {
      for (int ox = 0; ox < out.width; ++ox, ++j) {
        const double* col = cols.data() + j * rows;
        for (int ky = 0; ky < k; ++ky) {
          const int iy = oy + ky - c.padding;
          if (iy < 0 || iy >= s.height) continue;
          for (int kx = 0; kx < k; ++kx) {
            const int ix = ox + kx - c.padding;
            if (ix < 0 || ix >= s.width) continue;
            double* px = dst + (static_cast<std::size_t>(iy) * s.width + ix) * s.channels;
            const double* g = col + static_cast<std::size_t>(ky * k + kx) * s.channels;
            for (int ch = 0; ch < s.channels; ++ch) px[ch] += g[ch];
          }
        }
      }
    }
  }
}

}  // namespace

std::string to_string(const Shape& s) {
  std::ostringstream os;
  os << s.height << "x" << s.width << "x" << s.channels;
  return os.str();
}

std::string describe(const LayerSpec& spec) {
  return std::visit(
      Overloaded{
          [](const Conv2d& c) {
            return "conv" + std::to_string(c.kernel) + "x" +
                   std::to_string(c.kernel) + "-" +
                   std::to_string(c.out_channels) + "-p" +
                   std::to_string(c.padding);
          },
          [](const Relu&) { return std::string("relu"); },
          [](const MaxPool2d& p) { return "maxpool" + std::to_string(p.size); },
          [](const Dense& d) { return "dense-" + std::to_string(d.out_features); },
      },
      spec);
}

Network::Network(Shape input, std::vector<LayerSpec> layers)
    : input_shape_(input), layers_(std::move(layers)) {
  if (input.size() == 0) throw ShapeError("empty network input shape");
  shapes_.push_back(input);
  std::size_t offset = 0;
  for (const LayerSpec& spec : layers_) {
    const Shape in = shapes_.back();
    Slot slot;
    Shape out = std::visit(
        Overloaded{
            [&](const Conv2d& c) {
              if (c.kernel < 1 || c.out_channels < 1 || c.padding < 0) {
                throw ShapeError("invalid convolution " + describe(c));
              }
              slot.weight_count = static_cast<std::size_t>(c.out_channels) *
                                  c.kernel * c.kernel * in.channels;
              slot.bias_count = c.out_channels;
              return conv_output(in, c);
            },
            [&](const Relu&) { return in; },
            [&](const MaxPool2d& p) {
              if (p.size < 1 || in.height < p.size || in.width < p.size) {
                throw ShapeError("pooling window larger than input " + to_string(in));
              }
              return Shape{in.height / p.size, in.width / p.size, in.channels};
            },
            [&](const Dense& d) {
              if (d.out_features < 1) throw ShapeError("dense layer without outputs");
              slot.weight_count = static_cast<std::size_t>(d.out_features) * in.size();
              slot.bias_count = d.out_features;
              return Shape{1, 1, d.out_features};
            },
        },
        spec);
    slot.weight_offset = offset;
    slot.bias_offset = offset + slot.weight_count;
    offset += slot.weight_count + slot.bias_count;
    slots_.push_back(slot);
    shapes_.push_back(out);
  }
  params_.assign(offset, 0.0);
}

void Network::initialize(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Slot& slot = slots_[i];
    if (slot.weight_count == 0) continue;
    const double fan_in =
        static_cast<double>(slot.weight_count) / static_cast<double>(slot.bias_count);
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / fan_in));
    for (std::size_t k = 0; k < slot.weight_count; ++k) {
      params_[slot.weight_offset + k] = normal(rng);
    }
    for (std::size_t k = 0; k < slot.bias_count; ++k) {
      params_[slot.bias_offset + k] = 0.0;
    }
  }
}

Tensor Network::forward(const Tensor& x, Trace* trace) const {
  if (x.shape() != input_shape_) {
    throw ShapeError("network expects " + to_string(input_shape_) + ", got " +
                     to_string(x.shape()));
  }
  if (trace != nullptr) {
    trace->inputs.assign(layers_.size(), Tensor());
    trace->columns.assign(layers_.size(), {});
    trace->argmax.assign(layers_.size(), {});
  }
  Tensor current = x;
  Buffer scratch;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Shape& out_shape = shapes_[i + 1];
    const Slot& slot = slots_[i];
    const int n = current.batch();
    Tensor out(n, out_shape);
    std::visit(
        Overloaded{
            [&](const Conv2d& c) {
              Buffer& cols = trace ? trace->columns[i] : scratch;
              im2col(current, c, out_shape, cols);
              const Eigen::Index rows = c.kernel * c.kernel * current.shape().channels;
              const Eigen::Index m = static_cast<Eigen::Index>(n) * out_shape.height * out_shape.width;
              ConstMatMap w(params_.data() + slot.weight_offset, c.out_channels, rows);
              ConstVecMap b(params_.data() + slot.bias_offset, c.out_channels);
              MatMap y(out.data(), c.out_channels, m);
              y.noalias() = w * ConstMatMap(cols.data(), rows, m);
              y.colwise() += b;
            },
            [&](const Relu&) {
              const double* in = current.data();
              double* o = out.data();
              for (std::size_t k = 0; k < out.size(); ++k) o[k] = in[k] > 0.0 ? in[k] : 0.0;
            },
            [&](const MaxPool2d& p) {
              const Shape& s = current.shape();
              std::vector<int>* arg = trace ? &trace->argmax[i] : nullptr;
              if (arg) arg->assign(out.size(), 0);
              std::size_t o = 0;
              for (int b = 0; b < n; ++b) {
                const double* src = current.sample(b).data();
                for (int oy = 0; oy < out_shape.height; ++oy) {
                  for (int ox = 0; ox < out_shape.width; ++ox) {
                    for (int ch = 0; ch < s.channels; ++ch, ++o) {
                      int best = -1;
                      double best_v = 0.0;
                      for (int dy = 0; dy < p.size; ++dy) {
                        for (int dx = 0; dx < p.size; ++dx) {
                          const int idx = ((oy * p.size + dy) * s.width + ox * p.size + dx) * s.channels + ch;
                          if (best < 0 || src[idx] > best_v) {
                            best = idx;
                            best_v = src[idx];
                          }
                        }
                      }
                      out.data()[o] = best_v;
                      if (arg) (*arg)[o] = best;
                    }
                  }
                }
              }
            },
            [&](const Dense& d) {
              const Eigen::Index in_features = static_cast<Eigen::Index>(current.sample_size());
              ConstMatMap w(params_.data() + slot.weight_offset, d.out_features, in_features);
              ConstVecMap b(params_.data() + slot.bias_offset, d.out_features);
              MatMap y(out.data(), d.out_features, n);
              y.noalias() = w * ConstMatMap(current.data(), in_features, n);
              y.colwise() += b;
            },
        },
        layers_[i]);
    if (trace != nullptr) {
      trace->inputs[i] = std::move(current);
    }
    current = std::move(out);
  }
  return current;
}

Tensor Network::backward(const Trace& trace, const Tensor& grad_out,
                         std::span<double> param_grad, bool want_input_grad) const {
  if (trace.inputs.size() != layers_.size()) {
    throw ShapeError("backward called without a matching forward trace");
  }
  if (!param_grad.empty() && param_grad.size() != params_.size()) {
    throw ShapeError("parameter gradient buffer has wrong length");
  }
  if (grad_out.shape() != output_shape()) {
    throw ShapeError("output gradient shape mismatch");
  }
  const bool want_params = !param_grad.empty();
  // Accumulated on an aligned copy; see AlignedAllocator.
  Buffer pgrad;
  if (want_params) pgrad.assign(param_grad.begin(), param_grad.end());
  Tensor grad = grad_out;
  for (std::size_t li = layers_.size(); li-- > 0;) {
    // Nothing upstream needs the gradient once the first layer is reached.
    const bool need_input = want_input_grad || li > 0;
    const Tensor& in = trace.inputs[li];
    const Slot& slot = slots_[li];
    const int n = in.batch();
    Tensor grad_in;
    std::visit(
        Overloaded{
            [&](const Conv2d& c) {
              const Shape& out_shape = shapes_[li + 1];
              const Eigen::Index rows = c.kernel * c.kernel * in.shape().channels;
              const Eigen::Index m = static_cast<Eigen::Index>(n) * out_shape.height * out_shape.width;
              ConstMatMap dy(grad.data(), c.out_channels, m);
              ConstMatMap cols(trace.columns[li].data(), rows, m);
              if (want_params) {
                MatMap dw(pgrad.data() + slot.weight_offset, c.out_channels, rows);
                VecMap db(pgrad.data() + slot.bias_offset, c.out_channels);
                dw.noalias() += dy * cols.transpose();
                db.noalias() += dy.rowwise().sum();
              }
              if (need_input) {
                ConstMatMap w(params_.data() + slot.weight_offset, c.out_channels, rows);
                Buffer dcols(static_cast<std::size_t>(rows * m));
                MatMap dc(dcols.data(), rows, m);
                dc.noalias() = w.transpose() * dy;
                grad_in.resize(n, in.shape());
                col2im(dcols, c, out_shape, grad_in);
              }
            },
            [&](const Relu&) {
              if (!need_input) return;
              grad_in.resize(n, in.shape());
              const double* x = in.data();
              const double* g = grad.data();
              double* o = grad_in.data();
              for (std::size_t k = 0; k < grad_in.size(); ++k) o[k] = x[k] > 0.0 ? g[k] : 0.0;
            },
            [&](const MaxPool2d&) {
              if (!need_input) return;
              grad_in.resize(n, in.shape());
              const std::vector<int>& arg = trace.argmax[li];
              const std::size_t per_out = grad.sample_size();
              for (int b = 0; b < n; ++b) {
                double* dst = grad_in.sample(b).data();
                const double* g = grad.sample(b).data();
                const int* a = arg.data() + static_cast<std::size_t>(b) * per_out;
                for (std::size_t k = 0; k < per_out; ++k) dst[a[k]] += g[k];
              }
            },
            [&](const Dense& d) {
              const Eigen::Index in_features = static_cast<Eigen::Index>(in.sample_size());
              ConstMatMap dy(grad.data(), d.out_features, n);
              if (want_params) {
                MatMap dw(pgrad.data() + slot.weight_offset, d.out_features, in_features);
                VecMap db(pgrad.data() + slot.bias_offset, d.out_features);
                dw.noalias() += dy * ConstMatMap(in.data(), in_features, n).transpose();
                db.noalias() += dy.rowwise().sum();
              }
              if (need_input) {
                ConstMatMap w(params_.data() + slot.weight_offset, d.out_features, in_features);
                grad_in.resize(n, in.shape());
                MatMap(grad_in.data(), in_features, n).noalias() = w.transpose() * dy;
              }
            },
        },
        layers_[li]);
    if (!need_input) break;
    grad = std::move(grad_in);
  }
  if (want_params) std::copy(pgrad.begin(), pgrad.end(), param_grad.begin());
  if (!want_input_grad) return Tensor();
  return grad;
}

}  // namespace aeda::nn
