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

#ifndef AEDA_NN_TENSOR_HPP_
#define AEDA_NN_TENSOR_HPP_

#include <cstddef>
#include <new>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace aeda::nn {

// Allocator with a fixed 64-byte alignment. Eigen's vectorized kernels pick
// their summation order from the buffer address, so every buffer that feeds
// a product must start on the same boundary for results to be reproducible.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T* p, std::size_t) { ::operator delete(p, kAlign); }

  template <typename U>
  friend bool operator==(const AlignedAllocator&, const AlignedAllocator<U>&) {
    return true;
  }
};

using Buffer = std::vector<double, AlignedAllocator<double>>;

// Per-sample shape. Activations are stored channels-last (NHWC); a dense
// activation is {1, 1, features}.
struct Shape {
  int height = 1;
  int width = 1;
  int channels = 1;

  std::size_t size() const {
    return static_cast<std::size_t>(height) * width * channels;
  }
  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& s);

class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A batch of samples, NHWC, row-contiguous per sample.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int batch, Shape shape, double fill = 0.0)
      : batch_(batch), shape_(shape),
        data_(static_cast<std::size_t>(batch) * shape.size(), fill) {}

  int batch() const { return batch_; }
  const Shape& shape() const { return shape_; }
  std::size_t sample_size() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  Buffer& values() { return data_; }
  const Buffer& values() const { return data_; }

  std::span<double> sample(int i) {
    return {data_.data() + static_cast<std::size_t>(i) * sample_size(),
            sample_size()};
  }
  std::span<const double> sample(int i) const {
    return {data_.data() + static_cast<std::size_t>(i) * sample_size(),
            sample_size()};
  }

  double& at(int n, std::size_t k) { return data_[n * sample_size() + k]; }
  double at(int n, std::size_t k) const { return data_[n * sample_size() + k]; }

  // Reinterprets the per-sample shape without moving data.
  void reshape(Shape s) {
    if (s.size() != shape_.size()) {
      throw ShapeError("reshape changes sample size: " + to_string(shape_) +
                       " -> " + to_string(s));
    }
    shape_ = s;
  }

  void resize(int batch, Shape shape) {
    batch_ = batch;
    shape_ = shape;
    data_.assign(static_cast<std::size_t>(batch) * shape.size(), 0.0);
  }

 private:
  int batch_ = 0;
  Shape shape_;
  Buffer data_;
};

}  // namespace aeda::nn

#endif  // AEDA_NN_TENSOR_HPP_
