// Copyright 2026 The mrfcnn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mrfcnn/errors.hpp"

namespace mrfcnn {

using Shape = std::vector<std::size_t>;

inline std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

inline std::size_t shape_product(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

// Dense row-major array. Activations are laid out [channels, frames, bins],
// filter banks [out, in, frames, bins], batches prepend a leading item axis.
// A default-constructed tensor is empty (rank 0, no data); every other
// tensor has all dimensions >= 1.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;

  explicit Tensor(Shape shape, T fill = T(0)) : shape_(std::move(shape)) {
    check_shape();
    data_.assign(shape_product(shape_), fill);
  }

  Tensor(Shape shape, std::vector<T> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    check_shape();
    if (data_.size() != shape_product(shape_))
      throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                       " does not match shape " + shape_string(shape_));
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  T* raw() noexcept { return data_.data(); }
  const T* raw() const noexcept { return data_.data(); }
  std::vector<T>& storage() noexcept { return data_; }
  const std::vector<T>& storage() const noexcept { return data_; }

  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  T& at(std::size_t c, std::size_t y, std::size_t x) {
    return data_[(c * shape_[1] + y) * shape_[2] + x];
  }
  const T& at(std::size_t c, std::size_t y, std::size_t x) const {
    return data_[(c * shape_[1] + y) * shape_[2] + x];
  }
  T& at(std::size_t o, std::size_t c, std::size_t y, std::size_t x) {
    return data_[((o * shape_[1] + c) * shape_[2] + y) * shape_[3] + x];
  }
  const T& at(std::size_t o, std::size_t c, std::size_t y,
              std::size_t x) const {
    return data_[((o * shape_[1] + c) * shape_[2] + y) * shape_[3] + x];
  }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  // Reinterpret with a new shape of the same element count.
  Tensor reshaped(Shape shape) const {
    return Tensor(std::move(shape), data_);
  }

  template <typename U>
  Tensor<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    if (shape_.empty()) return Tensor<U>();
    return Tensor<U>(shape_, std::move(out));
  }

  bool operator==(const Tensor&) const = default;

 private:
  void check_shape() const {
    if (shape_.empty()) throw ShapeError("tensor shape must have rank >= 1");
    for (auto d : shape_)
      if (d == 0)
        throw ShapeError("tensor dimension of size 0 in " +
                         shape_string(shape_));
  }

  Shape shape_;
  std::vector<T> data_;
};

template <typename T>
void require_rank(const Tensor<T>& t, std::size_t rank, const char* what) {
  if (t.empty()) throw ShapeError(std::string(what) + ": empty tensor");
  if (t.rank() != rank)
    throw ShapeError(std::string(what) + ": expected rank " +
                     std::to_string(rank) + ", got shape " +
                     shape_string(t.shape()));
}

}  // namespace mrfcnn
