// Copyright 2026 The chainrule Authors.
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

#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "chainrule/error.hpp"

namespace chainrule {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_volume(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

inline std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

// Dense row-major array with at least one index. Scalars are shape [1].
template <class T>
class Tensor {
 public:
  using value_type = T;

  Tensor() : Tensor(Shape{1}) {}

  explicit Tensor(Shape shape) : shape_(std::move(shape)) {
    check_shape(shape_);
    data_.assign(shape_volume(shape_), T(0));
  }

  Tensor(Shape shape, std::vector<T> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    check_shape(shape_);
    if (data_.size() != shape_volume(shape_)) {
      fail(ErrorCode::kShapeMismatch,
           "tensor of shape " + shape_string(shape_) + " needs " +
               std::to_string(shape_volume(shape_)) + " entries, got " +
               std::to_string(data_.size()));
    }
  }

  static Tensor vector(std::vector<T> values) {
    Shape shape{values.size()};
    return Tensor(std::move(shape), std::move(values));
  }

  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<T> values) {
    return Tensor(Shape{rows, cols}, std::move(values));
  }

  static Tensor identity(std::size_t n) {
    Tensor out(Shape{n, n});
    for (std::size_t i = 0; i < n; ++i) out.data_[i * n + i] = T(1);
    return out;
  }

  static Tensor diagonal(const std::vector<T>& values) {
    const std::size_t n = values.size();
    Tensor out(Shape{n, n});
    for (std::size_t i = 0; i < n; ++i) out.data_[i * n + i] = values[i];
    return out;
  }

  const Shape& shape() const { return shape_; }
  std::size_t order() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }

  std::span<const T> data() const { return data_; }
  std::span<T> data() { return data_; }
  const std::vector<T>& values() const { return data_; }

  const T& operator[](std::size_t flat) const { return data_[flat]; }
  T& operator[](std::size_t flat) { return data_[flat]; }

  std::size_t flat_index(std::span<const std::size_t> index) const {
    if (index.size() != shape_.size()) {
      fail(ErrorCode::kShapeMismatch, "index of order " + std::to_string(index.size()) +
                                          " into tensor of order " +
                                          std::to_string(shape_.size()));
    }
    std::size_t flat = 0;
    for (std::size_t axis = 0; axis < shape_.size(); ++axis) {
      if (index[axis] >= shape_[axis]) {
        fail(ErrorCode::kShapeMismatch, "index out of range for shape " +
                                            shape_string(shape_));
      }
      flat = flat * shape_[axis] + index[axis];
    }
    return flat;
  }

  const T& at(std::span<const std::size_t> index) const {
    return data_[flat_index(index)];
  }
  T& at(std::span<const std::size_t> index) { return data_[flat_index(index)]; }

  // Matrix view helpers; only valid for order-2 tensors.
  std::size_t rows() const { return shape_.at(0); }
  std::size_t cols() const { return order() == 2 ? shape_[1] : 1; }
  const T& operator()(std::size_t i, std::size_t j) const {
    return data_[i * shape_[1] + j];
  }
  T& operator()(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }

  Tensor reshaped(Shape shape) const {
    return Tensor(std::move(shape), data_);
  }

  bool is_zero() const {
    for (const T& v : data_) {
      if (v != T(0)) return false;
    }
    return true;
  }

  // True for square matrices whose off-diagonal entries are all zero.
  bool is_diagonal() const {
    if (order() != 2 || shape_[0] != shape_[1]) return false;
    const std::size_t n = shape_[0];
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j && data_[i * n + j] != T(0)) return false;
      }
    }
    return true;
  }

  template <class U, class F>
  Tensor<U> map(F&& f) const {
    std::vector<U> out;
    out.reserve(data_.size());
    for (const T& v : data_) out.push_back(f(v));
    return Tensor<U>(shape_, std::move(out));
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  static void check_shape(const Shape& shape) {
    if (shape.empty()) {
      fail(ErrorCode::kShapeMismatch, "tensor order must be at least 1");
    }
    for (std::size_t extent : shape) {
      if (extent == 0) {
        fail(ErrorCode::kShapeMismatch, "tensor extents must be positive, got " +
                                            shape_string(shape));
      }
    }
  }

  Shape shape_;
  std::vector<T> data_;
};

// Calls f(index) for every multi-index of `shape` in row-major order.
template <class F>
void for_each_index(const Shape& shape, F&& f) {
  std::vector<std::size_t> index(shape.size(), 0);
  const std::size_t total = shape_volume(shape);
  for (std::size_t flat = 0; flat < total; ++flat) {
    f(std::span<const std::size_t>(index));
    for (std::size_t axis = shape.size(); axis-- > 0;) {
      if (++index[axis] < shape[axis]) break;
      index[axis] = 0;
    }
  }
}

}  // namespace chainrule
