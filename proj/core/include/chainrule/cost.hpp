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

#include <cstdint>
#include <string>

#include "chainrule/tensor.hpp"

namespace chainrule {

// Operation tally under the fma model: every scalar multiplication costs one
// fma, additions are reported but never enter the cost.
struct OpCounts {
  std::uint64_t mults = 0;
  std::uint64_t adds = 0;

  OpCounts& operator+=(const OpCounts& other) {
    mults += other.mults;
    adds += other.adds;
    return *this;
  }
  friend bool operator==(const OpCounts&, const OpCounts&) = default;
};

template <class T>
struct CostedTensor {
  Tensor<T> value;
  std::uint64_t mults = 0;
  std::uint64_t adds = 0;

  OpCounts counts() const { return {mults, adds}; }
};

template <class T>
CostedTensor<T> costed(Tensor<T> value, const OpCounts& counts) {
  return CostedTensor<T>{std::move(value), counts.mults, counts.adds};
}

// The kernels below never multiply by an implicit zero accumulator: the first
// product of each sum initializes it, later ones accumulate. A sum of k
// products therefore costs k multiplications and k-1 additions.

// [r,k] x [k,c] -> [r,c]
template <class T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b, OpCounts& counts) {
  if (a.order() != 2 || b.order() != 2 || a.cols() != b.rows()) {
    fail(ErrorCode::kDimensionMismatch, "cannot multiply " + shape_string(a.shape()) +
                                            " by " + shape_string(b.shape()));
  }
  const std::size_t r = a.rows(), k = a.cols(), c = b.cols();
  std::vector<T> out;
  out.reserve(r * c);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      T acc = a(i, 0) * b(0, j);
      ++counts.mults;
      for (std::size_t l = 1; l < k; ++l) {
        acc += a(i, l) * b(l, j);
        ++counts.mults;
        ++counts.adds;
      }
      out.push_back(std::move(acc));
    }
  }
  return Tensor<T>::matrix(r, c, std::move(out));
}

// out[d, ...] = sum_g m[d, g] * t[g, ...]
template <class T>
Tensor<T> left_multiply(const Tensor<T>& m, const Tensor<T>& t, OpCounts& counts) {
  if (m.order() != 2 || m.cols() != t.extent(0)) {
    fail(ErrorCode::kDimensionMismatch, "cannot left-multiply " +
                                            shape_string(t.shape()) + " by " +
                                            shape_string(m.shape()));
  }
  const std::size_t inner = t.extent(0);
  const std::size_t rest = t.size() / inner;
  Tensor<T> flat = matmul(m, t.reshaped({inner, rest}), counts);
  Shape shape = t.shape();
  shape[0] = m.rows();
  return flat.reshaped(std::move(shape));
}

// Replaces index `axis` of t by the column index of m:
// out[..., a, ...] = sum_b t[..., b, ...] * m[b, a]
template <class T>
Tensor<T> contract_axis(const Tensor<T>& t, std::size_t axis, const Tensor<T>& m,
                        OpCounts& counts) {
  if (axis >= t.order() || m.order() != 2 || m.rows() != t.extent(axis)) {
    fail(ErrorCode::kDimensionMismatch, "cannot contract axis " + std::to_string(axis) +
                                            " of " + shape_string(t.shape()) + " with " +
                                            shape_string(m.shape()));
  }
  Shape out_shape = t.shape();
  out_shape[axis] = m.cols();
  std::size_t stride = 1;
  for (std::size_t i = axis + 1; i < t.order(); ++i) stride *= t.extent(i);
  const std::size_t inner = t.extent(axis);
  Tensor<T> out(out_shape);
  std::size_t flat = 0;
  for_each_index(out_shape, [&](std::span<const std::size_t> index) {
    // Offset of t[..., 0, ...] for this output position.
    std::size_t base = 0;
    for (std::size_t i = 0; i < t.order(); ++i) {
      base = base * t.extent(i) + (i == axis ? 0 : index[i]);
    }
    const std::size_t col = index[axis];
    T acc = t[base] * m(0, col);
    ++counts.mults;
    for (std::size_t b = 1; b < inner; ++b) {
      acc += t[base + b * stride] * m(b, col);
      ++counts.mults;
      ++counts.adds;
    }
    out[flat++] = std::move(acc);
  });
  return out;
}

// Removes index `axis` of t by contracting it with v. An order-1 input yields
// shape [1].
template <class T>
Tensor<T> contract_axis_with_vector(const Tensor<T>& t, std::size_t axis,
                                    std::span<const T> v, OpCounts& counts) {
  if (axis >= t.order() || v.size() != t.extent(axis)) {
    fail(ErrorCode::kShapeMismatch, "cannot contract axis " + std::to_string(axis) +
                                        " of " + shape_string(t.shape()) +
                                        " with a vector of length " +
                                        std::to_string(v.size()));
  }
  Shape out_shape;
  for (std::size_t i = 0; i < t.order(); ++i) {
    if (i != axis) out_shape.push_back(t.extent(i));
  }
  const bool scalar_result = out_shape.empty();
  if (scalar_result) out_shape.push_back(1);
  std::size_t stride = 1;
  for (std::size_t i = axis + 1; i < t.order(); ++i) stride *= t.extent(i);
  const std::size_t inner = t.extent(axis);
  const std::size_t outer = t.size() / (inner * stride);
  std::vector<T> out;
  out.reserve(outer * stride);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t s = 0; s < stride; ++s) {
      const std::size_t base = o * inner * stride + s;
      T acc = t[base] * v[0];
      ++counts.mults;
      for (std::size_t b = 1; b < inner; ++b) {
        acc += t[base + b * stride] * v[b];
        ++counts.mults;
        ++counts.adds;
      }
      out.push_back(std::move(acc));
    }
  }
  return Tensor<T>(std::move(out_shape), std::move(out));
}

template <class T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b, OpCounts& counts) {
  if (a.shape() != b.shape()) {
    fail(ErrorCode::kDimensionMismatch, "cannot add " + shape_string(a.shape()) +
                                            " and " + shape_string(b.shape()));
  }
  std::vector<T> out;
  out.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.push_back(a[i] + b[i]);
    ++counts.adds;
  }
  return Tensor<T>(a.shape(), std::move(out));
}

}  // namespace chainrule
