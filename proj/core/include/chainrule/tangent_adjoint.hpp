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
#include <span>
#include <string>
#include <vector>

#include "chainrule/chain_eval.hpp"
#include "chainrule/cost.hpp"
#include "chainrule/error.hpp"
#include "chainrule/tensor.hpp"

namespace chainrule {

enum class SeedMode { kTangent, kAdjoint };

// Tangent mode: p input tangents x_1..x_p (length n).
// Adjoint mode: output adjoint y (length m), the p-1 remaining input vectors
// in slot order, and the free slot l in 1..p.
template <class T>
struct SeedBundle {
  SeedMode mode = SeedMode::kTangent;
  std::vector<T> output;
  std::vector<std::vector<T>> inputs;
  std::size_t free_index = 1;

  static SeedBundle tangent(std::vector<std::vector<T>> xdots) {
    return {SeedMode::kTangent, {}, std::move(xdots), 1};
  }
  static SeedBundle adjoint(std::vector<T> ybar, std::vector<std::vector<T>> xbars,
                            std::size_t l) {
    return {SeedMode::kAdjoint, std::move(ybar), std::move(xbars), l};
  }
};

namespace detail {

// p from an [m, n, ..., n] tensor; checks the trailing extents agree.
template <class T>
std::size_t derivative_order(const Tensor<T>& fp) {
  if (fp.order() < 2) {
    fail(ErrorCode::kShapeMismatch, "expected a tensor [m, n, ..., n], got " +
                                        shape_string(fp.shape()));
  }
  for (std::size_t a = 2; a < fp.order(); ++a) {
    if (fp.extent(a) != fp.extent(1)) {
      fail(ErrorCode::kShapeMismatch,
           "trailing extents differ in " + shape_string(fp.shape()));
    }
  }
  return fp.order() - 1;
}

template <class T>
void check_length(const std::vector<T>& v, std::size_t want, const char* what) {
  if (v.size() != want) {
    fail(ErrorCode::kShapeMismatch, std::string(what) + " has length " +
                                        std::to_string(v.size()) + ", expected " +
                                        std::to_string(want));
  }
}

}  // namespace detail

// Views an order-1 F^[p] with a scalar input as [m, 1, ..., 1].
template <class T>
Tensor<T> as_pth_tensor(const Tensor<T>& column, std::size_t p) {
  Shape shape{column.size()};
  shape.resize(p + 1, 1);
  return column.reshaped(std::move(shape));
}

// y_k = F[k, j_1..j_p] * prod_i x_i[j_i]; trailing slots are contracted last
// to first.
template <class T>
CostedTensor<T> tangent_eval(const Tensor<T>& fp, const SeedBundle<T>& seeds) {
  if (seeds.mode != SeedMode::kTangent) fail(ErrorCode::kInvalidInput, "expected tangent seeds");
  const std::size_t p = detail::derivative_order(fp);
  if (seeds.inputs.size() != p) {
    fail(ErrorCode::kShapeMismatch, std::to_string(seeds.inputs.size()) +
                                        " tangents given for order " + std::to_string(p));
  }
  for (const auto& x : seeds.inputs) detail::check_length(x, fp.extent(1), "input tangent");
  OpCounts counts;
  Tensor<T> t = fp;
  for (std::size_t slot = p; slot >= 1; --slot) {
    t = contract_axis_with_vector(t, slot, std::span<const T>(seeds.inputs[slot - 1]), counts);
  }
  return costed(std::move(t), counts);
}

// xbar_l[j_l] = y_k * F[k, j_1..j_p] * prod_{i != l} xbar_i[j_i]. The output
// adjoint is contracted first, which costs (m - 1) * n^p standalone additions.
template <class T>
CostedTensor<T> adjoint_eval(const Tensor<T>& fp, const SeedBundle<T>& seeds) {
  if (seeds.mode != SeedMode::kAdjoint) fail(ErrorCode::kInvalidInput, "expected adjoint seeds");
  const std::size_t p = detail::derivative_order(fp);
  if (seeds.free_index < 1 || seeds.free_index > p) {
    fail(ErrorCode::kBadFreeIndex, "free index " + std::to_string(seeds.free_index) +
                                       " is outside 1.." + std::to_string(p));
  }
  detail::check_length(seeds.output, fp.extent(0), "output adjoint");
  if (seeds.inputs.size() != p - 1) {
    fail(ErrorCode::kShapeMismatch, std::to_string(seeds.inputs.size()) +
                                        " input vectors given, expected " + std::to_string(p - 1));
  }
  for (const auto& x : seeds.inputs) detail::check_length(x, fp.extent(1), "input adjoint");
  OpCounts counts;
  Tensor<T> t = contract_axis_with_vector(fp, 0, std::span<const T>(seeds.output), counts);
  // Slot i now sits on axis i - 1. inputs[] skips the free slot.
  for (std::size_t slot = p; slot >= 1; --slot) {
    if (slot == seeds.free_index) continue;
    const std::size_t seed = slot < seeds.free_index ? slot - 1 : slot - 2;
    t = contract_axis_with_vector(t, slot - 1, std::span<const T>(seeds.inputs[seed]), counts);
  }
  return costed(std::move(t), counts);
}

// Reduction fast path: y = F'_q ... F'_2 (F_1^[p] * prod_j x_j) with diagonal
// F'_i, n = 1. Only multiplications, no additions.
template <class T>
CostedTensor<T> reduction_tangent_eval(const Chain<T>& chain, int p,
                                       const SeedBundle<T>& seeds) {
  check_reduction_structure(chain, p);
  if (seeds.mode != SeedMode::kTangent || seeds.inputs.size() != static_cast<std::size_t>(p)) {
    fail(ErrorCode::kShapeMismatch, "expected " + std::to_string(p) + " input tangents");
  }
  OpCounts counts;
  const Tensor<T>& first = *chain.derivative(1, p);
  std::vector<T> y(first.data().begin(), first.data().end());
  for (const auto& x : seeds.inputs) {
    detail::check_length(x, 1, "input tangent");
    for (T& v : y) {
      v *= x[0];
      ++counts.mults;
    }
  }
  for (std::size_t i = 2; i <= chain.length(); ++i) {
    const Tensor<T>& d = chain.jacobian(i);
    for (std::size_t j = 0; j < y.size(); ++j) {
      y[j] = d(j, j) * y[j];
      ++counts.mults;
    }
  }
  return costed(Tensor<T>::vector(std::move(y)), counts);
}

// Reduction fast path in adjoint mode: the product part is diagonal, so the
// only standalone additions are the |C| - 1 of the final inner product.
template <class T>
CostedTensor<T> reduction_adjoint_eval(const Chain<T>& chain, int p,
                                       const SeedBundle<T>& seeds) {
  check_reduction_structure(chain, p);
  if (seeds.mode != SeedMode::kAdjoint) fail(ErrorCode::kInvalidInput, "expected adjoint seeds");
  if (seeds.free_index < 1 || seeds.free_index > static_cast<std::size_t>(p)) {
    fail(ErrorCode::kBadFreeIndex, "free index " + std::to_string(seeds.free_index) +
                                       " is outside 1.." + std::to_string(p));
  }
  if (seeds.inputs.size() != static_cast<std::size_t>(p) - 1) {
    fail(ErrorCode::kShapeMismatch, "expected " + std::to_string(p - 1) + " input vectors");
  }
  const Tensor<T>& first = *chain.derivative(1, p);
  detail::check_length(seeds.output, first.extent(0), "output adjoint");
  OpCounts counts;
  std::vector<T> column(first.data().begin(), first.data().end());
  for (std::size_t i = 2; i <= chain.length(); ++i) {
    const Tensor<T>& d = chain.jacobian(i);
    for (std::size_t j = 0; j < column.size(); ++j) {
      column[j] = d(j, j) * column[j];
      ++counts.mults;
    }
  }
  T acc = seeds.output[0] * column[0];
  ++counts.mults;
  for (std::size_t j = 1; j < column.size(); ++j) {
    acc += seeds.output[j] * column[j];
    ++counts.mults;
    ++counts.adds;
  }
  for (const auto& x : seeds.inputs) {
    detail::check_length(x, 1, "input adjoint");
    acc *= x[0];
    ++counts.mults;
  }
  return costed(Tensor<T>::vector({acc}), counts);
}

template <class T>
using TangentProvider = std::function<Tensor<T>(const SeedBundle<T>&)>;
template <class T>
using AdjointProvider = std::function<Tensor<T>(const SeedBundle<T>&)>;

template <class T>
struct Recovery {
  Tensor<T> tensor;
  std::size_t calls = 0;
};

namespace detail {

template <class T>
std::vector<T> basis(std::size_t n, std::size_t i) {
  std::vector<T> e(n, T(0));
  e[i] = T(1);
  return e;
}

// Calls f(multi-index) for every index in [0,n)^k, last slot fastest.
template <class F>
void for_each_multi_index(std::size_t n, std::size_t k, F&& f) {
  std::vector<std::size_t> idx(k, 0);
  for (;;) {
    f(idx);
    std::size_t s = k;
    while (s > 0 && ++idx[s - 1] == n) idx[--s] = 0;
    if (s == 0) return;
  }
}

}  // namespace detail

// Rebuilds F^[p] (shape [m, n, ..., n]) by seeding every combination of
// Cartesian basis tangents: exactly n^p provider calls.
template <class T>
Recovery<T> recover_tensor_by_tangents(const TangentProvider<T>& provider, std::size_t m,
                                       std::size_t n, std::size_t p) {
  if (m == 0 || n == 0 || p == 0) fail(ErrorCode::kShapeMismatch, "m, n and p must be positive");
  Shape shape{m};
  shape.resize(p + 1, n);
  Recovery<T> out{Tensor<T>(shape), 0};
  std::vector<std::size_t> full(p + 1);
  detail::for_each_multi_index(n, p, [&](const std::vector<std::size_t>& idx) {
    std::vector<std::vector<T>> seeds;
    for (std::size_t j : idx) seeds.push_back(detail::basis<T>(n, j));
    const Tensor<T> y = provider(SeedBundle<T>::tangent(std::move(seeds)));
    ++out.calls;
    if (y.size() != m) {
      fail(ErrorCode::kShapeMismatch, "provider returned " + std::to_string(y.size()) +
                                          " outputs, expected " + std::to_string(m));
    }
    std::copy(idx.begin(), idx.end(), full.begin() + 1);
    for (std::size_t k = 0; k < m; ++k) {
      full[0] = k;
      out.tensor.at(full) = y[k];
    }
  });
  return out;
}

// Rebuilds F^[p] from adjoints with free slot l: every basis output adjoint
// times every basis combination of the other p - 1 slots, m * n^(p-1) calls.
template <class T>
Recovery<T> recover_tensor_by_adjoints(const AdjointProvider<T>& provider, std::size_t m,
                                       std::size_t n, std::size_t p, std::size_t l = 1) {
  if (m == 0 || n == 0 || p == 0) fail(ErrorCode::kShapeMismatch, "m, n and p must be positive");
  if (l < 1 || l > p) fail(ErrorCode::kBadFreeIndex, "free index outside 1..p");
  Shape shape{m};
  shape.resize(p + 1, n);
  Recovery<T> out{Tensor<T>(shape), 0};
  std::vector<std::size_t> full(p + 1);
  for (std::size_t k = 0; k < m; ++k) {
    detail::for_each_multi_index(n, p - 1, [&](const std::vector<std::size_t>& idx) {
      std::vector<std::vector<T>> seeds;
      for (std::size_t j : idx) seeds.push_back(detail::basis<T>(n, j));
      const Tensor<T> x = provider(SeedBundle<T>::adjoint(detail::basis<T>(m, k), std::move(seeds), l));
      ++out.calls;
      if (x.size() != n) {
        fail(ErrorCode::kShapeMismatch, "provider returned " + std::to_string(x.size()) +
                                            " entries, expected " + std::to_string(n));
      }
      full[0] = k;
      for (std::size_t slot = 1, s = 0; slot <= p; ++slot) {
        if (slot != l) full[slot] = idx[s++];
      }
      for (std::size_t j = 0; j < n; ++j) {
        full[l] = j;
        out.tensor.at(full) = x[j];
      }
    });
  }
  return out;
}

// Providers backed by a materialized tensor.
template <class T>
TangentProvider<T> tangent_provider(Tensor<T> fp) {
  return [fp = std::move(fp)](const SeedBundle<T>& seeds) { return tangent_eval(fp, seeds).value; };
}

template <class T>
AdjointProvider<T> adjoint_provider(Tensor<T> fp) {
  return [fp = std::move(fp)](const SeedBundle<T>& seeds) { return adjoint_eval(fp, seeds).value; };
}

}  // namespace chainrule
