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
#include <optional>
#include <vector>

#include "chainrule/cost.hpp"
#include "chainrule/dag.hpp"

namespace chainrule {

// F' = F'_q * ... * F'_1, evaluated right to left. Costs
// sum_{i=2..q} n_i * n_{i-1} * n_0 multiplications; F'_1 is copied for free.
template <class T>
CostedTensor<T> chain_product(const Chain<T>& chain) {
  OpCounts counts;
  Tensor<T> product = chain.jacobian(1);
  for (std::size_t i = 2; i <= chain.length(); ++i) {
    product = matmul(chain.jacobian(i), product, counts);
  }
  return costed(std::move(product), counts);
}

// Path-sum chain rule on a dag: the sum over all source-to-sink paths of the
// edge Jacobian products along the path. This is the ground-truth oracle for
// every first-order evaluator and schedule.
template <class T>
CostedTensor<T> path_sum_jacobian(const DerivativeDag<T>& dag) {
  OpCounts counts;
  std::optional<Tensor<T>> total;
  for (const auto& path : enumerate_paths(dag)) {
    Tensor<T> product = dag.find_edge(path[0], path[1])->jacobian();
    for (std::size_t k = 2; k < path.size(); ++k) {
      product = matmul(dag.find_edge(path[k - 1], path[k])->jacobian(), product, counts);
    }
    total = total ? add(*total, product, counts) : std::move(product);
  }
  return costed(std::move(*total), counts);
}

template <class T>
struct HessianTerms {
  CostedTensor<T> total;
  // summands[j-1] is the contribution of position j.
  std::vector<Tensor<T>> summands;
};

// Second-order chain rule on a chain:
//   F''[d,a1,a2] = sum_j S_j[d,g] H_j[g,b1,b2] P_j[b1,a1] P_j[b2,a2]
// with suffix S_j = F'_q..F'_{j+1} and prefix P_j = F'_{j-1}..F'_1. Prefix and
// suffix products are built incrementally and shared across j; empty products
// are identities and are not multiplied out.
template <class T>
HessianTerms<T> hessian_chain_terms(const Chain<T>& chain) {
  const std::size_t q = chain.length();
  for (std::size_t j = 1; j <= q; ++j) {
    if (chain.derivative(j, 2) == nullptr) {
      fail(ErrorCode::kMissingOrder2,
           "position " + std::to_string(j) + " has no order-2 derivative");
    }
  }
  OpCounts counts;

  // prefix[j] = P_j for j >= 2 (P_1 is the identity).
  std::vector<std::optional<Tensor<T>>> prefix(q + 1);
  if (q >= 2) prefix[2] = chain.jacobian(1);
  for (std::size_t j = 3; j <= q; ++j) {
    prefix[j] = matmul(chain.jacobian(j - 1), *prefix[j - 1], counts);
  }
  // suffix[j] = S_j for j <= q-1 (S_q is the identity).
  std::vector<std::optional<Tensor<T>>> suffix(q + 1);
  if (q >= 2) suffix[q - 1] = chain.jacobian(q);
  for (std::size_t j = q - 1; j-- > 1;) {
    suffix[j] = matmul(*suffix[j + 1], chain.jacobian(j + 1), counts);
  }

  HessianTerms<T> result;
  std::optional<Tensor<T>> total;
  for (std::size_t j = 1; j <= q; ++j) {
    Tensor<T> term = *chain.derivative(j, 2);
    if (prefix[j]) {
      term = contract_axis(term, 2, *prefix[j], counts);
      term = contract_axis(term, 1, *prefix[j], counts);
    }
    if (suffix[j]) term = left_multiply(*suffix[j], term, counts);
    result.summands.push_back(term);
    total = total ? add(*total, term, counts) : std::move(term);
  }
  result.total = costed(std::move(*total), counts);
  return result;
}

template <class T>
CostedTensor<T> hessian_chain(const Chain<T>& chain) {
  return hessian_chain_terms(chain).total;
}

// Checks the structure produced by the Ensemble Computation reduction:
// n_0 = 1, F_1 has an order-p derivative of shape [N,1,...,1], every F'_i
// (i >= 2) is diagonal and every order-2..p derivative of F_i (i >= 2) that is
// present is zero. Absent higher derivatives count as zero.
template <class T>
void check_reduction_structure(const Chain<T>& chain, int p) {
  if (p < 1) fail(ErrorCode::kInvalidInput, "derivative order must be >= 1");
  if (chain.input_dim() != 1) {
    fail(ErrorCode::kStructureViolation, "reduction chains have a scalar input");
  }
  if (chain.derivative(1, p) == nullptr) {
    fail(ErrorCode::kStructureViolation,
         "position 1 has no order-" + std::to_string(p) + " derivative");
  }
  for (std::size_t i = 2; i <= chain.length(); ++i) {
    if (!chain.jacobian(i).is_diagonal()) {
      fail(ErrorCode::kStructureViolation,
           "Jacobian at position " + std::to_string(i) + " is not diagonal");
    }
    for (int r = 2; r <= p; ++r) {
      const Tensor<T>* higher = chain.derivative(i, r);
      if (higher != nullptr && !higher->is_zero()) {
        fail(ErrorCode::kStructureViolation, "order-" + std::to_string(r) +
                                                 " derivative at position " +
                                                 std::to_string(i) + " is nonzero");
      }
    }
  }
}

// F^[p] = F'_q * ... * F'_2 * F_1^[p] for reduction-structured chains, as an
// order-1 tensor. Dense right-to-left products; stored zeros are multiplied.
template <class T>
CostedTensor<T> reduction_pth_derivative(const Chain<T>& chain, int p) {
  check_reduction_structure(chain, p);
  OpCounts counts;
  const Tensor<T>& first = *chain.derivative(1, p);
  const std::size_t n = first.extent(0);
  Tensor<T> column = first.reshaped({n, 1});
  for (std::size_t i = 2; i <= chain.length(); ++i) {
    column = matmul(chain.jacobian(i), column, counts);
  }
  return costed(column.reshaped({column.rows()}), counts);
}

}  // namespace chainrule
