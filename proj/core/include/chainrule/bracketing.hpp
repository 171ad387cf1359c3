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
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "chainrule/cost.hpp"
#include "chainrule/dag.hpp"

namespace chainrule {

// A bracketing of the matrix chain F'_q * ... * F'_1. Leaves are positions;
// the left child covers the higher positions, so an in-order walk visits
// q, q-1, ..., 1. Immutable; children are shared.
class BracketTree {
 public:
  static BracketTree leaf(std::size_t position, const std::vector<std::size_t>& dims);
  static BracketTree node(BracketTree left, BracketTree right);

  bool is_leaf() const { return left_ == nullptr; }
  std::size_t position() const { return lo_; }  // leaves only
  const BracketTree& left() const { return *left_; }
  const BracketTree& right() const { return *right_; }

  // Positions covered: lo()..hi().
  std::size_t lo() const { return lo_; }
  std::size_t hi() const { return hi_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::uint64_t cost() const { return cost_; }

  std::vector<std::size_t> leaves() const;
  std::string to_string() const;  // e.g. "(F3 (F2 F1))"

 private:
  BracketTree() = default;

  std::shared_ptr<const BracketTree> left_;
  std::shared_ptr<const BracketTree> right_;
  std::size_t lo_ = 0, hi_ = 0, rows_ = 0, cols_ = 0;
  std::uint64_t cost_ = 0;
};

struct Bracketing {
  std::uint64_t cost = 0;
  BracketTree tree;
};

// Dynamic program over dense rows*inner*cols costs; ties go to the smallest
// split index. dims = [n_0, ..., n_q].
Bracketing optimal_bracketing(const std::vector<std::size_t>& dims);

struct EnumerationLimits {
  std::size_t max_length = 12;
};

// Every bracketing (Catalan(q-1) of them) with its cost, ordered by split
// index at the root, then recursively.
std::vector<Bracketing> enumerate_bracketings(const std::vector<std::size_t>& dims,
                                              const EnumerationLimits& limits = {});

// Evaluates the chain product in the order given by `tree`; the reported
// multiplication count equals tree.cost().
template <class T>
CostedTensor<T> apply_bracketing(const Chain<T>& chain, const BracketTree& tree) {
  if (tree.lo() != 1 || tree.hi() != chain.length()) {
    fail(ErrorCode::kShapeMismatch, "bracketing covers positions " +
                                        std::to_string(tree.lo()) + ".." +
                                        std::to_string(tree.hi()) + " of a chain of length " +
                                        std::to_string(chain.length()));
  }
  OpCounts counts;
  auto eval = [&](auto&& self, const BracketTree& node) -> Tensor<T> {
    if (node.is_leaf()) {
      const Tensor<T>& j = chain.jacobian(node.position());
      if (j.rows() != node.rows() || j.cols() != node.cols()) {
        fail(ErrorCode::kShapeMismatch, "bracketing dims disagree with the chain");
      }
      return j;
    }
    Tensor<T> left = self(self, node.left());
    Tensor<T> right = self(self, node.right());
    return matmul(left, right, counts);
  };
  Tensor<T> value = eval(eval, tree);
  return costed(std::move(value), counts);
}

}  // namespace chainrule
