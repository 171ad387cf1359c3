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

#include "chainrule/bracketing.hpp"

#include <limits>

namespace chainrule {
namespace {

void check_dims(const std::vector<std::size_t>& dims) {
  if (dims.size() < 2) fail(ErrorCode::kEmptyChain, "a chain needs at least one factor");
  for (std::size_t d : dims) {
    if (d == 0) fail(ErrorCode::kInvalidInput, "chain dimensions must be positive");
  }
}

}  // namespace

BracketTree BracketTree::leaf(std::size_t position, const std::vector<std::size_t>& dims) {
  if (position == 0 || position >= dims.size()) {
    fail(ErrorCode::kShapeMismatch, "leaf position " + std::to_string(position) +
                                        " outside chain of length " +
                                        std::to_string(dims.size() - 1));
  }
  BracketTree t;
  t.lo_ = t.hi_ = position;
  t.rows_ = dims[position];
  t.cols_ = dims[position - 1];
  return t;
}

BracketTree BracketTree::node(BracketTree left, BracketTree right) {
  if (left.lo_ != right.hi_ + 1 || left.cols_ != right.rows_) {
    fail(ErrorCode::kShapeMismatch, "subtrees " + left.to_string() + " and " +
                                        right.to_string() + " are not adjacent");
  }
  BracketTree t;
  t.lo_ = right.lo_;
  t.hi_ = left.hi_;
  t.rows_ = left.rows_;
  t.cols_ = right.cols_;
  t.cost_ = left.cost_ + right.cost_ +
            static_cast<std::uint64_t>(left.rows_) * left.cols_ * right.cols_;
  t.left_ = std::make_shared<const BracketTree>(std::move(left));
  t.right_ = std::make_shared<const BracketTree>(std::move(right));
  return t;
}

std::vector<std::size_t> BracketTree::leaves() const {
  if (is_leaf()) return {lo_};
  std::vector<std::size_t> out = left_->leaves();
  for (std::size_t p : right_->leaves()) out.push_back(p);
  return out;
}

std::string BracketTree::to_string() const {
  if (is_leaf()) return "F" + std::to_string(lo_);
  return "(" + left_->to_string() + " " + right_->to_string() + ")";
}

Bracketing optimal_bracketing(const std::vector<std::size_t>& dims) {
  check_dims(dims);
  const std::size_t q = dims.size() - 1;
  // best[lo][hi] / split[lo][hi] over positions lo..hi; right part is lo..k.
  std::vector<std::vector<std::uint64_t>> best(q + 1, std::vector<std::uint64_t>(q + 1, 0));
  std::vector<std::vector<std::size_t>> split(q + 1, std::vector<std::size_t>(q + 1, 0));
  for (std::size_t len = 2; len <= q; ++len) {
    for (std::size_t lo = 1; lo + len - 1 <= q; ++lo) {
      const std::size_t hi = lo + len - 1;
      std::uint64_t best_cost = std::numeric_limits<std::uint64_t>::max();
      for (std::size_t k = lo; k < hi; ++k) {
        const std::uint64_t c = best[lo][k] + best[k + 1][hi] +
                                static_cast<std::uint64_t>(dims[hi]) * dims[k] * dims[lo - 1];
        if (c < best_cost) {
          best_cost = c;
          split[lo][hi] = k;
        }
      }
      best[lo][hi] = best_cost;
    }
  }
  auto build = [&](auto&& self, std::size_t lo, std::size_t hi) -> BracketTree {
    if (lo == hi) return BracketTree::leaf(lo, dims);
    const std::size_t k = split[lo][hi];
    return BracketTree::node(self(self, k + 1, hi), self(self, lo, k));
  };
  BracketTree tree = build(build, 1, q);
  return {tree.cost(), tree};
}

std::vector<Bracketing> enumerate_bracketings(const std::vector<std::size_t>& dims,
                                              const EnumerationLimits& limits) {
  check_dims(dims);
  const std::size_t q = dims.size() - 1;
  if (q > limits.max_length) {
    fail(ErrorCode::kChainTooLong, "refusing to enumerate bracketings of a chain of length " +
                                       std::to_string(q) + " (limit " +
                                       std::to_string(limits.max_length) + ")");
  }
  auto all = [&](auto&& self, std::size_t lo, std::size_t hi) -> std::vector<BracketTree> {
    if (lo == hi) return {BracketTree::leaf(lo, dims)};
    std::vector<BracketTree> out;
    for (std::size_t k = lo; k < hi; ++k) {
      const auto lefts = self(self, k + 1, hi);
      const auto rights = self(self, lo, k);
      for (const auto& l : lefts) {
        for (const auto& r : rights) out.push_back(BracketTree::node(l, r));
      }
    }
    return out;
  };
  std::vector<Bracketing> result;
  for (auto& tree : all(all, 1, q)) result.push_back({tree.cost(), std::move(tree)});
  return result;
}

}  // namespace chainrule
