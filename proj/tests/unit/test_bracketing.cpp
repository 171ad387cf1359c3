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

#include <gtest/gtest.h>

#include <algorithm>
#include <functional>

#include "chainrule/bracketing.hpp"
#include "chainrule/chain_eval.hpp"
#include "oracles.hpp"

using namespace chainrule;

namespace {

// Exhaustive minimum by plain recursion over split points, without
// memoization or the library's tree type.
std::uint64_t brute_min(const std::vector<std::size_t>& dims, std::size_t lo, std::size_t hi) {
  if (lo == hi) return 0;
  std::uint64_t best = UINT64_MAX;
  // Positions lo..hi; the product F_hi ... F_lo is [dims[hi], dims[lo-1]].
  for (std::size_t k = lo; k < hi; ++k) {
    const std::uint64_t cost = brute_min(dims, lo, k) + brute_min(dims, k + 1, hi) +
                               std::uint64_t{dims[hi]} * dims[k] * dims[lo - 1];
    best = std::min(best, cost);
  }
  return best;
}

std::vector<std::size_t> random_dims(oracle::Rng& rng, std::size_t q, int max_dim) {
  std::vector<std::size_t> dims(q + 1);
  for (auto& d : dims) d = static_cast<std::size_t>(oracle::uniform(rng, 1, max_dim));
  return dims;
}

}  // namespace

TEST(OptimalBracketing, WorkedShapeOneThreeThreeThree) {
  auto best = optimal_bracketing({1, 3, 3, 3});
  EXPECT_EQ(best.cost, brute_min({1, 3, 3, 3}, 1, 3));
  EXPECT_EQ(best.cost, 18u);
  EXPECT_EQ(best.tree.to_string(), "(F3 (F2 F1))");
}

TEST(OptimalBracketing, SingleMatrixIsALeaf) {
  auto best = optimal_bracketing({5, 10});
  EXPECT_EQ(best.cost, 0u);
  EXPECT_TRUE(best.tree.is_leaf());
  EXPECT_EQ(best.tree.to_string(), "F1");
}

TEST(OptimalBracketing, TenHundredFiveFifty) {
  auto all = enumerate_bracketings({10, 100, 5, 50});
  ASSERT_EQ(all.size(), 2u);
  std::vector<std::uint64_t> costs{all[0].cost, all[1].cost};
  std::sort(costs.begin(), costs.end());
  EXPECT_EQ(costs, (std::vector<std::uint64_t>{7500, 75000}));
  auto best = optimal_bracketing({10, 100, 5, 50});
  EXPECT_EQ(best.cost, 7500u);
  EXPECT_EQ(best.tree.to_string(), "(F3 (F2 F1))");
}

TEST(OptimalBracketing, EmptyChainIsRejected) {
  try {
    optimal_bracketing({4});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyChain);
  }
}

TEST(EnumerateBracketings, CatalanCounts) {
  EXPECT_EQ(enumerate_bracketings({2, 2, 2}).size(), 1u);
  EXPECT_EQ(enumerate_bracketings({2, 2, 2, 2}).size(), 2u);
  EXPECT_EQ(enumerate_bracketings({2, 2, 2, 2, 2}).size(), 5u);
  EXPECT_EQ(enumerate_bracketings({1, 2, 3, 4, 5, 6}).size(), 14u);
}

TEST(EnumerateBracketings, LengthGuard) {
  std::vector<std::size_t> dims(14, 2);
  try {
    enumerate_bracketings(dims);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kChainTooLong);
  }
}

TEST(EnumerateBracketings, TreesAreWellFormed) {
  oracle::Rng rng(9);
  auto dims = random_dims(rng, 5, 9);
  for (const auto& b : enumerate_bracketings(dims)) {
    EXPECT_EQ(b.cost, b.tree.cost());
    EXPECT_EQ(b.tree.leaves(), (std::vector<std::size_t>{5, 4, 3, 2, 1}));
    EXPECT_EQ(b.tree.rows(), dims[5]);
    EXPECT_EQ(b.tree.cols(), dims[0]);
  }
}

TEST(OptimalBracketing, RandomSweepMatchesExhaustiveMinimum) {
  oracle::Rng rng(20260101);
  for (int trial = 0; trial < 500; ++trial) {
    const auto q = static_cast<std::size_t>(oracle::uniform(rng, 1, 8));
    auto dims = random_dims(rng, q, 9);
    auto best = optimal_bracketing(dims);
    EXPECT_EQ(best.cost, brute_min(dims, 1, q)) << "trial " << trial;
    std::uint64_t enumerated = UINT64_MAX;
    for (const auto& b : enumerate_bracketings(dims)) enumerated = std::min(enumerated, b.cost);
    EXPECT_EQ(best.cost, enumerated) << "trial " << trial;
  }
}

TEST(ApplyBracketing, AllTreesGiveIdenticalValues) {
  oracle::Rng rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const auto q = static_cast<std::size_t>(oracle::uniform(rng, 1, 5));
    auto chain = oracle::random_chain(rng, random_dims(rng, q, 4));
    const auto reference = chain_product(chain).value;
    for (const auto& b : enumerate_bracketings(chain.dims())) {
      auto result = apply_bracketing(chain, b.tree);
      EXPECT_EQ(result.value, reference);
      EXPECT_EQ(result.mults, b.cost);
    }
    auto best = optimal_bracketing(chain.dims());
    EXPECT_EQ(apply_bracketing(chain, best.tree).mults, best.cost);
  }
}

TEST(ApplyBracketing, RightCombEqualsChainProductCost) {
  oracle::Rng rng(11);
  auto chain = oracle::random_chain(rng, {3, 2, 4, 2});
  BracketTree comb = BracketTree::leaf(1, chain.dims());
  for (std::size_t i = 2; i <= chain.length(); ++i) {
    comb = BracketTree::node(BracketTree::leaf(i, chain.dims()), comb);
  }
  auto result = apply_bracketing(chain, comb);
  auto reference = chain_product(chain);
  EXPECT_EQ(result.value, reference.value);
  EXPECT_EQ(result.mults, reference.mults);
}

TEST(ApplyBracketing, ReducedScalarChainBothTrees) {
  std::vector<Tensor<Rational>> js{
      Tensor<Rational>::matrix(3, 1, {2, 3, 2}),
      Tensor<Rational>::diagonal({Rational(3), Rational(5), Rational(5)}),
      Tensor<Rational>::diagonal({Rational(11), Rational(7), Rational(7)})};
  auto chain = Chain<Rational>::from_jacobians(js);
  auto trees = enumerate_bracketings(chain.dims());
  ASSERT_EQ(trees.size(), 2u);
  std::vector<std::uint64_t> mults;
  for (const auto& b : trees) {
    auto result = apply_bracketing(chain, b.tree);
    EXPECT_EQ(result.value, Tensor<Rational>::matrix(3, 1, {66, 105, 70}));
    mults.push_back(result.mults);
  }
  std::sort(mults.begin(), mults.end());
  EXPECT_EQ(mults, (std::vector<std::uint64_t>{18, 36}));
}

TEST(ApplyBracketing, MismatchedTreeIsRejected) {
  oracle::Rng rng(12);
  auto chain = oracle::random_chain(rng, {2, 2, 2});
  auto other = optimal_bracketing({2, 2, 2, 2});
  try {
    apply_bracketing(chain, other.tree);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
  auto wrong_dims = optimal_bracketing({3, 2, 2});
  try {
    apply_bracketing(chain, wrong_dims.tree);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
}
