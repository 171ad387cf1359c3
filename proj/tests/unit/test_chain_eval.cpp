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

#include <fstream>
#include <sstream>

#include "chainrule/chain_eval.hpp"
#include "chainrule/dag_io.hpp"
#include "chainrule/reduction.hpp"
#include "counted.hpp"
#include "oracles.hpp"

using namespace chainrule;

namespace {

std::string read_file(const std::string& name) {
  std::ifstream in(std::string(CHAINRULE_TEST_DATA) + "/" + name);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Chain<Rational> worked_chain(int p) {
  auto instance = ensemble_from_json(read_file("worked_ec.json"));
  return reduce_to_crd(instance, p).chain;
}

Tensor<Rational> column(std::initializer_list<int> values) {
  std::vector<Rational> v;
  for (int x : values) v.emplace_back(x);
  return Tensor<Rational>::vector(v);
}

template <class U>
Tensor<U> convert(const Tensor<Rational>& t) {
  return t.template map<U>([](const Rational& v) { return U(v); });
}

template <class U>
Chain<U> convert(const Chain<Rational>& chain) {
  std::vector<DerivativeMap<U>> derivs;
  for (std::size_t i = 1; i <= chain.length(); ++i) {
    DerivativeMap<U> map;
    for (const auto& [r, t] : chain.derivatives(i)) map.emplace(r, convert<U>(t));
    derivs.push_back(std::move(map));
  }
  return Chain<U>(chain.dims(), std::move(derivs));
}

}  // namespace

TEST(ChainProduct, ReducedChainGivesScalarGraphValues) {
  auto chain = worked_chain(1);
  // Order-1 F'_1 at x = 1 is c / (p-1)! = c for p = 1.
  auto result = chain_product(chain);
  EXPECT_EQ(result.value.reshaped({3}), column({66, 105, 70}));
}

TEST(ChainProduct, SingleFactorIsReturnedUnchanged) {
  oracle::Rng rng(1);
  auto chain = oracle::random_chain(rng, {3, 2});
  auto result = chain_product(chain);
  EXPECT_EQ(result.value, chain.jacobian(1));
  EXPECT_EQ(result.mults, 0u);
  EXPECT_EQ(result.adds, 0u);
}

TEST(ChainProduct, MatchesNaiveTripleProduct) {
  oracle::Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    auto chain = oracle::random_chain(rng, {2, 3, 2, 4});
    auto result = chain_product(chain);
    EXPECT_EQ(result.value,
              oracle::naive_triple(chain.jacobian(3), chain.jacobian(2), chain.jacobian(1)));
    // sum_{i=2..q} n_i n_{i-1} n_0 = 2*3*2 + 4*2*2
    EXPECT_EQ(result.mults, 28u);
  }
}

TEST(ChainProduct, DimensionMismatchIsRejected) {
  try {
    Chain<Rational>::from_jacobians({Tensor<Rational>({3, 2}), Tensor<Rational>({2, 2})});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

TEST(PathSum, DiamondFormula) {
  const int a = 2, b = 3, c = 5, d = 7, e = 11;
  auto dag = parse_dag_json_as<Rational>(read_file("diamond_dag.json"));
  auto result = path_sum_jacobian(dag);
  EXPECT_EQ(result.value(0, 0), Rational(d * a + e * c * a + e * b));
  // Paths have 1, 2 and 1 products; three summands take two additions.
  EXPECT_EQ(result.mults, 4u);
  EXPECT_EQ(result.adds, 2u);
}

TEST(PathSum, ChainEqualsChainProduct) {
  oracle::Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::size_t> dims(static_cast<std::size_t>(oracle::uniform(rng, 2, 7)));
    for (auto& d : dims) d = static_cast<std::size_t>(oracle::uniform(rng, 1, 4));
    auto chain = oracle::random_chain(rng, dims);
    EXPECT_EQ(path_sum_jacobian(chain.to_dag()).value, chain_product(chain).value);
  }
}

TEST(PathSum, ReducedScalarOutputCones) {
  auto chain = worked_chain(3);
  auto graph = expand_chain(chain, 3);
  std::vector<int> want{66, 105, 70};
  for (std::size_t j = 0; j < 3; ++j) {
    auto cone = output_cone(graph, j);
    EXPECT_EQ(enumerate_paths(cone).size(), 1u);
    EXPECT_EQ(path_sum_jacobian(cone).value(0, 0), Rational(want[j]));
  }
}

TEST(Hessian, VanishesWhenAllSecondDerivativesVanish) {
  oracle::Rng rng(4);
  auto base = oracle::random_chain(rng, {2, 3, 2, 2});
  std::vector<DerivativeMap<Rational>> derivs;
  for (std::size_t i = 1; i <= base.length(); ++i) {
    DerivativeMap<Rational> map;
    map.emplace(1, base.jacobian(i));
    map.emplace(2, Tensor<Rational>(derivative_shape(base.dims()[i], base.dims()[i - 1], 2)));
    derivs.push_back(std::move(map));
  }
  Chain<Rational> chain(base.dims(), derivs);
  auto result = hessian_chain(chain);
  EXPECT_EQ(result.value.shape(), (Shape{2, 2, 2}));
  EXPECT_TRUE(result.value.is_zero());
}

TEST(Hessian, MissingSecondOrderIsReported) {
  oracle::Rng rng(5);
  auto chain = oracle::random_chain(rng, {2, 2, 2});
  try {
    hessian_chain(chain);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingOrder2);
  }
}

TEST(Hessian, MatchesIndexNotationOracle) {
  // F''[d,a1,a2] for q = 2 directly from the index formula:
  //   F2''[d,g1,g2] F1'[g1,a1] F1'[g2,a2] + F2'[d,g] F1''[g,a1,a2]
  oracle::Rng rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    auto chain = oracle::random_chain(rng, {2, 3, 2}, 2);
    const auto& j1 = chain.jacobian(1);
    const auto& j2 = chain.jacobian(2);
    const auto& h1 = *chain.derivative(1, 2);
    const auto& h2 = *chain.derivative(2, 2);
    Tensor<Rational> want({2, 2, 2});
    oracle::each_index(want.shape(), [&](const std::vector<std::size_t>& idx) {
      Rational sum(0);
      for (std::size_t g1 = 0; g1 < 3; ++g1)
        for (std::size_t g2 = 0; g2 < 3; ++g2)
          sum += h2.at(std::vector<std::size_t>{idx[0], g1, g2}) * j1(g1, idx[1]) * j1(g2, idx[2]);
      for (std::size_t g = 0; g < 3; ++g)
        sum += j2(idx[0], g) * h1.at(std::vector<std::size_t>{g, idx[1], idx[2]});
      want.at(idx) = sum;
    });
    EXPECT_EQ(hessian_chain(chain).value, want);
  }
}

TEST(Hessian, ReductionChainEqualsSecondOrderDiagonalProduct) {
  auto chain = worked_chain(2);
  auto hess = hessian_chain_terms(chain);
  EXPECT_EQ(hess.total.value.reshaped({3}), column({66, 105, 70}));
  EXPECT_EQ(hess.total.value.reshaped({3}), reduction_pth_derivative(chain, 2).value);
  // Only the position-1 summand survives.
  EXPECT_FALSE(hess.summands[0].is_zero());
  for (std::size_t j = 1; j < hess.summands.size(); ++j) EXPECT_TRUE(hess.summands[j].is_zero());
}

TEST(Hessian, ScalarChainMatchesFiniteDifferences) {
  // g(f(x)) with f(x) = x^3 - 2x, g(y) = y^2 + 3y at x0 = 0.7.
  const double x0 = 0.7;
  auto f = [](double x) { return x * x * x - 2 * x; };
  auto g = [](double y) { return y * y + 3 * y; };
  const double y0 = f(x0);
  auto d = [](double v) {
    return DerivativeMap<double>{{1, Tensor<double>::matrix(1, 1, {v})},
                                 {2, Tensor<double>({1, 1, 1}, {0.0})}};
  };
  auto f1 = d(3 * x0 * x0 - 2);
  f1[2] = Tensor<double>({1, 1, 1}, {6 * x0});
  auto g1 = d(2 * y0 + 3);
  g1[2] = Tensor<double>({1, 1, 1}, {2.0});
  Chain<double> chain({1, 1, 1}, {f1, g1});
  const double got = hessian_chain(chain).value[0];
  const double want = oracle::second_difference([&](double x) { return g(f(x)); }, x0);
  EXPECT_LT(oracle::relative_error(got, want), 1e-5);
}

TEST(ReductionDerivative, WorkedValuesForEveryOrder) {
  for (int p = 1; p <= 4; ++p) {
    auto result = reduction_pth_derivative(worked_chain(p), p);
    EXPECT_EQ(result.value, column({66, 105, 70})) << "p = " << p;
    // Dense [3,3] x [3,1] twice.
    EXPECT_EQ(result.mults, 18u);
  }
}

TEST(ReductionDerivative, LengthOneChainReturnsFirstColumn) {
  DerivativeMap<Rational> map;
  map.emplace(1, Tensor<Rational>::matrix(2, 1, {1, 1}));
  map.emplace(2, Tensor<Rational>({2, 1, 1}, {Rational(5), Rational(7)}));
  Chain<Rational> chain({1, 2}, {map});
  auto result = reduction_pth_derivative(chain, 2);
  EXPECT_EQ(result.value, column({5, 7}));
  EXPECT_EQ(result.mults, 0u);
}

TEST(ReductionDerivative, RandomDiagonalInstancesAgreeWithHessian) {
  oracle::Rng rng(7);
  const std::vector<std::uint64_t> primes{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::uint64_t> pool = primes;
    std::shuffle(pool.begin(), pool.end(), rng);
    // q = 4, |C| = 3: pool[3*i + j] is the prime of subset j at position i+1.
    std::vector<DerivativeMap<Rational>> derivs;
    DerivativeMap<Rational> first;
    first.emplace(1, Tensor<Rational>({3, 1}));
    Tensor<Rational> second({3, 1, 1});
    for (std::size_t j = 0; j < 3; ++j) second[j] = Rational(pool[j]);
    first.emplace(2, second);
    derivs.push_back(first);
    std::vector<Rational> want(3);
    for (std::size_t j = 0; j < 3; ++j) want[j] = Rational(pool[j]);
    for (std::size_t i = 1; i < 4; ++i) {
      std::vector<Rational> diag;
      for (std::size_t j = 0; j < 3; ++j) {
        diag.emplace_back(pool[3 * i + j]);
        want[j] *= diag.back();
      }
      DerivativeMap<Rational> map;
      map.emplace(1, Tensor<Rational>::diagonal(diag));
      map.emplace(2, Tensor<Rational>({3, 3, 3}));
      derivs.push_back(map);
    }
    Chain<Rational> chain({1, 3, 3, 3, 3}, derivs);
    auto fp = reduction_pth_derivative(chain, 2).value;
    EXPECT_EQ(fp, Tensor<Rational>::vector(want));
    EXPECT_EQ(hessian_chain(chain).value.reshaped({3}), fp);
  }
}

TEST(ReductionDerivative, RejectsStructureViolations) {
  auto chain = worked_chain(2);
  std::vector<DerivativeMap<Rational>> derivs;
  for (std::size_t i = 1; i <= chain.length(); ++i) derivs.push_back(chain.derivatives(i));
  auto expect_violation = [](const Chain<Rational>& c) {
    try {
      reduction_pth_derivative(c, 2);
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kStructureViolation);
    }
  };
  auto off_diagonal = derivs;
  off_diagonal[1][1](0, 1) = Rational(1);
  expect_violation(Chain<Rational>(chain.dims(), off_diagonal));
  auto curved = derivs;
  curved[2][2][0] = Rational(1);
  expect_violation(Chain<Rational>(chain.dims(), curved));
  try {
    reduction_pth_derivative(chain, 3);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kStructureViolation);
  }
}

TEST(CostSoundness, CountedScalarsAgreeWithReportedCounts) {
  oracle::Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::size_t> dims(static_cast<std::size_t>(oracle::uniform(rng, 2, 5)));
    for (auto& d : dims) d = static_cast<std::size_t>(oracle::uniform(rng, 1, 4));
    auto chain = convert<oracle::Counted>(oracle::random_chain(rng, dims, 2));

    oracle::reset_tally();
    auto product = chain_product(chain);
    EXPECT_EQ(oracle::tally.mults, product.mults);
    EXPECT_EQ(oracle::tally.adds, product.adds);

    oracle::reset_tally();
    auto sum = path_sum_jacobian(chain.to_dag());
    EXPECT_EQ(oracle::tally.mults, sum.mults);
    EXPECT_EQ(oracle::tally.adds, sum.adds);

    oracle::reset_tally();
    auto hess = hessian_chain(chain);
    EXPECT_EQ(oracle::tally.mults, hess.mults);
    EXPECT_EQ(oracle::tally.adds, hess.adds);
  }
}
