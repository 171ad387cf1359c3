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
#include "chainrule/reduction.hpp"
#include "chainrule/tangent_adjoint.hpp"
#include "oracles.hpp"

using namespace chainrule;

namespace {

std::string read_file(const std::string& name) {
  std::ifstream in(std::string(CHAINRULE_TEST_DATA) + "/" + name);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no exception";
  return ErrorCode::kInvalidInput;
}

std::vector<Rational> random_vector(oracle::Rng& rng, std::size_t n) {
  std::vector<Rational> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back(oracle::random_rational(rng));
  return v;
}

std::vector<Rational> values(const Tensor<Rational>& t) { return t.values(); }

ReductionArtifact worked_artifact(int p) {
  return reduce_to_crd(ensemble_from_json(read_file("worked_ec.json")), p);
}

}  // namespace

TEST(Tangent, IdentityFirstOrder) {
  auto seeds = SeedBundle<Rational>::tangent({{Rational(3), Rational(4)}});
  auto y = tangent_eval(Tensor<Rational>::identity(2), seeds);
  EXPECT_EQ(values(y.value), (std::vector<Rational>{3, 4}));
}

TEST(Tangent, ReductionArtifactWithUnitSeeds) {
  for (int p = 1; p <= 3; ++p) {
    auto artifact = worked_artifact(p);
    std::vector<std::vector<Rational>> ones(static_cast<std::size_t>(p), {Rational(1)});
    auto seeds = SeedBundle<Rational>::tangent(ones);
    auto fast = reduction_tangent_eval(artifact.chain, p, seeds);
    EXPECT_EQ(values(fast.value), (std::vector<Rational>{66, 105, 70}));
    EXPECT_EQ(fast.adds, 0u);
    auto fp = as_pth_tensor(reduction_pth_derivative(artifact.chain, p).value,
                            static_cast<std::size_t>(p));
    EXPECT_EQ(values(tangent_eval(fp, seeds).value), (std::vector<Rational>{66, 105, 70}));
  }
}

TEST(Tangent, RandomSecondOrderMatchesNaiveLoops) {
  oracle::Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    auto f = oracle::random_tensor(rng, {2, 2, 2});
    std::vector<std::vector<Rational>> x{random_vector(rng, 2), random_vector(rng, 2)};
    auto y = tangent_eval(f, SeedBundle<Rational>::tangent(x));
    EXPECT_EQ(values(y.value), oracle::naive_tangent(f, x));
  }
  for (int trial = 0; trial < 10; ++trial) {
    auto f = oracle::random_tensor(rng, {3, 2, 2, 2});
    std::vector<std::vector<Rational>> x{random_vector(rng, 2), random_vector(rng, 2),
                                         random_vector(rng, 2)};
    EXPECT_EQ(values(tangent_eval(f, SeedBundle<Rational>::tangent(x)).value),
              oracle::naive_tangent(f, x));
  }
}

TEST(Tangent, ShapeErrors) {
  auto f = Tensor<Rational>({2, 2, 2});
  EXPECT_EQ(code_of([&] {
              tangent_eval(f, SeedBundle<Rational>::tangent({{Rational(1), Rational(1)}}));
            }),
            ErrorCode::kShapeMismatch);
  EXPECT_EQ(code_of([&] {
              tangent_eval(f, SeedBundle<Rational>::tangent({{Rational(1)}, {Rational(1)}}));
            }),
            ErrorCode::kShapeMismatch);
  EXPECT_EQ(code_of([&] {
              tangent_eval(Tensor<Rational>({2, 2, 3}),
                           SeedBundle<Rational>::tangent({{Rational(1), Rational(1)},
                                                          {Rational(1), Rational(1)}}));
            }),
            ErrorCode::kShapeMismatch);
}

TEST(Adjoint, GradientIsTheJacobianRow) {
  auto row = Tensor<Rational>::matrix(1, 3, {4, -2, 7});
  auto g = adjoint_eval(row, SeedBundle<Rational>::adjoint({Rational(1)}, {}, 1));
  EXPECT_EQ(values(g.value), (std::vector<Rational>{4, -2, 7}));
  auto scaled = adjoint_eval(row, SeedBundle<Rational>::adjoint({Rational(3)}, {}, 1));
  EXPECT_EQ(values(scaled.value), (std::vector<Rational>{12, -6, 21}));
}

TEST(Adjoint, ReductionArtifactSumsTheEntries) {
  for (int p = 1; p <= 3; ++p) {
    auto artifact = worked_artifact(p);
    std::vector<std::vector<Rational>> ones(static_cast<std::size_t>(p - 1), {Rational(1)});
    for (std::size_t l = 1; l <= static_cast<std::size_t>(p); ++l) {
      auto seeds = SeedBundle<Rational>::adjoint({1, 1, 1}, ones, l);
      auto fast = reduction_adjoint_eval(artifact.chain, p, seeds);
      EXPECT_EQ(values(fast.value), (std::vector<Rational>{241}));
      EXPECT_EQ(fast.adds, 2u);
      auto fp = as_pth_tensor(reduction_pth_derivative(artifact.chain, p).value,
                              static_cast<std::size_t>(p));
      auto dense = adjoint_eval(fp, seeds);
      EXPECT_EQ(values(dense.value), (std::vector<Rational>{241}));
      // n = 1: only the output-adjoint contraction adds.
      EXPECT_EQ(dense.adds, 2u);
    }
  }
}

TEST(Adjoint, RandomTensorsMatchNaiveLoops) {
  oracle::Rng rng(22);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t p = static_cast<std::size_t>(oracle::uniform(rng, 1, 3));
    chainrule::Shape shape{static_cast<std::size_t>(oracle::uniform(rng, 1, 3))};
    const std::size_t n = static_cast<std::size_t>(oracle::uniform(rng, 1, 3));
    shape.resize(p + 1, n);
    auto f = oracle::random_tensor(rng, shape);
    auto ybar = random_vector(rng, shape[0]);
    std::vector<std::vector<Rational>> others;
    for (std::size_t i = 1; i < p; ++i) others.push_back(random_vector(rng, n));
    for (std::size_t l = 1; l <= p; ++l) {
      auto got = adjoint_eval(f, SeedBundle<Rational>::adjoint(ybar, others, l));
      EXPECT_EQ(values(got.value), oracle::naive_adjoint(f, ybar, others, l));
    }
  }
}

TEST(Adjoint, FreeIndexAndShapeErrors) {
  auto f = Tensor<Rational>({2, 2, 2});
  std::vector<Rational> two{Rational(1), Rational(1)};
  EXPECT_EQ(code_of([&] { adjoint_eval(f, SeedBundle<Rational>::adjoint(two, {two}, 0)); }),
            ErrorCode::kBadFreeIndex);
  EXPECT_EQ(code_of([&] { adjoint_eval(f, SeedBundle<Rational>::adjoint(two, {two}, 3)); }),
            ErrorCode::kBadFreeIndex);
  EXPECT_EQ(code_of([&] { adjoint_eval(f, SeedBundle<Rational>::adjoint({Rational(1)}, {two}, 1)); }),
            ErrorCode::kShapeMismatch);
  EXPECT_EQ(code_of([&] { adjoint_eval(f, SeedBundle<Rational>::adjoint(two, {}, 1)); }),
            ErrorCode::kShapeMismatch);
}

TEST(Duality, FirstOrderInnerProductsAgree) {
  oracle::Rng rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    const auto m = static_cast<std::size_t>(oracle::uniform(rng, 1, 4));
    const auto n = static_cast<std::size_t>(oracle::uniform(rng, 1, 4));
    auto j = oracle::random_matrix(rng, m, n);
    auto xdot = random_vector(rng, n);
    auto ybar = random_vector(rng, m);
    auto ydot = tangent_eval(j, SeedBundle<Rational>::tangent({xdot})).value;
    auto xbar = adjoint_eval(j, SeedBundle<Rational>::adjoint(ybar, {}, 1)).value;
    Rational left(0), right(0);
    for (std::size_t k = 0; k < m; ++k) left += ybar[k] * ydot[k];
    for (std::size_t i = 0; i < n; ++i) right += xbar[i] * xdot[i];
    EXPECT_EQ(left, right);
  }
}

TEST(Recovery, TangentsRoundTripWithExactCallCount) {
  oracle::Rng rng(24);
  auto f = oracle::random_tensor(rng, {3, 2, 2});
  auto rec = recover_tensor_by_tangents(tangent_provider(f), 3, 2, 2);
  EXPECT_EQ(rec.tensor, f);
  EXPECT_EQ(rec.calls, 4u);
  auto g = oracle::random_tensor(rng, {2, 3, 3, 3});
  auto rec3 = recover_tensor_by_tangents(tangent_provider(g), 2, 3, 3);
  EXPECT_EQ(rec3.tensor, g);
  EXPECT_EQ(rec3.calls, 27u);
}

TEST(Recovery, AdjointsRoundTripWithExactCallCount) {
  oracle::Rng rng(25);
  auto f = oracle::random_tensor(rng, {2, 3, 3});
  for (std::size_t l = 1; l <= 2; ++l) {
    auto rec = recover_tensor_by_adjoints(adjoint_provider(f), 2, 3, 2, l);
    EXPECT_EQ(rec.tensor, f);
    EXPECT_EQ(rec.calls, 6u);
  }
  auto grad = Tensor<Rational>::matrix(1, 4, {1, 2, 3, 4});
  auto rec = recover_tensor_by_adjoints(adjoint_provider(grad), 1, 4, 1);
  EXPECT_EQ(rec.tensor, grad);
  EXPECT_EQ(rec.calls, 1u);
}

TEST(Recovery, ReductionArtifact) {
  for (int p = 1; p <= 3; ++p) {
    auto artifact = worked_artifact(p);
    const auto pp = static_cast<std::size_t>(p);
    auto fp = as_pth_tensor(reduction_pth_derivative(artifact.chain, p).value, pp);
    TangentProvider<Rational> fast = [&](const SeedBundle<Rational>& s) {
      return reduction_tangent_eval(artifact.chain, p, s).value;
    };
    auto by_tangents = recover_tensor_by_tangents(fast, 3, 1, pp);
    EXPECT_EQ(by_tangents.calls, 1u);
    EXPECT_EQ(by_tangents.tensor, fp);
    auto by_adjoints = recover_tensor_by_adjoints(adjoint_provider(fp), 3, 1, pp);
    EXPECT_EQ(by_adjoints.calls, 3u);
    EXPECT_EQ(by_adjoints.tensor, fp);
  }
}

TEST(Recovery, ProviderShapeIsChecked) {
  TangentProvider<Rational> wrong = [](const SeedBundle<Rational>&) {
    return Tensor<Rational>::vector({Rational(1)});
  };
  EXPECT_EQ(code_of([&] { recover_tensor_by_tangents(wrong, 2, 2, 1); }),
            ErrorCode::kShapeMismatch);
  EXPECT_EQ(code_of([&] { recover_tensor_by_adjoints(wrong, 2, 2, 1, 2); }),
            ErrorCode::kBadFreeIndex);
}
