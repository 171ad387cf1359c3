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

#include <benchmark/benchmark.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "chainrule/bracketing.hpp"
#include "chainrule/chain_eval.hpp"
#include "chainrule/monomial.hpp"
#include "chainrule/reduction.hpp"
#include "chainrule/schedule.hpp"

using namespace chainrule;

namespace {

std::vector<std::size_t> random_dims(std::mt19937_64& rng, std::size_t q) {
  std::uniform_int_distribution<std::size_t> d(1, 64);
  std::vector<std::size_t> dims(q + 1);
  for (auto& x : dims) x = d(rng);
  return dims;
}

Chain<Rational> random_chain(std::mt19937_64& rng, const std::vector<std::size_t>& dims) {
  std::uniform_int_distribution<int> v(-5, 5);
  std::vector<Tensor<Rational>> jacobians;
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    std::vector<Rational> values(dims[k + 1] * dims[k]);
    for (auto& x : values) x = Rational(v(rng));
    jacobians.push_back(Tensor<Rational>::matrix(dims[k + 1], dims[k], std::move(values)));
  }
  return Chain<Rational>::from_jacobians(std::move(jacobians));
}

// |C| subsets over n atoms, each of size about n/2.
EnsembleInstance random_ensemble(std::mt19937_64& rng, std::size_t n, std::size_t m) {
  EnsembleInstance instance;
  for (std::size_t a = 0; a < n; ++a) instance.A.push_back("a" + std::to_string(a));
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  for (std::size_t c = 0; c < m; ++c) {
    std::shuffle(pool.begin(), pool.end(), rng);
    std::vector<std::string> subset;
    for (std::size_t k = 0; k < std::max<std::size_t>(1, n / 2); ++k) subset.push_back(instance.A[pool[k]]);
    instance.C.push_back(subset);
  }
  instance.K = n * m;
  return instance;
}

void BM_OptimalBracketing(benchmark::State& state) {
  std::mt19937_64 rng(1);
  auto dims = random_dims(rng, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(optimal_bracketing(dims));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_OptimalBracketing)->RangeMultiplier(2)->Range(4, 256)->Complexity(benchmark::oNCubed);

void BM_ChainProduct(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::vector<std::size_t> dims(static_cast<std::size_t>(state.range(0)) + 1, 8);
  auto chain = random_chain(rng, dims);
  for (auto _ : state) benchmark::DoNotOptimize(chain_product(chain));
}
BENCHMARK(BM_ChainProduct)->DenseRange(2, 10, 4);

void BM_PathSumVersusBracketed(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const std::vector<std::size_t> dims{40, 2, 40, 2, 40};
  auto chain = random_chain(rng, dims);
  if (state.range(0) == 0) {
    auto dag = chain.to_dag();
    for (auto _ : state) benchmark::DoNotOptimize(path_sum_jacobian(dag));
  } else {
    auto tree = optimal_bracketing(dims).tree;
    for (auto _ : state) benchmark::DoNotOptimize(apply_bracketing(chain, tree));
  }
}
BENCHMARK(BM_PathSumVersusBracketed)->Arg(0)->Arg(1);

void BM_MonomialMinimum(benchmark::State& state) {
  std::mt19937_64 rng(4);
  auto artifact = reduce_to_crd(random_ensemble(rng, static_cast<std::size_t>(state.range(0)), 4), 1);
  auto targets = reduced_targets(artifact);
  for (auto _ : state) benchmark::DoNotOptimize(monomial_minimum(targets));
}
BENCHMARK(BM_MonomialMinimum)->DenseRange(4, 8, 2)->Unit(benchmark::kMillisecond);

void BM_GreedySchedule(benchmark::State& state) {
  std::mt19937_64 rng(5);
  auto artifact = reduce_to_crd(random_ensemble(rng, static_cast<std::size_t>(state.range(0)), 16), 1);
  auto targets = reduced_targets(artifact);
  for (auto _ : state) benchmark::DoNotOptimize(greedy_schedule(targets));
}
BENCHMARK(BM_GreedySchedule)->RangeMultiplier(2)->Range(8, 64);

void BM_VerifySchedule(benchmark::State& state) {
  std::mt19937_64 rng(6);
  auto artifact = reduce_to_crd(random_ensemble(rng, static_cast<std::size_t>(state.range(0)), 8), 1);
  auto schedule = canonical_full_schedule(artifact);
  auto dag = artifact.chain.to_dag();
  for (auto _ : state) benchmark::DoNotOptimize(verify_schedule(schedule, dag, 1));
  state.SetComplexityN(static_cast<std::int64_t>(schedule.cost()));
}
BENCHMARK(BM_VerifySchedule)->DenseRange(6, 30, 6)->Complexity(benchmark::oN);

}  // namespace

BENCHMARK_MAIN();
