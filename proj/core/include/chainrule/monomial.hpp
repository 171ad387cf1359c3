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
#include <optional>
#include <string>
#include <vector>

#include "chainrule/schedule.hpp"

namespace chainrule {

// A set of required squarefree products over named atoms. Multiplication of
// two products with disjoint atom sets mirrors a disjoint union, so the
// minimum number of multiplications is exactly an Ensemble Computation
// optimum.
struct MonomialInstance {
  std::vector<std::string> atoms;                 // names used as schedule atoms
  std::vector<std::vector<std::size_t>> targets;  // atom indices, no repeats

  // Atoms are numbered in order of first appearance.
  static MonomialInstance from_labels(const std::vector<std::vector<std::string>>& targets);

  void validate() const;
};

struct SearchConfig {
  std::size_t max_atoms = 24;
  std::size_t max_k = 24;
  unsigned threads = 1;
  // Before searching, merge atoms that occur in exactly the same targets and
  // peel off atoms that occur in a single target. Both steps are exact.
  bool strip_private_atoms = true;
  // Failed-state memo entries kept per worker before the memo is reset.
  std::size_t memo_limit = 1u << 22;
};

struct SearchStats {
  std::uint64_t nodes = 0;
  std::uint64_t memo_hits = 0;
};

struct MinFmaResult {
  bool feasible = false;
  std::optional<std::size_t> minimum;  // set when feasible
  std::optional<Schedule> schedule;    // witness with cost == *minimum
  SearchStats stats;
};

// Decides whether all targets can be formed with at most K multiplications.
// Exact (iterative deepening branch and bound). The witness is the same for
// every thread count.
MinFmaResult monomial_min_fma(const MonomialInstance& instance, std::size_t K,
                              const SearchConfig& config = {});

struct MinimumResult {
  std::size_t minimum = 0;
  Schedule schedule;
  SearchStats stats;
};

// Exact minimum; throws InstanceTooLarge when it exceeds config.max_k.
MinimumResult monomial_minimum(const MonomialInstance& instance, const SearchConfig& config = {});

// Baseline: repeatedly materialize the pair of symbols shared by the most
// targets (ties to the smallest pair), then finish each target left to right.
Schedule greedy_schedule(const MonomialInstance& instance);

// Sum over distinct targets of |T| - 1; always achievable.
std::size_t trivial_upper_bound(const MonomialInstance& instance);

}  // namespace chainrule
