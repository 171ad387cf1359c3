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
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "chainrule/dag.hpp"
#include "chainrule/ensemble.hpp"
#include "chainrule/monomial.hpp"
#include "chainrule/scalar.hpp"
#include "chainrule/schedule.hpp"

namespace chainrule {

// Chain built from an Ensemble Computation instance. Every label gets a
// distinct prime, short subsets are padded with fresh primes up to a common
// size q, and the chain is
//   F_1(x)_j = c_j / p! * x^p            (c_j = first prime of subset j)
//   F_i(z)_j = c^j_i * z_j,   i = 2..q   (diagonal, linear)
// so that F^[p] at x = 1 has entries prod_i c^j_i.
struct ReductionArtifact {
  EnsembleInstance instance;
  std::vector<std::uint64_t> atom_primes;      // parallel to instance.A
  std::vector<std::string> padding_labels;     // b1, b2, ...
  std::vector<std::uint64_t> padding_primes;   // parallel to padding_labels
  std::vector<std::vector<std::uint64_t>> padded_subsets;  // ascending, size q each
  std::size_t q = 0;
  int p = 1;
  std::size_t k_prime = 0;                     // K + number of padding primes
  std::vector<Rational> f1_coefficients;       // c_j / p!, power p
  Rational point{1};
  Chain<Rational> chain = Chain<Rational>::from_jacobians({Tensor<Rational>::identity(1)});

  std::vector<std::uint64_t> all_primes() const;           // atoms then padding
  std::map<std::uint64_t, std::string> label_of_prime() const;
  bool is_padding(std::uint64_t prime) const;
};

// Elements allowed in one stored tensor of the generated chain.
inline constexpr std::size_t kMaxArtifactTensor = std::size_t{1} << 22;

ReductionArtifact reduce_to_crd(const EnsembleInstance& instance, int p);

// The reduced monomial instance over dag atoms. Each prime is named by its
// first occurrence in the chain (position order, then component).
MonomialInstance reduced_targets(const ReductionArtifact& artifact);

// Same construction straight from a reduction-structured chain: atoms are
// identified by value. StructureViolation when a product repeats a value.
MonomialInstance monomial_targets_from_chain(const Chain<Rational>& chain, int p);

// Splits each entry into its prime factors over `primes`. Throws
// NonSquarefreeEntry on a repeated factor and UnknownPrimeFactor on anything
// that is not a product of the given primes.
std::vector<std::vector<std::uint64_t>> factorize_and_recover(
    const Tensor<Rational>& fp, const std::vector<std::uint64_t>& primes);

// Maps a verified schedule for the artifact back to a union sequence for the
// original instance, dropping the steps that only bring in padding primes.
// Throws InvalidSchedule if the schedule does not verify or leaves the
// monomial regime.
UnionSequence lift_solution(const Schedule& schedule, const ReductionArtifact& artifact);

// Multiplies each subset left to right through the chain: |C|(q-1) steps.
Schedule canonical_full_schedule(const ReductionArtifact& artifact);

std::string artifact_to_json(const ReductionArtifact& artifact, int indent = 2);
ReductionArtifact artifact_from_json(std::string_view text);

}  // namespace chainrule
