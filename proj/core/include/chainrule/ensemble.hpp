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
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "chainrule/monomial.hpp"

namespace chainrule {

// Ensemble Computation: can every subset in C be built from singletons of A
// with at most K disjoint unions?
struct EnsembleInstance {
  std::vector<std::string> A;
  std::vector<std::vector<std::string>> C;
  std::size_t K = 0;

  void validate() const;
  std::size_t index_of(std::string_view label) const;
};

struct LabelOperand {
  std::string label;
  friend bool operator==(const LabelOperand&, const LabelOperand&) = default;
};
struct OpOperand {
  std::size_t index = 0;
  friend bool operator==(const OpOperand&, const OpOperand&) = default;
};
// Text form "atom:<label>" or "op:<k>".
using UnionOperand = std::variant<LabelOperand, OpOperand>;

std::string union_operand_to_string(const UnionOperand& operand);
UnionOperand parse_union_operand(std::string_view text);

struct UnionOp {
  UnionOperand s;
  UnionOperand t;
  friend bool operator==(const UnionOp&, const UnionOp&) = default;
};

struct UnionSequence {
  std::vector<UnionOp> ops;
  std::size_t size() const { return ops.size(); }
  friend bool operator==(const UnionSequence&, const UnionSequence&) = default;
};

struct EcCaps {
  std::size_t max_atoms = 16;
  std::size_t max_subsets = 6;
  std::size_t max_k = 20;
  unsigned threads = 1;
};

struct EcSolution {
  std::size_t min_k = 0;
  UnionSequence witness;  // min_k ops
  bool decision = false;  // min_k <= instance.K
  SearchStats stats;
};

// Exact minimum via the monomial search (union <-> multiplication of
// distinct atoms). Throws InstanceTooLarge beyond the caps.
EcSolution ec_solve_exact(const EnsembleInstance& instance, const EcCaps& caps = {});

struct EcVerdict {
  bool ok = false;
  std::string reason;
};

// Certificate check: backward refs, disjoint operands, at most K ops, and
// every C_v equal to a singleton or to some op result.
EcVerdict ec_verify(const UnionSequence& sequence, const EnsembleInstance& instance);

// Atoms named by label, targets = C.
MonomialInstance to_monomial(const EnsembleInstance& instance);

// Steps of a schedule over label-named atoms become unions.
UnionSequence unions_from_schedule(const Schedule& schedule);

// {"A":["a1",...],"C":[["a1","a2"],...],"K":4}
EnsembleInstance ensemble_from_json(std::string_view text);
std::string ensemble_to_json(const EnsembleInstance& instance, int indent = 2);

// {"ops":[{"s":"atom:a1","t":"op:0"}, ...]}
UnionSequence union_sequence_from_json(std::string_view text);
std::string union_sequence_to_json(const UnionSequence& sequence, int indent = 2);

// "{a1} u {a2}" style, one line per op.
std::string describe(const UnionSequence& sequence);

}  // namespace chainrule
