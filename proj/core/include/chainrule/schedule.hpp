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
#include <string_view>
#include <variant>
#include <vector>

#include "chainrule/dag.hpp"
#include "chainrule/scalar.hpp"
#include "chainrule/tensor.hpp"

namespace chainrule {

// Names one scalar entry of one elemental derivative: edge src->dst, derivative
// order, multi-index. Text form "src-dst/order[i,j,...]", e.g. "0-1/1[2,0]".
struct AtomRef {
  std::size_t src = 0;
  std::size_t dst = 0;
  int order = 1;
  std::vector<std::size_t> index;

  std::string to_string() const;
  static AtomRef parse(std::string_view text);
  friend bool operator==(const AtomRef&, const AtomRef&) = default;
};

struct AtomOperand {
  std::string name;
  friend bool operator==(const AtomOperand&, const AtomOperand&) = default;
};
struct StepOperand {
  std::size_t index = 0;
  friend bool operator==(const StepOperand&, const StepOperand&) = default;
};
// Text form "atom:<name>" or "step:<k>".
using Operand = std::variant<AtomOperand, StepOperand>;

std::string operand_to_string(const Operand& operand);
Operand parse_operand(std::string_view text);

// One fma: value = a * b (+ addend). When accumulate_into is set the product
// is also added into that output, which is free under the fma model.
struct Step {
  Operand a;
  Operand b;
  std::optional<Operand> addend;
  std::optional<std::size_t> accumulate_into;
  friend bool operator==(const Step&, const Step&) = default;
};

// Outputs are sums of refs plus everything accumulated into them. Cost is the
// number of steps, i.e. of multiplications.
struct Schedule {
  std::vector<Step> steps;
  std::vector<std::vector<Operand>> targets;

  std::size_t cost() const { return steps.size(); }
  friend bool operator==(const Schedule&, const Schedule&) = default;
};

// {"steps":[{"a":"atom:..","b":"step:0","addend":null,"accumulate_into":"target:1"|null}],
//  "targets":[["step:4"], ...]}
std::string schedule_to_json(const Schedule& schedule, int indent = 2);
Schedule schedule_from_json(std::string_view text);

// Structural check of the monomial regime: no addends, no accumulation, and
// the two operands of every step have disjoint atom multisets.
struct MonomialCheck {
  bool ok = true;
  std::string reason;
};
MonomialCheck check_monomial_schedule(const Schedule& schedule);

struct ScheduleVerdict {
  bool ok = false;
  std::uint64_t cost = 0;
  std::uint64_t adds = 0;
  Tensor<Rational> value;
  std::string reason;
};

// Replays the schedule with exact arithmetic against the derivatives stored in
// `dag`. For p = 1 the outputs must equal the path-sum Jacobian (row-major);
// for p >= 2 the dag must be a reduction-structured chain and the outputs must
// equal F^[p]. Runs in time linear in the schedule length plus the oracle.
ScheduleVerdict verify_schedule(const Schedule& schedule, const DerivativeDag<Rational>& dag,
                                int p);

// Exact replay only: output values of the schedule. Throws DanglingRef or
// AtomResolutionFailure.
struct Replay {
  std::vector<Rational> step_values;
  std::vector<Rational> outputs;
  std::uint64_t mults = 0;
  std::uint64_t adds = 0;
};
Replay replay_schedule(const Schedule& schedule, const DerivativeDag<Rational>& dag);

// Value of an atom in a dag.
Rational resolve_atom(const AtomRef& atom, const DerivativeDag<Rational>& dag);

}  // namespace chainrule
