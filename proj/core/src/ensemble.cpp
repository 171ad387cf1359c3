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

#include "chainrule/ensemble.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "chainrule/error.hpp"
#include "json_support.hpp"

namespace chainrule {

using detail::Json;

void EnsembleInstance::validate() const {
  std::set<std::string> labels(A.begin(), A.end());
  if (labels.size() != A.size()) fail(ErrorCode::kInvalidInput, "duplicate labels in A");
  if (C.empty()) fail(ErrorCode::kInvalidInput, "C must hold at least one subset");
  for (std::size_t v = 0; v < C.size(); ++v) {
    if (C[v].empty()) fail(ErrorCode::kInvalidInput, "C[" + std::to_string(v) + "] is empty");
    std::set<std::string> seen;
    for (const auto& label : C[v]) {
      if (!labels.count(label)) {
        fail(ErrorCode::kInvalidInput, "C[" + std::to_string(v) + "] names '" + label +
                                           "', which is not in A");
      }
      if (!seen.insert(label).second) {
        fail(ErrorCode::kInvalidInput, "C[" + std::to_string(v) + "] repeats '" + label + "'");
      }
    }
  }
}

std::size_t EnsembleInstance::index_of(std::string_view label) const {
  auto it = std::find(A.begin(), A.end(), label);
  if (it == A.end()) fail(ErrorCode::kInvalidInput, "unknown label '" + std::string(label) + "'");
  return static_cast<std::size_t>(it - A.begin());
}

std::string union_operand_to_string(const UnionOperand& operand) {
  if (const auto* label = std::get_if<LabelOperand>(&operand)) return "atom:" + label->label;
  return "op:" + std::to_string(std::get<OpOperand>(operand).index);
}

UnionOperand parse_union_operand(std::string_view text) {
  if (text.rfind("atom:", 0) == 0 && text.size() > 5) {
    return LabelOperand{std::string(text.substr(5))};
  }
  if (text.rfind("op:", 0) == 0) {
    std::size_t index = 0;
    const char* first = text.data() + 3;
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, index);
    if (ec == std::errc() && ptr == last && first != last) return OpOperand{index};
  }
  fail(ErrorCode::kParseError, "bad union operand '" + std::string(text) + "'");
}

MonomialInstance to_monomial(const EnsembleInstance& instance) {
  instance.validate();
  MonomialInstance m;
  m.atoms = instance.A;
  for (const auto& subset : instance.C) {
    std::vector<std::size_t> ids;
    for (const auto& label : subset) ids.push_back(instance.index_of(label));
    m.targets.push_back(std::move(ids));
  }
  return m;
}

UnionSequence unions_from_schedule(const Schedule& schedule) {
  auto convert = [](const Operand& o) -> UnionOperand {
    if (const auto* atom = std::get_if<AtomOperand>(&o)) return LabelOperand{atom->name};
    return OpOperand{std::get<StepOperand>(o).index};
  };
  UnionSequence seq;
  for (const Step& step : schedule.steps) seq.ops.push_back({convert(step.a), convert(step.b)});
  return seq;
}

EcSolution ec_solve_exact(const EnsembleInstance& instance, const EcCaps& caps) {
  instance.validate();
  if (instance.A.size() > caps.max_atoms) {
    fail(ErrorCode::kInstanceTooLarge, "|A| = " + std::to_string(instance.A.size()) +
                                           " exceeds " + std::to_string(caps.max_atoms));
  }
  if (instance.C.size() > caps.max_subsets) {
    fail(ErrorCode::kInstanceTooLarge, "|C| = " + std::to_string(instance.C.size()) +
                                           " exceeds " + std::to_string(caps.max_subsets));
  }
  if (instance.K > caps.max_k) {
    fail(ErrorCode::kInstanceTooLarge,
         "K = " + std::to_string(instance.K) + " exceeds " + std::to_string(caps.max_k));
  }
  SearchConfig config;
  config.max_atoms = caps.max_atoms;
  config.max_k = caps.max_k;
  config.threads = caps.threads;
  MinimumResult best = monomial_minimum(to_monomial(instance), config);
  EcSolution solution;
  solution.min_k = best.minimum;
  solution.witness = unions_from_schedule(best.schedule);
  solution.decision = best.minimum <= instance.K;
  solution.stats = best.stats;
  return solution;
}

EcVerdict ec_verify(const UnionSequence& sequence, const EnsembleInstance& instance) {
  try {
    instance.validate();
  } catch (const Error& e) {
    return {false, e.what()};
  }
  std::vector<std::set<std::string>> built;
  for (std::size_t i = 0; i < sequence.ops.size(); ++i) {
    const UnionOp& op = sequence.ops[i];
    std::set<std::string> sides[2];
    const UnionOperand* operands[2] = {&op.s, &op.t};
    for (int k = 0; k < 2; ++k) {
      if (const auto* label = std::get_if<LabelOperand>(operands[k])) {
        if (std::find(instance.A.begin(), instance.A.end(), label->label) == instance.A.end()) {
          return {false, "op " + std::to_string(i) + " uses unknown label '" + label->label + "'"};
        }
        sides[k] = {label->label};
      } else {
        const std::size_t ref = std::get<OpOperand>(*operands[k]).index;
        if (ref >= i) {
          return {false, "op " + std::to_string(i) + " refers forward to op " + std::to_string(ref)};
        }
        sides[k] = built[ref];
      }
    }
    for (const auto& label : sides[0]) {
      if (sides[1].count(label)) {
        return {false, "op " + std::to_string(i) + " has overlapping operands (both hold '" +
                           label + "')"};
      }
    }
    sides[0].insert(sides[1].begin(), sides[1].end());
    built.push_back(std::move(sides[0]));
  }
  if (sequence.ops.size() > instance.K) {
    return {false, std::to_string(sequence.ops.size()) + " ops exceed K = " +
                       std::to_string(instance.K)};
  }
  for (std::size_t v = 0; v < instance.C.size(); ++v) {
    const std::set<std::string> want(instance.C[v].begin(), instance.C[v].end());
    if (want.size() == 1) continue;
    if (std::find(built.begin(), built.end(), want) == built.end()) {
      return {false, "C[" + std::to_string(v) + "] is never built"};
    }
  }
  return {true, ""};
}

EnsembleInstance ensemble_from_json(std::string_view text) {
  const Json j = detail::parse_json(text);
  EnsembleInstance instance;
  try {
    instance.A = detail::require(j, "A").get<std::vector<std::string>>();
    instance.C = detail::require(j, "C").get<std::vector<std::vector<std::string>>>();
    const Json& k = detail::require(j, "K");
    if (!k.is_number_integer() || k.get<long long>() < 0) {
      fail(ErrorCode::kParseError, "K must be a nonnegative integer");
    }
    instance.K = k.get<std::size_t>();
  } catch (const Json::exception& e) {
    fail(ErrorCode::kParseError, e.what());
  }
  instance.validate();
  return instance;
}

std::string ensemble_to_json(const EnsembleInstance& instance, int indent) {
  return Json{{"A", instance.A}, {"C", instance.C}, {"K", instance.K}}.dump(indent);
}

UnionSequence union_sequence_from_json(std::string_view text) {
  const Json j = detail::parse_json(text);
  UnionSequence seq;
  const Json& ops = detail::require(j, "ops");
  if (!ops.is_array()) fail(ErrorCode::kParseError, "'ops' must be an array");
  for (const Json& op : ops) {
    const Json& s = detail::require(op, "s");
    const Json& t = detail::require(op, "t");
    if (!s.is_string() || !t.is_string()) fail(ErrorCode::kParseError, "operands are strings");
    seq.ops.push_back({parse_union_operand(s.get<std::string>()),
                       parse_union_operand(t.get<std::string>())});
  }
  return seq;
}

std::string union_sequence_to_json(const UnionSequence& sequence, int indent) {
  Json ops = Json::array();
  for (const UnionOp& op : sequence.ops) {
    ops.push_back({{"s", union_operand_to_string(op.s)}, {"t", union_operand_to_string(op.t)}});
  }
  return Json{{"ops", std::move(ops)}}.dump(indent);
}

std::string describe(const UnionSequence& sequence) {
  auto side = [](const UnionOperand& o) {
    if (const auto* label = std::get_if<LabelOperand>(&o)) return "{" + label->label + "}";
    return "u" + std::to_string(std::get<OpOperand>(o).index + 1);
  };
  std::string out;
  for (std::size_t i = 0; i < sequence.ops.size(); ++i) {
    out += "u" + std::to_string(i + 1) + " = " + side(sequence.ops[i].s) + " u " +
           side(sequence.ops[i].t) + "\n";
  }
  return out;
}

}  // namespace chainrule
