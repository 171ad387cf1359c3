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

#include "chainrule/schedule.hpp"

#include <charconv>
#include <map>
#include <regex>

#include "chainrule/chain_eval.hpp"
#include "json_support.hpp"

namespace chainrule {
namespace {

using detail::Json;

std::size_t parse_index(std::string_view text, std::string_view whole) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    fail(ErrorCode::kParseError, "bad index in '" + std::string(whole) + "'");
  }
  return value;
}

const Rational& operand_value(const Operand& operand, std::size_t step,
                              const std::vector<Rational>& values,
                              std::map<std::string, Rational>& atoms,
                              const DerivativeDag<Rational>& dag) {
  if (const auto* s = std::get_if<StepOperand>(&operand)) {
    if (s->index >= step) {
      fail(ErrorCode::kDanglingRef, "step " + std::to_string(step) + " refers to step " +
                                        std::to_string(s->index));
    }
    return values[s->index];
  }
  const std::string& name = std::get<AtomOperand>(operand).name;
  auto it = atoms.find(name);
  if (it == atoms.end()) {
    AtomRef ref;
    try {
      ref = AtomRef::parse(name);
    } catch (const Error& e) {
      fail(ErrorCode::kAtomResolutionFailure, e.what());
    }
    it = atoms.emplace(name, resolve_atom(ref, dag)).first;
  }
  return it->second;
}

// Atom multiset of every step, for the monomial check.
using AtomBag = std::map<std::string, int>;

}  // namespace

std::string AtomRef::to_string() const {
  std::string out = std::to_string(src) + "-" + std::to_string(dst) + "/" +
                    std::to_string(order) + "[";
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(index[i]);
  }
  return out + "]";
}

AtomRef AtomRef::parse(std::string_view text) {
  static const std::regex pattern(R"(^(\d+)-(\d+)/(\d+)\[([0-9,]*)\]$)");
  std::cmatch m;
  if (!std::regex_match(text.begin(), text.end(), m, pattern)) {
    fail(ErrorCode::kParseError, "malformed atom reference '" + std::string(text) + "'");
  }
  AtomRef ref;
  ref.src = std::stoul(m[1].str());
  ref.dst = std::stoul(m[2].str());
  ref.order = std::stoi(m[3].str());
  const std::string list = m[4].str();
  std::size_t start = 0;
  while (start < list.size()) {
    const std::size_t comma = std::min(list.find(',', start), list.size());
    ref.index.push_back(parse_index(std::string_view(list).substr(start, comma - start), text));
    start = comma + 1;
  }
  return ref;
}

std::string operand_to_string(const Operand& operand) {
  if (const auto* s = std::get_if<StepOperand>(&operand)) {
    return "step:" + std::to_string(s->index);
  }
  return "atom:" + std::get<AtomOperand>(operand).name;
}

Operand parse_operand(std::string_view text) {
  if (text.rfind("atom:", 0) == 0) {
    if (text.size() == 5) fail(ErrorCode::kParseError, "empty atom name");
    return AtomOperand{std::string(text.substr(5))};
  }
  if (text.rfind("step:", 0) == 0) return StepOperand{parse_index(text.substr(5), text)};
  fail(ErrorCode::kParseError, "operand must start with 'atom:' or 'step:', got '" +
                                   std::string(text) + "'");
}

std::string schedule_to_json(const Schedule& schedule, int indent) {
  Json steps = Json::array();
  for (const Step& step : schedule.steps) {
    Json s{{"a", operand_to_string(step.a)}, {"b", operand_to_string(step.b)}};
    if (step.addend) s["addend"] = operand_to_string(*step.addend);
    s["accumulate_into"] = step.accumulate_into
                               ? Json("target:" + std::to_string(*step.accumulate_into))
                               : Json(nullptr);
    steps.push_back(std::move(s));
  }
  Json targets = Json::array();
  for (const auto& target : schedule.targets) {
    Json refs = Json::array();
    for (const auto& ref : target) refs.push_back(operand_to_string(ref));
    targets.push_back(std::move(refs));
  }
  return Json{{"steps", std::move(steps)}, {"targets", std::move(targets)}}.dump(indent);
}

Schedule schedule_from_json(std::string_view text) {
  try {
    const Json root = detail::parse_json(text);
    Schedule schedule;
    for (const auto& s : detail::require(root, "steps")) {
      Step step{parse_operand(detail::require(s, "a").get<std::string>()),
                parse_operand(detail::require(s, "b").get<std::string>()),
                std::nullopt, std::nullopt};
      if (s.contains("addend") && !s.at("addend").is_null()) {
        step.addend = parse_operand(s.at("addend").get<std::string>());
      }
      if (s.contains("accumulate_into") && !s.at("accumulate_into").is_null()) {
        const std::string target = s.at("accumulate_into").get<std::string>();
        if (target.rfind("target:", 0) != 0) {
          fail(ErrorCode::kParseError, "accumulate_into must be 'target:<j>'");
        }
        step.accumulate_into = parse_index(std::string_view(target).substr(7), target);
      }
      schedule.steps.push_back(std::move(step));
    }
    for (const auto& t : detail::require(root, "targets")) {
      std::vector<Operand> refs;
      if (t.is_string()) {
        refs.push_back(parse_operand(t.get<std::string>()));
      } else {
        for (const auto& r : t) refs.push_back(parse_operand(r.get<std::string>()));
      }
      schedule.targets.push_back(std::move(refs));
    }
    return schedule;
  } catch (const Json::exception& e) {
    fail(ErrorCode::kParseError, e.what());
  }
}

MonomialCheck check_monomial_schedule(const Schedule& schedule) {
  std::vector<AtomBag> bags;
  auto bag_of = [&](const Operand& operand, std::size_t step) -> std::optional<AtomBag> {
    if (const auto* s = std::get_if<StepOperand>(&operand)) {
      if (s->index >= step) return std::nullopt;
      return bags[s->index];
    }
    return AtomBag{{std::get<AtomOperand>(operand).name, 1}};
  };
  for (std::size_t i = 0; i < schedule.steps.size(); ++i) {
    const Step& step = schedule.steps[i];
    if (step.addend || step.accumulate_into) {
      return {false, "step " + std::to_string(i) + " adds; monomial schedules only multiply"};
    }
    auto a = bag_of(step.a, i), b = bag_of(step.b, i);
    if (!a || !b) return {false, "step " + std::to_string(i) + " has a dangling reference"};
    for (const auto& [name, count] : *b) {
      if (a->count(name)) {
        return {false, "step " + std::to_string(i) + " multiplies operands sharing atom " + name};
      }
      (*a)[name] += count;
    }
    bags.push_back(std::move(*a));
  }
  for (std::size_t j = 0; j < schedule.targets.size(); ++j) {
    if (schedule.targets[j].size() != 1) {
      return {false, "target " + std::to_string(j) + " is not a single product"};
    }
  }
  return {};
}

Rational resolve_atom(const AtomRef& atom, const DerivativeDag<Rational>& dag) {
  if (atom.src >= dag.num_vertices() || atom.dst >= dag.num_vertices()) {
    fail(ErrorCode::kAtomResolutionFailure, "atom " + atom.to_string() + " names a missing vertex");
  }
  const Edge<Rational>* edge = dag.find_edge(atom.src, atom.dst);
  if (edge == nullptr) {
    fail(ErrorCode::kAtomResolutionFailure, "atom " + atom.to_string() + " names a missing edge");
  }
  const Tensor<Rational>* tensor = edge->derivative(atom.order);
  if (tensor == nullptr) {
    fail(ErrorCode::kAtomResolutionFailure,
         "atom " + atom.to_string() + " names a missing derivative order");
  }
  if (atom.index.size() != tensor->order()) {
    fail(ErrorCode::kAtomResolutionFailure,
         "atom " + atom.to_string() + " has the wrong number of indices");
  }
  for (std::size_t k = 0; k < atom.index.size(); ++k) {
    if (atom.index[k] >= tensor->extent(k)) {
      fail(ErrorCode::kAtomResolutionFailure, "atom " + atom.to_string() + " is out of range");
    }
  }
  return tensor->at(atom.index);
}

Replay replay_schedule(const Schedule& schedule, const DerivativeDag<Rational>& dag) {
  Replay replay;
  std::map<std::string, Rational> atoms;
  const std::size_t num_steps = schedule.steps.size();
  std::vector<std::optional<Rational>> accumulated(schedule.targets.size());
  replay.step_values.reserve(num_steps);
  for (std::size_t i = 0; i < num_steps; ++i) {
    const Step& step = schedule.steps[i];
    Rational value = operand_value(step.a, i, replay.step_values, atoms, dag) *
                     operand_value(step.b, i, replay.step_values, atoms, dag);
    ++replay.mults;
    if (step.addend) value += operand_value(*step.addend, i, replay.step_values, atoms, dag);
    if (step.accumulate_into) {
      const std::size_t t = *step.accumulate_into;
      if (t >= schedule.targets.size()) {
        fail(ErrorCode::kDanglingRef, "step " + std::to_string(i) + " accumulates into target " +
                                          std::to_string(t) + " of " +
                                          std::to_string(schedule.targets.size()));
      }
      accumulated[t] = accumulated[t] ? *accumulated[t] + value : value;
    }
    replay.step_values.push_back(std::move(value));
  }
  for (std::size_t t = 0; t < schedule.targets.size(); ++t) {
    std::optional<Rational> sum = accumulated[t];
    for (std::size_t r = 0; r < schedule.targets[t].size(); ++r) {
      const Rational& v =
          operand_value(schedule.targets[t][r], num_steps, replay.step_values, atoms, dag);
      if (sum) {
        *sum += v;
        // Only sums of refs are standalone; accumulations are fused.
        if (r > 0 || accumulated[t]) ++replay.adds;
      } else {
        sum = v;
      }
    }
    replay.outputs.push_back(sum ? *sum : Rational(0));
  }
  return replay;
}

ScheduleVerdict verify_schedule(const Schedule& schedule, const DerivativeDag<Rational>& dag,
                                int p) {
  if (p < 1) fail(ErrorCode::kInvalidInput, "derivative order must be >= 1");
  Replay replay = replay_schedule(schedule, dag);
  ScheduleVerdict verdict;
  verdict.cost = replay.mults;
  verdict.adds = replay.adds;
  if (!replay.outputs.empty()) verdict.value = Tensor<Rational>::vector(replay.outputs);

  Tensor<Rational> expected =
      p == 1 ? path_sum_jacobian(dag).value
             : reduction_pth_derivative(Chain<Rational>::from_dag(dag), p).value;
  if (replay.outputs.size() != expected.size()) {
    verdict.reason = "schedule has " + std::to_string(replay.outputs.size()) +
                     " outputs, derivative has " + std::to_string(expected.size()) + " entries";
    return verdict;
  }
  for (std::size_t k = 0; k < expected.size(); ++k) {
    if (replay.outputs[k] != expected[k]) {
      verdict.reason = "output " + std::to_string(k) + " is " + format_scalar(replay.outputs[k]) +
                       ", expected " + format_scalar(expected[k]);
      return verdict;
    }
  }
  verdict.ok = true;
  return verdict;
}

}  // namespace chainrule
