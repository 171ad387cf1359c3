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

#include "chainrule/reduction.hpp"

#include <algorithm>
#include <set>

#include "chainrule/chain_eval.hpp"
#include "chainrule/dag_io.hpp"
#include "chainrule/error.hpp"
#include "chainrule/primes.hpp"
#include "json_support.hpp"

namespace chainrule {

using detail::Json;

namespace {

BigInt factorial(int n) {
  BigInt f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

std::string padding_label(const EnsembleInstance& instance, std::size_t k) {
  std::string label = "b" + std::to_string(k);
  while (std::find(instance.A.begin(), instance.A.end(), label) != instance.A.end()) label += "'";
  return label;
}

// Prime factors of a positive integer over `primes`, or an error code.
struct Factoring {
  std::vector<std::uint64_t> factors;
  std::optional<ErrorCode> error;
  std::string reason;
};

Factoring factor(const Rational& value, const std::vector<std::uint64_t>& primes) {
  Factoring out;
  if (!is_integer(value) || value <= 0) {
    out.error = ErrorCode::kUnknownPrimeFactor;
    out.reason = format_scalar(value) + " is not a positive integer";
    return out;
  }
  BigInt rest = boost::multiprecision::numerator(value);
  for (std::uint64_t prime : primes) {
    if (rest % prime != 0) continue;
    rest /= prime;
    if (rest % prime == 0) {
      out.error = ErrorCode::kNonSquarefreeEntry;
      out.reason = format_scalar(value) + " is divisible by " + std::to_string(prime) + "^2";
      return out;
    }
    out.factors.push_back(prime);
  }
  if (rest != 1 || out.factors.empty()) {
    out.error = ErrorCode::kUnknownPrimeFactor;
    out.reason = format_scalar(value) + " is not a product of the known primes";
  }
  return out;
}

std::string first_position_atom(std::size_t component, int p) {
  AtomRef ref{0, 1, p, std::vector<std::size_t>(static_cast<std::size_t>(p) + 1, 0)};
  ref.index[0] = component;
  return ref.to_string();
}

std::string diagonal_atom(std::size_t position, std::size_t component) {
  return AtomRef{position - 1, position, 1, {component, component}}.to_string();
}

}  // namespace

std::vector<std::uint64_t> ReductionArtifact::all_primes() const {
  std::vector<std::uint64_t> out = atom_primes;
  out.insert(out.end(), padding_primes.begin(), padding_primes.end());
  return out;
}

std::map<std::uint64_t, std::string> ReductionArtifact::label_of_prime() const {
  std::map<std::uint64_t, std::string> out;
  for (std::size_t i = 0; i < atom_primes.size(); ++i) out[atom_primes[i]] = instance.A[i];
  for (std::size_t i = 0; i < padding_primes.size(); ++i) {
    out[padding_primes[i]] = padding_labels[i];
  }
  return out;
}

bool ReductionArtifact::is_padding(std::uint64_t prime) const {
  return std::find(padding_primes.begin(), padding_primes.end(), prime) != padding_primes.end();
}

ReductionArtifact reduce_to_crd(const EnsembleInstance& instance, int p) {
  instance.validate();
  if (p < 1) fail(ErrorCode::kInvalidInput, "derivative order must be >= 1");
  ReductionArtifact art;
  art.instance = instance;
  art.p = p;
  art.atom_primes = first_primes(instance.A.size());
  for (const auto& subset : instance.C) art.q = std::max(art.q, subset.size());

  std::size_t padding_needed = 0;
  for (const auto& subset : instance.C) padding_needed += art.q - subset.size();
  const std::uint64_t largest = art.atom_primes.empty() ? 1 : art.atom_primes.back();
  art.padding_primes = primes_after(largest, padding_needed);
  for (std::size_t k = 0; k < padding_needed; ++k) {
    art.padding_labels.push_back(padding_label(instance, k + 1));
  }

  std::size_t next_padding = 0;
  for (const auto& subset : instance.C) {
    std::vector<std::uint64_t> padded;
    for (const auto& label : subset) padded.push_back(art.atom_primes[instance.index_of(label)]);
    while (padded.size() < art.q) padded.push_back(art.padding_primes[next_padding++]);
    std::sort(padded.begin(), padded.end());
    art.padded_subsets.push_back(std::move(padded));
  }
  art.k_prime = instance.K + padding_needed;

  const std::size_t n = art.padded_subsets.size();
  std::size_t volume = n;
  for (int r = 1; r <= p; ++r) {
    if (volume > kMaxArtifactTensor / n) {
      fail(ErrorCode::kInstanceTooLarge, "order-" + std::to_string(p) +
                                             " zero tensors for " + std::to_string(n) +
                                             " components are too large to store");
    }
    volume *= n;
  }

  std::vector<std::size_t> dims{1};
  std::vector<DerivativeMap<Rational>> derivs;
  const BigInt p_factorial = factorial(p);
  DerivativeMap<Rational> first;
  for (int r = 1; r <= p; ++r) {
    const BigInt scale = factorial(p - r);
    std::vector<Rational> column;
    for (const auto& subset : art.padded_subsets) {
      column.push_back(Rational(BigInt(subset.front()), scale));
    }
    first.emplace(r, Tensor<Rational>(derivative_shape(n, 1, r), std::move(column)));
  }
  for (const auto& subset : art.padded_subsets) {
    art.f1_coefficients.push_back(Rational(BigInt(subset.front()), p_factorial));
  }
  dims.push_back(n);
  derivs.push_back(std::move(first));
  for (std::size_t i = 2; i <= art.q; ++i) {
    std::vector<Rational> diagonal;
    for (const auto& subset : art.padded_subsets) diagonal.push_back(Rational(subset[i - 1]));
    DerivativeMap<Rational> map;
    map.emplace(1, Tensor<Rational>::diagonal(diagonal));
    for (int r = 2; r <= p; ++r) map.emplace(r, Tensor<Rational>(derivative_shape(n, n, r)));
    dims.push_back(n);
    derivs.push_back(std::move(map));
  }
  art.chain = Chain<Rational>(std::move(dims), std::move(derivs));
  return art;
}

MonomialInstance reduced_targets(const ReductionArtifact& artifact) {
  return monomial_targets_from_chain(artifact.chain, artifact.p);
}

MonomialInstance monomial_targets_from_chain(const Chain<Rational>& chain, int p) {
  check_reduction_structure(chain, p);
  MonomialInstance m;
  std::vector<Rational> values;
  auto atom_for = [&](const Rational& value, const std::string& name) {
    auto it = std::find(values.begin(), values.end(), value);
    if (it != values.end()) return static_cast<std::size_t>(it - values.begin());
    values.push_back(value);
    m.atoms.push_back(name);
    return values.size() - 1;
  };
  const Tensor<Rational>& first = *chain.derivative(1, p);
  const std::size_t n = first.extent(0);
  m.targets.assign(n, {});
  for (std::size_t j = 0; j < n; ++j) {
    m.targets[j].push_back(atom_for(first[j], first_position_atom(j, p)));
  }
  for (std::size_t i = 2; i <= chain.length(); ++i) {
    const Tensor<Rational>& d = chain.jacobian(i);
    for (std::size_t j = 0; j < n; ++j) {
      m.targets[j].push_back(atom_for(d(j, j), diagonal_atom(i, j)));
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    std::set<std::size_t> distinct(m.targets[j].begin(), m.targets[j].end());
    if (distinct.size() != m.targets[j].size()) {
      fail(ErrorCode::kStructureViolation,
           "component " + std::to_string(j) + " multiplies a value with itself");
    }
  }
  return m;
}

std::vector<std::vector<std::uint64_t>> factorize_and_recover(
    const Tensor<Rational>& fp, const std::vector<std::uint64_t>& primes) {
  std::vector<std::uint64_t> sorted = primes;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::vector<std::uint64_t>> subsets;
  for (const Rational& entry : fp.data()) {
    Factoring f = factor(entry, sorted);
    if (f.error) fail(*f.error, f.reason);
    subsets.push_back(std::move(f.factors));
  }
  return subsets;
}

UnionSequence lift_solution(const Schedule& schedule, const ReductionArtifact& artifact) {
  const DerivativeDag<Rational> dag = artifact.chain.to_dag();
  ScheduleVerdict verdict;
  try {
    verdict = verify_schedule(schedule, dag, artifact.p);
  } catch (const Error& e) {
    fail(ErrorCode::kInvalidSchedule, e.what());
  }
  if (!verdict.ok) fail(ErrorCode::kInvalidSchedule, verdict.reason);
  for (const Step& step : schedule.steps) {
    if (step.addend || step.accumulate_into) {
      fail(ErrorCode::kInvalidSchedule, "fused additions have no union counterpart");
    }
  }
  const Replay replay = replay_schedule(schedule, dag);
  std::vector<std::uint64_t> primes = artifact.all_primes();
  std::sort(primes.begin(), primes.end());
  const auto labels = artifact.label_of_prime();

  // Stripped label set of every operand; steps alias an earlier op or a label.
  struct Piece {
    std::set<std::string> labels;
    std::optional<std::size_t> op;  // op building `labels`, if more than one label
  };
  auto piece_of_value = [&](const Rational& value) {
    Factoring f = factor(value, primes);
    if (f.error) fail(ErrorCode::kInvalidSchedule, f.reason);
    Piece piece;
    for (std::uint64_t prime : f.factors) {
      if (!artifact.is_padding(prime)) piece.labels.insert(labels.at(prime));
    }
    return piece;
  };

  UnionSequence out;
  std::vector<Piece> steps;
  std::map<std::set<std::string>, std::size_t> op_of_set;
  auto operand_piece = [&](const Operand& operand) -> Piece {
    if (const auto* step = std::get_if<StepOperand>(&operand)) return steps.at(step->index);
    return piece_of_value(resolve_atom(AtomRef::parse(std::get<AtomOperand>(operand).name), dag));
  };
  auto to_union_operand = [&](const Piece& piece) -> UnionOperand {
    if (piece.labels.size() == 1) return LabelOperand{*piece.labels.begin()};
    return OpOperand{*piece.op};
  };

  for (std::size_t i = 0; i < schedule.steps.size(); ++i) {
    const Piece a = operand_piece(schedule.steps[i].a);
    const Piece b = operand_piece(schedule.steps[i].b);
    // Squarefree product values already guarantee disjoint prime sets.
    piece_of_value(replay.step_values[i]);
    Piece result;
    result.labels = a.labels;
    result.labels.insert(b.labels.begin(), b.labels.end());
    if (a.labels.empty() || b.labels.empty()) {
      result.op = a.labels.empty() ? b.op : a.op;
    } else if (auto it = op_of_set.find(result.labels); it != op_of_set.end()) {
      result.op = it->second;
    } else {
      out.ops.push_back({to_union_operand(a), to_union_operand(b)});
      result.op = out.ops.size() - 1;
      op_of_set[result.labels] = *result.op;
    }
    steps.push_back(std::move(result));
  }
  const EcVerdict check = ec_verify(out, artifact.instance);
  if (!check.ok) fail(ErrorCode::kInvalidSchedule, "lifted sequence fails: " + check.reason);
  return out;
}

Schedule canonical_full_schedule(const ReductionArtifact& artifact) {
  Schedule schedule;
  const std::size_t n = artifact.padded_subsets.size();
  for (std::size_t j = 0; j < n; ++j) {
    Operand acc = AtomOperand{first_position_atom(j, artifact.p)};
    for (std::size_t i = 2; i <= artifact.q; ++i) {
      schedule.steps.push_back(Step{acc, AtomOperand{diagonal_atom(i, j)}, {}, {}});
      acc = StepOperand{schedule.steps.size() - 1};
    }
    schedule.targets.push_back({acc});
  }
  return schedule;
}

std::string artifact_to_json(const ReductionArtifact& artifact, int indent) {
  Json prime_map = Json::object();
  for (std::size_t i = 0; i < artifact.atom_primes.size(); ++i) {
    prime_map[artifact.instance.A[i]] = artifact.atom_primes[i];
  }
  Json padding = Json::object();
  for (std::size_t i = 0; i < artifact.padding_primes.size(); ++i) {
    padding[artifact.padding_labels[i]] = artifact.padding_primes[i];
  }
  Json coefficients = Json::array();
  for (const Rational& c : artifact.f1_coefficients) coefficients.push_back(format_scalar(c));
  Json j;
  j["instance"] = Json::parse(ensemble_to_json(artifact.instance, -1));
  j["prime_map"] = std::move(prime_map);
  j["padding"] = std::move(padding);
  j["padding_order"] = artifact.padding_labels;
  j["padded_subsets"] = artifact.padded_subsets;
  j["q"] = artifact.q;
  j["p"] = artifact.p;
  j["K_prime"] = artifact.k_prime;
  j["f1"] = {{"coefficients", std::move(coefficients)},
             {"power", artifact.p},
             {"point", format_scalar(artifact.point)}};
  j["dag"] = Json::parse(dag_to_json(artifact.chain.to_dag(), -1));
  return j.dump(indent);
}

ReductionArtifact artifact_from_json(std::string_view text) {
  const Json j = detail::parse_json(text);
  ReductionArtifact art;
  try {
    art.instance = ensemble_from_json(detail::require(j, "instance").dump());
    const Json& prime_map = detail::require(j, "prime_map");
    for (const auto& label : art.instance.A) {
      if (!prime_map.contains(label)) {
        fail(ErrorCode::kParseError, "prime_map lacks label '" + label + "'");
      }
      art.atom_primes.push_back(prime_map.at(label).get<std::uint64_t>());
    }
    const Json& padding = detail::require(j, "padding");
    art.padding_labels = detail::require(j, "padding_order").get<std::vector<std::string>>();
    for (const auto& label : art.padding_labels) {
      art.padding_primes.push_back(detail::require(padding, label.c_str()).get<std::uint64_t>());
    }
    art.padded_subsets =
        detail::require(j, "padded_subsets").get<std::vector<std::vector<std::uint64_t>>>();
    art.q = detail::require(j, "q").get<std::size_t>();
    art.p = detail::require(j, "p").get<int>();
    art.k_prime = detail::require(j, "K_prime").get<std::size_t>();
    const Json& f1 = detail::require(j, "f1");
    for (const Json& c : detail::require(f1, "coefficients")) {
      art.f1_coefficients.push_back(detail::scalar_from_json<Rational>(c));
    }
    art.point = detail::scalar_from_json<Rational>(detail::require(f1, "point"));
  } catch (const Json::exception& e) {
    fail(ErrorCode::kParseError, e.what());
  }
  art.chain = Chain<Rational>::from_dag(parse_dag_json_as<Rational>(detail::require(j, "dag").dump()));
  check_reduction_structure(art.chain, art.p);
  std::set<std::uint64_t> distinct;
  for (std::uint64_t prime : art.all_primes()) {
    if (!is_prime(prime) || !distinct.insert(prime).second) {
      fail(ErrorCode::kInvalidInput, "prime map is not a set of distinct primes");
    }
  }
  return art;
}

}  // namespace chainrule
