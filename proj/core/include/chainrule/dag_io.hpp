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

#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "chainrule/dag.hpp"
#include "chainrule/scalar.hpp"

namespace chainrule {

// Dag files:
//   {"scalar": "rational" | "float",
//    "vertices": [{"id": 0, "dim": 1}, ...],
//    "edges": [{"src": 0, "dst": 1,
//               "derivs": {"1": {"shape": [..], "data": [..]}}}, ...]}
// Rational entries are written as "num/den" strings; numbers and decimal
// strings are accepted on input.
using AnyDag = std::variant<DerivativeDag<Rational>, DerivativeDag<double>>;

// `force` overrides the file's "scalar" field (default when absent: rational).
AnyDag parse_dag_json(std::string_view text, std::optional<ScalarKind> force = std::nullopt);

template <class T>
DerivativeDag<T> parse_dag_json_as(std::string_view text);

template <class T>
std::string dag_to_json(const DerivativeDag<T>& dag, int indent = 2);

// Graphviz export. Edges carry their value when the Jacobian is 1x1.
template <class T>
std::string to_dot(const DerivativeDag<T>& dag);

template <class T>
std::string to_dot(const ScalarGraph<T>& graph);

}  // namespace chainrule
