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

#include "chainrule/dag_io.hpp"

#include <sstream>

#include "json_support.hpp"

namespace chainrule {
namespace {

using detail::Json;

template <class T>
DerivativeDag<T> dag_from_json(const Json& root) {
  std::vector<VertexSpec> vertices;
  for (const auto& v : detail::require(root, "vertices")) {
    const auto& dim = detail::require(v, "dim");
    if (!dim.is_number_integer() || dim.get<long long>() <= 0) {
      fail(ErrorCode::kParseError, "vertex dim must be a positive integer");
    }
    vertices.push_back({detail::require(v, "id").get<std::int64_t>(), dim.get<std::size_t>()});
  }
  std::vector<EdgeSpec<T>> edges;
  for (const auto& e : detail::require(root, "edges")) {
    EdgeSpec<T> edge;
    edge.src = detail::require(e, "src").get<std::int64_t>();
    edge.dst = detail::require(e, "dst").get<std::int64_t>();
    for (const auto& [key, tensor] : detail::require(e, "derivs").items()) {
      int order = 0;
      try {
        order = std::stoi(key);
      } catch (const std::exception&) {
        fail(ErrorCode::kParseError, "derivative order keys must be integers, got '" + key + "'");
      }
      edge.derivs.emplace(order, detail::tensor_from_json<T>(tensor));
    }
    edges.push_back(std::move(edge));
  }
  return build_dag(std::move(vertices), std::move(edges));
}

ScalarKind file_kind(const Json& root, std::optional<ScalarKind> force) {
  if (force) return *force;
  if (root.is_object() && root.contains("scalar")) {
    return parse_scalar_kind(root.at("scalar").get<std::string>());
  }
  return ScalarKind::kRational;
}

template <class T>
std::string edge_label(const Edge<T>& edge) {
  const Tensor<T>& j = edge.jacobian();
  if (j.size() != 1) return {};
  return format_scalar(j[0]);
}

std::string quote(const std::string& text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

AnyDag parse_dag_json(std::string_view text, std::optional<ScalarKind> force) {
  try {
    const Json root = detail::parse_json(text);
    if (file_kind(root, force) == ScalarKind::kFloat) return dag_from_json<double>(root);
    return dag_from_json<Rational>(root);
  } catch (const Json::exception& e) {
    fail(ErrorCode::kParseError, e.what());
  }
}

template <class T>
DerivativeDag<T> parse_dag_json_as(std::string_view text) {
  try {
    return dag_from_json<T>(detail::parse_json(text));
  } catch (const Json::exception& e) {
    fail(ErrorCode::kParseError, e.what());
  }
}

template <class T>
std::string dag_to_json(const DerivativeDag<T>& dag, int indent) {
  Json vertices = Json::array();
  for (const auto& v : dag.vertices()) vertices.push_back({{"id", v.id}, {"dim", v.dim}});
  Json edges = Json::array();
  for (const auto& e : dag.edges()) {
    Json derivs = Json::object();
    for (const auto& [order, tensor] : e.derivs) {
      derivs[std::to_string(order)] = detail::tensor_to_json(tensor);
    }
    edges.push_back({{"src", e.src}, {"dst", e.dst}, {"derivs", std::move(derivs)}});
  }
  Json root{{"scalar", std::string(scalar_kind_name(ScalarTraits<T>::kind))},
            {"vertices", std::move(vertices)},
            {"edges", std::move(edges)}};
  return root.dump(indent);
}

template <class T>
std::string to_dot(const DerivativeDag<T>& dag) {
  std::ostringstream out;
  out << "digraph dag {\n  rankdir=BT;\n";
  for (const auto& v : dag.vertices()) {
    out << "  v" << v.id << " [label=\"" << v.id << "\"";
    if (v.dim != 1) out << ", xlabel=\"dim " << v.dim << "\"";
    out << "];\n";
  }
  for (const auto& e : dag.edges()) {
    out << "  v" << e.src << " -> v" << e.dst;
    if (auto label = edge_label(e); !label.empty()) out << " [label=" << quote(label) << "]";
    out << ";\n";
  }
  out << "}\n";
  return out.str();
}

template <class T>
std::string to_dot(const ScalarGraph<T>& graph) {
  std::ostringstream out;
  out << "digraph dag {\n  rankdir=BT;\n";
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    out << "  n" << i << " [label=" << quote(graph.nodes[i].name) << "];\n";
  }
  for (const auto& arc : graph.arcs) {
    out << "  n" << arc.src << " -> n" << arc.dst << " [label=" << quote(format_scalar(arc.value))
        << "];\n";
  }
  out << "}\n";
  return out.str();
}

template DerivativeDag<Rational> parse_dag_json_as<Rational>(std::string_view);
template DerivativeDag<double> parse_dag_json_as<double>(std::string_view);
template std::string dag_to_json(const DerivativeDag<Rational>&, int);
template std::string dag_to_json(const DerivativeDag<double>&, int);
template std::string to_dot(const DerivativeDag<Rational>&);
template std::string to_dot(const DerivativeDag<double>&);
template std::string to_dot(const ScalarGraph<Rational>&);
template std::string to_dot(const ScalarGraph<double>&);

}  // namespace chainrule
