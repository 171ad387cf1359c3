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

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "chainrule/error.hpp"
#include "chainrule/tensor.hpp"

namespace chainrule {

// Derivatives attached to one edge, keyed by order (1 = Jacobian).
template <class T>
using DerivativeMap = std::map<int, Tensor<T>>;

// Raw input to build_dag. Ids are arbitrary but unique.
struct VertexSpec {
  std::int64_t id = 0;
  std::size_t dim = 1;
};

template <class T>
struct EdgeSpec {
  std::int64_t src = 0;
  std::int64_t dst = 0;
  DerivativeMap<T> derivs;
};

struct Vertex {
  std::size_t id = 0;
  std::size_t dim = 1;
  std::int64_t original_id = 0;
};

template <class T>
struct Edge {
  std::size_t src = 0;
  std::size_t dst = 0;
  DerivativeMap<T> derivs;

  const Tensor<T>* derivative(int order) const {
    auto it = derivs.find(order);
    return it == derivs.end() ? nullptr : &it->second;
  }
  const Tensor<T>& jacobian() const { return derivs.at(1); }
};

// Expected shape of an order-r elemental derivative on an edge i -> j:
// [dim(j), dim(i), ..., dim(i)] with r trailing input indices.
inline Shape derivative_shape(std::size_t dst_dim, std::size_t src_dim, int order) {
  Shape shape{dst_dim};
  for (int r = 0; r < order; ++r) shape.push_back(src_dim);
  return shape;
}

// Validated elemental-function dag with vertices relabeled 0..q in
// topological order. Vertex 0 is the unique source, q the unique sink.
template <class T>
class DerivativeDag {
 public:
  const std::vector<Vertex>& vertices() const { return vertices_; }
  const std::vector<Edge<T>>& edges() const { return edges_; }
  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t source() const { return 0; }
  std::size_t sink() const { return vertices_.size() - 1; }
  std::size_t dim(std::size_t v) const { return vertices_.at(v).dim; }
  int order_max() const { return order_max_; }

  // Edge indices, sorted by the opposite endpoint.
  const std::vector<std::size_t>& out_edges(std::size_t v) const { return out_.at(v); }
  const std::vector<std::size_t>& in_edges(std::size_t v) const { return in_.at(v); }

  const Edge<T>* find_edge(std::size_t src, std::size_t dst) const {
    for (std::size_t e : out_.at(src)) {
      if (edges_[e].dst == dst) return &edges_[e];
    }
    return nullptr;
  }

  bool is_chain() const {
    if (edges_.size() + 1 != vertices_.size()) return false;
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      if (edges_[e].src != e || edges_[e].dst != e + 1) return false;
    }
    return true;
  }

 private:
  template <class U>
  friend DerivativeDag<U> build_dag(std::vector<VertexSpec>, std::vector<EdgeSpec<U>>);

  std::vector<Vertex> vertices_;
  std::vector<Edge<T>> edges_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> in_;
  int order_max_ = 1;
};

template <class T>
DerivativeDag<T> build_dag(std::vector<VertexSpec> vertices,
                           std::vector<EdgeSpec<T>> edges) {
  if (vertices.empty()) fail(ErrorCode::kInvalidInput, "dag has no vertices");

  std::unordered_map<std::int64_t, std::size_t> slot;  // original id -> input slot
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (vertices[i].dim == 0) {
      fail(ErrorCode::kInvalidInput,
           "vertex " + std::to_string(vertices[i].id) + " has dimension 0");
    }
    if (!slot.emplace(vertices[i].id, i).second) {
      fail(ErrorCode::kInvalidInput, "duplicate vertex id " + std::to_string(vertices[i].id));
    }
  }

  const std::size_t n = vertices.size();
  std::vector<std::vector<std::size_t>> succ(n);
  std::vector<std::size_t> indegree(n, 0), outdegree(n, 0);
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& e : edges) {
    auto s = slot.find(e.src), d = slot.find(e.dst);
    if (s == slot.end() || d == slot.end()) {
      fail(ErrorCode::kInvalidInput, "edge (" + std::to_string(e.src) + "," +
                                         std::to_string(e.dst) + ") names an unknown vertex");
    }
    if (e.src == e.dst) {
      fail(ErrorCode::kCycleDetected, "self loop on vertex " + std::to_string(e.src));
    }
    if (!seen.emplace(s->second, d->second).second) {
      fail(ErrorCode::kInvalidInput, "duplicate edge (" + std::to_string(e.src) + "," +
                                         std::to_string(e.dst) + ")");
    }
    succ[s->second].push_back(d->second);
    ++indegree[d->second];
    ++outdegree[s->second];
  }

  // Kahn's algorithm; ties broken by smallest original id.
  using Item = std::pair<std::int64_t, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> ready;
  std::vector<std::size_t> remaining = indegree;
  for (std::size_t i = 0; i < n; ++i) {
    if (remaining[i] == 0) ready.emplace(vertices[i].id, i);
  }
  std::vector<std::size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    auto [id, i] = ready.top();
    ready.pop();
    order.push_back(i);
    for (std::size_t j : succ[i]) {
      if (--remaining[j] == 0) ready.emplace(vertices[j].id, j);
    }
  }
  if (order.size() != n) fail(ErrorCode::kCycleDetected, "edges contain a directed cycle");

  std::size_t sources = 0, sinks = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sources += indegree[i] == 0;
    sinks += outdegree[i] == 0;
  }
  if (n == 1 || sources != 1 || sinks != 1) {
    fail(ErrorCode::kMultipleSourcesOrSinks,
         "dag needs exactly one source and one sink distinct from it, found " +
             std::to_string(sources) + " source(s) and " + std::to_string(sinks) +
             " sink(s)");
  }

  std::vector<std::size_t> relabel(n);
  DerivativeDag<T> dag;
  dag.vertices_.reserve(n);
  for (std::size_t pos = 0; pos < n; ++pos) {
    relabel[order[pos]] = pos;
    dag.vertices_.push_back(Vertex{pos, vertices[order[pos]].dim, vertices[order[pos]].id});
  }

  dag.edges_.reserve(edges.size());
  int order_max = 1;
  for (auto& e : edges) {
    Edge<T> edge{relabel[slot[e.src]], relabel[slot[e.dst]], std::move(e.derivs)};
    if (edge.derivs.find(1) == edge.derivs.end()) {
      fail(ErrorCode::kDimensionMismatch, "edge (" + std::to_string(e.src) + "," +
                                              std::to_string(e.dst) +
                                              ") lacks an order-1 derivative");
    }
    for (const auto& [r, tensor] : edge.derivs) {
      if (r < 1) fail(ErrorCode::kInvalidInput, "derivative orders start at 1");
      const Shape want =
          derivative_shape(dag.vertices_[edge.dst].dim, dag.vertices_[edge.src].dim, r);
      if (tensor.shape() != want) {
        fail(ErrorCode::kDimensionMismatch,
             "edge (" + std::to_string(e.src) + "," + std::to_string(e.dst) + ") order " +
                 std::to_string(r) + " tensor has shape " + shape_string(tensor.shape()) +
                 ", expected " + shape_string(want));
      }
      order_max = std::max(order_max, r);
    }
    dag.edges_.push_back(std::move(edge));
  }
  std::sort(dag.edges_.begin(), dag.edges_.end(), [](const Edge<T>& a, const Edge<T>& b) {
    return std::pair(a.src, a.dst) < std::pair(b.src, b.dst);
  });
  dag.order_max_ = order_max;
  dag.out_.assign(n, {});
  dag.in_.assign(n, {});
  for (std::size_t e = 0; e < dag.edges_.size(); ++e) {
    dag.out_[dag.edges_[e].src].push_back(e);
    dag.in_[dag.edges_[e].dst].push_back(e);
  }
  return dag;
}

// All source-to-sink paths as vertex sequences, in lexicographic order.
template <class T>
std::vector<std::vector<std::size_t>> enumerate_paths(const DerivativeDag<T>& dag) {
  std::vector<std::vector<std::size_t>> paths;
  std::vector<std::size_t> current{dag.source()};
  auto visit = [&](auto&& self, std::size_t v) -> void {
    if (v == dag.sink()) {
      paths.push_back(current);
      return;
    }
    for (std::size_t e : dag.out_edges(v)) {
      const std::size_t next = dag.edges()[e].dst;
      current.push_back(next);
      self(self, next);
      current.pop_back();
    }
  };
  visit(visit, dag.source());
  if (paths.empty()) fail(ErrorCode::kNoPath, "no path from source to sink");
  return paths;
}

// Composite function F_q o ... o F_1 with dims n_0..n_q. Position i (1-based)
// holds the derivatives of F_i.
template <class T>
class Chain {
 public:
  Chain(std::vector<std::size_t> dims, std::vector<DerivativeMap<T>> derivs)
      : dims_(std::move(dims)), derivs_(std::move(derivs)) {
    if (dims_.size() < 2 || derivs_.size() + 1 != dims_.size()) {
      fail(ErrorCode::kEmptyChain, "chain needs q >= 1 positions and q+1 dimensions");
    }
    for (std::size_t d : dims_) {
      if (d == 0) fail(ErrorCode::kInvalidInput, "chain dimensions must be positive");
    }
    for (std::size_t i = 1; i <= length(); ++i) {
      const auto& map = derivs_[i - 1];
      if (map.find(1) == map.end()) {
        fail(ErrorCode::kDimensionMismatch,
             "position " + std::to_string(i) + " lacks an order-1 derivative");
      }
      for (const auto& [r, tensor] : map) {
        const Shape want = derivative_shape(dims_[i], dims_[i - 1], r);
        if (r < 1 || tensor.shape() != want) {
          fail(ErrorCode::kDimensionMismatch,
               "position " + std::to_string(i) + " order " + std::to_string(r) +
                   " tensor has shape " + shape_string(tensor.shape()) + ", expected " +
                   shape_string(want));
        }
      }
    }
  }

  // Builds a first-order chain; dims are inferred from the Jacobian shapes
  // F'_1, ..., F'_q.
  static Chain from_jacobians(std::vector<Tensor<T>> jacobians) {
    if (jacobians.empty()) fail(ErrorCode::kEmptyChain, "no Jacobians given");
    std::vector<std::size_t> dims{jacobians.front().cols()};
    std::vector<DerivativeMap<T>> derivs;
    for (auto& j : jacobians) {
      if (j.order() != 2) fail(ErrorCode::kDimensionMismatch, "Jacobians must be matrices");
      if (j.cols() != dims.back()) {
        fail(ErrorCode::kDimensionMismatch, "Jacobian " + shape_string(j.shape()) +
                                                " does not follow a factor with " +
                                                std::to_string(dims.back()) + " outputs");
      }
      dims.push_back(j.rows());
      DerivativeMap<T> map;
      map.emplace(1, std::move(j));
      derivs.push_back(std::move(map));
    }
    return Chain(std::move(dims), std::move(derivs));
  }

  static Chain from_dag(const DerivativeDag<T>& dag) {
    if (!dag.is_chain()) {
      fail(ErrorCode::kStructureViolation, "dag is not a chain (edges must be (i-1,i))");
    }
    std::vector<std::size_t> dims;
    for (const auto& v : dag.vertices()) dims.push_back(v.dim);
    std::vector<DerivativeMap<T>> derivs;
    for (const auto& e : dag.edges()) derivs.push_back(e.derivs);
    return Chain(std::move(dims), std::move(derivs));
  }

  DerivativeDag<T> to_dag() const {
    std::vector<VertexSpec> vertices;
    for (std::size_t i = 0; i < dims_.size(); ++i) {
      vertices.push_back({static_cast<std::int64_t>(i), dims_[i]});
    }
    std::vector<EdgeSpec<T>> edges;
    for (std::size_t i = 1; i <= length(); ++i) {
      edges.push_back({static_cast<std::int64_t>(i - 1), static_cast<std::int64_t>(i),
                       derivs_[i - 1]});
    }
    return build_dag(std::move(vertices), std::move(edges));
  }

  std::size_t length() const { return derivs_.size(); }
  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t input_dim() const { return dims_.front(); }
  std::size_t output_dim() const { return dims_.back(); }

  const Tensor<T>& jacobian(std::size_t position) const {
    return derivs_.at(position - 1).at(1);
  }
  const Tensor<T>* derivative(std::size_t position, int order) const {
    const auto& map = derivs_.at(position - 1);
    auto it = map.find(order);
    return it == map.end() ? nullptr : &it->second;
  }
  const DerivativeMap<T>& derivatives(std::size_t position) const {
    return derivs_.at(position - 1);
  }

 private:
  std::vector<std::size_t> dims_;
  std::vector<DerivativeMap<T>> derivs_;
};

// Scalar-level view of a chain: one node per component z^i_j and one arc per
// nonzero Jacobian entry. Unlike DerivativeDag it may have several sinks.
template <class T>
struct ScalarGraph {
  struct Node {
    std::size_t layer = 0;
    std::size_t component = 0;
    std::string name;
  };
  struct Arc {
    std::size_t src = 0;
    std::size_t dst = 0;
    T value{};
  };
  std::vector<Node> nodes;
  std::vector<Arc> arcs;

  std::optional<std::size_t> node_index(std::size_t layer, std::size_t component) const {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i].layer == layer && nodes[i].component == component) return i;
    }
    return std::nullopt;
  }
};

// With first_order = r > 1 the arcs leaving a scalar input carry F_1^[r]
// instead of F'_1 (the entries that multiply into F^[r] of a diagonal chain).
template <class T>
ScalarGraph<T> expand_chain(const Chain<T>& chain, int first_order = 1) {
  ScalarGraph<T> graph;
  std::vector<std::size_t> first(chain.dims().size());
  for (std::size_t layer = 0; layer < chain.dims().size(); ++layer) {
    first[layer] = graph.nodes.size();
    const std::size_t width = chain.dims()[layer];
    for (std::size_t c = 0; c < width; ++c) {
      std::string name;
      if (layer == 0) {
        name = width == 1 ? "x" : "x_" + std::to_string(c + 1);
      } else {
        name = "z" + std::to_string(layer) + "_" + std::to_string(c + 1);
      }
      graph.nodes.push_back({layer, c, std::move(name)});
    }
  }
  if (first_order > 1 && chain.input_dim() != 1) {
    fail(ErrorCode::kStructureViolation, "higher-order arcs need a scalar input");
  }
  for (std::size_t i = 1; i <= chain.length(); ++i) {
    Tensor<T> j = chain.jacobian(i);
    if (i == 1 && first_order > 1) {
      const Tensor<T>* higher = chain.derivative(1, first_order);
      if (higher == nullptr) {
        fail(ErrorCode::kStructureViolation,
             "position 1 has no order-" + std::to_string(first_order) + " derivative");
      }
      j = higher->reshaped({chain.dims()[1], 1});
    }
    for (std::size_t col = 0; col < j.cols(); ++col) {
      for (std::size_t row = 0; row < j.rows(); ++row) {
        if (j(row, col) != T(0)) {
          graph.arcs.push_back({first[i - 1] + col, first[i] + row, j(row, col)});
        }
      }
    }
  }
  return graph;
}

// The sub-dag of everything feeding output component `component` of the
// last layer, as a single-source single-sink dag with 1x1 Jacobians.
template <class T>
DerivativeDag<T> output_cone(const ScalarGraph<T>& graph, std::size_t component) {
  std::size_t last_layer = 0;
  for (const auto& node : graph.nodes) last_layer = std::max(last_layer, node.layer);
  auto sink = graph.node_index(last_layer, component);
  if (!sink) fail(ErrorCode::kInvalidInput, "no output component " + std::to_string(component));
  std::vector<bool> keep(graph.nodes.size(), false);
  keep[*sink] = true;
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& arc : graph.arcs) {
      if (keep[arc.dst] && !keep[arc.src]) keep[arc.src] = changed = true;
    }
  }
  std::vector<VertexSpec> vertices;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    if (keep[i]) vertices.push_back({static_cast<std::int64_t>(i), 1});
  }
  std::vector<EdgeSpec<T>> edges;
  for (const auto& arc : graph.arcs) {
    if (keep[arc.src] && keep[arc.dst]) {
      DerivativeMap<T> map;
      map.emplace(1, Tensor<T>::matrix(1, 1, {arc.value}));
      edges.push_back({static_cast<std::int64_t>(arc.src), static_cast<std::int64_t>(arc.dst),
                       std::move(map)});
    }
  }
  return build_dag(std::move(vertices), std::move(edges));
}

}  // namespace chainrule
