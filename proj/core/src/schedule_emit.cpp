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

#include "chainrule/schedule_emit.hpp"

#include <optional>

namespace chainrule {
namespace {

// Row-major matrix of refs.
struct RefMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Operand> refs;

  const Operand& at(std::size_t i, std::size_t j) const { return refs[i * cols + j]; }
};

Operand atom(std::size_t src, std::size_t dst, std::size_t row, std::size_t col) {
  return AtomOperand{AtomRef{src, dst, 1, {row, col}}.to_string()};
}

// Emits sum_k products[k].first * products[k].second (+ seed) as a chain of
// fmas and returns the ref holding the result.
Operand emit_sum(Schedule& schedule, const std::vector<std::pair<Operand, Operand>>& products,
                 std::optional<Operand> seed) {
  std::optional<Operand> acc = std::move(seed);
  for (const auto& [a, b] : products) {
    schedule.steps.push_back(Step{a, b, acc, std::nullopt});
    acc = StepOperand{schedule.steps.size() - 1};
  }
  return *acc;
}

RefMatrix multiply(Schedule& schedule, const RefMatrix& left, const RefMatrix& right) {
  RefMatrix out{left.rows, right.cols, {}};
  for (std::size_t i = 0; i < left.rows; ++i) {
    for (std::size_t j = 0; j < right.cols; ++j) {
      std::vector<std::pair<Operand, Operand>> products;
      for (std::size_t k = 0; k < left.cols; ++k) products.emplace_back(left.at(i, k), right.at(k, j));
      out.refs.push_back(emit_sum(schedule, products, std::nullopt));
    }
  }
  return out;
}

}  // namespace

Schedule forward_schedule(const DerivativeDag<Rational>& dag) {
  Schedule schedule;
  const std::size_t n0 = dag.dim(dag.source());
  std::vector<RefMatrix> jac(dag.num_vertices());
  for (std::size_t v = 1; v < dag.num_vertices(); ++v) {
    RefMatrix& out = jac[v];
    out.rows = dag.dim(v);
    out.cols = n0;
    for (std::size_t a = 0; a < out.rows; ++a) {
      for (std::size_t b = 0; b < n0; ++b) {
        std::optional<Operand> seed;
        std::vector<std::pair<Operand, Operand>> products;
        for (std::size_t e : dag.in_edges(v)) {
          const std::size_t u = dag.edges()[e].src;
          if (u == dag.source()) {
            seed = atom(u, v, a, b);
            continue;
          }
          for (std::size_t c = 0; c < dag.dim(u); ++c) {
            products.emplace_back(atom(u, v, a, c), jac[u].at(c, b));
          }
        }
        out.refs.push_back(emit_sum(schedule, products, seed));
      }
    }
  }
  schedule.targets.reserve(jac.back().refs.size());
  for (const auto& ref : jac.back().refs) schedule.targets.push_back({ref});
  return schedule;
}

Schedule bracketing_schedule(const Chain<Rational>& chain, const BracketTree& tree) {
  if (tree.lo() != 1 || tree.hi() != chain.length()) {
    fail(ErrorCode::kShapeMismatch, "bracketing does not cover the chain");
  }
  Schedule schedule;
  auto eval = [&](auto&& self, const BracketTree& node) -> RefMatrix {
    if (node.is_leaf()) {
      const std::size_t i = node.position();
      RefMatrix m{chain.dims()[i], chain.dims()[i - 1], {}};
      for (std::size_t r = 0; r < m.rows; ++r) {
        for (std::size_t c = 0; c < m.cols; ++c) m.refs.push_back(atom(i - 1, i, r, c));
      }
      return m;
    }
    RefMatrix left = self(self, node.left());
    RefMatrix right = self(self, node.right());
    return multiply(schedule, left, right);
  };
  RefMatrix result = eval(eval, tree);
  for (const auto& ref : result.refs) schedule.targets.push_back({ref});
  return schedule;
}

}  // namespace chainrule
