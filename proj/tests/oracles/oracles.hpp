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

// Independent reference implementations used only by the tests. Nothing here
// calls into the library's evaluators or solvers; inputs are built with the
// library's value types so results can be compared directly.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "chainrule/dag.hpp"
#include "chainrule/scalar.hpp"
#include "chainrule/tensor.hpp"

namespace oracle {

using chainrule::Rational;
using Rng = std::mt19937_64;

inline int uniform(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline Rational random_rational(Rng& rng) {
  return Rational(uniform(rng, -9, 9)) / Rational(uniform(rng, 1, 4));
}

inline chainrule::Tensor<Rational> random_tensor(Rng& rng, chainrule::Shape shape) {
  chainrule::Tensor<Rational> t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = random_rational(rng);
  return t;
}

inline chainrule::Tensor<Rational> random_matrix(Rng& rng, std::size_t r, std::size_t c) {
  return random_tensor(rng, {r, c});
}

inline chainrule::Chain<Rational> random_chain(Rng& rng, std::vector<std::size_t> dims,
                                               int max_order = 1) {
  std::vector<chainrule::DerivativeMap<Rational>> derivs;
  for (std::size_t i = 1; i < dims.size(); ++i) {
    chainrule::DerivativeMap<Rational> map;
    for (int r = 1; r <= max_order; ++r) {
      map.emplace(r, random_tensor(rng, chainrule::derivative_shape(dims[i], dims[i - 1], r)));
    }
    derivs.push_back(std::move(map));
  }
  return chainrule::Chain<Rational>(std::move(dims), std::move(derivs));
}

// Raw description of a random single-source single-sink dag. Vertex k of the
// hidden order gets id ids[k]; vertex specs are shuffled so the library has
// to relabel.
struct RawDag {
  std::vector<chainrule::VertexSpec> vertices;
  std::vector<chainrule::EdgeSpec<Rational>> edges;
  std::vector<std::size_t> dims;                      // by hidden order
  std::vector<std::pair<std::size_t, std::size_t>> arcs;  // by hidden order
};

inline RawDag random_raw_dag(Rng& rng, std::size_t n, std::size_t max_dim) {
  RawDag raw;
  std::vector<std::int64_t> ids(n);
  for (std::size_t k = 0; k < n; ++k) ids[k] = static_cast<std::int64_t>(10 * k);
  raw.dims.resize(n);
  for (auto& d : raw.dims) d = static_cast<std::size_t>(uniform(rng, 1, static_cast<int>(max_dim)));

  std::set<std::pair<std::size_t, std::size_t>> arcs;
  for (std::size_t v = 1; v < n; ++v) {
    arcs.emplace(static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(v) - 1)), v);
  }
  for (std::size_t v = 0; v + 1 < n; ++v) {
    arcs.emplace(v, static_cast<std::size_t>(uniform(rng, static_cast<int>(v) + 1,
                                                     static_cast<int>(n) - 1)));
  }
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      if (uniform(rng, 0, 3) == 0) arcs.emplace(u, v);
    }
  }
  raw.arcs.assign(arcs.begin(), arcs.end());
  for (std::size_t k = 0; k < n; ++k) raw.vertices.push_back({ids[k], raw.dims[k]});
  std::shuffle(raw.vertices.begin(), raw.vertices.end(), rng);
  for (auto [u, v] : raw.arcs) {
    chainrule::DerivativeMap<Rational> map;
    map.emplace(1, random_matrix(rng, raw.dims[v], raw.dims[u]));
    raw.edges.push_back({ids[u], ids[v], std::move(map)});
  }
  std::shuffle(raw.edges.begin(), raw.edges.end(), rng);
  return raw;
}

// Number of source-to-sink paths as sum_k (A^k)[0, q].
inline std::uint64_t path_count_by_powers(std::size_t n,
                                          const std::vector<std::pair<std::size_t, std::size_t>>& arcs) {
  std::vector<std::vector<std::uint64_t>> a(n, std::vector<std::uint64_t>(n, 0));
  for (auto [u, v] : arcs) a[u][v] = 1;
  auto power = a;
  std::uint64_t total = 0;
  for (std::size_t k = 1; k < n; ++k) {
    total += power[0][n - 1];
    std::vector<std::vector<std::uint64_t>> next(n, std::vector<std::uint64_t>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t l = 0; l < n; ++l)
        for (std::size_t j = 0; j < n; ++j) next[i][j] += power[i][l] * a[l][j];
    power = std::move(next);
  }
  return total;
}

// Every increasing vertex sequence 0 < ... < q whose consecutive pairs are
// arcs, found by trying all subsets of the inner vertices.
inline std::set<std::vector<std::size_t>> paths_by_subsets(
    std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& arcs) {
  std::set<std::pair<std::size_t, std::size_t>> arc_set(arcs.begin(), arcs.end());
  std::set<std::vector<std::size_t>> out;
  const std::size_t inner = n - 2;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << inner); ++mask) {
    std::vector<std::size_t> seq{0};
    for (std::size_t b = 0; b < inner; ++b) {
      if (mask >> b & 1) seq.push_back(b + 1);
    }
    seq.push_back(n - 1);
    bool ok = true;
    for (std::size_t k = 1; k < seq.size() && ok; ++k) ok = arc_set.count({seq[k - 1], seq[k]}) > 0;
    if (ok) out.insert(seq);
  }
  return out;
}

template <class T>
chainrule::Tensor<T> naive_matmul(const chainrule::Tensor<T>& a, const chainrule::Tensor<T>& b) {
  chainrule::Tensor<T> c({a.rows(), b.cols()});
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      T sum(0);
      for (std::size_t k = 0; k < a.cols(); ++k) sum += a(i, k) * b(k, j);
      c(i, j) = sum;
    }
  return c;
}

// C[i,j] = sum_{k,l} a[i,k] b[k,l] c[l,j] in a single expression.
inline chainrule::Tensor<Rational> naive_triple(const chainrule::Tensor<Rational>& a,
                                                const chainrule::Tensor<Rational>& b,
                                                const chainrule::Tensor<Rational>& c) {
  chainrule::Tensor<Rational> out({a.rows(), c.cols()});
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < c.cols(); ++j) {
      Rational sum(0);
      for (std::size_t k = 0; k < a.cols(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l) sum += a(i, k) * b(k, l) * c(l, j);
      out(i, j) = sum;
    }
  return out;
}

// Calls f(index) for every multi-index of `shape`.
inline void each_index(const chainrule::Shape& shape,
                       const std::function<void(const std::vector<std::size_t>&)>& f) {
  std::vector<std::size_t> idx(shape.size(), 0);
  for (;;) {
    f(idx);
    std::size_t s = shape.size();
    while (s > 0 && ++idx[s - 1] == shape[s - 1]) idx[--s] = 0;
    if (s == 0) return;
  }
}

// y[k] = sum over j of F[k, j1..jp] prod_i x_i[j_i]
inline std::vector<Rational> naive_tangent(const chainrule::Tensor<Rational>& f,
                                           const std::vector<std::vector<Rational>>& x) {
  std::vector<Rational> y(f.extent(0), Rational(0));
  each_index(f.shape(), [&](const std::vector<std::size_t>& idx) {
    Rational term = f.at(idx);
    for (std::size_t i = 1; i < idx.size(); ++i) term *= x[i - 1][idx[i]];
    y[idx[0]] += term;
  });
  return y;
}

// xbar_l[j] = sum of ybar[k] F[k, ..., j (slot l), ...] prod_{i != l} x_i[j_i];
// `others` lists the non-free slots in order.
inline std::vector<Rational> naive_adjoint(const chainrule::Tensor<Rational>& f,
                                           const std::vector<Rational>& ybar,
                                           const std::vector<std::vector<Rational>>& others,
                                           std::size_t l) {
  std::vector<Rational> out(f.extent(1), Rational(0));
  each_index(f.shape(), [&](const std::vector<std::size_t>& idx) {
    Rational term = f.at(idx) * ybar[idx[0]];
    std::size_t seed = 0;
    for (std::size_t slot = 1; slot < idx.size(); ++slot) {
      if (slot == l) continue;
      term *= others[seed++][idx[slot]];
    }
    out[idx[l]] += term;
  });
  return out;
}

// Minimum number of disjoint binary unions (equivalently products of
// distinct atoms) that make every target available, starting from singleton
// atoms. Plain iterative deepening over produced families with a
// visited-family memo; only sets inside some target are ever formed.
// Returns nullopt when the minimum exceeds max_depth.
inline std::optional<std::size_t> brute_min_unions(const std::vector<std::uint32_t>& targets,
                                                   std::size_t max_depth = 7) {
  std::set<std::uint32_t> goal;
  for (std::uint32_t t : targets) {
    if (std::popcount(t) >= 2) goal.insert(t);
  }
  std::uint32_t universe = 0;
  for (std::uint32_t t : targets) universe |= t;
  auto inside_target = [&](std::uint32_t s) {
    for (std::uint32_t t : targets) {
      if ((s & t) == s) return true;
    }
    return false;
  };

  for (std::size_t depth = 0; depth <= max_depth; ++depth) {
    std::map<std::vector<std::uint32_t>, std::size_t> failed;  // family -> budget
    std::function<bool(std::vector<std::uint32_t>&, std::size_t)> go =
        [&](std::vector<std::uint32_t>& family, std::size_t budget) -> bool {
      bool done = true;
      for (std::uint32_t g : goal) {
        if (!std::binary_search(family.begin(), family.end(), g)) done = false;
      }
      if (done) return true;
      if (budget == 0) return false;
      auto it = failed.find(family);
      if (it != failed.end() && it->second >= budget) return false;

      std::vector<std::uint32_t> pieces = family;
      for (std::uint32_t b = 0; b < 32; ++b) {
        if (universe >> b & 1) pieces.push_back(std::uint32_t{1} << b);
      }
      for (std::size_t i = 0; i < pieces.size(); ++i) {
        for (std::size_t j = i + 1; j < pieces.size(); ++j) {
          if (pieces[i] & pieces[j]) continue;
          const std::uint32_t u = pieces[i] | pieces[j];
          if (!inside_target(u)) continue;
          if (std::binary_search(family.begin(), family.end(), u)) continue;
          std::vector<std::uint32_t> next = family;
          next.insert(std::lower_bound(next.begin(), next.end(), u), u);
          if (go(next, budget - 1)) return true;
        }
      }
      failed[family] = std::max(failed[family], budget);
      return false;
    };
    std::vector<std::uint32_t> start;
    if (go(start, depth)) return depth;
  }
  return std::nullopt;
}

// Central second difference of a scalar function.
inline double second_difference(const std::function<double(double)>& f, double x,
                                double h = 1e-4) {
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

inline double relative_error(double got, double want) {
  const double scale = std::max(1.0, std::fabs(want));
  return std::fabs(got - want) / scale;
}

}  // namespace oracle
