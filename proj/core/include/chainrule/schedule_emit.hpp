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

#include "chainrule/bracketing.hpp"
#include "chainrule/dag.hpp"
#include "chainrule/scalar.hpp"
#include "chainrule/schedule.hpp"

namespace chainrule {

// Scalar fma schedule for dense forward accumulation over a dag:
// J_v = sum_{(u,v)} F'_{v,u} J_u with J_0 = I, vertices in topological order.
// Outputs are the entries of J_q in row-major order.
Schedule forward_schedule(const DerivativeDag<Rational>& dag);

// Scalar fma schedule evaluating a chain product in the order of `tree`; its
// cost equals tree.cost().
Schedule bracketing_schedule(const Chain<Rational>& chain, const BracketTree& tree);

}  // namespace chainrule
