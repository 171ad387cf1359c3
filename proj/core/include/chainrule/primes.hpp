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
#include <vector>

namespace chainrule {

bool is_prime(std::uint64_t n);

// The first `count` primes, ascending from 2.
std::vector<std::uint64_t> first_primes(std::size_t count);

// The `count` smallest primes greater than `after`.
std::vector<std::uint64_t> primes_after(std::uint64_t after, std::size_t count);

}  // namespace chainrule
