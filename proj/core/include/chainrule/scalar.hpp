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

#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace chainrule {

// Expression templates are disabled so that `auto` and generic code see plain
// values.
using BigInt = boost::multiprecision::number<
    boost::multiprecision::cpp_int_backend<>, boost::multiprecision::et_off>;
using Rational = boost::multiprecision::number<
    boost::multiprecision::rational_adaptor<
        boost::multiprecision::cpp_int_backend<>>,
    boost::multiprecision::et_off>;

enum class ScalarKind { kRational, kFloat };

std::string_view scalar_kind_name(ScalarKind kind);
ScalarKind parse_scalar_kind(std::string_view text);

template <class T>
struct ScalarTraits;

template <>
struct ScalarTraits<Rational> {
  static constexpr ScalarKind kind = ScalarKind::kRational;
  static constexpr bool exact = true;
};

template <>
struct ScalarTraits<double> {
  static constexpr ScalarKind kind = ScalarKind::kFloat;
  static constexpr bool exact = false;
};

// Accepts integers ("-12"), fractions ("3/4") and decimals ("0.125", "1e-3").
// Decimals are converted exactly.
Rational parse_rational(std::string_view text);
double parse_double(std::string_view text);

// Rationals print as "num/den" (or "num" when integral); doubles use the
// shortest round-trip representation.
std::string format_scalar(const Rational& value);
std::string format_scalar(double value);

template <class T>
T parse_scalar(std::string_view text);

template <>
inline Rational parse_scalar<Rational>(std::string_view text) {
  return parse_rational(text);
}

template <>
inline double parse_scalar<double>(std::string_view text) {
  return parse_double(text);
}

inline bool is_integer(const Rational& value) {
  return denominator(value) == 1;
}

}  // namespace chainrule
