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

#include "chainrule/scalar.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <system_error>

#include "chainrule/error.hpp"

namespace chainrule {
namespace {

std::string_view trim(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) {
    text.remove_prefix(1);
  }
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) {
    text.remove_suffix(1);
  }
  return text;
}

bool all_digits(std::string_view text) {
  if (text.empty()) return false;
  for (char c : text) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

BigInt parse_integer(std::string_view text, std::string_view whole) {
  bool negative = false;
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  if (!all_digits(text)) {
    fail(ErrorCode::kParseError, "not a number: '" + std::string(whole) + "'");
  }
  BigInt value{std::string(text)};
  return negative ? BigInt(-value) : value;
}

BigInt pow10(long exponent) {
  BigInt result = 1;
  for (long i = 0; i < exponent; ++i) result *= 10;
  return result;
}

// Decimal with optional fraction and exponent, converted exactly.
Rational parse_decimal(std::string_view text, std::string_view whole) {
  bool negative = false;
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  long exponent = 0;
  if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
    std::string_view exp_text = text.substr(e + 1);
    if (!exp_text.empty() && exp_text.front() == '+') exp_text.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(exp_text.data(),
                                     exp_text.data() + exp_text.size(), exponent);
    if (ec != std::errc() || ptr != exp_text.data() + exp_text.size()) {
      fail(ErrorCode::kParseError, "bad exponent in '" + std::string(whole) + "'");
    }
    text = text.substr(0, e);
  }
  std::string digits;
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view int_part = text.substr(0, dot);
    std::string_view frac_part = text.substr(dot + 1);
    if ((!int_part.empty() && !all_digits(int_part)) ||
        (!frac_part.empty() && !all_digits(frac_part)) ||
        (int_part.empty() && frac_part.empty())) {
      fail(ErrorCode::kParseError, "not a number: '" + std::string(whole) + "'");
    }
    digits = std::string(int_part) + std::string(frac_part);
    exponent -= static_cast<long>(frac_part.size());
  } else {
    if (!all_digits(text)) {
      fail(ErrorCode::kParseError, "not a number: '" + std::string(whole) + "'");
    }
    digits = std::string(text);
  }
  Rational value{BigInt(digits)};
  if (exponent > 0) value *= Rational(pow10(exponent));
  if (exponent < 0) value /= Rational(pow10(-exponent));
  return negative ? Rational(-value) : value;
}

}  // namespace

std::string_view scalar_kind_name(ScalarKind kind) {
  return kind == ScalarKind::kRational ? "rational" : "float";
}

ScalarKind parse_scalar_kind(std::string_view text) {
  if (text == "rational") return ScalarKind::kRational;
  if (text == "float") return ScalarKind::kFloat;
  fail(ErrorCode::kParseError,
       "scalar kind must be 'rational' or 'float', got '" + std::string(text) + "'");
}

Rational parse_rational(std::string_view text) {
  const std::string_view whole = text;
  text = trim(text);
  if (text.empty()) fail(ErrorCode::kParseError, "empty scalar");
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    BigInt num = parse_integer(trim(text.substr(0, slash)), whole);
    BigInt den = parse_integer(trim(text.substr(slash + 1)), whole);
    if (den == 0) fail(ErrorCode::kParseError, "zero denominator in '" + std::string(whole) + "'");
    return Rational(num, den);
  }
  if (text.find_first_of(".eE") != std::string_view::npos) {
    return parse_decimal(text, whole);
  }
  return Rational(parse_integer(text, whole));
}

double parse_double(std::string_view text) {
  const std::string_view whole = text;
  text = trim(text);
  if (text.find('/') != std::string_view::npos) {
    return static_cast<double>(parse_rational(text));
  }
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    fail(ErrorCode::kParseError, "not a number: '" + std::string(whole) + "'");
  }
  return value;
}

std::string format_scalar(const Rational& value) {
  if (denominator(value) == 1) return numerator(value).str();
  return numerator(value).str() + "/" + denominator(value).str();
}

std::string format_scalar(double value) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) return std::to_string(value);
  return std::string(buffer, ptr);
}

}  // namespace chainrule
