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

// Shared JSON helpers for the file formats. Private to the library.

#include <string>

#include <json.hpp>

#include "chainrule/error.hpp"
#include "chainrule/scalar.hpp"
#include "chainrule/tensor.hpp"

namespace chainrule::detail {

using Json = nlohmann::json;

inline Json parse_json(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::kParseError, e.what());
  }
}

template <class T>
T scalar_from_json(const Json& j) {
  if (j.is_string()) return parse_scalar<T>(j.get<std::string>());
  if (j.is_number()) {
    if constexpr (std::is_same_v<T, Rational>) {
      return parse_rational(j.dump());
    } else {
      return j.get<double>();
    }
  }
  fail(ErrorCode::kParseError, "expected a scalar, got " + j.dump());
}

inline Json scalar_to_json(const Rational& v) { return format_scalar(v); }
inline Json scalar_to_json(double v) { return v; }

template <class T>
Tensor<T> tensor_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("shape") || !j.contains("data")) {
    fail(ErrorCode::kParseError, "tensor needs 'shape' and 'data'");
  }
  Shape shape;
  for (const auto& e : j.at("shape")) {
    if (!e.is_number_integer() || e.get<long long>() <= 0) {
      fail(ErrorCode::kParseError, "tensor extents must be positive integers");
    }
    shape.push_back(e.get<std::size_t>());
  }
  std::vector<T> data;
  for (const auto& e : j.at("data")) data.push_back(scalar_from_json<T>(e));
  return Tensor<T>(std::move(shape), std::move(data));
}

template <class T>
Json tensor_to_json(const Tensor<T>& t) {
  Json data = Json::array();
  for (const T& v : t.data()) data.push_back(scalar_to_json(v));
  return Json{{"shape", t.shape()}, {"data", std::move(data)}};
}

inline const Json& require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    fail(ErrorCode::kParseError, std::string("missing field '") + key + "'");
  }
  return j.at(key);
}

}  // namespace chainrule::detail
