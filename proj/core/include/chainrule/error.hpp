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

#include <stdexcept>
#include <string>
#include <string_view>

namespace chainrule {

enum class ErrorCode {
  kInvalidInput,
  kParseError,
  kCycleDetected,
  kDimensionMismatch,
  kMultipleSourcesOrSinks,
  kNoPath,
  kMissingOrder2,
  kStructureViolation,
  kEmptyChain,
  kChainTooLong,
  kShapeMismatch,
  kInstanceTooLarge,
  kDanglingRef,
  kAtomResolutionFailure,
  kNonSquarefreeEntry,
  kUnknownPrimeFactor,
  kInvalidSchedule,
  kBadFreeIndex,
};

std::string_view error_code_name(ErrorCode code);

// All library failures are reported through this type; `code()` lets callers
// and tests discriminate without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "InvalidInput";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kCycleDetected: return "CycleDetected";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kMultipleSourcesOrSinks: return "MultipleSourcesOrSinks";
    case ErrorCode::kNoPath: return "NoPath";
    case ErrorCode::kMissingOrder2: return "MissingOrder2";
    case ErrorCode::kStructureViolation: return "StructureViolation";
    case ErrorCode::kEmptyChain: return "EmptyChain";
    case ErrorCode::kChainTooLong: return "ChainTooLong";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kInstanceTooLarge: return "InstanceTooLarge";
    case ErrorCode::kDanglingRef: return "DanglingRef";
    case ErrorCode::kAtomResolutionFailure: return "AtomResolutionFailure";
    case ErrorCode::kNonSquarefreeEntry: return "NonSquarefreeEntry";
    case ErrorCode::kUnknownPrimeFactor: return "UnknownPrimeFactor";
    case ErrorCode::kInvalidSchedule: return "InvalidSchedule";
    case ErrorCode::kBadFreeIndex: return "BadFreeIndex";
  }
  return "Unknown";
}

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace chainrule
