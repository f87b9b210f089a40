// Copyright 2026 The bnecert Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bnecert {

enum class ErrorCode {
  kInvalidArgument,
  kSyntax,
  kUnknownIdentifier,
  kDomain,
  kSpec,
  kNegativePrior,
  kZeroMarginal,
  kNonFinite,
  kQuadratureFailure,
  kUnknownAction,
  kProp1Violation,
  kInfeasible,
  kUnboundedObjective,
  kSimplexStall,
  kNoConvergence,
  kTooLarge,
  kPureNotFound,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kSyntax: return "SyntaxError";
    case ErrorCode::kUnknownIdentifier: return "UnknownIdentifier";
    case ErrorCode::kDomain: return "DomainError";
    case ErrorCode::kSpec: return "SpecError";
    case ErrorCode::kNegativePrior: return "NegativePrior";
    case ErrorCode::kZeroMarginal: return "ZeroMarginal";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kQuadratureFailure: return "QuadratureFailure";
    case ErrorCode::kUnknownAction: return "UnknownAction";
    case ErrorCode::kProp1Violation: return "Prop1Violation";
    case ErrorCode::kInfeasible: return "Infeasible";
    case ErrorCode::kUnboundedObjective: return "UnboundedObjective";
    case ErrorCode::kSimplexStall: return "SimplexStall";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kPureNotFound: return "PureNotFound";
  }
  return "Unknown";
}

// Base of every exception thrown by the library. The code lets callers
// (the driver in particular) record failures without a catch per type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

#define BNECERT_DEFINE_ERROR(Name, Code)                               \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& message) : Error(Code, message) {} \
  }

BNECERT_DEFINE_ERROR(InvalidArgument, ErrorCode::kInvalidArgument);
BNECERT_DEFINE_ERROR(UnknownIdentifier, ErrorCode::kUnknownIdentifier);
BNECERT_DEFINE_ERROR(DomainError, ErrorCode::kDomain);
BNECERT_DEFINE_ERROR(SpecError, ErrorCode::kSpec);
BNECERT_DEFINE_ERROR(NegativePrior, ErrorCode::kNegativePrior);
BNECERT_DEFINE_ERROR(ZeroMarginal, ErrorCode::kZeroMarginal);
BNECERT_DEFINE_ERROR(NonFinite, ErrorCode::kNonFinite);
BNECERT_DEFINE_ERROR(QuadratureFailure, ErrorCode::kQuadratureFailure);
BNECERT_DEFINE_ERROR(UnknownAction, ErrorCode::kUnknownAction);
BNECERT_DEFINE_ERROR(Prop1Violation, ErrorCode::kProp1Violation);
BNECERT_DEFINE_ERROR(Infeasible, ErrorCode::kInfeasible);
BNECERT_DEFINE_ERROR(UnboundedObjective, ErrorCode::kUnboundedObjective);
BNECERT_DEFINE_ERROR(SimplexStall, ErrorCode::kSimplexStall);
BNECERT_DEFINE_ERROR(TooLarge, ErrorCode::kTooLarge);
BNECERT_DEFINE_ERROR(PureNotFound, ErrorCode::kPureNotFound);

#undef BNECERT_DEFINE_ERROR

// Malformed expression text; offset is the byte position of the problem.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, const std::string& message)
      : Error(ErrorCode::kSyntax,
              message + " (at offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace bnecert
