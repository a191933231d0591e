// Copyright 2026 The Tutorlab Authors
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

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tutorlab {

// Every failure the platform reports to callers carries one of these codes.
// The HTTP layer maps them onto status codes; the CLI onto exit codes.
enum class ErrorCode {
  // behavior graph
  kInvalidGraph,
  kUnknownSelection,
  kStaleState,
  kHintsDisabled,
  kNoHintAvailable,
  kParseError,
  // student model
  kInvalidParams,
  kUnknownKc,
  kDuplicateDetector,
  kDetectorContract,
  // task selection
  kDuplicatePolicy,
  kUnknownPolicy,
  kPolicyContract,
  // logging
  kClockSkew,
  kIoFailure,
  kSchemaMismatch,
  kMalformedRow,
  // analytics
  kEmptyStore,
  kInvalidArgument,
  // service
  kUnauthorized,
  kForbidden,
  kNotFound,
  kUnknownStudent,
  kUnknownAssignment,
  kUnknownClass,
  kDuplicateRow,
  kConflict,
  kAssignmentLocked,
  kSessionExpired,
  kValidationFailed,
  // harness
  kUnknownProblem,
  kProvisioningFailed,
};

std::string_view error_code_name(ErrorCode code);
std::optional<ErrorCode> error_code_from_name(std::string_view name);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<int> line = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  // Source line for row-oriented import failures (1-based, header = 1).
  std::optional<int> line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::optional<int> line_;
};

}  // namespace tutorlab
