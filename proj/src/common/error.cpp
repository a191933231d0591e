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
#include "tutorlab/common/error.hpp"

#include <array>
#include <utility>

namespace tutorlab {
namespace {

constexpr std::array<std::pair<ErrorCode, std::string_view>, 32> kNames{{
    {ErrorCode::kInvalidGraph, "InvalidGraph"},
    {ErrorCode::kUnknownSelection, "UnknownSelection"},
    {ErrorCode::kStaleState, "StaleState"},
    {ErrorCode::kHintsDisabled, "HintsDisabled"},
    {ErrorCode::kNoHintAvailable, "NoHintAvailable"},
    {ErrorCode::kParseError, "ParseError"},
    {ErrorCode::kInvalidParams, "InvalidParams"},
    {ErrorCode::kUnknownKc, "UnknownKc"},
    {ErrorCode::kDuplicateDetector, "DuplicateDetector"},
    {ErrorCode::kDetectorContract, "DetectorContract"},
    {ErrorCode::kDuplicatePolicy, "DuplicatePolicy"},
    {ErrorCode::kUnknownPolicy, "UnknownPolicy"},
    {ErrorCode::kPolicyContract, "PolicyContract"},
    {ErrorCode::kClockSkew, "ClockSkew"},
    {ErrorCode::kIoFailure, "IoFailure"},
    {ErrorCode::kSchemaMismatch, "SchemaMismatch"},
    {ErrorCode::kMalformedRow, "MalformedRow"},
    {ErrorCode::kEmptyStore, "EmptyStore"},
    {ErrorCode::kInvalidArgument, "InvalidArgument"},
    {ErrorCode::kUnauthorized, "Unauthorized"},
    {ErrorCode::kForbidden, "Forbidden"},
    {ErrorCode::kNotFound, "NotFound"},
    {ErrorCode::kUnknownStudent, "UnknownStudent"},
    {ErrorCode::kUnknownAssignment, "UnknownAssignment"},
    {ErrorCode::kUnknownClass, "UnknownClass"},
    {ErrorCode::kDuplicateRow, "DuplicateRow"},
    {ErrorCode::kConflict, "Conflict"},
    {ErrorCode::kAssignmentLocked, "AssignmentLocked"},
    {ErrorCode::kSessionExpired, "SessionExpired"},
    {ErrorCode::kValidationFailed, "ValidationFailed"},
    {ErrorCode::kUnknownProblem, "UnknownProblem"},
    {ErrorCode::kProvisioningFailed, "ProvisioningFailed"},
}};

}  // namespace

std::string_view error_code_name(ErrorCode code) {
  for (const auto& [c, name] : kNames) {
    if (c == code) return name;
  }
  return "Unknown";
}

std::optional<ErrorCode> error_code_from_name(std::string_view name) {
  for (const auto& [c, n] : kNames) {
    if (n == name) return c;
  }
  return std::nullopt;
}

Error::Error(ErrorCode code, const std::string& message, std::optional<int> line)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
      code_(code),
      line_(line) {}

}  // namespace tutorlab
