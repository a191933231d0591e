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

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tutorlab/common/time.hpp"
#include "tutorlab/graph/tracer.hpp"

namespace tutorlab::log {

using graph::Outcome;

// Action prefix marking interface updates made by the tutor itself.
inline constexpr std::string_view kTutorActionPrefix = "tutor:";

// One logged transaction. Multi-KC records keep their KCs together here and
// are expanded to one line per KC only when written out.
struct TransactionRecord {
  std::int64_t row = 0;
  std::string anon_student_id;
  std::string session_id;
  TimestampMs time = 0;
  std::string level_assignment;
  std::string problem_name;
  std::string step_name;
  int attempt_at_step = 1;
  Outcome outcome = Outcome::kIncorrect;
  std::string selection;
  std::string action;
  std::string input;
  std::string feedback_text;
  std::optional<int> help_level;
  std::string condition_name;
  std::vector<std::string> kcs;
  std::vector<int> opportunities;  // parallel to kcs
  std::map<std::string, double> custom;

  bool tutor_performed() const { return action.starts_with(kTutorActionPrefix); }
  bool first_attempt() const { return attempt_at_step == 1 && !tutor_performed(); }

  friend bool operator==(const TransactionRecord&, const TransactionRecord&) = default;
};

// Session and assignment metadata stamped onto every record.
struct LogContext {
  std::string student_id;
  std::string session_id;
  std::string assignment;
  std::string problem_name;
  std::string condition_name;
  TimestampMs time = 0;
};

// Record fields that follow from an evaluation alone (no row number,
// opportunity counts or custom variables yet).
TransactionRecord draft_record(const graph::Evaluation& eval, const LogContext& ctx);

// Record for an interface update the tutor performed on its own.
TransactionRecord tutor_action_record(const graph::Sai& action, const LogContext& ctx);

}  // namespace tutorlab::log
