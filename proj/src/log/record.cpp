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
#include "tutorlab/log/record.hpp"

namespace tutorlab::log {

TransactionRecord draft_record(const graph::Evaluation& eval, const LogContext& ctx) {
  TransactionRecord r;
  r.anon_student_id = ctx.student_id;
  r.session_id = ctx.session_id;
  r.time = ctx.time;
  r.level_assignment = ctx.assignment;
  r.problem_name = ctx.problem_name;
  r.step_name = eval.step;
  r.attempt_at_step = eval.attempt_at_step;
  r.outcome = eval.outcome;
  r.selection = eval.sai.selection;
  r.action = eval.sai.action;
  r.input = eval.sai.input;
  r.feedback_text = eval.feedback_text;
  r.help_level = eval.help_level;
  r.condition_name = ctx.condition_name;
  r.kcs = eval.kcs;
  return r;
}

TransactionRecord tutor_action_record(const graph::Sai& action, const LogContext& ctx) {
  TransactionRecord r;
  r.anon_student_id = ctx.student_id;
  r.session_id = ctx.session_id;
  r.time = ctx.time;
  r.level_assignment = ctx.assignment;
  r.problem_name = ctx.problem_name;
  r.step_name = action.selection;
  r.attempt_at_step = 1;
  r.outcome = Outcome::kCorrect;
  r.selection = action.selection;
  r.action = std::string(kTutorActionPrefix) + action.action;
  r.input = action.input;
  r.condition_name = ctx.condition_name;
  return r;
}

}  // namespace tutorlab::log
