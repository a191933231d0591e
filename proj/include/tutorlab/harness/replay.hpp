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
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tutorlab/log/log_store.hpp"
#include "tutorlab/service/package.hpp"

namespace tutorlab::harness {

struct Divergence {
  std::int64_t row = 0;
  std::string student;
  std::string problem;
  std::string step;
  std::string input;
  graph::Outcome logged = graph::Outcome::kIncorrect;
  graph::Outcome recomputed = graph::Outcome::kIncorrect;
};

struct ReplayReport {
  int replayed = 0;  // student records re-evaluated
  std::vector<Divergence> divergences;
};

// Re-traces every logged student record through the package's graphs and
// lists those whose recomputed outcome differs. Records are grouped into
// attempts on one problem by session id, or by student and problem when
// the session column is blank (hand-entered data). The replayed state
// follows the log, so one miscoded entry does not disturb the steps after
// it. Throws kUnknownProblem.
ReplayReport replay(const log::LogStore& store, const service::Package& package);

nlohmann::json to_json(const ReplayReport& report);
// Tab-separated listing for coder review.
std::string to_tsv(const ReplayReport& report);

}  // namespace tutorlab::harness
