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
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tutorlab/harness/simulation.hpp"
#include "tutorlab/service/package.hpp"
#include "tutorlab/service/tutorshop.hpp"

namespace tutorlab::harness {

// A generative parameter drawn uniformly per student; a single number in
// the script fixes it.
struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct CohortSpec {
  int n = 1;
  std::string id_prefix = "stu";
  Range p_init{0.2, 0.4};
  Range p_transit{0.2, 0.2};
  Range p_slip{0.05, 0.15};
  Range p_guess{0.1, 0.25};
  Range hint_propensity{0.0, 0.0};
  int retry_cap = 3;
};

struct PhaseSpec {
  std::vector<std::string> assignments;  // each student works the ones they see
  std::optional<int> max_problems;       // per assignment
};

struct ExperimentScript {
  std::string name;
  std::uint64_t seed = 1;
  std::filesystem::path package_dir;
  std::string class_id = "period-1";
  std::string teacher = "teacher-1";
  TimestampMs start = 0;
  CohortSpec cohort;
  std::vector<service::Assignment> assignments;  // class and package filled in
  // Each student is dealt one arm and mapped to every assignment in it.
  // Empty: no condition import, all assignments visible to everyone.
  std::vector<std::vector<std::string>> arms;
  std::vector<PhaseSpec> phases;
  SessionLimits limits;
};

// Script document:
//   {"name", "seed", "package": "dir", "class", "teacher", "start",
//    "cohort": {"n", "id_prefix", "p_init": x | [lo, hi], "p_transit", "p_slip",
//               "p_guess", "hint_propensity", "retry_cap"},
//    "assignments": [{"id", "curriculum", "condition", "test_mode",
//                     "prerequisites", "policy", "group"}],
//    "arms": [["A", ...], ...],
//    "phases": [{"assignments": [...], "max_problems"}],
//    "think_ms": [lo, hi]}
// Relative package paths resolve against base_dir. Throws kParseError or
// kInvalidArgument.
ExperimentScript script_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
ExperimentScript load_script(const std::filesystem::path& path);
void check_script(const ExperimentScript& script);

std::vector<std::string> cohort_ids(const ExperimentScript& script);
// Students in id order with parameters drawn from the script seed.
std::vector<SimulatedStudent> make_cohort(const ExperimentScript& script);
// "student_id,assignment_id" rows dealing arms round-robin over a seeded
// shuffle of the cohort. Header only when the script has no arms.
std::string condition_csv(const ExperimentScript& script);

struct StudentOutcome {
  std::string id;
  std::vector<std::string> conditions;  // in order of first record
  int transactions = 0;
  int problems_completed = 0;
  int hints_refused = 0;
  int leaked_outcomes = 0;
  int mastered_kcs = 0;
  std::vector<IssuedProblem> issued;
};

struct ConditionSummary {
  std::string condition;
  int students = 0;
  double first_attempt_accuracy = 0.0;  // mean over students
  double problems_completed = 0.0;      // mean over students
  double mastered_kcs = 0.0;            // mean over students
};

struct ExperimentResult {
  std::filesystem::path log_path;
  std::filesystem::path summary_path;
  std::filesystem::path conditions_path;
  int transactions_submitted = 0;
  int records_exported = 0;  // student transactions in the exported log
  std::vector<StudentOutcome> students;
  std::vector<ConditionSummary> conditions;
};

struct RunOptions {
  bool http = false;  // talk to the service over loopback HTTP
};

// Provisions a fresh service under out_dir/service through the API, imports
// the generated condition CSV, runs every phase and writes the exported log,
// the CSV and a summary into out_dir. Provisioning errors are rethrown as
// kProvisioningFailed.
ExperimentResult run_experiment(const ExperimentScript& script, const std::filesystem::path& out_dir,
                                const RunOptions& options = {});

nlohmann::json summary_json(const ExperimentResult& result);

}  // namespace tutorlab::harness
