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

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tutorlab/common/time.hpp"
#include "tutorlab/graph/tracer.hpp"
#include "tutorlab/log/log_store.hpp"
#include "tutorlab/selection/task_selection.hpp"
#include "tutorlab/service/database.hpp"
#include "tutorlab/service/package.hpp"
#include "tutorlab/student/student_model.hpp"

namespace tutorlab::service {

enum class Role { kStudent, kTeacher, kResearcher };

std::string_view to_string(Role role);
Role role_from_string(std::string_view text);  // throws kInvalidArgument

struct Account {
  std::string id;
  std::string login;
  Role role = Role::kStudent;
  std::string display_name;
};

struct ClassRoster {
  std::string id;
  std::string name;
  std::string teacher_id;
  std::vector<std::string> student_ids;
};

struct Assignment {
  std::string id;
  std::string name;
  std::string class_id;
  std::string package_name;
  int package_version = 0;  // 0 on creation means the latest version
  std::string curriculum_id;
  std::string condition_name;
  bool test_mode = false;
  std::vector<std::string> prerequisites;
  std::optional<std::string> policy;
  // Assignments sharing a group are alternatives (experimental conditions);
  // a student is mapped to at most one per group.
  std::optional<std::string> group;
};

enum class AssignmentStatus { kLocked, kAvailable, kInProgress, kComplete };
std::string_view to_string(AssignmentStatus status);

struct WorklistEntry {
  Assignment assignment;
  AssignmentStatus status = AssignmentStatus::kAvailable;
};

struct SessionView {
  bool assignment_complete = false;  // no session: the policy has nothing left
  std::string session_id;
  std::string assignment_id;
  std::string problem_name;
  std::vector<graph::WidgetSpec> interface;
  // Interface updates so far: correct student entries and tutor actions.
  std::vector<graph::Sai> filled;
  bool test_mode = false;
  bool resumed = false;
};

struct StepResult {
  graph::Evaluation evaluation;
  bool test_mode = false;
};

struct ReportRow {
  std::string student_id;
  std::string display_name;
  int problems_completed = 0;
  double percent_correct = 0.0;  // first attempts, 0..100
  int mastered_kcs = 0;
  std::optional<TimestampMs> last_activity;
};

struct ClassReport {
  std::string class_id;
  std::vector<ReportRow> rows;
};

struct ServiceConfig {
  std::filesystem::path data_dir;
  // Researcher account created when the store holds no accounts yet.
  std::string bootstrap_login = "admin";
  TimestampMs session_idle_ms = 8LL * 60 * 60 * 1000;
};

// The LMS layer. Entities live in SQLite; the transaction log is the
// source of truth for progress and student models, which are rebuilt from
// it on startup. All public operations are serialized.
class Tutorshop {
 public:
  Tutorshop(ServiceConfig config, const Clock& clock);
  ~Tutorshop();

  // Opaque bearer tokens; no passwords.
  std::string login(const std::string& login);
  Account authenticate(const std::string& token) const;  // throws kUnauthorized

  Account create_account(const Account& caller, Account account);
  ClassRoster create_class(const Account& caller, ClassRoster roster);
  ClassRoster add_students(const Account& caller, const std::string& class_id,
                           const std::vector<std::string>& student_ids);
  ClassRoster get_class(const Account& caller, const std::string& class_id) const;

  // Throws kValidationFailed listing the diagnostics.
  int publish_package(const Account& caller, Package package);
  std::vector<int> package_versions(const std::string& name) const;

  Assignment create_assignment(const Account& caller, Assignment assignment);
  Assignment repoint_assignment(const Account& caller, const std::string& assignment_id, int version);
  Assignment get_assignment(const std::string& assignment_id) const;

  // CSV "student_id,assignment_id"; all rows apply or none. Returns the
  // number of new mappings.
  std::size_t import_conditions(const Account& caller, const std::string& csv);

  std::vector<WorklistEntry> worklist(const Account& caller, const std::string& student_id) const;

  SessionView open_session(const Account& caller, const std::string& assignment_id);
  StepResult submit_transaction(const Account& caller, const std::string& session_id,
                                const graph::Sai& sai);
  StepResult request_hint(const Account& caller, const std::string& session_id,
                          const std::optional<std::string>& step);

  ClassReport class_report(const Account& caller, const std::string& class_id) const;
  std::string export_log(const Account& caller) const;
  student::StudentModel student_model(const Account& caller, const std::string& student_id) const;

 private:
  struct Runtime;
  struct SessionState;

  std::unique_ptr<Runtime> rt_;
};

}  // namespace tutorlab::service
