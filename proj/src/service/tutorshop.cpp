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

#include "tutorlab/service/tutorshop.hpp"

#include <algorithm>
#include <random>

#include "tutorlab/common/error.hpp"
#include "tutorlab/common/random.hpp"
#include "tutorlab/common/strings.hpp"

namespace tutorlab::service {

using nlohmann::json;

std::string_view to_string(Role role) {
  switch (role) {
    case Role::kStudent:
      return "student";
    case Role::kTeacher:
      return "teacher";
    case Role::kResearcher:
      return "researcher";
  }
  return "student";
}

Role role_from_string(std::string_view text) {
  const std::string t = to_lower(trim(text));
  if (t == "student") return Role::kStudent;
  if (t == "teacher") return Role::kTeacher;
  if (t == "researcher") return Role::kResearcher;
  throw Error(ErrorCode::kInvalidArgument, "unknown role '" + std::string(text) + "'");
}

std::string_view to_string(AssignmentStatus status) {
  switch (status) {
    case AssignmentStatus::kLocked:
      return "locked";
    case AssignmentStatus::kAvailable:
      return "available";
    case AssignmentStatus::kInProgress:
      return "in_progress";
    case AssignmentStatus::kComplete:
      return "complete";
  }
  return "available";
}

namespace {

constexpr const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS accounts(
  seq INTEGER PRIMARY KEY AUTOINCREMENT,
  id TEXT UNIQUE NOT NULL,
  login TEXT UNIQUE NOT NULL,
  role TEXT NOT NULL,
  display_name TEXT NOT NULL);
CREATE TABLE IF NOT EXISTS classes(
  seq INTEGER PRIMARY KEY AUTOINCREMENT,
  id TEXT UNIQUE NOT NULL,
  name TEXT NOT NULL,
  teacher_id TEXT NOT NULL REFERENCES accounts(id));
CREATE TABLE IF NOT EXISTS class_members(
  seq INTEGER PRIMARY KEY AUTOINCREMENT,
  class_id TEXT NOT NULL REFERENCES classes(id),
  student_id TEXT NOT NULL REFERENCES accounts(id),
  UNIQUE(class_id, student_id));
CREATE TABLE IF NOT EXISTS packages(
  name TEXT NOT NULL,
  version INTEGER NOT NULL,
  document TEXT NOT NULL,
  PRIMARY KEY(name, version));
CREATE TABLE IF NOT EXISTS assignments(
  seq INTEGER PRIMARY KEY AUTOINCREMENT,
  id TEXT UNIQUE NOT NULL,
  name TEXT NOT NULL,
  class_id TEXT NOT NULL REFERENCES classes(id),
  package_name TEXT NOT NULL,
  package_version INTEGER NOT NULL,
  curriculum_id TEXT NOT NULL,
  condition_name TEXT NOT NULL,
  test_mode INTEGER NOT NULL,
  prerequisites TEXT NOT NULL,
  policy TEXT,
  grp TEXT);
CREATE TABLE IF NOT EXISTS condition_mappings(
  seq INTEGER PRIMARY KEY AUTOINCREMENT,
  student_id TEXT NOT NULL REFERENCES accounts(id),
  assignment_id TEXT NOT NULL REFERENCES assignments(id),
  grp TEXT NOT NULL,
  UNIQUE(student_id, grp));
CREATE TABLE IF NOT EXISTS sessions(
  seq INTEGER PRIMARY KEY AUTOINCREMENT,
  id TEXT UNIQUE NOT NULL,
  student_id TEXT NOT NULL,
  assignment_id TEXT NOT NULL,
  problem_name TEXT NOT NULL,
  package_name TEXT NOT NULL,
  package_version INTEGER NOT NULL,
  opened_at INTEGER NOT NULL,
  resumes TEXT);
)sql";

struct PackageRuntime {
  Package package;
  std::map<std::string, std::shared_ptr<const graph::Tracer>> tracers;
};

Account account_from(const SqlRow& r) {
  return {as_text(r[0]), as_text(r[1]), role_from_string(as_text(r[2])), as_text(r[3])};
}

Assignment assignment_from(const SqlRow& r) {
  Assignment a;
  a.id = as_text(r[0]);
  a.name = as_text(r[1]);
  a.class_id = as_text(r[2]);
  a.package_name = as_text(r[3]);
  a.package_version = static_cast<int>(as_int(r[4]));
  a.curriculum_id = as_text(r[5]);
  a.condition_name = as_text(r[6]);
  a.test_mode = as_int(r[7]) != 0;
  a.prerequisites = json::parse(as_text(r[8])).get<std::vector<std::string>>();
  a.policy = as_optional_text(r[9]);
  a.group = as_optional_text(r[10]);
  return a;
}

constexpr const char* kAssignmentColumns =
    "id, name, class_id, package_name, package_version, curriculum_id, condition_name, test_mode, "
    "prerequisites, policy, grp";

std::string new_token() {
  std::random_device device;
  std::string token;
  static constexpr char kHex[] = "0123456789abcdef";
  for (int i = 0; i < 8; ++i) {
    auto word = device();
    for (int j = 0; j < 8; ++j, word >>= 4) token += kHex[word & 0xf];
  }
  return token;
}

graph::Evaluation evaluation_from(const log::TransactionRecord& r) {
  graph::Evaluation e;
  e.outcome = r.outcome;
  e.feedback_text = r.feedback_text;
  e.kcs = r.kcs;
  e.help_level = r.help_level;
  e.step = r.step_name;
  e.attempt_at_step = r.attempt_at_step;
  e.sai = {r.selection, r.action, r.input};
  return e;
}

}  // namespace

struct Tutorshop::SessionState {
  std::string id;
  std::string student_id;
  std::string assignment_id;
  std::string problem_name;
  std::string package_name;
  int package_version = 0;
  TimestampMs opened_at = 0;
  TimestampMs last_activity = 0;
  std::optional<std::string> resumes;
  graph::TracerState state;
};

struct Tutorshop::Runtime {
  ServiceConfig config;
  const Clock& clock;
  Database db;
  std::unique_ptr<log::DurableLog> log;
  mutable std::mutex mu;

  std::map<std::string, std::string> tokens;  // token -> account id
  mutable std::map<std::pair<std::string, int>, std::shared_ptr<const PackageRuntime>> packages;
  std::map<std::string, SessionState> sessions;
  std::size_t session_count = 0;
  std::map<std::string, student::StudentModel> models;
  std::map<std::pair<std::string, std::string>, selection::ProgressRecord> progress;
  std::map<std::pair<std::string, std::string>, std::string> latest_session;
  student::DetectorRegistry detectors;
  selection::PolicyRegistry policies;

  Runtime(ServiceConfig cfg, const Clock& c)
      : config(std::move(cfg)), clock(c), db((std::filesystem::create_directories(config.data_dir),
                                              config.data_dir / "tutorshop.db")) {
    detectors.register_detector(student::consecutive_errors_detector());
    policies.register_policy("random_unmastered", selection::random_unmastered);
    db.exec(kSchema);
    if (db.query("SELECT COUNT(*) FROM accounts")[0][0] == SqlValue(std::int64_t{0})) {
      db.query("INSERT INTO accounts(id, login, role, display_name) VALUES(?, ?, 'researcher', ?)",
               {config.bootstrap_login, config.bootstrap_login, config.bootstrap_login});
    }
    log = std::make_unique<log::DurableLog>(config.data_dir / "transactions.tsv", detectors.names());
    recover();
  }

  // ---- entity lookups -----------------------------------------------------

  std::optional<Account> find_account(const std::string& id) const {
    auto rows = const_cast<Database&>(db).query(
        "SELECT id, login, role, display_name FROM accounts WHERE id = ?", {id});
    if (rows.empty()) return std::nullopt;
    return account_from(rows[0]);
  }

  std::optional<ClassRoster> find_class(const std::string& id) const {
    auto& d = const_cast<Database&>(db);
    auto rows = d.query("SELECT id, name, teacher_id FROM classes WHERE id = ?", {id});
    if (rows.empty()) return std::nullopt;
    ClassRoster c{as_text(rows[0][0]), as_text(rows[0][1]), as_text(rows[0][2]), {}};
    for (const auto& r : d.query("SELECT student_id FROM class_members WHERE class_id = ? ORDER BY seq", {id})) {
      c.student_ids.push_back(as_text(r[0]));
    }
    return c;
  }

  ClassRoster require_class(const std::string& id) const {
    auto c = find_class(id);
    if (!c) throw Error(ErrorCode::kUnknownClass, "no class '" + id + "'");
    return *c;
  }

  std::optional<Assignment> find_assignment(const std::string& id) const {
    auto rows = const_cast<Database&>(db).query(
        std::string("SELECT ") + kAssignmentColumns + " FROM assignments WHERE id = ?", {id});
    if (rows.empty()) return std::nullopt;
    return assignment_from(rows[0]);
  }

  Assignment require_assignment(const std::string& id) const {
    auto a = find_assignment(id);
    if (!a) throw Error(ErrorCode::kUnknownAssignment, "no assignment '" + id + "'");
    return *a;
  }

  std::vector<Assignment> assignments_of_class(const std::string& class_id) const {
    std::vector<Assignment> out;
    for (const auto& r : const_cast<Database&>(db).query(
             std::string("SELECT ") + kAssignmentColumns + " FROM assignments WHERE class_id = ? ORDER BY seq",
             {class_id})) {
      out.push_back(assignment_from(r));
    }
    return out;
  }

  std::vector<std::string> classes_of_student(const std::string& student_id) const {
    std::vector<std::string> out;
    for (const auto& r : const_cast<Database&>(db).query(
             "SELECT m.class_id FROM class_members m JOIN classes c ON c.id = m.class_id "
             "WHERE m.student_id = ? ORDER BY c.seq",
             {student_id})) {
      out.push_back(as_text(r[0]));
    }
    return out;
  }

  bool is_member(const std::string& class_id, const std::string& student_id) const {
    return !const_cast<Database&>(db)
                .query("SELECT 1 FROM class_members WHERE class_id = ? AND student_id = ?",
                       {class_id, student_id})
                .empty();
  }

  std::shared_ptr<const PackageRuntime> package(const std::string& name, int version) const {
    const auto key = std::make_pair(name, version);
    if (auto it = packages.find(key); it != packages.end()) return it->second;
    auto rows = const_cast<Database&>(db).query(
        "SELECT document FROM packages WHERE name = ? AND version = ?", {name, std::int64_t{version}});
    if (rows.empty()) {
      throw Error(ErrorCode::kNotFound, "no package '" + name + "' version " + std::to_string(version));
    }
    auto rt = std::make_shared<PackageRuntime>();
    rt->package = package_from_json(json::parse(as_text(rows[0][0])));
    for (const auto& g : rt->package.problems) {
      rt->tracers[g.problem_name] = std::make_shared<const graph::Tracer>(g);
    }
    packages[key] = rt;
    return rt;
  }

  const graph::Tracer& tracer(const PackageRuntime& pkg, const std::string& problem) const {
    const auto it = pkg.tracers.find(problem);
    if (it == pkg.tracers.end()) {
      throw Error(ErrorCode::kUnknownProblem, "package '" + pkg.package.name + "' has no problem '" + problem + "'");
    }
    return *it->second;
  }

  int latest_version(const std::string& name) const {
    auto rows = const_cast<Database&>(db).query("SELECT MAX(version) FROM packages WHERE name = ?", {name});
    return static_cast<int>(as_int(rows[0][0]));
  }

  // ---- authorization ------------------------------------------------------

  static bool staff(const Account& a) { return a.role != Role::kStudent; }

  void require_staff(const Account& caller) const {
    if (!staff(caller)) throw Error(ErrorCode::kForbidden, "students may not do this");
  }

  void require_researcher(const Account& caller) const {
    if (caller.role != Role::kResearcher) throw Error(ErrorCode::kForbidden, "researcher role required");
  }

  void require_class_staff(const Account& caller, const ClassRoster& c) const {
    require_staff(caller);
    if (caller.role == Role::kTeacher && c.teacher_id != caller.id) {
      throw Error(ErrorCode::kForbidden, "class '" + c.id + "' belongs to another teacher");
    }
  }

  void require_view_student(const Account& caller, const std::string& student_id) const {
    if (caller.id == student_id || caller.role == Role::kResearcher) return;
    if (caller.role == Role::kTeacher) {
      for (const auto& class_id : classes_of_student(student_id)) {
        if (require_class(class_id).teacher_id == caller.id) return;
      }
    }
    throw Error(ErrorCode::kForbidden, "not allowed to view student '" + student_id + "'");
  }

  // ---- visibility and progress --------------------------------------------

  static std::string group_of(const Assignment& a) { return a.group.value_or(a.id); }

  bool mapped(const std::string& student_id, const std::string& assignment_id) const {
    return !const_cast<Database&>(db)
                .query("SELECT 1 FROM condition_mappings WHERE student_id = ? AND assignment_id = ?",
                       {student_id, assignment_id})
                .empty();
  }

  // Condition assignments (grouped, or named in any mapping row) are shown
  // only to the students mapped to them.
  bool visible(const std::string& student_id, const Assignment& a) const {
    if (!is_member(a.class_id, student_id)) return false;
    const bool conditional =
        a.group.has_value() ||
        !const_cast<Database&>(db).query("SELECT 1 FROM condition_mappings WHERE assignment_id = ?", {a.id}).empty();
    return !conditional || mapped(student_id, a.id);
  }

  selection::PolicyContext policy_context(const std::string& student_id, const Assignment& a) const {
    const auto pkg = package(a.package_name, a.package_version);
    const auto* curriculum = pkg->package.find_curriculum(a.curriculum_id);
    if (!curriculum) {
      throw Error(ErrorCode::kNotFound, "package '" + a.package_name + "' has no curriculum '" + a.curriculum_id + "'");
    }
    selection::PolicyContext ctx;
    if (auto it = models.find(student_id); it != models.end()) ctx.model = it->second;
    ctx.model.student_id = student_id;
    ctx.curriculum = *curriculum;
    if (a.policy) ctx.curriculum.policy = selection::Policy::parse(*a.policy);
    if (auto it = progress.find({student_id, a.id}); it != progress.end()) ctx.progress = it->second;
    ctx.progress.student_id = student_id;
    ctx.seed = derive_seed(fnv1a(student_id), fnv1a(a.id));
    return ctx;
  }

  AssignmentStatus status(const std::string& student_id, const Assignment& a, int depth = 0) const {
    if (depth > 64) throw Error(ErrorCode::kConflict, "prerequisite chain too deep at '" + a.id + "'");
    for (const auto& pre : a.prerequisites) {
      if (status(student_id, require_assignment(pre), depth + 1) != AssignmentStatus::kComplete) {
        return AssignmentStatus::kLocked;
      }
    }
    const auto ctx = policy_context(student_id, a);
    if (ctx.progress.in_progress) return AssignmentStatus::kInProgress;
    if (!policies.select_next(ctx)) return AssignmentStatus::kComplete;
    if (!ctx.progress.completed_problems.empty()) return AssignmentStatus::kInProgress;
    return AssignmentStatus::kAvailable;
  }

  // ---- sessions -------------------------------------------------------------

  std::vector<const log::TransactionRecord*> session_records(const std::string& session_id) const {
    std::vector<const log::TransactionRecord*> out;
    for (const auto& r : log->store().records()) {
      if (r.session_id == session_id) out.push_back(&r);
    }
    return out;
  }

  // Re-traces a session's logged student transactions on top of `state`.
  graph::TracerState replay(const graph::Tracer& tr, graph::TracerState state, bool test_mode,
                            const std::vector<const log::TransactionRecord*>& records) const {
    for (const auto* r : records) {
      if (r->tutor_performed()) continue;
      if (r->outcome == log::Outcome::kHint) {
        state = tr.request_hint(state, r->selection, false).state;
      } else {
        graph::Transaction txn;
        txn.student_id = r->anon_student_id;
        txn.session_id = r->session_id;
        txn.timestamp = r->time;
        txn.selection = r->selection;
        txn.action = r->action;
        txn.input = r->input;
        state = tr.trace(state, txn, test_mode).state;
      }
    }
    return state;
  }

  void note_session_state(const SessionState& s) {
    auto& prog = progress[{s.student_id, s.assignment_id}];
    prog.student_id = s.student_id;
    if (s.state.completed) {
      prog.completed_problems.insert(s.problem_name);
      if (prog.in_progress == s.problem_name) prog.in_progress.reset();
    } else {
      prog.in_progress = s.problem_name;
    }
  }

  log::LogContext context_for(const SessionState& s, const Assignment& a, TimestampMs t) const {
    return {s.student_id, s.id, a.id, s.problem_name, a.condition_name, t};
  }

  // Rebuilds sessions, progress and student models from the log.
  void recover() {
    std::map<std::string, std::vector<const log::TransactionRecord*>> by_session;
    for (const auto& r : log->store().records()) by_session[r.session_id].push_back(&r);

    for (const auto& row : db.query(
             "SELECT id, student_id, assignment_id, problem_name, package_name, package_version, opened_at, "
             "resumes FROM sessions ORDER BY seq")) {
      SessionState s;
      s.id = as_text(row[0]);
      s.student_id = as_text(row[1]);
      s.assignment_id = as_text(row[2]);
      s.problem_name = as_text(row[3]);
      s.package_name = as_text(row[4]);
      s.package_version = static_cast<int>(as_int(row[5]));
      s.opened_at = as_int(row[6]);
      s.resumes = as_optional_text(row[7]);
      s.last_activity = s.opened_at;
      const auto a = require_assignment(s.assignment_id);
      const auto pkg = package(s.package_name, s.package_version);
      const auto& tr = tracer(*pkg, s.problem_name);
      graph::TracerState start = tr.init_state();
      if (s.resumes) start = sessions.at(*s.resumes).state;
      const auto& records = by_session[s.id];
      s.state = replay(tr, start, a.test_mode, records);
      if (!records.empty()) s.last_activity = std::max(s.last_activity, records.back()->time);
      note_session_state(s);
      latest_session[{s.student_id, s.assignment_id}] = s.id;
      sessions[s.id] = std::move(s);
      ++session_count;
    }

    for (const auto& r : log->store().records()) {
      if (r.tutor_performed()) continue;
      const auto it = sessions.find(r.session_id);
      if (it == sessions.end()) {
        throw Error(ErrorCode::kIoFailure, "log row " + std::to_string(r.row) + " names unknown session '" +
                                               r.session_id + "'");
      }
      const auto pkg = package(it->second.package_name, it->second.package_version);
      auto& model = models[r.anon_student_id];
      model.student_id = r.anon_student_id;
      model = student::apply_transaction(model, evaluation_from(r), pkg->package.kc_params, detectors, r);
    }
  }

  SessionState& own_session(const Account& caller, const std::string& session_id) {
    const auto it = sessions.find(session_id);
    if (it == sessions.end()) throw Error(ErrorCode::kNotFound, "no session '" + session_id + "'");
    if (it->second.student_id != caller.id) {
      throw Error(ErrorCode::kForbidden, "session '" + session_id + "' belongs to another student");
    }
    return it->second;
  }

  // Checks shared by transactions and hints; returns the assignment.
  Assignment check_live(const SessionState& s, TimestampMs now) const {
    if (now - s.last_activity > config.session_idle_ms) {
      throw Error(ErrorCode::kSessionExpired, "session '" + s.id + "' expired; open the assignment again");
    }
    auto a = require_assignment(s.assignment_id);
    if (status(s.student_id, a) == AssignmentStatus::kLocked) {
      throw Error(ErrorCode::kAssignmentLocked, "assignment '" + a.id + "' is locked");
    }
    return a;
  }

  // Correct entries and tutor actions logged along a session chain. Test
  // mode shows tutor actions only, so a resumed view reveals no outcomes.
  std::vector<graph::Sai> filled(const SessionState& s, bool test_mode) const {
    std::vector<std::string> chain{s.id};
    for (auto prev = s.resumes; prev; prev = sessions.at(*prev).resumes) chain.push_back(*prev);
    std::vector<graph::Sai> out;
    for (const auto& r : log->store().records()) {
      if (std::find(chain.begin(), chain.end(), r.session_id) == chain.end()) continue;
      if (r.outcome != log::Outcome::kCorrect || (test_mode && !r.tutor_performed())) continue;
      std::string action = r.action;
      if (r.tutor_performed()) action.erase(0, log::kTutorActionPrefix.size());
      out.push_back({r.selection, action, r.input});
    }
    return out;
  }

  SessionView view_of(const SessionState& s, const Assignment& a, bool resumed) const {
    SessionView v;
    v.session_id = s.id;
    v.assignment_id = a.id;
    v.problem_name = s.problem_name;
    v.interface = package(s.package_name, s.package_version)->package.find_problem(s.problem_name)->interface;
    v.filled = filled(s, a.test_mode);
    v.test_mode = a.test_mode;
    v.resumed = resumed;
    return v;
  }

  SessionState& start_session(const std::string& student_id, const Assignment& a, const std::string& problem,
                              int version, std::optional<std::string> resumes, TimestampMs now) {
    SessionState s;
    s.id = "S" + std::to_string(++session_count);
    s.student_id = student_id;
    s.assignment_id = a.id;
    s.problem_name = problem;
    s.package_name = a.package_name;
    s.package_version = version;
    s.opened_at = now;
    s.last_activity = now;
    s.resumes = std::move(resumes);
    const auto pkg = package(a.package_name, version);
    const auto& tr = tracer(*pkg, problem);
    if (s.resumes) {
      const auto& prev = sessions.at(*s.resumes);
      const auto& prev_tracer = tracer(*package(prev.package_name, prev.package_version), prev.problem_name);
      graph::TracerState start = prev_tracer.init_state();
      if (prev.resumes) start = sessions.at(*prev.resumes).state;
      s.state = replay(prev_tracer, start, a.test_mode, session_records(prev.id));
    } else {
      s.state = tr.init_state();
    }
    db.query("INSERT INTO sessions(id, student_id, assignment_id, problem_name, package_name, package_version, "
             "opened_at, resumes) VALUES(?, ?, ?, ?, ?, ?, ?, ?)",
             {s.id, s.student_id, s.assignment_id, s.problem_name, s.package_name, std::int64_t{version},
              std::int64_t{now}, s.resumes ? SqlValue(*s.resumes) : SqlValue(nullptr)});
    if (!s.resumes) {
      for (const auto& sai : s.state.initial_tutor_actions) log->log_tutor_action(sai, context_for(s, a, now));
    }
    latest_session[{student_id, a.id}] = s.id;
    note_session_state(s);
    return sessions[s.id] = std::move(s);
  }

  StepResult commit(SessionState& s, const Assignment& a, const graph::TraceResult& result, TimestampMs now) {
    const auto pkg = package(s.package_name, s.package_version);
    const auto ctx = context_for(s, a, now);
    auto model = models[s.student_id];
    model.student_id = s.student_id;
    model = student::apply_transaction(model, result.evaluation, pkg->package.kc_params, detectors,
                                       log::draft_record(result.evaluation, ctx));
    log->log_transaction(result.evaluation, ctx, model);
    for (const auto& sai : result.evaluation.tutor_actions) log->log_tutor_action(sai, ctx);
    models[s.student_id] = std::move(model);
    s.state = result.state;
    s.last_activity = now;
    note_session_state(s);
    return {result.evaluation, a.test_mode};
  }
};

Tutorshop::Tutorshop(ServiceConfig config, const Clock& clock)
    : rt_(std::make_unique<Runtime>(std::move(config), clock)) {}

Tutorshop::~Tutorshop() = default;

std::string Tutorshop::login(const std::string& login) {
  std::lock_guard lock(rt_->mu);
  auto rows = rt_->db.query("SELECT id FROM accounts WHERE login = ?", {login});
  if (rows.empty()) throw Error(ErrorCode::kUnauthorized, "unknown login '" + login + "'");
  std::string token = new_token();
  rt_->tokens[token] = as_text(rows[0][0]);
  return token;
}

Account Tutorshop::authenticate(const std::string& token) const {
  std::lock_guard lock(rt_->mu);
  const auto it = rt_->tokens.find(token);
  if (it == rt_->tokens.end()) throw Error(ErrorCode::kUnauthorized, "missing or unknown token");
  auto account = rt_->find_account(it->second);
  if (!account) throw Error(ErrorCode::kUnauthorized, "account no longer exists");
  return *account;
}

Account Tutorshop::create_account(const Account& caller, Account account) {
  std::lock_guard lock(rt_->mu);
  rt_->require_staff(caller);
  if (caller.role == Role::kTeacher && account.role != Role::kStudent) {
    throw Error(ErrorCode::kForbidden, "teachers may only create student accounts");
  }
  if (account.login.empty()) throw Error(ErrorCode::kInvalidArgument, "login is required");
  if (account.id.empty()) account.id = account.login;
  if (account.display_name.empty()) account.display_name = account.login;
  try {
    rt_->db.query("INSERT INTO accounts(id, login, role, display_name) VALUES(?, ?, ?, ?)",
                  {account.id, account.login, std::string(to_string(account.role)), account.display_name});
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConflict) {
      throw Error(ErrorCode::kConflict, "account id or login already taken: '" + account.login + "'");
    }
    throw;
  }
  return account;
}

ClassRoster Tutorshop::create_class(const Account& caller, ClassRoster roster) {
  std::lock_guard lock(rt_->mu);
  rt_->require_staff(caller);
  if (roster.id.empty()) throw Error(ErrorCode::kInvalidArgument, "class id is required");
  if (roster.teacher_id.empty() || caller.role == Role::kTeacher) roster.teacher_id = caller.id;
  const auto teacher = rt_->find_account(roster.teacher_id);
  if (!teacher || teacher->role == Role::kStudent) {
    throw Error(ErrorCode::kInvalidArgument, "'" + roster.teacher_id + "' is not a teacher account");
  }
  if (roster.name.empty()) roster.name = roster.id;
  const auto students = roster.student_ids;
  rt_->db.transaction([&] {
    try {
      rt_->db.query("INSERT INTO classes(id, name, teacher_id) VALUES(?, ?, ?)",
                    {roster.id, roster.name, roster.teacher_id});
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kConflict) throw Error(ErrorCode::kConflict, "class '" + roster.id + "' exists");
      throw;
    }
    for (const auto& s : students) {
      const auto acct = rt_->find_account(s);
      if (!acct || acct->role != Role::kStudent) throw Error(ErrorCode::kUnknownStudent, "no student '" + s + "'");
      rt_->db.query("INSERT OR IGNORE INTO class_members(class_id, student_id) VALUES(?, ?)", {roster.id, s});
    }
  });
  return rt_->require_class(roster.id);
}

ClassRoster Tutorshop::add_students(const Account& caller, const std::string& class_id,
                                    const std::vector<std::string>& student_ids) {
  std::lock_guard lock(rt_->mu);
  const auto c = rt_->require_class(class_id);
  rt_->require_class_staff(caller, c);
  rt_->db.transaction([&] {
    for (const auto& s : student_ids) {
      const auto acct = rt_->find_account(s);
      if (!acct || acct->role != Role::kStudent) throw Error(ErrorCode::kUnknownStudent, "no student '" + s + "'");
      rt_->db.query("INSERT OR IGNORE INTO class_members(class_id, student_id) VALUES(?, ?)", {class_id, s});
    }
  });
  return rt_->require_class(class_id);
}

ClassRoster Tutorshop::get_class(const Account& caller, const std::string& class_id) const {
  std::lock_guard lock(rt_->mu);
  const auto c = rt_->require_class(class_id);
  rt_->require_class_staff(caller, c);
  return c;
}

int Tutorshop::publish_package(const Account& caller, Package package) {
  std::lock_guard lock(rt_->mu);
  rt_->require_staff(caller);
  if (auto diagnostics = validate_package(package); !diagnostics.empty()) {
    throw ValidationError(std::move(diagnostics));
  }
  package.version = rt_->latest_version(package.name) + 1;
  rt_->db.query("INSERT INTO packages(name, version, document) VALUES(?, ?, ?)",
                {package.name, std::int64_t{package.version}, package_to_json(package).dump()});
  return package.version;
}

std::vector<int> Tutorshop::package_versions(const std::string& name) const {
  std::lock_guard lock(rt_->mu);
  std::vector<int> out;
  for (const auto& r : rt_->db.query("SELECT version FROM packages WHERE name = ? ORDER BY version", {name})) {
    out.push_back(static_cast<int>(as_int(r[0])));
  }
  return out;
}

Assignment Tutorshop::create_assignment(const Account& caller, Assignment a) {
  std::lock_guard lock(rt_->mu);
  const auto c = rt_->require_class(a.class_id);
  rt_->require_class_staff(caller, c);
  if (a.id.empty()) throw Error(ErrorCode::kInvalidArgument, "assignment id is required");
  if (rt_->find_assignment(a.id)) throw Error(ErrorCode::kConflict, "assignment '" + a.id + "' exists");
  if (a.name.empty()) a.name = a.id;
  if (a.package_version == 0) a.package_version = rt_->latest_version(a.package_name);
  const auto pkg = rt_->package(a.package_name, a.package_version);
  if (!pkg->package.find_curriculum(a.curriculum_id)) {
    throw Error(ErrorCode::kNotFound, "package '" + a.package_name + "' has no curriculum '" + a.curriculum_id + "'");
  }
  for (const auto& pre : a.prerequisites) {
    if (pre == a.id) throw Error(ErrorCode::kInvalidArgument, "assignment cannot require itself");
    rt_->require_assignment(pre);
  }
  if (a.policy) {
    const auto policy = selection::Policy::parse(*a.policy);
    if (policy.kind == selection::Policy::Kind::kCustom && !rt_->policies.contains(policy.custom_name)) {
      throw Error(ErrorCode::kUnknownPolicy, "no policy '" + policy.custom_name + "'");
    }
  }
  rt_->db.query(std::string("INSERT INTO assignments(") + kAssignmentColumns +
                    ") VALUES(?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)",
                {a.id, a.name, a.class_id, a.package_name, std::int64_t{a.package_version}, a.curriculum_id,
                 a.condition_name, std::int64_t{a.test_mode ? 1 : 0}, json(a.prerequisites).dump(),
                 a.policy ? SqlValue(*a.policy) : SqlValue(nullptr),
                 a.group ? SqlValue(*a.group) : SqlValue(nullptr)});
  return a;
}

Assignment Tutorshop::repoint_assignment(const Account& caller, const std::string& assignment_id, int version) {
  std::lock_guard lock(rt_->mu);
  auto a = rt_->require_assignment(assignment_id);
  rt_->require_class_staff(caller, rt_->require_class(a.class_id));
  const auto pkg = rt_->package(a.package_name, version);
  if (!pkg->package.find_curriculum(a.curriculum_id)) {
    throw Error(ErrorCode::kNotFound, "version " + std::to_string(version) + " has no curriculum '" +
                                          a.curriculum_id + "'");
  }
  rt_->db.query("UPDATE assignments SET package_version = ? WHERE id = ?", {std::int64_t{version}, a.id});
  a.package_version = version;
  return a;
}

Assignment Tutorshop::get_assignment(const std::string& assignment_id) const {
  std::lock_guard lock(rt_->mu);
  return rt_->require_assignment(assignment_id);
}

std::size_t Tutorshop::import_conditions(const Account& caller, const std::string& csv) {
  std::lock_guard lock(rt_->mu);
  rt_->require_staff(caller);
  struct Row {
    std::string student;
    std::string assignment;
    std::string group;
  };
  std::vector<Row> fresh;
  std::set<std::pair<std::string, std::string>> seen;  // (student, group)
  auto lines = split(csv, '\n');
  int line_no = 0;
  bool header = true;
  for (auto& line : lines) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto fields = split(line, ',');
    for (auto& f : fields) {
      f = std::string(trim(f));
      if (f.size() >= 2 && f.front() == '"' && f.back() == '"') f = f.substr(1, f.size() - 2);
    }
    if (header) {
      if (fields.size() != 2 || to_lower(fields[0]) != "student_id" || to_lower(fields[1]) != "assignment_id") {
        throw Error(ErrorCode::kParseError, "condition CSV header must be student_id,assignment_id", line_no);
      }
      header = false;
      continue;
    }
    if (fields.size() != 2) throw Error(ErrorCode::kParseError, "expected 2 fields", line_no);
    const auto acct = rt_->find_account(fields[0]);
    if (!acct || acct->role != Role::kStudent) {
      throw Error(ErrorCode::kUnknownStudent, "line " + std::to_string(line_no) + ": no student '" + fields[0] + "'",
                  line_no);
    }
    const auto a = rt_->find_assignment(fields[1]);
    if (!a) {
      throw Error(ErrorCode::kUnknownAssignment,
                  "line " + std::to_string(line_no) + ": no assignment '" + fields[1] + "'", line_no);
    }
    rt_->require_class_staff(caller, rt_->require_class(a->class_id));
    if (!rt_->is_member(a->class_id, acct->id)) {
      throw Error(ErrorCode::kUnknownStudent,
                  "line " + std::to_string(line_no) + ": '" + acct->id + "' is not in class '" + a->class_id + "'",
                  line_no);
    }
    const std::string group = Runtime::group_of(*a);
    if (!seen.insert({acct->id, group}).second) {
      throw Error(ErrorCode::kDuplicateRow,
                  "line " + std::to_string(line_no) + ": '" + acct->id + "' already mapped in group '" + group + "'",
                  line_no);
    }
    auto existing = rt_->db.query("SELECT assignment_id FROM condition_mappings WHERE student_id = ? AND grp = ?",
                                  {acct->id, group});
    if (!existing.empty()) {
      if (as_text(existing[0][0]) == a->id) continue;
      throw Error(ErrorCode::kDuplicateRow,
                  "line " + std::to_string(line_no) + ": '" + acct->id + "' is already mapped to '" +
                      as_text(existing[0][0]) + "'",
                  line_no);
    }
    fresh.push_back({acct->id, a->id, group});
  }
  if (header) throw Error(ErrorCode::kParseError, "condition CSV is empty; expected a header", 1);
  rt_->db.transaction([&] {
    for (const auto& r : fresh) {
      rt_->db.query("INSERT INTO condition_mappings(student_id, assignment_id, grp) VALUES(?, ?, ?)",
                    {r.student, r.assignment, r.group});
    }
  });
  return fresh.size();
}

std::vector<WorklistEntry> Tutorshop::worklist(const Account& caller, const std::string& student_id) const {
  std::lock_guard lock(rt_->mu);
  rt_->require_view_student(caller, student_id);
  const auto acct = rt_->find_account(student_id);
  if (!acct || acct->role != Role::kStudent) throw Error(ErrorCode::kUnknownStudent, "no student '" + student_id + "'");
  std::vector<WorklistEntry> out;
  for (const auto& class_id : rt_->classes_of_student(student_id)) {
    for (const auto& a : rt_->assignments_of_class(class_id)) {
      if (rt_->visible(student_id, a)) out.push_back({a, rt_->status(student_id, a)});
    }
  }
  return out;
}

SessionView Tutorshop::open_session(const Account& caller, const std::string& assignment_id) {
  std::lock_guard lock(rt_->mu);
  if (caller.role != Role::kStudent) throw Error(ErrorCode::kForbidden, "only students open sessions");
  const auto a = rt_->require_assignment(assignment_id);
  if (!rt_->visible(caller.id, a)) {
    throw Error(ErrorCode::kUnknownAssignment, "assignment '" + a.id + "' is not on your worklist");
  }
  if (rt_->status(caller.id, a) == AssignmentStatus::kLocked) {
    throw Error(ErrorCode::kAssignmentLocked, "assignment '" + a.id + "' is locked");
  }
  const TimestampMs now = rt_->clock.now();
  if (auto it = rt_->latest_session.find({caller.id, a.id}); it != rt_->latest_session.end()) {
    auto& s = rt_->sessions.at(it->second);
    if (!s.state.completed) {
      if (now - s.last_activity <= rt_->config.session_idle_ms) return rt_->view_of(s, a, true);
      const std::string problem = s.problem_name;
      const int version = s.package_version;
      const std::string prev = s.id;
      auto& resumed = rt_->start_session(caller.id, a, problem, version, prev, now);
      return rt_->view_of(resumed, a, true);
    }
  }
  const auto next = rt_->policies.select_next(rt_->policy_context(caller.id, a));
  if (!next) {
    SessionView done;
    done.assignment_complete = true;
    done.assignment_id = a.id;
    done.test_mode = a.test_mode;
    return done;
  }
  auto& s = rt_->start_session(caller.id, a, *next, a.package_version, std::nullopt, now);
  return rt_->view_of(s, a, false);
}

StepResult Tutorshop::submit_transaction(const Account& caller, const std::string& session_id,
                                         const graph::Sai& sai) {
  std::lock_guard lock(rt_->mu);
  auto& s = rt_->own_session(caller, session_id);
  const TimestampMs now = rt_->clock.now();
  const auto a = rt_->check_live(s, now);
  if (s.state.completed) throw Error(ErrorCode::kConflict, "problem '" + s.problem_name + "' is already complete");
  const auto pkg = rt_->package(s.package_name, s.package_version);
  graph::Transaction txn;
  txn.student_id = s.student_id;
  txn.session_id = s.id;
  txn.timestamp = now;
  txn.selection = sai.selection;
  txn.action = sai.action;
  txn.input = sai.input;
  const auto result = rt_->tracer(*pkg, s.problem_name).trace(s.state, txn, a.test_mode);
  return rt_->commit(s, a, result, now);
}

StepResult Tutorshop::request_hint(const Account& caller, const std::string& session_id,
                                   const std::optional<std::string>& step) {
  std::lock_guard lock(rt_->mu);
  auto& s = rt_->own_session(caller, session_id);
  const TimestampMs now = rt_->clock.now();
  const auto a = rt_->check_live(s, now);
  const auto pkg = rt_->package(s.package_name, s.package_version);
  const auto result = rt_->tracer(*pkg, s.problem_name).request_hint(s.state, step, a.test_mode);
  return rt_->commit(s, a, result, now);
}

ClassReport Tutorshop::class_report(const Account& caller, const std::string& class_id) const {
  std::lock_guard lock(rt_->mu);
  const auto c = rt_->require_class(class_id);
  rt_->require_class_staff(caller, c);
  std::set<std::string> assignment_ids;
  for (const auto& a : rt_->assignments_of_class(class_id)) assignment_ids.insert(a.id);
  ClassReport report{class_id, {}};
  for (const auto& student_id : c.student_ids) {
    ReportRow row;
    row.student_id = student_id;
    row.display_name = rt_->find_account(student_id)->display_name;
    int first = 0;
    int correct = 0;
    for (const auto& r : rt_->log->store().records()) {
      if (r.anon_student_id != student_id || !assignment_ids.contains(r.level_assignment)) continue;
      if (r.tutor_performed()) continue;
      row.last_activity = std::max(row.last_activity.value_or(r.time), r.time);
      if (r.attempt_at_step == 1) {
        ++first;
        correct += r.outcome == log::Outcome::kCorrect;
      }
    }
    row.percent_correct = first == 0 ? 0.0 : 100.0 * correct / first;
    for (const auto& id : assignment_ids) {
      if (auto it = rt_->progress.find({student_id, id}); it != rt_->progress.end()) {
        row.problems_completed += static_cast<int>(it->second.completed_problems.size());
      }
    }
    if (auto it = rt_->models.find(student_id); it != rt_->models.end()) {
      row.mastered_kcs = static_cast<int>(student::mastered_kcs(it->second).size());
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string Tutorshop::export_log(const Account& caller) const {
  std::lock_guard lock(rt_->mu);
  rt_->require_researcher(caller);
  return log::to_tsv(rt_->log->store());
}

student::StudentModel Tutorshop::student_model(const Account& caller, const std::string& student_id) const {
  std::lock_guard lock(rt_->mu);
  rt_->require_view_student(caller, student_id);
  if (auto it = rt_->models.find(student_id); it != rt_->models.end()) return it->second;
  student::StudentModel empty;
  empty.student_id = student_id;
  return empty;
}

}  // namespace tutorlab::service
