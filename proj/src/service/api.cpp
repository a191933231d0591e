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

#include "tutorlab/service/api.hpp"

#include <regex>

#include "tutorlab/common/strings.hpp"
#include "tutorlab/log/log_store.hpp"

namespace tutorlab::service {

using nlohmann::json;

json ApiResponse::json() const {
  try {
    return nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("response is not JSON: ") + e.what());
  }
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParseError:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kInvalidParams:
    case ErrorCode::kMalformedRow:
    case ErrorCode::kSchemaMismatch:
      return 400;
    case ErrorCode::kUnauthorized:
      return 401;
    case ErrorCode::kForbidden:
    case ErrorCode::kHintsDisabled:
      return 403;
    case ErrorCode::kNotFound:
    case ErrorCode::kUnknownStudent:
    case ErrorCode::kUnknownAssignment:
    case ErrorCode::kUnknownClass:
    case ErrorCode::kUnknownProblem:
    case ErrorCode::kUnknownPolicy:
    case ErrorCode::kUnknownKc:
      return 404;
    case ErrorCode::kConflict:
    case ErrorCode::kDuplicateRow:
    case ErrorCode::kStaleState:
    case ErrorCode::kNoHintAvailable:
      return 409;
    case ErrorCode::kSessionExpired:
      return 410;
    case ErrorCode::kValidationFailed:
    case ErrorCode::kUnknownSelection:
    case ErrorCode::kInvalidGraph:
      return 422;
    case ErrorCode::kAssignmentLocked:
      return 423;
    default:
      return 500;
  }
}

json to_json(const Account& a) {
  return {{"id", a.id}, {"login", a.login}, {"role", to_string(a.role)}, {"display_name", a.display_name}};
}

json to_json(const ClassRoster& c) {
  return {{"id", c.id}, {"name", c.name}, {"teacher_id", c.teacher_id}, {"student_ids", c.student_ids}};
}

json to_json(const Assignment& a) {
  json doc{{"id", a.id},
           {"name", a.name},
           {"class_id", a.class_id},
           {"package", a.package_name},
           {"package_version", a.package_version},
           {"curriculum_id", a.curriculum_id},
           {"condition_name", a.condition_name},
           {"test_mode", a.test_mode},
           {"prerequisites", a.prerequisites},
           {"policy", nullptr},
           {"group", nullptr}};
  if (a.policy) doc["policy"] = *a.policy;
  if (a.group) doc["group"] = *a.group;
  return doc;
}

Assignment assignment_from_json(const json& doc) {
  try {
    Assignment a;
    a.id = doc.at("id").get<std::string>();
    a.name = doc.value("name", a.id);
    a.class_id = doc.at("class_id").get<std::string>();
    a.package_name = doc.at("package").get<std::string>();
    a.package_version = doc.value("package_version", 0);
    a.curriculum_id = doc.at("curriculum_id").get<std::string>();
    a.condition_name = doc.value("condition_name", std::string());
    a.test_mode = doc.value("test_mode", false);
    a.prerequisites = doc.value("prerequisites", std::vector<std::string>{});
    if (doc.contains("policy") && !doc["policy"].is_null()) a.policy = doc["policy"].get<std::string>();
    if (doc.contains("group") && !doc["group"].is_null()) a.group = doc["group"].get<std::string>();
    return a;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("assignment: ") + e.what());
  }
}

json to_json(const ClassReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"student_id", r.student_id},
                    {"display_name", r.display_name},
                    {"problems_completed", r.problems_completed},
                    {"percent_correct", r.percent_correct},
                    {"mastered_kcs", r.mastered_kcs},
                    {"last_activity", r.last_activity ? json(*r.last_activity) : json(nullptr)}});
  }
  return {{"class_id", report.class_id}, {"rows", rows}};
}

json to_json(const student::StudentModel& m) {
  json beliefs = json::object();
  for (const auto& [kc, b] : m.beliefs) {
    beliefs[kc] = {{"p_mastery", b.p_mastery}, {"opportunities", b.opportunities}};
  }
  return {{"student_id", m.student_id},
          {"mastery_threshold", m.mastery_threshold},
          {"beliefs", beliefs},
          {"custom_vars", m.custom_vars}};
}

json to_json(const graph::Sai& sai) {
  return {{"selection", sai.selection}, {"action", sai.action}, {"input", sai.input}};
}

json project(const StepResult& result) {
  const auto& e = result.evaluation;
  if (result.test_mode) return {{"recorded", true}, {"test_mode", true}};
  json doc{{"test_mode", false},
           {"outcome", graph::to_string(e.outcome)},
           {"feedback", e.feedback_text},
           {"step", e.step},
           {"attempt", e.attempt_at_step},
           {"kcs", e.kcs},
           {"completed_problem", e.completed_problem},
           {"tutor_actions", json::array()}};
  for (const auto& sai : e.tutor_actions) doc["tutor_actions"].push_back(to_json(sai));
  if (e.help_level) doc["help_level"] = *e.help_level;
  if (e.total_hint_levels) doc["total_hint_levels"] = *e.total_hint_levels;
  return doc;
}

json error_body(const Error& error) {
  json doc{{"error", error_code_name(error.code())}, {"message", error.what()}};
  if (error.line()) doc["line"] = *error.line();
  if (const auto* v = dynamic_cast<const ValidationError*>(&error)) {
    doc["diagnostics"] = json::array();
    for (const auto& d : v->diagnostics()) {
      doc["diagnostics"].push_back({{"code", d.code}, {"subject", d.subject}, {"message", d.message}});
    }
  }
  return doc;
}

namespace {

ApiResponse ok(const json& doc, int status = 200) { return {status, "application/json", doc.dump()}; }

json parse_body(const ApiRequest& req) {
  if (trim(req.body).empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("request body is not JSON: ") + e.what());
  }
}

std::string percent_decode(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size()) {
      out += static_cast<char>(std::stoi(std::string(s.substr(i + 1, 2)), nullptr, 16));
      i += 2;
    } else {
      out += s[i] == '+' ? ' ' : s[i];
    }
  }
  return out;
}

std::vector<std::string> segments(std::string_view path) {
  std::vector<std::string> out;
  for (auto& part : split(path, '/')) {
    if (!part.empty()) out.push_back(percent_decode(part));
  }
  return out;
}

template <typename T>
T field(const json& doc, const char* key) {
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kParseError, std::string("missing or mistyped field '") + key + "'");
  }
}

}  // namespace

ApiResponse ApiRouter::handle(const ApiRequest& request) const {
  try {
    return dispatch(request);
  } catch (const Error& e) {
    return {http_status(e.code()), "application/json", error_body(e).dump()};
  } catch (const json::exception& e) {
    return {400, "application/json", error_body(Error(ErrorCode::kParseError, e.what())).dump()};
  } catch (const std::exception& e) {
    return {500, "application/json", json{{"error", "Internal"}, {"message", e.what()}}.dump()};
  }
}

ApiResponse ApiRouter::dispatch(const ApiRequest& in) const {
  ApiRequest req = in;
  if (const auto q = req.path.find('?'); q != std::string::npos) {
    for (const auto& pair : split(std::string_view(req.path).substr(q + 1), '&')) {
      const auto eq = pair.find('=');
      if (eq == std::string::npos) {
        req.query[percent_decode(pair)] = "";
      } else {
        req.query[percent_decode(pair.substr(0, eq))] = percent_decode(pair.substr(eq + 1));
      }
    }
    req.path.resize(q);
  }
  const auto seg = segments(req.path);
  const std::string& m = req.method;
  auto route = [&](std::string_view method, std::initializer_list<const char*> pattern) {
    if (method != m || seg.size() != pattern.size()) return false;
    std::size_t i = 0;
    for (const char* p : pattern) {
      if (std::string_view(p) != "*" && seg[i] != p) return false;
      ++i;
    }
    return true;
  };
  if (seg.empty() || seg[0] != "api") throw Error(ErrorCode::kNotFound, "no route " + m + " " + req.path);

  if (route("POST", {"api", "login"})) {
    const auto body = parse_body(req);
    const std::string token = shop_.login(field<std::string>(body, "login"));
    return ok({{"token", token}, {"account", to_json(shop_.authenticate(token))}});
  }

  const Account caller = shop_.authenticate(req.token);

  if (route("GET", {"api", "worklist"})) {
    const auto it = req.query.find("student");
    const std::string student = it == req.query.end() ? caller.id : it->second;
    json items = json::array();
    for (const auto& entry : shop_.worklist(caller, student)) {
      auto doc = to_json(entry.assignment);
      doc["status"] = to_string(entry.status);
      items.push_back(std::move(doc));
    }
    return ok({{"student_id", student}, {"assignments", items}});
  }
  if (route("POST", {"api", "assignments", "*", "session"})) {
    const auto v = shop_.open_session(caller, seg[2]);
    json doc{{"assignment_id", v.assignment_id}, {"assignment_complete", v.assignment_complete},
             {"test_mode", v.test_mode}};
    if (!v.assignment_complete) {
      doc["session_id"] = v.session_id;
      doc["problem"] = v.problem_name;
      doc["resumed"] = v.resumed;
      doc["interface"] = json::array();
      for (const auto& w : v.interface) doc["interface"].push_back(graph::widget_to_json(w));
      doc["filled"] = json::array();
      for (const auto& sai : v.filled) doc["filled"].push_back(to_json(sai));
    }
    return ok(doc);
  }
  if (route("POST", {"api", "sessions", "*", "transactions"})) {
    const auto body = parse_body(req);
    const graph::Sai sai{field<std::string>(body, "selection"), field<std::string>(body, "action"),
                         field<std::string>(body, "input")};
    return ok(project(shop_.submit_transaction(caller, seg[2], sai)));
  }
  if (route("POST", {"api", "sessions", "*", "hint"})) {
    const auto body = parse_body(req);
    std::optional<std::string> step;
    if (body.contains("step") && !body["step"].is_null()) step = field<std::string>(body, "step");
    const auto result = shop_.request_hint(caller, seg[2], step);
    auto doc = project(result);
    if (!result.test_mode) doc["hint"] = result.evaluation.feedback_text;
    return ok(doc);
  }
  if (route("GET", {"api", "classes", "*", "report"})) {
    return ok(to_json(shop_.class_report(caller, seg[2])));
  }
  if (route("POST", {"api", "conditions", "import"})) {
    return ok({{"imported", shop_.import_conditions(caller, req.body)}});
  }
  if (route("PUT", {"api", "packages", "*"})) {
    const auto body = parse_body(req);
    auto package = package_from_json(body);
    if (package.name.empty()) package.name = seg[2];
    if (package.name != seg[2]) {
      throw Error(ErrorCode::kInvalidArgument, "package name '" + package.name + "' does not match the path");
    }
    const int version = shop_.publish_package(caller, std::move(package));
    return ok({{"name", seg[2]}, {"version", version}}, 201);
  }
  if (route("GET", {"api", "packages", "*"})) {
    const auto versions = shop_.package_versions(seg[2]);
    if (versions.empty()) throw Error(ErrorCode::kNotFound, "no package '" + seg[2] + "'");
    return ok({{"name", seg[2]}, {"versions", versions}});
  }
  if (route("GET", {"api", "logs", "export"})) {
    return {200, "text/tab-separated-values", shop_.export_log(caller)};
  }
  if (route("POST", {"api", "accounts"})) {
    const auto body = parse_body(req);
    Account a;
    a.login = field<std::string>(body, "login");
    a.id = body.value("id", std::string());
    a.role = role_from_string(body.value("role", std::string("student")));
    a.display_name = body.value("display_name", std::string());
    return ok(to_json(shop_.create_account(caller, a)), 201);
  }
  if (route("POST", {"api", "classes"})) {
    const auto body = parse_body(req);
    ClassRoster c;
    c.id = field<std::string>(body, "id");
    c.name = body.value("name", std::string());
    c.teacher_id = body.value("teacher_id", std::string());
    c.student_ids = body.value("student_ids", std::vector<std::string>{});
    return ok(to_json(shop_.create_class(caller, c)), 201);
  }
  if (route("GET", {"api", "classes", "*"})) {
    return ok(to_json(shop_.get_class(caller, seg[2])));
  }
  if (route("POST", {"api", "classes", "*", "students"})) {
    const auto body = parse_body(req);
    return ok(to_json(shop_.add_students(caller, seg[2], field<std::vector<std::string>>(body, "student_ids"))));
  }
  if (route("POST", {"api", "assignments"})) {
    return ok(to_json(shop_.create_assignment(caller, assignment_from_json(parse_body(req)))), 201);
  }
  if (route("GET", {"api", "assignments", "*"})) {
    return ok(to_json(shop_.get_assignment(seg[2])));
  }
  if (route("PUT", {"api", "assignments", "*"})) {
    const auto body = parse_body(req);
    return ok(to_json(shop_.repoint_assignment(caller, seg[2], field<int>(body, "package_version"))));
  }
  if (route("GET", {"api", "students", "*", "model"})) {
    return ok(to_json(shop_.student_model(caller, seg[2])));
  }
  throw Error(ErrorCode::kNotFound, "no route " + m + " " + req.path);
}

}  // namespace tutorlab::service
