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

#include "tutorlab/harness/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "tutorlab/common/error.hpp"
#include "tutorlab/common/strings.hpp"
#include "tutorlab/log/log_store.hpp"
#include "tutorlab/service/api.hpp"
#include "tutorlab/service/http.hpp"

namespace tutorlab::harness {

using nlohmann::json;

namespace {

Range range_from(const json& doc, const char* key, Range fallback) {
  if (!doc.contains(key)) return fallback;
  const auto& v = doc.at(key);
  if (v.is_number()) return {v.get<double>(), v.get<double>()};
  if (v.is_array() && v.size() == 2) return {v[0].get<double>(), v[1].get<double>()};
  throw Error(ErrorCode::kParseError, std::string("cohort '") + key + "' must be a number or [lo, hi]");
}

double draw(Rng& rng, Range r) { return r.lo == r.hi ? r.lo : rng.uniform(r.lo, r.hi); }

constexpr TimestampMs kDefaultStart = 1788249600000;  // 2026-09-01T08:00:00Z

}  // namespace

ExperimentScript script_from_json(const json& doc, const std::filesystem::path& base_dir) {
  ExperimentScript s;
  try {
    s.name = doc.value("name", std::string("experiment"));
    s.seed = doc.value("seed", std::uint64_t{1});
    const std::filesystem::path pkg = doc.at("package").get<std::string>();
    s.package_dir = pkg.is_absolute() ? pkg : base_dir / pkg;
    s.class_id = doc.value("class", s.class_id);
    s.teacher = doc.value("teacher", s.teacher);
    s.start = doc.contains("start") ? parse_iso8601(doc.at("start").get<std::string>()) : kDefaultStart;
    const auto& c = doc.at("cohort");
    s.cohort.n = c.at("n").get<int>();
    s.cohort.id_prefix = c.value("id_prefix", s.cohort.id_prefix);
    s.cohort.p_init = range_from(c, "p_init", s.cohort.p_init);
    s.cohort.p_transit = range_from(c, "p_transit", s.cohort.p_transit);
    s.cohort.p_slip = range_from(c, "p_slip", s.cohort.p_slip);
    s.cohort.p_guess = range_from(c, "p_guess", s.cohort.p_guess);
    s.cohort.hint_propensity = range_from(c, "hint_propensity", s.cohort.hint_propensity);
    s.cohort.retry_cap = c.value("retry_cap", s.cohort.retry_cap);
    for (const auto& a : doc.at("assignments")) {
      service::Assignment x;
      x.id = a.at("id").get<std::string>();
      x.name = a.value("name", x.id);
      x.curriculum_id = a.at("curriculum").get<std::string>();
      x.condition_name = a.value("condition", std::string());
      x.test_mode = a.value("test_mode", false);
      x.prerequisites = a.value("prerequisites", std::vector<std::string>{});
      if (a.contains("policy")) x.policy = a.at("policy").get<std::string>();
      if (a.contains("group")) x.group = a.at("group").get<std::string>();
      s.assignments.push_back(std::move(x));
    }
    s.arms = doc.value("arms", std::vector<std::vector<std::string>>{});
    if (doc.contains("phases")) {
      for (const auto& p : doc.at("phases")) {
        PhaseSpec phase;
        phase.assignments = p.at("assignments").get<std::vector<std::string>>();
        if (p.contains("max_problems")) phase.max_problems = p.at("max_problems").get<int>();
        s.phases.push_back(std::move(phase));
      }
    } else {
      // one phase per assignment, in script order
      for (const auto& a : s.assignments) s.phases.push_back({{a.id}, std::nullopt});
    }
    if (doc.contains("think_ms")) {
      const auto t = doc.at("think_ms").get<std::vector<TimestampMs>>();
      if (t.size() != 2) throw Error(ErrorCode::kParseError, "think_ms must be [lo, hi]");
      s.limits.think_min_ms = t[0];
      s.limits.think_max_ms = t[1];
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("experiment script: ") + e.what());
  }
  for (auto& a : s.assignments) a.class_id = s.class_id;
  check_script(s);
  return s;
}

ExperimentScript load_script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot read " + path.string());
  try {
    return script_from_json(json::parse(in), path.parent_path());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
}

void check_script(const ExperimentScript& s) {
  if (s.cohort.n < 1) throw Error(ErrorCode::kInvalidArgument, "cohort needs at least one student");
  std::set<std::string> ids;
  for (const auto& a : s.assignments) {
    if (!ids.insert(a.id).second) throw Error(ErrorCode::kInvalidArgument, "assignment '" + a.id + "' twice");
  }
  auto known = [&](const std::string& id, const std::string& where) {
    if (!ids.contains(id)) throw Error(ErrorCode::kInvalidArgument, where + " names unknown assignment '" + id + "'");
  };
  for (const auto& a : s.assignments) {
    for (const auto& p : a.prerequisites) known(p, "prerequisites of '" + a.id + "'");
  }
  for (const auto& arm : s.arms) {
    if (arm.empty()) throw Error(ErrorCode::kInvalidArgument, "empty arm");
    for (const auto& id : arm) known(id, "arm");
  }
  for (const auto& phase : s.phases) {
    for (const auto& id : phase.assignments) known(id, "phase");
  }
  for (const Range* r : {&s.cohort.p_init, &s.cohort.p_transit, &s.cohort.p_slip, &s.cohort.p_guess,
                         &s.cohort.hint_propensity}) {
    if (!(0.0 <= r->lo && r->lo <= r->hi && r->hi <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "cohort ranges must satisfy 0 <= lo <= hi <= 1");
    }
  }
  if (s.limits.think_min_ms < 0 || s.limits.think_max_ms < s.limits.think_min_ms) {
    throw Error(ErrorCode::kInvalidArgument, "think_ms must be 0 <= lo <= hi");
  }
}

std::vector<std::string> cohort_ids(const ExperimentScript& s) {
  const int width = static_cast<int>(std::to_string(s.cohort.n).size());
  std::vector<std::string> ids;
  for (int i = 1; i <= s.cohort.n; ++i) {
    std::string num = std::to_string(i);
    ids.push_back(s.cohort.id_prefix + std::string(width - num.size(), '0') + num);
  }
  return ids;
}

std::vector<SimulatedStudent> make_cohort(const ExperimentScript& s) {
  std::vector<SimulatedStudent> out;
  for (const auto& id : cohort_ids(s)) {
    Rng rng(derive_seed(s.seed, fnv1a("params/" + id)));
    SimulatedStudent st;
    st.id = id;
    st.defaults = {draw(rng, s.cohort.p_init), draw(rng, s.cohort.p_transit), draw(rng, s.cohort.p_slip),
                   draw(rng, s.cohort.p_guess)};
    st.hint_propensity = draw(rng, s.cohort.hint_propensity);
    st.retry_cap = s.cohort.retry_cap;
    st.seed = derive_seed(s.seed, fnv1a("behavior/" + id));
    out.push_back(std::move(st));
  }
  return out;
}

std::string condition_csv(const ExperimentScript& s) {
  std::string csv = "student_id,assignment_id\n";
  if (s.arms.empty()) return csv;
  auto ids = cohort_ids(s);
  Rng rng(derive_seed(s.seed, fnv1a("conditions")));
  rng.shuffle(std::span<std::string>(ids));
  std::vector<std::pair<std::string, std::size_t>> dealt;
  for (std::size_t i = 0; i < ids.size(); ++i) dealt.emplace_back(ids[i], i % s.arms.size());
  std::sort(dealt.begin(), dealt.end());
  for (const auto& [id, arm] : dealt) {
    for (const auto& a : s.arms[arm]) csv += id + "," + a + "\n";
  }
  return csv;
}

ExperimentResult run_experiment(const ExperimentScript& script, const std::filesystem::path& out_dir,
                                 const RunOptions& options) {
  check_script(script);
  const auto package = service::load_package_dir(script.package_dir);
  std::filesystem::create_directories(out_dir);
  const auto data_dir = out_dir / "service";
  std::filesystem::remove_all(data_dir);

  ManualClock clock(script.start);
  service::Tutorshop shop(service::ServiceConfig{data_dir}, clock);
  service::ApiRouter router(shop);
  std::unique_ptr<service::HttpServer> server;
  std::unique_ptr<service::ApiClient> transport;
  if (options.http) {
    server = std::make_unique<service::HttpServer>(router);
    const int port = server->start("127.0.0.1", 0);
    transport = std::make_unique<service::HttpClient>("127.0.0.1", port);
  } else {
    transport = std::make_unique<service::InProcessClient>(router);
  }
  ServiceClient client(*transport);

  ExperimentResult result;
  const auto cohort = make_cohort(script);
  const std::string csv = condition_csv(script);
  std::string admin;
  std::map<std::string, std::string> condition_of;  // assignment -> condition
  try {
    admin = client.login("admin");
    client.call("POST", "/api/accounts", admin, {{"login", script.teacher}, {"role", "teacher"}});
    const std::string teacher = client.login(script.teacher);
    for (const auto& s : cohort) client.call("POST", "/api/accounts", teacher, {{"login", s.id}});
    json ids = json::array();
    for (const auto& s : cohort) ids.push_back(s.id);
    client.call("POST", "/api/classes", teacher, {{"id", script.class_id}, {"student_ids", ids}});
    client.call("PUT", "/api/packages/" + package.name, teacher, service::package_to_json(package));
    for (auto a : script.assignments) {
      a.package_name = package.name;
      a.package_version = 0;
      client.call("POST", "/api/assignments", teacher, service::to_json(a));
      condition_of[a.id] = a.condition_name;
    }
    client.call_text("POST", "/api/conditions/import", teacher, csv);
  } catch (const Error& e) {
    throw Error(ErrorCode::kProvisioningFailed, std::string("provisioning failed: ") + e.what(), e.line());
  }
  result.conditions_path = out_dir / "conditions.csv";
  std::ofstream(result.conditions_path) << csv;

  std::map<std::string, StudentOutcome> outcomes;
  std::map<std::string, std::unique_ptr<Learner>> learners;
  std::map<std::string, std::string> tokens;
  std::map<std::string, std::map<std::string, int>> completed_in;  // student -> condition -> problems
  for (const auto& s : cohort) {
    learners[s.id] = std::make_unique<Learner>(s);
    tokens[s.id] = client.login(s.id);
    outcomes[s.id].id = s.id;
  }
  for (const auto& phase : script.phases) {
    SessionLimits limits = script.limits;
    limits.max_problems = phase.max_problems;
    for (const auto& s : cohort) {
      const json worklist = client.call("GET", "/api/worklist", tokens[s.id]);
      for (const auto& id : phase.assignments) {
        const auto item = std::find_if(worklist["assignments"].begin(), worklist["assignments"].end(),
                                       [&](const json& a) { return a["id"] == id; });
        if (item == worklist["assignments"].end() || (*item)["status"] == "locked") continue;
        const auto stats =
            simulate_session(*learners[s.id], client, tokens[s.id], id, package, limits, &clock);
        auto& o = outcomes[s.id];
        o.transactions += stats.transactions;
        o.problems_completed += stats.problems_completed;
        o.hints_refused += stats.hints_refused;
        o.leaked_outcomes += stats.leaked_outcomes;
        o.issued.insert(o.issued.end(), stats.issued.begin(), stats.issued.end());
        completed_in[s.id][condition_of[id]] += stats.problems_completed;
        result.transactions_submitted += stats.transactions;
      }
    }
  }

  const std::string tsv = client.call_text("GET", "/api/logs/export", admin);
  result.log_path = out_dir / "transactions.tsv";
  std::ofstream(result.log_path, std::ios::binary) << tsv;
  std::istringstream in(tsv);
  const auto store = log::parse_tsv(in);

  // per student and condition: first-attempt (correct, total)
  std::map<std::string, std::map<std::string, std::pair<int, int>>> first;
  for (const auto& r : store.records()) {
    if (r.tutor_performed()) continue;
    ++result.records_exported;
    // shared assessments carry no condition label
    if (r.condition_name.empty()) continue;
    auto& conds = outcomes[r.anon_student_id].conditions;
    if (std::find(conds.begin(), conds.end(), r.condition_name) == conds.end()) conds.push_back(r.condition_name);
    if (r.attempt_at_step == 1) {
      auto& [c, n] = first[r.anon_student_id][r.condition_name];
      c += r.outcome == graph::Outcome::kCorrect;
      ++n;
    }
  }
  std::map<std::string, ConditionSummary> by_condition;
  for (auto& [id, o] : outcomes) {
    const json model = client.call("GET", "/api/students/" + id + "/model", admin);
    const double threshold = model["mastery_threshold"].get<double>();
    for (const auto& [kc, b] : model["beliefs"].items()) o.mastered_kcs += b["p_mastery"].get<double>() >= threshold;
    for (const auto& cond : o.conditions) {
      auto& sum = by_condition[cond];
      sum.condition = cond;
      ++sum.students;
      const auto [c, n] = first[id][cond];
      sum.first_attempt_accuracy += n == 0 ? 0.0 : static_cast<double>(c) / n;
      sum.problems_completed += completed_in[id][cond];
      sum.mastered_kcs += o.mastered_kcs;
    }
    result.students.push_back(o);
  }
  for (auto& [cond, sum] : by_condition) {
    sum.first_attempt_accuracy /= sum.students;
    sum.problems_completed /= sum.students;
    sum.mastered_kcs /= sum.students;
    result.conditions.push_back(sum);
  }
  result.summary_path = out_dir / "summary.json";
  std::ofstream(result.summary_path) << summary_json(result).dump(2) << '\n';
  if (server) server->stop();
  return result;
}

json summary_json(const ExperimentResult& r) {
  json conditions = json::array();
  for (const auto& c : r.conditions) {
    conditions.push_back({{"condition", c.condition},
                          {"students", c.students},
                          {"mean_first_attempt_accuracy", c.first_attempt_accuracy},
                          {"mean_problems_completed", c.problems_completed},
                          {"mean_mastered_kcs", c.mastered_kcs}});
  }
  json students = json::array();
  for (const auto& s : r.students) {
    students.push_back({{"id", s.id},
                        {"conditions", s.conditions},
                        {"transactions", s.transactions},
                        {"problems_completed", s.problems_completed},
                        {"mastered_kcs", s.mastered_kcs},
                        {"hints_refused", s.hints_refused}});
  }
  return {{"log", r.log_path.filename().string()},
          {"transactions_submitted", r.transactions_submitted},
          {"records_exported", r.records_exported},
          {"conditions", conditions},
          {"students", students}};
}

}  // namespace tutorlab::harness
