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

#include "tutorlab/harness/replay.hpp"

#include <map>
#include <memory>

#include "tutorlab/common/error.hpp"
#include "tutorlab/graph/tracer.hpp"
#include "tutorlab/harness/inputs.hpp"

namespace tutorlab::harness {

using nlohmann::json;

ReplayReport replay(const log::LogStore& store, const service::Package& package) {
  std::map<std::string, std::shared_ptr<const graph::Tracer>> tracers;
  auto tracer_for = [&](const std::string& problem) -> const graph::Tracer& {
    auto it = tracers.find(problem);
    if (it == tracers.end()) {
      const auto* g = package.find_problem(problem);
      if (!g) throw Error(ErrorCode::kUnknownProblem, "package '" + package.name + "' has no problem '" + problem + "'");
      it = tracers.emplace(problem, std::make_shared<const graph::Tracer>(*g)).first;
    }
    return *it->second;
  };

  struct Attempt {
    const graph::Tracer* tracer;
    graph::TracerState state;
  };
  std::map<std::string, Attempt> open;
  ReplayReport report;
  for (const auto& r : store.records()) {
    if (r.tutor_performed()) continue;
    const std::string key = r.session_id.empty() ? r.anon_student_id + "\x1f" + r.problem_name
                                                 : r.session_id + "\x1f" + r.problem_name;
    auto it = open.find(key);
    if (it == open.end()) {
      const auto& tr = tracer_for(r.problem_name);
      it = open.emplace(key, Attempt{&tr, tr.init_state()}).first;
    }
    auto& [tracer, state] = it->second;
    ++report.replayed;

    graph::Outcome recomputed = graph::Outcome::kIncorrect;
    std::optional<graph::TracerState> next;
    try {
      if (r.outcome == graph::Outcome::kHint) {
        auto result = tracer->request_hint(state, r.selection.empty() ? std::nullopt : std::optional(r.selection),
                                           false);
        recomputed = result.evaluation.outcome;
        next = std::move(result.state);
      } else {
        graph::Transaction txn;
        txn.student_id = r.anon_student_id;
        txn.session_id = r.session_id;
        txn.timestamp = r.time;
        txn.selection = r.selection;
        txn.action = r.action;
        txn.input = r.input;
        auto result = tracer->trace(state, txn, false);
        recomputed = result.evaluation.outcome;
        next = std::move(result.state);
      }
    } catch (const Error& e) {
      // UnknownSelection and NoHintAvailable leave the state alone; the
      // record still gets compared as incorrect.
      if (e.code() != ErrorCode::kUnknownSelection && e.code() != ErrorCode::kNoHintAvailable) throw;
    }

    if (recomputed != r.outcome) {
      report.divergences.push_back(
          {r.row, r.anon_student_id, r.problem_name, r.step_name, r.input, r.outcome, recomputed});
    }
    if (recomputed == r.outcome) {
      if (next) state = std::move(*next);
    } else if (r.outcome == graph::Outcome::kCorrect) {
      // The log says this step was done: advance along it with an input
      // the graph accepts.
      for (const auto* link : tracer->available_links(state)) {
        if (link->selection() != r.selection) continue;
        if (const auto sai = correct_attempt(*link)) {
          graph::Transaction txn;
          txn.selection = sai->selection;
          txn.action = sai->action;
          txn.input = sai->input;
          state = tracer->trace(state, txn, false).state;
          break;
        }
      }
    }
  }
  return report;
}

json to_json(const ReplayReport& report) {
  json rows = json::array();
  for (const auto& d : report.divergences) {
    rows.push_back({{"row", d.row},
                    {"student", d.student},
                    {"problem", d.problem},
                    {"step", d.step},
                    {"input", d.input},
                    {"logged", graph::to_string(d.logged)},
                    {"recomputed", graph::to_string(d.recomputed)}});
  }
  return {{"replayed", report.replayed}, {"divergences", rows}};
}

std::string to_tsv(const ReplayReport& report) {
  std::string out = "Row\tStudent\tProblem\tStep\tInput\tLogged\tRecomputed\n";
  for (const auto& d : report.divergences) {
    out += std::to_string(d.row) + "\t" + d.student + "\t" + d.problem + "\t" + d.step + "\t" + d.input + "\t" +
           std::string(graph::to_string(d.logged)) + "\t" + std::string(graph::to_string(d.recomputed)) + "\n";
  }
  return out;
}

}  // namespace tutorlab::harness
