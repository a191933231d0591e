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

#include "tutorlab/harness/simulation.hpp"

#include <algorithm>

#include "tutorlab/common/error.hpp"
#include "tutorlab/graph/tracer.hpp"
#include "tutorlab/harness/inputs.hpp"

namespace tutorlab::harness {

using nlohmann::json;

const GenerativeParams& SimulatedStudent::params(const std::string& kc) const {
  const auto it = kcs.find(kc);
  return it == kcs.end() ? defaults : it->second;
}

namespace {

void check_probability(double p, const std::string& what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, what + " must be a probability, got " + std::to_string(p));
  }
}

void check_params(const GenerativeParams& g, const std::string& who) {
  check_probability(g.p_init, who + " p_init");
  check_probability(g.p_transit, who + " p_transit");
  check_probability(g.p_slip, who + " p_slip");
  check_probability(g.p_guess, who + " p_guess");
}

// Local copy of the session's tracer, advanced only by attempts the
// student means to be correct.
class Mirror {
 public:
  Mirror(const graph::BehaviorGraph& g, const json& filled) : tracer_(g), state_(tracer_.init_state()) {
    for (const auto& sai : filled) {
      graph::Transaction txn;
      txn.selection = sai.at("selection").get<std::string>();
      txn.action = sai.at("action").get<std::string>();
      txn.input = sai.at("input").get<std::string>();
      try {
        const auto r = tracer_.trace(state_, txn, false);
        if (r.evaluation.outcome == graph::Outcome::kCorrect) state_ = r.state;
      } catch (const Error&) {
        // widgets the tutor fills have no student links
      }
    }
  }

  bool completed() const { return state_.completed; }

  const graph::Link& next_link() const {
    const auto links = tracer_.available_links(state_);
    for (const auto* link : links) {
      if (correct_attempt(*link)) return *link;
    }
    throw Error(ErrorCode::kInvalidGraph, "no answerable step in '" + tracer_.graph().problem_name + "'");
  }

  void advance(const graph::Sai& sai) {
    graph::Transaction txn;
    txn.selection = sai.selection;
    txn.action = sai.action;
    txn.input = sai.input;
    const auto r = tracer_.trace(state_, txn, false);
    if (r.evaluation.outcome != graph::Outcome::kCorrect) {
      throw Error(ErrorCode::kStaleState, "simulated student lost track of '" + tracer_.graph().problem_name + "'");
    }
    state_ = r.state;
  }

 private:
  graph::Tracer tracer_;
  graph::TracerState state_;
};

json sai_json(const graph::Sai& sai) {
  return {{"selection", sai.selection}, {"action", sai.action}, {"input", sai.input}};
}

}  // namespace

void check_student(const SimulatedStudent& s) {
  check_params(s.defaults, s.id);
  for (const auto& [kc, g] : s.kcs) check_params(g, s.id + "/" + kc);
  check_probability(s.hint_propensity, s.id + " hint_propensity");
  if (s.retry_cap < 1) throw Error(ErrorCode::kInvalidArgument, s.id + " retry_cap must be at least 1");
}

Learner::Learner(SimulatedStudent student) : student_(std::move(student)), rng_(student_.seed) {
  check_student(student_);
}

bool Learner::knows(const std::string& kc) {
  auto it = known_.find(kc);
  if (it == known_.end()) it = known_.emplace(kc, rng_.bernoulli(student_.params(kc).p_init)).first;
  return it->second;
}

double Learner::p_correct(const std::vector<std::string>& kcs) {
  if (kcs.empty()) return 1.0;
  bool all_known = true;
  double slip = 0.0;
  double guess = 1.0;
  for (const auto& kc : kcs) {
    const auto& g = student_.params(kc);
    slip = std::max(slip, g.p_slip);
    if (!knows(kc)) {
      all_known = false;
      guess = std::min(guess, g.p_guess);
    }
  }
  return all_known ? 1.0 - slip : guess;
}

void Learner::practice(const std::vector<std::string>& kcs) {
  for (const auto& kc : kcs) {
    if (!knows(kc) && rng_.bernoulli(student_.params(kc).p_transit)) known_[kc] = true;
  }
}

SessionStats simulate_session(Learner& learner, ServiceClient& client, const std::string& token,
                              const std::string& assignment_id, const service::Package& package,
                              const SessionLimits& limits, ManualClock* clock) {
  SessionStats stats;
  auto& rng = learner.rng();
  auto think = [&] {
    const auto span = static_cast<std::uint64_t>(std::max<TimestampMs>(0, limits.think_max_ms - limits.think_min_ms));
    const TimestampMs pause = limits.think_min_ms + static_cast<TimestampMs>(rng.below(span + 1));
    if (clock) clock->advance(pause);
  };

  while (!limits.max_problems || static_cast<int>(stats.issued.size()) < *limits.max_problems) {
    think();
    const json view = client.call("POST", "/api/assignments/" + assignment_id + "/session", token);
    if (view.at("assignment_complete").get<bool>()) break;
    const std::string session = view.at("session_id").get<std::string>();
    const std::string problem = view.at("problem").get<std::string>();
    const bool test_mode = view.at("test_mode").get<bool>();
    const auto* g = package.find_problem(problem);
    if (!g) throw Error(ErrorCode::kUnknownProblem, "package has no problem '" + problem + "'");
    if (!view.at("resumed").get<bool>() || stats.issued.empty() || stats.issued.back().session_id != session) {
      stats.issued.push_back({assignment_id, problem, session});
    }
    Mirror mirror(*g, view.value("filled", json::array()));
    const std::string base = "/api/sessions/" + session;

    auto check_response = [&](const json& r, bool meant_correct) {
      if (test_mode) {
        if (r.contains("outcome") || r.contains("feedback") || r.contains("completed_problem")) {
          ++stats.leaked_outcomes;
        }
        return;
      }
      const bool correct = r.at("outcome") == "CORRECT";
      if (correct != meant_correct) {
        throw Error(ErrorCode::kStaleState, "service and simulated student disagree on '" + problem + "'");
      }
    };
    auto ask_hint = [&](const std::string& step) -> bool {
      think();
      try {
        client.call("POST", base + "/hint", token, {{"step", step}});
        ++stats.transactions;
        return true;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kHintsDisabled) throw;
        ++stats.hints_refused;
        return false;
      }
    };
    auto attempt = [&](const graph::Sai& sai, bool meant_correct) {
      think();
      check_response(client.call("POST", base + "/transactions", token, sai_json(sai)), meant_correct);
      ++stats.transactions;
    };

    while (!mirror.completed()) {
      const graph::Link& link = mirror.next_link();
      const graph::Sai right = *correct_attempt(link);
      bool hinted = false;
      if (learner.student().hint_propensity > 0 && rng.bernoulli(learner.student().hint_propensity)) {
        hinted = ask_hint(right.selection);
        if (hinted) learner.practice(link.kcs);
      }
      bool done = false;
      for (int tries = 0; !done && tries < learner.student().retry_cap; ++tries) {
        const bool correct = rng.bernoulli(hinted ? kCorrectAfterHint : learner.p_correct(link.kcs));
        if (correct) {
          attempt(right, true);
          done = true;
        } else {
          graph::Sai wrong = right;
          wrong.input = sample_incorrect_input(*link.matcher->input, rng).value_or(right.input + "?");
          attempt(wrong, false);
        }
        if (tries == 0 && !hinted) learner.practice(link.kcs);
      }
      if (!done) {
        // Stuck: hint-seeking students read down to the bottom-out hint.
        if (learner.student().hint_propensity > 0 && !test_mode) {
          for (std::size_t level = 0; level < link.hints.size(); ++level) ask_hint(right.selection);
        }
        attempt(right, true);
      }
      mirror.advance(right);
    }
    ++stats.problems_completed;
  }
  return stats;
}

}  // namespace tutorlab::harness
