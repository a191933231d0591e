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

#include "tutorlab/common/random.hpp"
#include "tutorlab/common/time.hpp"
#include "tutorlab/harness/client.hpp"
#include "tutorlab/service/package.hpp"

namespace tutorlab::harness {

// After a hint, the next attempt is correct with this probability.
inline constexpr double kCorrectAfterHint = 0.9;

struct GenerativeParams {
  double p_init = 0.3;
  double p_transit = 0.2;
  double p_slip = 0.1;
  double p_guess = 0.2;
};

struct SimulatedStudent {
  std::string id;
  GenerativeParams defaults;
  std::map<std::string, GenerativeParams> kcs;  // overrides per KC
  double hint_propensity = 0.0;  // chance of a hint before a first attempt
  int retry_cap = 3;             // wrong attempts before the student is stuck
  std::uint64_t seed = 0;

  const GenerativeParams& params(const std::string& kc) const;
};

// Throws kInvalidArgument on probabilities outside [0,1] or a retry cap
// below 1.
void check_student(const SimulatedStudent& student);

struct IssuedProblem {
  std::string assignment;
  std::string problem;
  std::string session_id;
};

struct SessionStats {
  int transactions = 0;  // attempts and hints the service accepted
  int hints_refused = 0;
  int problems_completed = 0;
  // Test-mode responses that carried an outcome or feedback anyway.
  int leaked_outcomes = 0;
  std::vector<IssuedProblem> issued;
};

struct SessionLimits {
  std::optional<int> max_problems;
  // Think time drawn per request, advanced on the clock when there is one.
  TimestampMs think_min_ms = 4000;
  TimestampMs think_max_ms = 40000;
};

// The student's hidden state: which KCs they actually know.
class Learner {
 public:
  explicit Learner(SimulatedStudent student);

  const SimulatedStudent& student() const { return student_; }
  bool knows(const std::string& kc);
  // Probability of a correct first attempt on a step exercising `kcs`.
  double p_correct(const std::vector<std::string>& kcs);
  // Learning transition after the first attempt at a step.
  void practice(const std::vector<std::string>& kcs);
  Rng& rng() { return rng_; }

 private:
  SimulatedStudent student_;
  Rng rng_;
  std::map<std::string, bool> known_;
};

// Works one assignment through the API until the policy has nothing left
// or the limits are reached. Deterministic given the learner's seed and the
// service's responses.
SessionStats simulate_session(Learner& learner, ServiceClient& client, const std::string& token,
                              const std::string& assignment_id, const service::Package& package,
                              const SessionLimits& limits = {}, ManualClock* clock = nullptr);

}  // namespace tutorlab::harness
