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

#include <array>
#include <cmath>

#include "doctest.h"
#include "tutorlab/common/error.hpp"
#include "tutorlab/common/random.hpp"
#include "tutorlab/student/student_model.hpp"

using namespace tutorlab;
using namespace tutorlab::student;
using graph::Evaluation;
using graph::Outcome;

namespace {

// Enumerates the two hidden states explicitly: prior x emission, normalize,
// then push the unknown mass through the learning transition.
double oracle_bkt(double p_known, const KcParams& p, bool correct) {
  const std::array<double, 2> prior{p_known, 1.0 - p_known};  // {known, unknown}
  const std::array<double, 2> p_correct{1.0 - p.p_slip, p.p_guess};
  std::array<double, 2> joint{};
  double total = 0.0;
  for (int s = 0; s < 2; ++s) {
    joint[s] = prior[s] * (correct ? p_correct[s] : 1.0 - p_correct[s]);
    total += joint[s];
  }
  const std::array<double, 2> posterior{joint[0] / total, joint[1] / total};
  // transition matrix rows: from known, from unknown
  const std::array<std::array<double, 2>, 2> transition{{{1.0, 0.0}, {p.p_transit, 1.0 - p.p_transit}}};
  return posterior[0] * transition[0][0] + posterior[1] * transition[1][0];
}

Evaluation eval_for(Outcome outcome, int attempt, std::vector<std::string> kcs = {"k1"}) {
  Evaluation e;
  e.outcome = outcome;
  e.attempt_at_step = attempt;
  e.kcs = std::move(kcs);
  e.step = "s";
  return e;
}

KcParams random_params(Rng& rng) {
  KcParams p;
  p.p_init = rng.uniform();
  p.p_transit = rng.uniform();
  do {
    p.p_slip = rng.uniform(0.0, 0.5);
    p.p_guess = rng.uniform(0.0, 0.5);
  } while (p.p_slip + p.p_guess >= 1.0);
  return p;
}

}  // namespace

TEST_CASE("bkt_update: worked example") {
  const KcParams p{0.3, 0.2, 0.1, 0.2};
  const auto b = bkt_update({"k", 0.3, 0}, p, Observation::kCorrect);
  // posterior 0.27 / 0.41, then the learning transition
  CHECK(b.p_mastery == doctest::Approx(0.27 / 0.41 + (1 - 0.27 / 0.41) * 0.2).epsilon(1e-15));
  CHECK(b.p_mastery == doctest::Approx(0.72683).epsilon(1e-5));
  CHECK(b.opportunities == 1);
}

TEST_CASE("bkt_update: noise-free and absorbing cases") {
  const auto b = bkt_update({"k", 0.4, 0}, {0.4, 0.1, 0.0, 0.0}, Observation::kCorrect);
  CHECK(b.p_mastery == 1.0);
  for (auto obs : {Observation::kCorrect, Observation::kIncorrect}) {
    CHECK(bkt_update({"k", 1.0, 3}, {0.5, 0.3, 0.2, 0.3}, obs).p_mastery == 1.0);
  }
}

TEST_CASE("bkt_update: rejects invalid parameters") {
  CHECK_THROWS_AS(bkt_update({"k", 0.5, 0}, {0.5, 0.1, 0.6, 0.4}, Observation::kCorrect), Error);
  CHECK_THROWS_AS(bkt_update({"k", 0.5, 0}, {0.5, 1.1, 0.1, 0.1}, Observation::kCorrect), Error);
  CHECK_THROWS_AS(check_params({-0.1, 0.1, 0.1, 0.1}), Error);
}

TEST_CASE("bkt_update: agrees with the state-enumeration oracle") {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const auto p = random_params(rng);
    const double known = rng.uniform();
    const bool correct = rng.bernoulli(0.5);
    const auto b = bkt_update({"k", known, 0}, p, correct ? Observation::kCorrect : Observation::kIncorrect);
    CHECK(std::abs(b.p_mastery - oracle_bkt(known, p, correct)) <= 1e-12);
  }
}

TEST_CASE("bkt_update: monotone evidence and bounds") {
  Rng rng(12);
  for (int i = 0; i < 1000; ++i) {
    const auto p = random_params(rng);
    const double known = rng.uniform();
    CHECK(bkt_update({"k", known, 0}, p, Observation::kCorrect).p_mastery >= known - 1e-15);
    KcParams no_learning = p;
    no_learning.p_transit = 0.0;
    CHECK(bkt_update({"k", known, 0}, no_learning, Observation::kIncorrect).p_mastery <= known + 1e-15);
    KcBelief b{"k", known, 0};
    for (int k = 0; k < 20; ++k) {
      b = bkt_update(b, p, rng.bernoulli(0.5) ? Observation::kCorrect : Observation::kIncorrect);
      CHECK(b.p_mastery >= 0.0);
      CHECK(b.p_mastery <= 1.0);
    }
  }
}

TEST_CASE("bkt_update: observation order only matters through learning") {
  Rng rng(13);
  int differs = 0;
  for (int i = 0; i < 200; ++i) {
    auto p = random_params(rng);
    const KcBelief start{"k", rng.uniform(0.05, 0.95), 0};
    auto run = [&](Observation a, Observation b) {
      return bkt_update(bkt_update(start, p, a), p, b).p_mastery;
    };
    p.p_transit = 0.0;
    CHECK(run(Observation::kCorrect, Observation::kIncorrect) ==
          doctest::Approx(run(Observation::kIncorrect, Observation::kCorrect)).epsilon(1e-12));
    p.p_transit = rng.uniform(0.05, 0.5);
    if (std::abs(run(Observation::kCorrect, Observation::kIncorrect) -
                 run(Observation::kIncorrect, Observation::kCorrect)) > 1e-9) {
      ++differs;
    }
  }
  CHECK(differs > 190);
}

TEST_CASE("apply_transaction: first-attempt rule") {
  const KcParamsTable table{{"k1", {0.3, 0.2, 0.1, 0.2}}};
  StudentModel m;
  m.student_id = "s1";

  SUBCASE("first attempt correct updates once") {
    const auto next = apply_transaction(m, eval_for(Outcome::kCorrect, 1), table);
    CHECK(next.beliefs.at("k1").opportunities == 1);
    CHECK(next.beliefs.at("k1").p_mastery == doctest::Approx(0.72683).epsilon(1e-5));
  }
  SUBCASE("hint then correct updates once, as incorrect") {
    auto next = apply_transaction(m, eval_for(Outcome::kHint, 1), table);
    next = apply_transaction(next, eval_for(Outcome::kCorrect, 2), table);
    const auto expected = bkt_update({"k1", 0.3, 0}, table.at("k1"), Observation::kIncorrect);
    CHECK(next.beliefs.at("k1") == expected);
  }
  SUBCASE("second incorrect attempt changes nothing") {
    const auto once = apply_transaction(m, eval_for(Outcome::kIncorrect, 1), table);
    const auto twice = apply_transaction(once, eval_for(Outcome::kIncorrect, 2), table);
    CHECK(once == twice);
  }
  SUBCASE("retries in any order leave beliefs alone") {
    const auto first = apply_transaction(m, eval_for(Outcome::kIncorrect, 1), table);
    auto a = apply_transaction(first, eval_for(Outcome::kHint, 2), table);
    a = apply_transaction(a, eval_for(Outcome::kCorrect, 3), table);
    auto b = apply_transaction(first, eval_for(Outcome::kCorrect, 2), table);
    b = apply_transaction(b, eval_for(Outcome::kHint, 3), table);
    CHECK(a.beliefs == first.beliefs);
    CHECK(b.beliefs == first.beliefs);
  }
  SUBCASE("multi-KC steps update every KC") {
    const KcParamsTable two{{"k1", {}}, {"k2", {}}};
    const auto next = apply_transaction(m, eval_for(Outcome::kCorrect, 1, {"k1", "k2"}), two);
    CHECK(next.beliefs.size() == 2);
    CHECK(next.beliefs.at("k1").p_mastery == next.beliefs.at("k2").p_mastery);
  }
  SUBCASE("unknown KC is rejected before any change") {
    try {
      apply_transaction(m, eval_for(Outcome::kCorrect, 1, {"k1", "zz"}), table);
      FAIL("expected UnknownKc");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kUnknownKc);
    }
  }
  SUBCASE("no detectors leaves custom variables empty") {
    CHECK(apply_transaction(m, eval_for(Outcome::kCorrect, 1), table).custom_vars.empty());
  }
}

TEST_CASE("detectors") {
  const KcParamsTable table{{"k1", {}}};
  DetectorRegistry registry;
  registry.register_detector(consecutive_errors_detector());
  try {
    registry.register_detector(consecutive_errors_detector());
    FAIL("expected DuplicateDetector");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDuplicateDetector);
  }

  // Replay oracle: count the trailing run of INCORRECT outcomes.
  const std::vector<Outcome> seq{Outcome::kIncorrect, Outcome::kIncorrect, Outcome::kCorrect,
                                 Outcome::kIncorrect, Outcome::kHint, Outcome::kIncorrect};
  StudentModel m;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    m = apply_transaction(m, eval_for(seq[i], static_cast<int>(i) + 1), table, registry);
    int run = 0;
    for (std::size_t j = 0; j <= i; ++j) {
      if (seq[j] == Outcome::kCorrect) run = 0;
      if (seq[j] == Outcome::kIncorrect) ++run;
    }
    CHECK(m.custom_vars.at("consecutive_errors") == run);
    if (i == 2) CHECK(m.custom_vars.at("consecutive_errors") == 0);
  }

  DetectorRegistry bad;
  bad.register_detector({"bounded", 0.0, 1.0, [](const StudentModel&, const log::TransactionRecord&) { return 2.0; }});
  CHECK_THROWS_AS(apply_transaction(StudentModel{}, eval_for(Outcome::kCorrect, 1), table, bad), Error);
}

TEST_CASE("mastered_kcs") {
  StudentModel m;
  CHECK(mastered_kcs(m).empty());
  m.beliefs["k1"] = {"k1", 0.97, 3};
  m.beliefs["k2"] = {"k2", 0.50, 3};
  CHECK(mastered_kcs(m) == std::set<std::string>{"k1"});
  m.beliefs["k2"].p_mastery = 0.95;
  CHECK(mastered_kcs(m) == std::set<std::string>{"k1", "k2"});
}
