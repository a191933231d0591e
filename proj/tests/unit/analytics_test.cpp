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

#include <chrono>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "synthetic.hpp"
#include "tutorlab/analytics/afm.hpp"
#include "tutorlab/analytics/census.hpp"
#include "tutorlab/analytics/opportunity_table.hpp"
#include "tutorlab/common/error.hpp"

using namespace tutorlab;
using namespace tutorlab::analytics;
using log::Outcome;

namespace {

// Appends a record for (student, problem, step) with the given attempt and
// outcome; logged opportunities are deliberately bogus so that the table
// has to recount them.
void add(log::LogStore& store, const std::string& student, const std::string& problem,
         const std::string& step, int attempt, Outcome outcome, std::vector<std::string> kcs) {
  log::TransactionRecord r;
  r.row = static_cast<std::int64_t>(store.size()) + 1;
  r.anon_student_id = student;
  r.session_id = student;
  r.time = 1000 * r.row;
  r.problem_name = problem;
  r.step_name = step;
  r.attempt_at_step = attempt;
  r.outcome = outcome;
  r.action = "UpdateText";
  r.opportunities.assign(kcs.size(), 9);
  r.kcs = std::move(kcs);
  store.append(std::move(r));
}

std::vector<int> ys(const OpportunityTable& t) {
  std::vector<int> out;
  for (const auto& r : t.rows) out.push_back(r.y);
  return out;
}

std::vector<int> first_opps(const OpportunityTable& t) {
  std::vector<int> out;
  for (const auto& r : t.rows) out.push_back(r.opportunities.at(0));
  return out;
}

// Random table with 2-5 students, 1-4 KCs and multi-KC rows.
OpportunityTable random_table(Rng& rng) {
  log::LogStore store;
  const int students = 2 + static_cast<int>(rng.below(4));
  const int kcs = 1 + static_cast<int>(rng.below(4));
  const int rows = 5 + static_cast<int>(rng.below(30));
  for (int i = 0; i < rows; ++i) {
    std::vector<std::string> labels{"k" + std::to_string(rng.below(kcs))};
    if (rng.bernoulli(0.3)) {
      const auto extra = "k" + std::to_string(rng.below(kcs));
      if (extra != labels[0]) labels.push_back(extra);
    }
    add(store, "s" + std::to_string(rng.below(students)), "P", "st" + std::to_string(i), 1,
        rng.bernoulli(0.5) ? Outcome::kCorrect : Outcome::kIncorrect, labels);
  }
  return build_opportunity_table(store);
}

AfmModel random_model(Rng& rng, const OpportunityTable& t) {
  AfmModel m;
  m.lambda_theta = rng.uniform(0.0, 2.0);
  m.zero_based = rng.bernoulli(0.5);
  for (const auto& s : t.students) m.theta[s] = rng.normal();
  for (const auto& k : t.kcs) {
    m.beta[k] = rng.normal();
    m.gamma[k] = rng.uniform(0.0, 0.5);
    if (rng.bernoulli(0.3)) m.kc_penalty[k] = rng.uniform(0.1, 2.0);
  }
  return m;
}

}  // namespace

TEST_CASE("opportunity table: first attempts only") {
  log::LogStore store;
  add(store, "s1", "P1", "x", 1, Outcome::kCorrect, {"k"});
  add(store, "s1", "P2", "x", 1, Outcome::kIncorrect, {"k"});
  add(store, "s1", "P2", "x", 2, Outcome::kCorrect, {"k"});
  add(store, "s1", "P3", "x", 1, Outcome::kCorrect, {"k"});
  add(store, "s1", "P4", "x", 1, Outcome::kHint, {"k"});
  const auto t = build_opportunity_table(store);
  CHECK(ys(t) == std::vector<int>{1, 0, 1, 0});
  CHECK(first_opps(t) == std::vector<int>{1, 2, 3, 4});
}

TEST_CASE("opportunity table: tutor actions and KC-less rows are skipped") {
  log::LogStore store;
  add(store, "s1", "P1", "x", 1, Outcome::kCorrect, {"k"});
  log::TransactionRecord tutor;
  tutor.row = 2;
  tutor.anon_student_id = "s1";
  tutor.session_id = "s1";
  tutor.time = 2000;
  tutor.action = "tutor:UpdateText";
  tutor.outcome = Outcome::kCorrect;
  store.append(tutor);
  add(store, "s1", "P1", "done", 1, Outcome::kCorrect, {});
  CHECK(build_opportunity_table(store).rows.size() == 1);
  CHECK_THROWS_AS(build_opportunity_table(log::LogStore{}), Error);
}

TEST_CASE("opportunity table: relabeling recounts from scratch") {
  log::LogStore store;
  add(store, "s1", "P1", "x", 1, Outcome::kCorrect, {"add"});
  add(store, "s1", "P1", "y", 1, Outcome::kIncorrect, {"carry"});
  add(store, "s2", "P1", "x", 1, Outcome::kIncorrect, {"add"});
  add(store, "s1", "P2", "x", 1, Outcome::kCorrect, {"add"});
  add(store, "s1", "P2", "y", 1, Outcome::kCorrect, {"carry"});
  add(store, "s2", "P1", "y", 1, Outcome::kCorrect, {"carry"});

  CHECK(first_opps(build_opportunity_table(store)) == std::vector<int>{1, 1, 1, 2, 2, 1});

  const KcRelabeling merged{{"x", {"arith"}}, {"y", {"arith"}}};
  const auto t = build_opportunity_table(store, &merged);
  CHECK(t.kcs == std::vector<std::string>{"arith"});
  CHECK(first_opps(t) == std::vector<int>{1, 2, 1, 3, 4, 2});

  const KcRelabeling qualified{{"x", {"arith"}}, {"y", {"arith"}}, {"P2|y", {"carry"}}};
  const auto q = build_opportunity_table(store, &qualified);
  CHECK(first_opps(q) == std::vector<int>{1, 2, 1, 3, 1, 2});
  CHECK(q.kcs[q.rows[4].kcs[0]] == "carry");
}

TEST_CASE("opportunity table: student order does not change per-student rows") {
  Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    // Build per-student histories, then interleave them two different ways.
    std::map<std::string, std::vector<std::pair<std::string, Outcome>>> hist;
    for (int s = 0; s < 4; ++s) {
      for (int i = 0; i < 6; ++i) {
        hist["s" + std::to_string(s)].push_back(
            {"k" + std::to_string(rng.below(2)), rng.bernoulli(0.5) ? Outcome::kCorrect : Outcome::kIncorrect});
      }
    }
    auto build = [&](std::vector<std::string> order) {
      log::LogStore store;
      std::map<std::string, std::size_t> next;
      while (!order.empty()) {
        const auto pick = rng.below(order.size());
        const auto& s = order[pick];
        const auto& [kc, outcome] = hist[s][next[s]];
        add(store, s, "P", "st" + std::to_string(next[s]), 1, outcome, {kc});
        if (++next[s] == hist[s].size()) order.erase(order.begin() + static_cast<long>(pick));
      }
      const auto t = build_opportunity_table(store);
      std::map<std::string, std::vector<std::tuple<std::string, std::string, int, int>>> per_student;
      for (const auto& r : t.rows) {
        per_student[t.students[r.student]].emplace_back(r.step, t.kcs[r.kcs[0]], r.opportunities[0], r.y);
      }
      return per_student;
    };
    CHECK(build({"s0", "s1", "s2", "s3"}) == build({"s3", "s1", "s0", "s2"}));
  }
}

TEST_CASE("afm: predictions and gradient examples") {
  log::LogStore store;
  add(store, "s1", "P1", "x", 1, Outcome::kCorrect, {"k"});
  add(store, "s1", "P2", "x", 1, Outcome::kCorrect, {"k"});
  add(store, "s2", "P1", "x", 1, Outcome::kIncorrect, {"k"});
  add(store, "s2", "P2", "x", 1, Outcome::kIncorrect, {"k"});
  const auto table = build_opportunity_table(store);

  AfmModel zero;
  for (double p : afm_predict(zero, table)) CHECK(p == 0.5);
  CHECK(afm_gradient(zero, table).beta.at("k") == 0.0);

  AfmModel m;
  m.beta["k"] = -1.0;
  m.gamma["k"] = 0.5;
  CHECK(afm_predict(m, table)[1] == doctest::Approx(0.5));  // T = 2

  log::LogStore one;
  add(one, "s1", "P1", "x", 1, Outcome::kCorrect, {"k"});
  CHECK(afm_gradient(AfmModel{}, build_opportunity_table(one)).beta.at("k") == doctest::Approx(0.5));
}

TEST_CASE("afm: analytic gradient matches central differences") {
  Rng rng(32);
  const double h = 1e-5;
  double worst = 0.0;
  for (int draw = 0; draw < 100; ++draw) {
    const auto table = random_table(rng);
    const auto model = random_model(rng, table);
    const auto g = afm_gradient(model, table);
    auto check = [&](std::map<std::string, double> AfmModel::*field,
                     const std::map<std::string, double>& analytic) {
      for (const auto& [name, value] : analytic) {
        AfmModel up = model, down = model;
        (up.*field)[name] += h;
        (down.*field)[name] -= h;
        const double numeric = (afm_objective(up, table) - afm_objective(down, table)) / (2 * h);
        const double rel = std::abs(value - numeric) / std::max({std::abs(value), std::abs(numeric), 1.0});
        worst = std::max(worst, rel);
      }
    };
    check(&AfmModel::theta, g.theta);
    check(&AfmModel::beta, g.beta);
    check(&AfmModel::gamma, g.gamma);
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("afm: shifting theta against beta leaves predictions unchanged") {
  Rng rng(33);
  for (int draw = 0; draw < 50; ++draw) {
    auto table = random_table(rng);
    // single-KC rows only, so the shift cancels exactly
    std::erase_if(table.rows, [](const auto& r) { return r.kcs.size() != 1; });
    const auto model = random_model(rng, table);
    auto shifted = model;
    const double c = rng.uniform(-2, 2);
    for (auto& [s, v] : shifted.theta) v += c;
    for (auto& [k, v] : shifted.beta) v -= c;
    CHECK(afm_data_log_likelihood(shifted, table) ==
          doctest::Approx(afm_data_log_likelihood(model, table)).epsilon(1e-12));
  }
}

TEST_CASE("afm: fit is monotone and keeps gamma non-negative") {
  Rng rng(34);
  for (int draw = 0; draw < 30; ++draw) {
    const auto table = random_table(rng);
    if (table.students.size() < 2) continue;
    AfmConfig config;
    config.max_iter = 300;
    bool gamma_ok = true;
    config.on_iterate = [&](const AfmModel& m, double) {
      for (const auto& [k, v] : m.gamma) gamma_ok = gamma_ok && v >= 0.0;
    };
    const auto fit = fit_afm(table, config);
    CHECK(fit.converged);
    CHECK(gamma_ok);
    for (std::size_t i = 1; i < fit.objective_trace.size(); ++i) {
      CHECK(fit.objective_trace[i] >= fit.objective_trace[i - 1]);
    }
    for (const auto* part : {&fit.model.theta, &fit.model.beta, &fit.model.gamma}) {
      for (const auto& [k, v] : *part) CHECK(std::isfinite(v));
    }
    CHECK(fit.log_likelihood == doctest::Approx(afm_objective(fit.model, table)));
  }
}

TEST_CASE("afm: degenerate KCs are flagged and stay finite") {
  log::LogStore store;
  for (int i = 0; i < 10; ++i) {
    add(store, "s" + std::to_string(i % 3), "P" + std::to_string(i), "easy", 1, Outcome::kCorrect, {"easy"});
    add(store, "s" + std::to_string(i % 3), "P" + std::to_string(i), "mixed", 1,
        i % 2 ? Outcome::kCorrect : Outcome::kIncorrect, {"mixed"});
  }
  const auto fit = fit_afm(build_opportunity_table(store));
  CHECK(fit.degenerate_kcs == std::vector<std::string>{"easy"});
  CHECK(std::isfinite(fit.model.beta.at("easy")));
  CHECK(fit.model.beta.at("easy") > 0.0);
  CHECK(fit.converged);
}

TEST_CASE("afm: preconditions") {
  log::LogStore store;
  add(store, "s1", "P1", "x", 1, Outcome::kCorrect, {"k"});
  add(store, "s1", "P2", "x", 1, Outcome::kIncorrect, {"k"});
  CHECK_THROWS_AS(fit_afm(build_opportunity_table(store)), Error);
}

TEST_CASE("afm: recovers generating parameters") {
  testing::AfmTruth truth;
  const auto store = testing::afm_corpus(2024, 100, 10, 30, &truth);
  const auto started = std::chrono::steady_clock::now();
  const auto fit = fit_afm(build_opportunity_table(store));
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  std::vector<double> b_true, b_fit, g_true, g_fit;
  for (const auto& [k, v] : truth.beta) {
    b_true.push_back(v);
    b_fit.push_back(fit.model.beta.at(k));
    g_true.push_back(truth.gamma.at(k));
    g_fit.push_back(fit.model.gamma.at(k));
  }
  MESSAGE("iterations " << fit.iterations << ", " << seconds << " s, r(beta) "
                        << testing::pearson(b_true, b_fit) << ", r(gamma) " << testing::pearson(g_true, g_fit));
  CHECK(fit.converged);
  CHECK(testing::pearson(b_true, b_fit) >= 0.85);
  CHECK(testing::pearson(g_true, g_fit) >= 0.85);
  CHECK(seconds < 60.0);
}

TEST_CASE("learning curves") {
  log::LogStore store;
  add(store, "s1", "P1", "x", 1, Outcome::kCorrect, {"k"});
  add(store, "s1", "P2", "x", 1, Outcome::kIncorrect, {"k"});
  add(store, "s1", "P3", "x", 1, Outcome::kCorrect, {"k"});
  add(store, "s2", "P1", "x", 1, Outcome::kIncorrect, {"k"});
  const auto t = build_opportunity_table(store);
  const auto c = learning_curve(t, "k");
  REQUIRE(c.points.size() == 3);
  CHECK(c.points[0].error_rate == 0.5);
  CHECK(c.points[0].n == 2);
  CHECK(c.points[1].error_rate == 1.0);
  CHECK(c.points[2].error_rate == 0.0);
  CHECK(c.points[2].opportunity == 3);
  CHECK_THROWS_AS(learning_curve(t, "nope"), Error);
  CHECK_THROWS_AS(curve_slope(c, 3, 9), Error);

  const auto cohort = build_opportunity_table(testing::bkt_corpus(41, 100, 10, 0.25));
  CHECK(curve_slope(learning_curve(cohort, "k"), 1, 10) < 0.0);
  CHECK(curve_slope(aggregate_learning_curve(cohort), 1, 10) < 0.0);
}

TEST_CASE("kc model comparison") {
  const auto store = testing::two_kc_corpus(7, 50, 10);
  const KcModelCandidate logged{"two", std::nullopt};
  KcRelabeling merge, split;
  for (const char* step : {"a1", "a2", "a3", "b1", "b2", "b3"}) {
    merge[step] = {"AB"};
    split[step] = {std::string("kc-") + step};
  }

  SUBCASE("the generating model wins on BIC") {
    const auto cmp = compare_kc_models(store, {{"merge", merge}, logged, {"split", split}});
    CHECK(cmp.by_bic.front() == 1);
    CHECK(cmp.scores[1].parameters == 50 + 4);
    CHECK(cmp.scores[2].parameters == 50 + 12);
    CHECK(cmp.scores[0].observations == 50 * 10 * 6);
    for (const auto& s : cmp.scores) {
      CHECK(s.bic == doctest::Approx(s.parameters * std::log(3000.0) - 2 * s.log_likelihood));
      CHECK(s.aic == doctest::Approx(2.0 * s.parameters - 2 * s.log_likelihood));
    }
  }
  SUBCASE("duplicates tie in input order") {
    const auto cmp = compare_kc_models(store, {logged, {"again", std::nullopt}});
    CHECK(cmp.scores[0].bic == cmp.scores[1].bic);
    CHECK(cmp.by_bic == std::vector<std::size_t>{0, 1});
    CHECK(cmp.by_aic == std::vector<std::size_t>{0, 1});
  }
  SUBCASE("needs two candidates") { CHECK_THROWS_AS(compare_kc_models(store, {logged}), Error); }
  SUBCASE("models file") {
    const auto models = kc_models_from_json(nlohmann::json::parse(
        R"({"models": [{"name": "logged"}, {"name": "one", "steps": {"a1": "X", "P1|b1": ["X", "Y"]}}]})"));
    REQUIRE(models.size() == 2);
    CHECK_FALSE(models[0].relabeling.has_value());
    CHECK(models[1].relabeling->at("P1|b1") == std::vector<std::string>{"X", "Y"});
    CHECK_THROWS_AS(kc_models_from_json(nlohmann::json::parse(R"({"models": [{"steps": {}}]})")), Error);
  }
}

TEST_CASE("census filter") {
  SUBCASE("single rules") {
    CHECK(census_filter({{"a", "p", "Geometry", 250, {2020, 3, 1}}}).count == 0);
    CHECK(census_filter({{"a", "p", "Pilot run spring 2019", 900, {2019, 3, 1}}}).count == 0);
    const auto two = census_filter({{"a", "p", "Unit 1", 400, {2020, 3, 1}},
                                    {"b", "p", "Unit 2", 410, {2020, 3, 25}}});
    REQUIRE(two.count == 1);
    CHECK(two.kept[0].dataset_id == "b");
  }
  SUBCASE("constructed registry") {
    const auto result = census_filter(testing::census_registry());
    std::vector<std::string> ids;
    for (const auto& e : result.kept) ids.push_back(e.dataset_id);
    CHECK(ids == testing::census_expected_ids());
    CHECK(result.count == ids.size());
    const auto again = census_filter(result.kept);
    CHECK(again.count == result.count);
    for (std::size_t i = 0; i < again.kept.size(); ++i) CHECK(again.kept[i].dataset_id == ids[i]);
  }
  SUBCASE("seasons") {
    CHECK(season_of({2020, 5, 31}) == Season::kSpring);
    CHECK(season_of({2020, 6, 1}) == Season::kSummer);
    CHECK(season_of({2020, 8, 31}) == Season::kSummer);
    CHECK(season_of({2020, 9, 1}) == Season::kFall);
  }
  SUBCASE("registry files") {
    std::stringstream buffer;
    write_registry_tsv(testing::census_registry(), buffer);
    const auto back = parse_registry_tsv(buffer);
    REQUIRE(back.size() == 12);
    CHECK(back[4].name == "Pilot run spring 2019");
    CHECK(back[11].start_date.month == 9);
    std::istringstream bad_header("id\tproject\n");
    CHECK_THROWS_AS(parse_registry_tsv(bad_header), Error);
    std::istringstream bad_row("dataset_id\tproject_id\tname\ttransactions\tstart_date\nd\tp\tn\tmany\t2020-01-01\n");
    try {
      parse_registry_tsv(bad_row);
      FAIL("expected MalformedRow");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kMalformedRow);
      CHECK(e.line() == 2);
    }
  }
}
