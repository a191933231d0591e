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
#include <algorithm>

#include "doctest.h"
#include "graph_fixtures.hpp"
#include "tutorlab/common/error.hpp"
#include "tutorlab/graph/behavior_graph.hpp"
#include "tutorlab/graph/tracer.hpp"

using namespace tutorlab;
using namespace tutorlab::graph;
using nlohmann::json;

namespace {

Transaction attempt(std::string sel, std::string input, std::string action = "UpdateText") {
  Transaction t;
  t.selection = std::move(sel);
  t.action = std::move(action);
  t.input = std::move(input);
  return t;
}

bool has_code(const std::vector<Diagnostic>& diags, const std::string& code) {
  return std::any_of(diags.begin(), diags.end(),
                     [&](const Diagnostic& d) { return d.code == code; });
}

// s1, s2 in an unordered group between n0 and n2, plus a buggy link on s1.
json unordered_doc() {
  return json::parse(R"({
    "schema_version": 1, "problem": "pair", "start_node": "n0",
    "interface": [{"id": "a", "kind": "text_input"}, {"id": "b", "kind": "text_input"}],
    "nodes": ["n0", "n1", {"id": "n2", "done": true}],
    "links": [
      {"id": "s1", "from": "n0", "to": "n1", "selection": "a", "action": "UpdateText",
       "input": {"kind": "exact", "value": "1"}, "kcs": ["k"], "hints": ["a1", "a2"]},
      {"id": "s2", "from": "n1", "to": "n2", "selection": "b", "action": "UpdateText",
       "input": {"kind": "exact", "value": "2"}, "kcs": ["k"], "hints": ["b1"]},
      {"id": "bug", "from": "n0", "to": "n0", "kind": "buggy", "selection": "a",
       "action": "UpdateText", "input": {"kind": "exact", "value": "11"},
       "buggy_message": "Off by ten"}
    ],
    "groups": [{"id": "g", "ordering": "unordered", "member_links": ["s1", "s2"]}],
    "kc_model": {"k": "a skill"}
  })");
}

}  // namespace

TEST_CASE("validate_graph: well-formed chain has no diagnostics") {
  CHECK(validate_graph(testing::chain_graph(3)).empty());
}

TEST_CASE("validate_graph: link to undeclared node") {
  auto doc = graph_to_json(testing::chain_graph(3));
  doc["links"][2]["to"] = "n9";
  doc["nodes"][3].erase("done");
  doc["done_nodes"] = json::array();
  auto g = graph_from_json(doc);
  g.done_nodes = {"n2"};
  const auto diags = validate_graph(g);
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].code == "unknown node");
  CHECK(diags[0].subject == "s3");
}

TEST_CASE("validate_graph: correct link with empty hint chain") {
  auto g = testing::chain_graph(2);
  g.links[1].hints.clear();
  const auto diags = validate_graph(g);
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].code == "missing hints");
}

TEST_CASE("validate_graph: other invariant violations") {
  SUBCASE("buggy link that advances") {
    auto doc = unordered_doc();
    doc["links"][2]["to"] = "n1";
    CHECK(has_code(validate_graph(graph_from_json(doc)), "buggy advances"));
  }
  SUBCASE("KC missing from the KC model") {
    auto doc = unordered_doc();
    doc["links"][0]["kcs"] = {"nope"};
    CHECK(has_code(validate_graph(graph_from_json(doc)), "unknown kc"));
  }
  SUBCASE("selection not in the interface") {
    auto doc = unordered_doc();
    doc["links"][1]["selection"] = "zz";
    CHECK(has_code(validate_graph(graph_from_json(doc)), "unknown widget"));
  }
  SUBCASE("range with lo > hi and bad pattern") {
    auto doc = unordered_doc();
    doc["links"][0]["input"] = {{"kind", "range"}, {"lo", 3}, {"hi", 1}};
    doc["links"][1]["input"] = {{"kind", "pattern"}, {"regex", "(("}};
    const auto diags = validate_graph(graph_from_json(doc));
    CHECK(std::count_if(diags.begin(), diags.end(),
                        [](const Diagnostic& d) { return d.code == "bad matcher"; }) == 2);
  }
  SUBCASE("unreachable done node") {
    auto doc = unordered_doc();
    doc["nodes"].push_back({{"id", "island"}, {"done", true}});
    CHECK(has_code(validate_graph(graph_from_json(doc)), "unreachable done node"));
  }
  SUBCASE("cycle") {
    auto doc = unordered_doc();
    doc["groups"] = json::array();
    doc["links"][1]["to"] = "n0";
    const auto diags = validate_graph(graph_from_json(doc));
    CHECK(has_code(diags, "cycle"));
  }
  SUBCASE("duplicate link ids") {
    auto doc = unordered_doc();
    doc["links"][1]["id"] = "s1";
    CHECK(has_code(validate_graph(graph_from_json(doc)), "duplicate link"));
  }
  SUBCASE("tutor link sharing its node with a student step") {
    auto doc = unordered_doc();
    doc["groups"] = json::array();
    doc["links"].push_back({{"id", "t"}, {"from", "n0"}, {"to", "n1"}, {"kind", "tutor_performed"},
                            {"selection", "b"}, {"action", "UpdateText"}, {"input", "x"}});
    CHECK(has_code(validate_graph(graph_from_json(doc)), "tutor conflict"));
  }
  SUBCASE("unordered group that is not a chain") {
    auto doc = unordered_doc();
    doc["links"][1]["from"] = "n0";
    CHECK(has_code(validate_graph(graph_from_json(doc)), "group not contiguous"));
  }
}

TEST_CASE("graph document parse errors") {
  auto doc = unordered_doc();
  doc["links"][0]["input"] = {{"kind", "fuzzy"}};
  CHECK_THROWS_AS(graph_from_json(doc), Error);
  doc = unordered_doc();
  doc["schema_version"] = 7;
  CHECK_THROWS_AS(graph_from_json(doc), Error);
  CHECK_THROWS_AS(graph_from_json(json::array()), Error);
}

TEST_CASE("graph document round-trips through JSON") {
  const auto g = graph_from_json(unordered_doc());
  const auto again = graph_from_json(graph_to_json(g));
  CHECK(graph_to_json(again) == graph_to_json(g));
  CHECK(again.fingerprint() == g.fingerprint());
}

TEST_CASE("matchers") {
  CHECK(ExactMatcher("42").matches("  42 "));
  CHECK_FALSE(ExactMatcher("abc").matches("ABC"));
  CHECK(ExactMatcher("abc", true).matches("ABC"));
  CHECK(NumberRangeMatcher(1, 2).matches("2"));
  CHECK_FALSE(NumberRangeMatcher(1, 2, false).matches("2"));
  CHECK_FALSE(NumberRangeMatcher(1, 2).matches("two"));
  CHECK(PatternMatcher("[0-9]+/[0-9]+").matches(" 3/4"));
  CHECK_FALSE(PatternMatcher("[0-9]+").matches("3/4"));
  CHECK(AnyMatcher().matches(""));

  LinearExpressionMatcher lin("2x+3", "x");
  CHECK(lin.matches("3 + 2*x"));
  CHECK(lin.matches("x + x + 3"));
  CHECK(lin.matches("2(x + 1) + 1"));
  CHECK(lin.matches("(4x + 6)/2"));
  CHECK_FALSE(lin.matches("2x + 4"));
  CHECK_FALSE(lin.matches("x*x + 3"));
  CHECK_FALSE(lin.matches("2x +"));
  CHECK(LinearExpressionMatcher("x*x", "x").check().has_value());
}

TEST_CASE("init_state") {
  SUBCASE("3-step chain starts at n0, not completed") {
    const Tracer tracer(testing::chain_graph(3));
    const auto s = tracer.init_state();
    CHECK(s.frontier == std::set<Position>{Position{"n0", {}}});
    CHECK_FALSE(s.completed);
    CHECK(s.initial_tutor_actions.empty());
  }
  SUBCASE("leading tutor-performed link fires and the frontier moves past it") {
    auto doc = graph_to_json(testing::chain_graph(2));
    doc["nodes"].push_back({{"id", "pre"}});
    doc["start_node"] = "pre";
    doc["interface"].push_back({{"id", "cell_B2"}, {"kind", "text_input"}});
    doc["links"].insert(doc["links"].begin(),
                        json{{"id", "fill"}, {"from", "pre"}, {"to", "n0"}, {"kind", "tutor_performed"},
                             {"selection", "cell_B2"}, {"action", "UpdateText"}, {"input", "7"}});
    const Tracer tracer(graph_from_json(doc));
    const auto s = tracer.init_state();
    REQUIRE(s.initial_tutor_actions.size() == 1);
    CHECK(s.initial_tutor_actions[0] == Sai{"cell_B2", "UpdateText", "7"});
    CHECK(s.frontier == std::set<Position>{Position{"n0", {}}});
  }
  SUBCASE("start node is a done node") {
    const auto g = graph_from_json(json::parse(R"({"problem": "empty", "start_node": "n0",
        "nodes": [{"id": "n0", "done": true}], "links": []})"));
    CHECK(Tracer(g).init_state().completed);
  }
  SUBCASE("invalid graph is rejected") {
    auto g = testing::chain_graph(2);
    g.links[0].hints.clear();
    CHECK_THROWS_AS(Tracer{g}, Error);
  }
}

TEST_CASE("trace: exact match, buggy match, generic incorrect") {
  auto doc = graph_to_json(testing::chain_graph(1));
  doc["links"][0]["input"] = {{"kind", "exact"}, {"value", "42"}};
  doc["links"].push_back({{"id", "b"}, {"from", "n0"}, {"to", "n0"}, {"kind", "buggy"},
                          {"selection", "cell_A1"}, {"action", "UpdateText"},
                          {"input", {{"kind", "exact"}, {"value", "41"}}},
                          {"buggy_message", "Off by one"}});
  const Tracer tracer(graph_from_json(doc));
  const auto s0 = tracer.init_state();

  const auto ok = tracer.trace(s0, attempt("cell_A1", "42"), false);
  CHECK(ok.evaluation.outcome == Outcome::kCorrect);
  CHECK(ok.evaluation.matched_link == "s1");
  CHECK(ok.evaluation.completed_problem);
  CHECK(ok.state.frontier == std::set<Position>{Position{"n1", {}}});

  const auto bug = tracer.trace(s0, attempt("cell_A1", "41"), false);
  CHECK(bug.evaluation.outcome == Outcome::kIncorrect);
  CHECK(bug.evaluation.feedback_text == "Off by one");
  CHECK(bug.evaluation.kcs == std::vector<std::string>{"k1"});
  CHECK(bug.state.frontier == s0.frontier);

  const auto wrong = tracer.trace(s0, attempt("cell_A1", "40"), false);
  CHECK(wrong.evaluation.outcome == Outcome::kIncorrect);
  CHECK(wrong.evaluation.feedback_text == kGenericIncorrectFeedback);
  CHECK_FALSE(wrong.evaluation.matched_link.has_value());

  // Attempt counter increments on every attempt, buggy ones included.
  auto s = tracer.trace(s0, attempt("cell_A1", "41"), false).state;
  s = tracer.trace(s, attempt("cell_A1", "40"), false).state;
  const auto third = tracer.trace(s, attempt("cell_A1", "42"), false);
  CHECK(third.evaluation.attempt_at_step == 3);
}

TEST_CASE("trace: errors") {
  const Tracer tracer(testing::chain_graph(2));
  const auto s0 = tracer.init_state();
  CHECK_THROWS_AS(tracer.trace(s0, attempt("nowhere", "1"), false), Error);
  try {
    tracer.trace(s0, attempt("nowhere", "1"), false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnknownSelection);
  }
  const Tracer other(testing::chain_graph(3));
  try {
    other.trace(s0, attempt("cell_A1", "41"), false);
    FAIL("expected StaleState");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kStaleState);
  }
}

TEST_CASE("trace: unordered group accepts both orders, rejects repeats") {
  const Tracer tracer(graph_from_json(unordered_doc()));
  auto run = [&](std::vector<Transaction> txns) {
    auto s = tracer.init_state();
    for (const auto& t : txns) s = tracer.trace(s, t, false).state;
    return s.completed;
  };
  CHECK(run({attempt("a", "1"), attempt("b", "2")}));
  CHECK(run({attempt("b", "2"), attempt("a", "1")}));
  CHECK_FALSE(run({attempt("a", "1"), attempt("a", "1")}));
  // Buggy link at the entry stays active while the group is in progress.
  auto s = tracer.trace(tracer.init_state(), attempt("b", "2"), false).state;
  const auto bug = tracer.trace(s, attempt("a", "11"), false);
  CHECK(bug.evaluation.feedback_text == "Off by ten");
}

TEST_CASE("trace: matches the brute-force path oracle on the group graph") {
  const auto g = graph_from_json(unordered_doc());
  const Tracer tracer(g);
  const std::vector<Sai> alphabet{{"a", "UpdateText", "1"}, {"b", "UpdateText", "2"},
                                  {"a", "UpdateText", "11"}};
  const auto oracle = testing::oracle_completing_sequences(g, alphabet);
  CHECK(oracle.size() == 2);
  CHECK(testing::tracer_completing_sequences(tracer, alphabet) == oracle);
}

TEST_CASE("trace: alternative paths advance together") {
  const auto g = graph_from_json(json::parse(R"({
    "problem": "fork", "start_node": "n0",
    "interface": [{"id": "a", "kind": "text_input"}, {"id": "b", "kind": "text_input"}],
    "nodes": ["n0", "x", "y", {"id": "d", "done": true}],
    "links": [
      {"id": "l1", "from": "n0", "to": "x", "selection": "a", "action": "A", "input": {"kind": "any"}, "hints": ["h"]},
      {"id": "l2", "from": "n0", "to": "y", "selection": "a", "action": "A", "input": {"kind": "exact", "value": "5"}, "hints": ["h"]},
      {"id": "l3", "from": "y", "to": "d", "selection": "b", "action": "A", "input": {"kind": "exact", "value": "1"}, "hints": ["h"]}
    ]})"));
  const Tracer tracer(g);
  const auto r = tracer.trace(tracer.init_state(), attempt("a", "5", "A"), false);
  CHECK(r.evaluation.matched_link == "l1");
  CHECK(r.state.frontier.size() == 2);
  CHECK(tracer.trace(r.state, attempt("b", "1", "A"), false).evaluation.completed_problem);
}

TEST_CASE("trace: tutor-performed links fire transitively after a correct step") {
  const auto g = graph_from_json(json::parse(R"({
    "problem": "we", "start_node": "n0",
    "interface": [{"id": "a", "kind": "text_input"}, {"id": "b", "kind": "text_input"}, {"id": "c", "kind": "text_input"}],
    "nodes": ["n0", "n1", "n2", {"id": "n3", "done": true}],
    "links": [
      {"id": "s", "from": "n0", "to": "n1", "selection": "a", "action": "A", "input": {"kind": "any"}, "hints": ["h"]},
      {"id": "t1", "from": "n1", "to": "n2", "kind": "tutor_performed", "selection": "b", "action": "A", "input": "6"},
      {"id": "t2", "from": "n2", "to": "n3", "kind": "tutor_performed", "selection": "c", "action": "A", "input": "8"}
    ]})"));
  const Tracer tracer(g);
  const auto r = tracer.trace(tracer.init_state(), attempt("a", "z", "A"), false);
  REQUIRE(r.evaluation.tutor_actions.size() == 2);
  CHECK(r.evaluation.tutor_actions[1] == Sai{"c", "A", "8"});
  CHECK(r.evaluation.completed_problem);
  CHECK(r.state.traversed_links == std::vector<std::string>{"s", "t1", "t2"});
}

TEST_CASE("request_hint") {
  SUBCASE("cursor advances and clamps at the bottom-out hint") {
    auto g = testing::chain_graph(2);
    g.links[0].hints = {"h1", "h2", "h3"};
    const Tracer tracer(g);
    auto s = tracer.init_state();
    std::vector<std::string> texts;
    std::vector<int> levels;
    for (int i = 0; i < 4; ++i) {
      auto r = tracer.request_hint(s, std::nullopt, false);
      texts.push_back(r.evaluation.feedback_text);
      levels.push_back(*r.evaluation.help_level);
      CHECK(r.evaluation.outcome == Outcome::kHint);
      s = r.state;
    }
    CHECK(texts == std::vector<std::string>{"h1", "h2", "h3", "h3"});
    CHECK(levels == std::vector<int>{1, 2, 3, 3});
  }
  SUBCASE("after a correct step the next step's hints start at level 1") {
    const Tracer tracer(testing::chain_graph(2));
    auto s = tracer.request_hint(tracer.init_state(), std::nullopt, false).state;
    s = tracer.trace(s, attempt("cell_A1", "41"), false).state;
    const auto r = tracer.request_hint(s, std::nullopt, false);
    CHECK(r.evaluation.step == "cell_A2");
    CHECK(r.evaluation.help_level == 1);
  }
  SUBCASE("unordered group: earliest member in authoring order") {
    const Tracer tracer(graph_from_json(unordered_doc()));
    const auto r = tracer.request_hint(tracer.init_state(), std::nullopt, false);
    CHECK(r.evaluation.matched_link == "s1");
    const auto b = tracer.request_hint(tracer.init_state(), std::string("b"), false);
    CHECK(b.evaluation.matched_link == "s2");
    CHECK(b.evaluation.feedback_text == "b1");
  }
  SUBCASE("refused in test mode and after completion") {
    const Tracer tracer(testing::chain_graph(1));
    auto s = tracer.init_state();
    try {
      tracer.request_hint(s, std::nullopt, true);
      FAIL("expected HintsDisabled");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kHintsDisabled);
    }
    s = tracer.trace(s, attempt("cell_A1", "41"), false).state;
    try {
      tracer.request_hint(s, std::nullopt, false);
      FAIL("expected NoHintAvailable");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kNoHintAvailable);
    }
  }
}

TEST_CASE("properties over generated graphs") {
  Rng rng(20261015);
  const auto alphabet = testing::probe_alphabet();
  for (int i = 0; i < 60; ++i) {
    const auto g = testing::random_graph(rng);
    const auto diags = validate_graph(g);
    REQUIRE_MESSAGE(diags.empty(), graph_to_json(g).dump());
    const Tracer tracer(g);

    // Determinism, monotone progress, test-mode label parity and the
    // buggy-never-advances rule over a random transaction sequence.
    auto s1 = tracer.init_state();
    auto s2 = tracer.init_state();
    auto st = tracer.init_state();
    for (int k = 0; k < 12 && !s1.completed; ++k) {
      const auto& a = alphabet[rng.below(alphabet.size())];
      const auto txn = attempt(a.selection, a.input);
      auto r1 = tracer.trace(s1, txn, false);
      auto r2 = tracer.trace(s2, txn, false);
      auto rt = tracer.trace(st, txn, true);
      CHECK(r1.evaluation == r2.evaluation);
      CHECK(r1.state == r2.state);
      CHECK(rt.evaluation.outcome == r1.evaluation.outcome);
      CHECK(rt.evaluation.feedback_text.empty());
      CHECK(r1.state.traversed_links.size() >= s1.traversed_links.size());
      CHECK(std::equal(s1.traversed_links.begin(), s1.traversed_links.end(),
                       r1.state.traversed_links.begin()));
      if (r1.evaluation.outcome == Outcome::kCorrect) {
        CHECK(g.find_link(*r1.evaluation.matched_link)->kind == LinkKind::kCorrect);
      } else {
        CHECK(r1.state.frontier == s1.frontier);
      }
      s1 = r1.state;
      s2 = r2.state;
      st = rt.state;
    }
    CHECK(testing::tracer_completing_sequences(tracer, alphabet) ==
          testing::oracle_completing_sequences(g, alphabet));
  }
}

TEST_CASE("hint levels follow 1..L then clamp for every step length") {
  for (int len = 1; len <= 5; ++len) {
    auto g = testing::chain_graph(1);
    g.links[0].hints.clear();
    for (int i = 0; i < len; ++i) g.links[0].hints.push_back("h" + std::to_string(i));
    const Tracer tracer(g);
    auto s = tracer.init_state();
    for (int k = 1; k <= len + 3; ++k) {
      auto r = tracer.request_hint(s, std::string("cell_A1"), false);
      CHECK(*r.evaluation.help_level == std::min(k, len));
      s = r.state;
    }
  }
}
