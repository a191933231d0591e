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
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tutorlab/common/time.hpp"
#include "tutorlab/graph/behavior_graph.hpp"

namespace tutorlab::graph {

inline constexpr const char* kGenericIncorrectFeedback =
    "That step is not correct.";

enum class Outcome { kCorrect, kIncorrect, kHint };

std::string_view to_string(Outcome outcome);
// Case-insensitive; throws Error(kParseError) on unknown tokens.
Outcome outcome_from_string(std::string_view token);

enum class TransactionKind { kAttempt, kHintRequest };

struct Transaction {
  std::string student_id;
  std::string session_id;
  TimestampMs timestamp = 0;
  TransactionKind kind = TransactionKind::kAttempt;
  std::string selection;  // optional for hint requests
  std::string action;
  std::string input;

  Sai sai() const { return {selection, action, input}; }
};

// A place in the graph: a node, plus the members of an unordered group that
// have already been traversed when the group is partially done. A position
// with an empty `traversed` set sits exactly on `node`; otherwise `node` is
// the entry node of the group being worked through.
struct Position {
  NodeId node;
  std::set<LinkId> traversed;

  friend bool operator==(const Position&, const Position&) = default;
  friend auto operator<=>(const Position&, const Position&) = default;
};

struct TracerState {
  std::uint64_t graph_fingerprint = 0;
  std::set<Position> frontier;
  std::map<std::string, int> hint_cursor;     // step -> last level served
  std::map<std::string, int> attempt_counts;  // step -> attempts + hints
  bool completed = false;
  // Every link advanced along, in order (student and tutor performed).
  std::vector<LinkId> traversed_links;
  // Tutor-performed actions fired while initializing.
  std::vector<Sai> initial_tutor_actions;

  friend bool operator==(const TracerState&, const TracerState&) = default;
};

struct Evaluation {
  Outcome outcome = Outcome::kIncorrect;
  std::string feedback_text;
  std::optional<LinkId> matched_link;
  std::vector<KcLabel> kcs;
  std::vector<Sai> tutor_actions;
  std::optional<int> help_level;
  std::optional<int> total_hint_levels;
  bool completed_problem = false;
  // Step the evaluation is about (= selection) and the 1-based count of
  // attempts and hint requests at that step so far, this one included.
  std::string step;
  int attempt_at_step = 0;
  // What was evaluated; for hints, the hinted step's selection with action
  // "Hint" and empty input.
  Sai sai;

  friend bool operator==(const Evaluation&, const Evaluation&) = default;
};

struct TraceResult {
  TracerState state;
  Evaluation evaluation;
};

// Interprets one behavior graph. Immutable once built, so a single Tracer can
// serve any number of concurrent sessions; each session owns its
// TracerState.
class Tracer {
 public:
  // Throws Error(kInvalidGraph) listing the diagnostics if the graph does
  // not validate.
  explicit Tracer(BehaviorGraph graph);

  const BehaviorGraph& graph() const { return *graph_; }

  TracerState init_state() const;

  // Evaluates an attempt. Throws kUnknownSelection / kStaleState.
  TraceResult trace(const TracerState& state, const Transaction& txn,
                    bool test_mode) const;

  // Serves the next hint. `step` restricts the choice to that selection's
  // links when one of them is available. Throws kHintsDisabled in test mode,
  // kNoHintAvailable once the problem is complete, kStaleState.
  TraceResult request_hint(const TracerState& state,
                           const std::optional<std::string>& step,
                           bool test_mode) const;

  // Student-performable links available from the state's frontier, in
  // authoring order.
  std::vector<const Link*> available_links(const TracerState& state) const;

 private:
  struct GroupInfo {
    NodeId entry;
    NodeId exit;
    std::vector<std::size_t> chain;  // member link indices, chain order
    std::size_t chain_size = 0;
  };

  void check_state(const TracerState& state) const;
  std::vector<std::size_t> moves_from(const Position& pos) const;
  std::vector<std::size_t> buggy_from(const Position& pos) const;
  Position advance(const Position& pos, std::size_t link) const;
  // Fires tutor-performed links out of a plain position, appending emissions.
  Position settle(Position pos, std::vector<Sai>& emitted,
                  std::vector<LinkId>& history) const;
  bool is_done(const Position& pos) const;
  std::vector<KcLabel> expected_kcs(const TracerState& state,
                                    const std::string& selection) const;

  std::shared_ptr<const BehaviorGraph> graph_;
  std::uint64_t fingerprint_;
  std::map<std::string, GroupInfo> unordered_groups_;
  std::map<LinkId, std::string> unordered_member_of_;
  std::map<NodeId, std::string> group_entry_at_;
};

}  // namespace tutorlab::graph
