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
#include "tutorlab/graph/tracer.hpp"

#include <algorithm>

#include "tutorlab/common/error.hpp"
#include "tutorlab/common/strings.hpp"

namespace tutorlab::graph {

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::kCorrect:
      return "CORRECT";
    case Outcome::kIncorrect:
      return "INCORRECT";
    case Outcome::kHint:
      return "HINT";
  }
  return "?";
}

Outcome outcome_from_string(std::string_view token) {
  const std::string t = to_lower(trim(token));
  if (t == "correct") return Outcome::kCorrect;
  if (t == "incorrect") return Outcome::kIncorrect;
  if (t == "hint") return Outcome::kHint;
  throw Error(ErrorCode::kParseError, "unknown outcome '" + std::string(token) + "'");
}

Tracer::Tracer(BehaviorGraph graph)
    : graph_(std::make_shared<const BehaviorGraph>(std::move(graph))),
      fingerprint_(graph_->fingerprint()) {
  if (const auto diags = validate_graph(*graph_); !diags.empty()) {
    std::string msg = "graph '" + graph_->problem_name + "' failed validation:";
    for (const auto& d : diags) msg += " [" + d.code + ": " + d.subject + "]";
    throw Error(ErrorCode::kInvalidGraph, msg);
  }
  const auto& links = graph_->links;
  for (const auto& group : graph_->groups) {
    if (group.ordering != GroupOrdering::kUnordered) continue;
    std::map<NodeId, std::size_t> by_from;
    std::set<NodeId> tos;
    for (const auto& id : group.member_links) {
      const std::size_t idx = *graph_->link_index(id);
      by_from[links[idx].from] = idx;
      tos.insert(links[idx].to);
    }
    GroupInfo info;
    for (const auto& [from, idx] : by_from) {
      if (!tos.contains(from)) info.entry = from;
    }
    NodeId cur = info.entry;
    while (by_from.contains(cur)) {
      info.chain.push_back(by_from[cur]);
      cur = links[by_from[cur]].to;
    }
    info.exit = cur;
    info.chain_size = info.chain.size();
    for (const auto& id : group.member_links) unordered_member_of_[id] = group.id;
    group_entry_at_[info.entry] = group.id;
    unordered_groups_[group.id] = std::move(info);
  }
}

void Tracer::check_state(const TracerState& state) const {
  if (state.graph_fingerprint != fingerprint_) {
    throw Error(ErrorCode::kStaleState,
                "tracer state does not belong to this version of '" + graph_->problem_name + "'");
  }
}

std::vector<std::size_t> Tracer::moves_from(const Position& pos) const {
  const auto& links = graph_->links;
  std::vector<std::size_t> out;
  if (!pos.traversed.empty()) {
    const auto& info = unordered_groups_.at(unordered_member_of_.at(*pos.traversed.begin()));
    for (std::size_t idx : info.chain) {
      if (!pos.traversed.contains(links[idx].id)) out.push_back(idx);
    }
  } else {
    const auto entry = group_entry_at_.find(pos.node);
    for (std::size_t i = 0; i < links.size(); ++i) {
      const Link& l = links[i];
      if (l.kind != LinkKind::kCorrect) continue;
      const auto grp = unordered_member_of_.find(l.id);
      if (grp == unordered_member_of_.end()) {
        if (l.from == pos.node) out.push_back(i);
      } else if (entry != group_entry_at_.end() && entry->second == grp->second) {
        out.push_back(i);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> Tracer::buggy_from(const Position& pos) const {
  std::set<NodeId> region{pos.node};
  if (!pos.traversed.empty()) {
    const auto& info = unordered_groups_.at(unordered_member_of_.at(*pos.traversed.begin()));
    for (std::size_t idx : info.chain) region.insert(graph_->links[idx].from);
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < graph_->links.size(); ++i) {
    const Link& l = graph_->links[i];
    if (l.kind == LinkKind::kBuggy && region.contains(l.from)) out.push_back(i);
  }
  return out;
}

Position Tracer::advance(const Position& pos, std::size_t link) const {
  const Link& l = graph_->links[link];
  const auto grp = unordered_member_of_.find(l.id);
  if (grp == unordered_member_of_.end()) return Position{l.to, {}};
  const auto& info = unordered_groups_.at(grp->second);
  Position next{info.entry, pos.traversed};
  next.traversed.insert(l.id);
  if (next.traversed.size() == info.chain_size) return Position{info.exit, {}};
  return next;
}

Position Tracer::settle(Position pos, std::vector<Sai>& emitted,
                        std::vector<LinkId>& history) const {
  if (!pos.traversed.empty()) return pos;
  // Validation guarantees tutor links are acyclic and the only way forward.
  bool fired = true;
  while (fired) {
    fired = false;
    for (const auto& l : graph_->links) {
      if (l.kind == LinkKind::kTutorPerformed && l.from == pos.node) {
        emitted.push_back(*l.tutor_action);
        history.push_back(l.id);
        pos = Position{l.to, {}};
        fired = true;
        break;
      }
    }
  }
  return pos;
}

bool Tracer::is_done(const Position& pos) const {
  return pos.traversed.empty() && graph_->done_nodes.contains(pos.node);
}

TracerState Tracer::init_state() const {
  TracerState state;
  state.graph_fingerprint = fingerprint_;
  const Position start = settle(Position{graph_->start_node, {}},
                                state.initial_tutor_actions, state.traversed_links);
  state.frontier.insert(start);
  state.completed = is_done(start);
  return state;
}

std::vector<const Link*> Tracer::available_links(const TracerState& state) const {
  std::set<std::size_t> all;
  for (const auto& pos : state.frontier) {
    for (std::size_t idx : moves_from(pos)) all.insert(idx);
  }
  std::vector<const Link*> out;
  for (std::size_t idx : all) out.push_back(&graph_->links[idx]);
  return out;
}

std::vector<KcLabel> Tracer::expected_kcs(const TracerState& state,
                                          const std::string& selection) const {
  for (const Link* l : available_links(state)) {
    if (l->selection() == selection) return l->kcs;
  }
  for (const auto& l : graph_->links) {
    if (l.kind == LinkKind::kCorrect && l.selection() == selection) return l.kcs;
  }
  return {};
}

TraceResult Tracer::trace(const TracerState& state, const Transaction& txn,
                          bool test_mode) const {
  check_state(state);
  if (txn.kind != TransactionKind::kAttempt) {
    throw Error(ErrorCode::kInvalidArgument, "trace() takes attempts; use request_hint()");
  }
  if (!graph_->has_widget(txn.selection)) {
    throw Error(ErrorCode::kUnknownSelection,
                "'" + txn.selection + "' is not a widget of '" + graph_->problem_name + "'");
  }
  TraceResult result{state, {}};
  TracerState& next = result.state;
  Evaluation& eval = result.evaluation;
  const Sai sai = txn.sai();
  eval.sai = sai;
  eval.step = sai.selection;
  eval.attempt_at_step = ++next.attempt_counts[eval.step];

  // All matching (position, link) pairs advance together.
  std::set<Position> advanced;
  std::optional<std::size_t> first_match;
  std::vector<Sai> emitted;
  for (const auto& pos : state.frontier) {
    for (std::size_t idx : moves_from(pos)) {
      if (!graph_->links[idx].matcher->matches(sai)) continue;
      if (!first_match || idx < *first_match) first_match = idx;
      next.traversed_links.push_back(graph_->links[idx].id);
      advanced.insert(settle(advance(pos, idx), emitted, next.traversed_links));
    }
  }

  if (first_match) {
    const Link& l = graph_->links[*first_match];
    eval.outcome = Outcome::kCorrect;
    eval.matched_link = l.id;
    eval.kcs = l.kcs;
    eval.tutor_actions = std::move(emitted);
    if (l.success_message && !test_mode) eval.feedback_text = *l.success_message;
    next.hint_cursor.erase(eval.step);
    std::set<Position> done;
    for (const auto& pos : advanced) {
      if (is_done(pos)) done.insert(pos);
    }
    if (!done.empty()) {
      next.completed = true;
      next.frontier = std::move(done);
    } else {
      next.frontier = std::move(advanced);
    }
    eval.completed_problem = next.completed;
    return result;
  }

  eval.outcome = Outcome::kIncorrect;
  eval.completed_problem = next.completed;
  std::optional<std::size_t> buggy;
  for (const auto& pos : state.frontier) {
    for (std::size_t idx : buggy_from(pos)) {
      if (graph_->links[idx].matcher->matches(sai) && (!buggy || idx < *buggy)) buggy = idx;
    }
  }
  if (buggy) {
    const Link& l = graph_->links[*buggy];
    eval.matched_link = l.id;
    eval.kcs = l.kcs.empty() ? expected_kcs(state, eval.step) : l.kcs;
    if (!test_mode) eval.feedback_text = l.buggy_message;
  } else {
    eval.kcs = expected_kcs(state, eval.step);
    if (!test_mode) eval.feedback_text = kGenericIncorrectFeedback;
  }
  return result;
}

TraceResult Tracer::request_hint(const TracerState& state,
                                 const std::optional<std::string>& step,
                                 bool test_mode) const {
  check_state(state);
  if (test_mode) throw Error(ErrorCode::kHintsDisabled, "hints are disabled in test mode");
  if (state.completed) throw Error(ErrorCode::kNoHintAvailable, "problem is complete");
  if (step && !step->empty() && !graph_->has_widget(*step)) {
    throw Error(ErrorCode::kUnknownSelection,
                "'" + *step + "' is not a widget of '" + graph_->problem_name + "'");
  }
  const auto candidates = available_links(state);
  if (candidates.empty()) throw Error(ErrorCode::kNoHintAvailable, "no step is available");
  const Link* chosen = candidates.front();
  if (step && !step->empty()) {
    for (const Link* l : candidates) {
      if (l->selection() == *step) {
        chosen = l;
        break;
      }
    }
  }

  TraceResult result{state, {}};
  TracerState& next = result.state;
  Evaluation& eval = result.evaluation;
  eval.step = chosen->selection();
  eval.sai = Sai{eval.step, "Hint", ""};
  eval.attempt_at_step = ++next.attempt_counts[eval.step];
  const int chain = static_cast<int>(chosen->hints.size());
  int& level = next.hint_cursor[eval.step];
  level = std::min(level + 1, chain);
  eval.outcome = Outcome::kHint;
  eval.help_level = level;
  eval.total_hint_levels = chain;
  eval.feedback_text = chosen->hints[static_cast<std::size_t>(level - 1)];
  eval.matched_link = chosen->id;
  eval.kcs = chosen->kcs;
  eval.completed_problem = false;
  return result;
}

}  // namespace tutorlab::graph
