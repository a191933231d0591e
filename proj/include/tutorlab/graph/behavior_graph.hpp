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
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tutorlab/graph/matcher.hpp"

namespace tutorlab::graph {

inline constexpr int kSchemaVersion = 1;

using NodeId = std::string;
using LinkId = std::string;
using KcLabel = std::string;

enum class WidgetKind {
  kTextInput,
  kNumericInput,
  kMenu,
  kRadioGroup,
  kButton,
  kLabel,
  kGrid,
};

struct WidgetSpec {
  std::string id;
  WidgetKind kind = WidgetKind::kTextInput;
  std::string label;
  std::vector<std::string> options;  // menu / radio_group
  nlohmann::json position;           // free-form layout hints, passed through
};

// Selection-action-input: the unit of interaction with the tutor interface.
struct Sai {
  std::string selection;
  std::string action;
  std::string input;

  friend bool operator==(const Sai&, const Sai&) = default;
  friend auto operator<=>(const Sai&, const Sai&) = default;
};

struct StepMatcher {
  std::string selection;
  std::string action;
  MatcherPtr input;

  bool matches(const Sai& sai) const;
};

enum class LinkKind { kCorrect, kBuggy, kTutorPerformed };

struct Link {
  LinkId id;
  NodeId from;
  NodeId to;
  LinkKind kind = LinkKind::kCorrect;
  std::optional<StepMatcher> matcher;  // correct and buggy links
  std::optional<Sai> tutor_action;     // tutor-performed links
  std::vector<KcLabel> kcs;
  std::vector<std::string> hints;
  std::string buggy_message;
  std::optional<std::string> success_message;
  std::optional<std::string> group;

  // Widget the link acts on, whichever kind it is.
  const std::string& selection() const;
};

enum class GroupOrdering { kUnordered, kOrdered };

struct LinkGroup {
  std::string id;
  GroupOrdering ordering = GroupOrdering::kUnordered;
  std::vector<LinkId> member_links;
};

struct BehaviorGraph {
  std::string problem_name;
  std::vector<WidgetSpec> interface;
  NodeId start_node;
  std::vector<NodeId> nodes;  // declaration order
  std::vector<Link> links;    // authoring order, used for tie-breaking
  std::vector<LinkGroup> groups;
  std::set<NodeId> done_nodes;
  std::map<KcLabel, std::string> kc_model;

  const Link* find_link(const LinkId& id) const;
  std::optional<std::size_t> link_index(const LinkId& id) const;
  bool has_widget(const std::string& id) const;
  // Identity of the graph content; tracer states are stamped with it.
  std::uint64_t fingerprint() const;
};

struct Diagnostic {
  std::string code;     // "unknown node", "missing hints", ...
  std::string subject;  // offending node/link/group id
  std::string message;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

// Reports every invariant violation; an empty result means the graph is
// ready for tracing.
std::vector<Diagnostic> validate_graph(const BehaviorGraph& graph);

// Package-document serialization. Parse errors (malformed JSON, unknown
// enum tags, bad matchers) throw Error(kParseError); structural problems are
// left to validate_graph.
BehaviorGraph graph_from_json(const nlohmann::json& doc);
nlohmann::json graph_to_json(const BehaviorGraph& graph);
nlohmann::json widget_to_json(const WidgetSpec& widget);

std::string_view to_string(LinkKind kind);
std::string_view to_string(WidgetKind kind);

}  // namespace tutorlab::graph
