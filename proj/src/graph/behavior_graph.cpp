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
#include "tutorlab/graph/behavior_graph.hpp"

#include <algorithm>
#include <functional>
#include <queue>

#include "tutorlab/common/error.hpp"
#include "tutorlab/common/strings.hpp"

namespace tutorlab::graph {
namespace {

using nlohmann::json;

constexpr std::pair<WidgetKind, std::string_view> kWidgetNames[] = {
    {WidgetKind::kTextInput, "text_input"}, {WidgetKind::kNumericInput, "numeric_input"},
    {WidgetKind::kMenu, "menu"},            {WidgetKind::kRadioGroup, "radio_group"},
    {WidgetKind::kButton, "button"},        {WidgetKind::kLabel, "label"},
    {WidgetKind::kGrid, "grid"},
};

constexpr std::pair<LinkKind, std::string_view> kLinkNames[] = {
    {LinkKind::kCorrect, "correct"},
    {LinkKind::kBuggy, "buggy"},
    {LinkKind::kTutorPerformed, "tutor_performed"},
};

template <typename E, std::size_t N>
E enum_from(const std::pair<E, std::string_view> (&table)[N], std::string_view name,
            const char* what) {
  for (const auto& [value, text] : table) {
    if (text == name) return value;
  }
  throw Error(ErrorCode::kParseError,
              std::string("unknown ") + what + " '" + std::string(name) + "'");
}

bool progresses(const Link& l) { return l.kind != LinkKind::kBuggy; }

std::vector<std::string> string_list(const json& doc, const char* key) {
  if (!doc.contains(key)) return {};
  return doc.at(key).get<std::vector<std::string>>();
}

}  // namespace

std::string_view to_string(WidgetKind kind) {
  for (const auto& [value, text] : kWidgetNames) {
    if (value == kind) return text;
  }
  return "?";
}

std::string_view to_string(LinkKind kind) {
  for (const auto& [value, text] : kLinkNames) {
    if (value == kind) return text;
  }
  return "?";
}

const std::string& Link::selection() const {
  static const std::string kEmpty;
  if (matcher) return matcher->selection;
  if (tutor_action) return tutor_action->selection;
  return kEmpty;
}

bool StepMatcher::matches(const Sai& sai) const {
  return sai.selection == selection && sai.action == action && input &&
         input->matches(sai.input);
}

const Link* BehaviorGraph::find_link(const LinkId& id) const {
  for (const auto& l : links) {
    if (l.id == id) return &l;
  }
  return nullptr;
}

std::optional<std::size_t> BehaviorGraph::link_index(const LinkId& id) const {
  for (std::size_t i = 0; i < links.size(); ++i) {
    if (links[i].id == id) return i;
  }
  return std::nullopt;
}

bool BehaviorGraph::has_widget(const std::string& id) const {
  return std::any_of(interface.begin(), interface.end(),
                     [&](const WidgetSpec& w) { return w.id == id; });
}

std::uint64_t BehaviorGraph::fingerprint() const {
  return fnv1a(graph_to_json(*this).dump());
}

BehaviorGraph graph_from_json(const json& doc) {
  try {
    if (!doc.is_object()) throw Error(ErrorCode::kParseError, "graph document must be an object");
    const int version = doc.value("schema_version", kSchemaVersion);
    if (version != kSchemaVersion) {
      throw Error(ErrorCode::kParseError,
                  "unsupported schema_version " + std::to_string(version));
    }
    BehaviorGraph g;
    g.problem_name = doc.at("problem").get<std::string>();
    for (const auto& w : doc.value("interface", json::array())) {
      WidgetSpec spec;
      spec.id = w.at("id").get<std::string>();
      spec.kind = enum_from(kWidgetNames, w.value("kind", std::string("text_input")),
                            "widget kind");
      spec.label = w.value("label", std::string());
      spec.options = string_list(w, "options");
      if (w.contains("position")) spec.position = w.at("position");
      g.interface.push_back(std::move(spec));
    }
    g.start_node = doc.at("start_node").get<std::string>();
    for (const auto& n : doc.at("nodes")) {
      if (n.is_string()) {
        g.nodes.push_back(n.get<std::string>());
      } else {
        g.nodes.push_back(n.at("id").get<std::string>());
        if (n.value("done", false)) g.done_nodes.insert(g.nodes.back());
      }
    }
    for (const auto& d : string_list(doc, "done_nodes")) g.done_nodes.insert(d);

    for (const auto& l : doc.value("links", json::array())) {
      Link link;
      link.id = l.at("id").get<std::string>();
      link.from = l.at("from").get<std::string>();
      link.to = l.at("to").get<std::string>();
      link.kind = enum_from(kLinkNames, l.value("kind", std::string("correct")), "link kind");
      if (link.kind == LinkKind::kTutorPerformed) {
        if (l.contains("input") && l.at("input").is_object()) {
          throw Error(ErrorCode::kParseError,
                      "tutor_performed link '" + link.id + "' takes a literal input, not a matcher");
        }
        link.tutor_action = Sai{l.at("selection").get<std::string>(),
                                l.at("action").get<std::string>(),
                                l.value("input", std::string())};
      } else if (l.contains("input")) {
        link.matcher = StepMatcher{l.at("selection").get<std::string>(),
                                   l.at("action").get<std::string>(),
                                   MatcherFactory::instance().build(l.at("input"))};
      }
      link.kcs = string_list(l, "kcs");
      link.hints = string_list(l, "hints");
      link.buggy_message = l.value("buggy_message", std::string());
      if (l.contains("success_message")) {
        link.success_message = l.at("success_message").get<std::string>();
      }
      if (l.contains("group")) link.group = l.at("group").get<std::string>();
      g.links.push_back(std::move(link));
    }

    for (const auto& gr : doc.value("groups", json::array())) {
      LinkGroup group;
      group.id = gr.at("id").get<std::string>();
      const auto ordering = gr.value("ordering", std::string("unordered"));
      if (ordering == "unordered") {
        group.ordering = GroupOrdering::kUnordered;
      } else if (ordering == "ordered") {
        group.ordering = GroupOrdering::kOrdered;
      } else {
        throw Error(ErrorCode::kParseError, "unknown group ordering '" + ordering + "'");
      }
      group.member_links = string_list(gr, "member_links");
      g.groups.push_back(std::move(group));
    }
    // A link may name its group instead of being listed by it.
    for (auto& link : g.links) {
      if (!link.group) continue;
      for (auto& group : g.groups) {
        if (group.id == *link.group &&
            std::find(group.member_links.begin(), group.member_links.end(), link.id) ==
                group.member_links.end()) {
          group.member_links.push_back(link.id);
        }
      }
    }
    for (const auto& group : g.groups) {
      for (const auto& member : group.member_links) {
        for (auto& link : g.links) {
          if (link.id == member && !link.group) link.group = group.id;
        }
      }
    }
    if (doc.contains("kc_model")) {
      for (const auto& [kc, desc] : doc.at("kc_model").items()) {
        g.kc_model[kc] = desc.is_string() ? desc.get<std::string>() : std::string();
      }
    }
    return g;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("behavior graph: ") + e.what());
  }
}

json widget_to_json(const WidgetSpec& w) {
  json wd{{"id", w.id}, {"kind", to_string(w.kind)}};
  if (!w.label.empty()) wd["label"] = w.label;
  if (!w.options.empty()) wd["options"] = w.options;
  if (!w.position.is_null()) wd["position"] = w.position;
  return wd;
}

json graph_to_json(const BehaviorGraph& g) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["problem"] = g.problem_name;
  doc["interface"] = json::array();
  for (const auto& w : g.interface) doc["interface"].push_back(widget_to_json(w));
  doc["start_node"] = g.start_node;
  doc["nodes"] = json::array();
  for (const auto& n : g.nodes) {
    json nd{{"id", n}};
    if (g.done_nodes.contains(n)) nd["done"] = true;
    doc["nodes"].push_back(std::move(nd));
  }
  // Done nodes that are not declared still round-trip (validation flags them).
  for (const auto& d : g.done_nodes) {
    if (std::find(g.nodes.begin(), g.nodes.end(), d) == g.nodes.end()) {
      doc["done_nodes"].push_back(d);
    }
  }
  doc["links"] = json::array();
  for (const auto& l : g.links) {
    json ld{{"id", l.id}, {"from", l.from}, {"to", l.to}, {"kind", to_string(l.kind)}};
    if (l.matcher) {
      ld["selection"] = l.matcher->selection;
      ld["action"] = l.matcher->action;
      if (l.matcher->input) ld["input"] = l.matcher->input->to_json();
    }
    if (l.tutor_action) {
      ld["selection"] = l.tutor_action->selection;
      ld["action"] = l.tutor_action->action;
      ld["input"] = l.tutor_action->input;
    }
    if (!l.kcs.empty()) ld["kcs"] = l.kcs;
    if (!l.hints.empty()) ld["hints"] = l.hints;
    if (!l.buggy_message.empty()) ld["buggy_message"] = l.buggy_message;
    if (l.success_message) ld["success_message"] = *l.success_message;
    doc["links"].push_back(std::move(ld));
  }
  doc["groups"] = json::array();
  for (const auto& gr : g.groups) {
    doc["groups"].push_back(
        {{"id", gr.id},
         {"ordering", gr.ordering == GroupOrdering::kUnordered ? "unordered" : "ordered"},
         {"member_links", gr.member_links}});
  }
  doc["kc_model"] = json::object();
  for (const auto& [kc, desc] : g.kc_model) doc["kc_model"][kc] = desc;
  return doc;
}

std::vector<Diagnostic> validate_graph(const BehaviorGraph& g) {
  std::vector<Diagnostic> out;
  auto report = [&](std::string code, std::string subject, std::string message) {
    out.push_back({std::move(code), std::move(subject), std::move(message)});
  };

  if (g.problem_name.empty()) report("missing problem name", "", "problem name is empty");

  std::set<NodeId> nodes;
  for (const auto& n : g.nodes) {
    if (!nodes.insert(n).second) report("duplicate node", n, "node declared twice");
  }
  std::set<std::string> widgets;
  for (const auto& w : g.interface) {
    if (!widgets.insert(w.id).second) report("duplicate widget", w.id, "widget declared twice");
    if ((w.kind == WidgetKind::kMenu || w.kind == WidgetKind::kRadioGroup) &&
        w.options.empty()) {
      report("missing options", w.id, "menu/radio widget has no options");
    }
  }
  if (!nodes.contains(g.start_node)) {
    report("unknown node", g.start_node, "start node is not declared");
  }
  if (g.done_nodes.empty()) report("no done node", "", "graph has no done node");
  for (const auto& d : g.done_nodes) {
    if (!nodes.contains(d)) report("unknown node", d, "done node is not declared");
  }

  std::set<LinkId> link_ids;
  for (const auto& l : g.links) {
    if (!link_ids.insert(l.id).second) report("duplicate link", l.id, "link id used twice");
    for (const NodeId* end : {&l.from, &l.to}) {
      if (!nodes.contains(*end)) {
        report("unknown node", l.id, "link endpoint '" + *end + "' is not declared");
      }
    }
    switch (l.kind) {
      case LinkKind::kCorrect:
      case LinkKind::kBuggy:
        if (!l.matcher || !l.matcher->input) {
          report("missing matcher", l.id, "link has no step matcher");
        } else if (auto problem = l.matcher->input->check()) {
          report("bad matcher", l.id, *problem);
        }
        if (l.tutor_action) report("unexpected tutor action", l.id, "only tutor_performed links emit actions");
        break;
      case LinkKind::kTutorPerformed:
        if (!l.tutor_action) report("missing tutor action", l.id, "tutor_performed link has no action");
        if (l.matcher) report("unexpected matcher", l.id, "tutor_performed links do not match input");
        break;
    }
    if (l.kind == LinkKind::kCorrect && l.hints.empty()) {
      report("missing hints", l.id, "correct link has an empty hint chain");
    }
    if (l.kind == LinkKind::kBuggy) {
      if (l.from != l.to) report("buggy advances", l.id, "buggy link must start and end at the same node");
      if (l.buggy_message.empty()) report("missing buggy message", l.id, "buggy link has no message");
    }
    if (!l.selection().empty() && !widgets.contains(l.selection())) {
      report("unknown widget", l.id, "selection '" + l.selection() + "' is not in the interface");
    }
    for (const auto& kc : l.kcs) {
      if (!g.kc_model.contains(kc)) report("unknown kc", l.id, "KC '" + kc + "' is not in the KC model");
    }
  }

  // Tutor-performed links must be the only way forward from their node.
  std::map<NodeId, std::vector<const Link*>> out_links;
  for (const auto& l : g.links) {
    if (progresses(l)) out_links[l.from].push_back(&l);
  }
  for (const auto& [node, links] : out_links) {
    const auto tutor = std::count_if(links.begin(), links.end(), [](const Link* l) {
      return l->kind == LinkKind::kTutorPerformed;
    });
    if (tutor > 0 && links.size() > 1) {
      report("tutor conflict", node, "a node with a tutor_performed link has other outgoing steps");
    }
  }

  // Cycle check over progressing links.
  {
    std::map<NodeId, int> color;
    std::function<bool(const NodeId&)> visit = [&](const NodeId& n) {
      color[n] = 1;
      for (const Link* l : out_links[n]) {
        if (color[l->to] == 1) return true;
        if (color[l->to] == 0 && visit(l->to)) return true;
      }
      color[n] = 2;
      return false;
    };
    for (const auto& n : g.nodes) {
      if (color[n] == 0 && visit(n)) {
        report("cycle", n, "correct/tutor_performed links form a cycle");
        break;
      }
    }
  }

  // Reachability of done nodes.
  {
    std::set<NodeId> seen{g.start_node};
    std::queue<NodeId> frontier;
    frontier.push(g.start_node);
    while (!frontier.empty()) {
      const NodeId n = frontier.front();
      frontier.pop();
      for (const Link* l : out_links[n]) {
        if (seen.insert(l->to).second) frontier.push(l->to);
      }
    }
    for (const auto& d : g.done_nodes) {
      if (nodes.contains(d) && !seen.contains(d)) {
        report("unreachable done node", d, "done node cannot be reached from the start node");
      }
    }
  }

  // Groups.
  std::map<LinkId, std::string> member_of;
  std::map<NodeId, std::string> entries;
  std::set<std::string> group_ids;
  for (const auto& gr : g.groups) {
    if (!group_ids.insert(gr.id).second) report("duplicate group", gr.id, "group id used twice");
    if (gr.member_links.empty()) {
      report("empty group", gr.id, "group has no members");
      continue;
    }
    std::vector<const Link*> members;
    bool usable = true;
    for (const auto& id : gr.member_links) {
      const Link* l = g.find_link(id);
      if (!l) {
        report("unknown link", gr.id, "group member '" + id + "' is not a link");
        usable = false;
        continue;
      }
      if (l->kind != LinkKind::kCorrect) {
        report("group member kind", gr.id, "group member '" + id + "' is not a correct link");
        usable = false;
      }
      if (auto [it, fresh] = member_of.emplace(id, gr.id); !fresh) {
        report("group overlap", id, "link belongs to groups '" + it->second + "' and '" + gr.id + "'");
        usable = false;
      }
      members.push_back(l);
    }
    for (const auto& l : g.links) {
      if (l.group && *l.group == gr.id &&
          std::find(gr.member_links.begin(), gr.member_links.end(), l.id) == gr.member_links.end()) {
        report("group mismatch", l.id, "link names group '" + gr.id + "' but is not a member");
      }
    }
    if (!usable || gr.ordering == GroupOrdering::kOrdered) continue;

    // Unordered members must form one simple chain entry -> ... -> exit.
    std::map<NodeId, const Link*> by_from;
    std::set<NodeId> tos;
    bool chain_ok = true;
    for (const Link* l : members) {
      if (!by_from.emplace(l->from, l).second) chain_ok = false;
      tos.insert(l->to);
    }
    std::vector<NodeId> starts;
    for (const auto& [from, l] : by_from) {
      if (!tos.contains(from)) starts.push_back(from);
    }
    std::vector<NodeId> chain_nodes;
    if (chain_ok && starts.size() == 1) {
      NodeId cur = starts.front();
      std::set<NodeId> visited;
      while (by_from.contains(cur) && visited.insert(cur).second) {
        chain_nodes.push_back(cur);
        cur = by_from[cur]->to;
      }
      chain_ok = chain_nodes.size() == members.size();
      chain_nodes.push_back(cur);  // exit
    } else {
      chain_ok = false;
    }
    if (!chain_ok) {
      report("group not contiguous", gr.id, "unordered group members must form a single chain");
      continue;
    }
    const NodeId& entry = chain_nodes.front();
    if (auto [it, fresh] = entries.emplace(entry, gr.id); !fresh) {
      report("group entry conflict", entry, "groups '" + it->second + "' and '" + gr.id + "' start at the same node");
    }
    const std::set<NodeId> interior(chain_nodes.begin() + 1, chain_nodes.end() - 1);
    for (const auto& l : g.links) {
      if (!progresses(l)) continue;
      const bool member = std::find(gr.member_links.begin(), gr.member_links.end(), l.id) != gr.member_links.end();
      if (member) continue;
      if (interior.contains(l.from)) {
        report("group branch", l.id, "link leaves the interior of unordered group '" + gr.id + "'");
      }
      if (interior.contains(l.to)) {
        report("group inbound", l.id, "link enters the interior of unordered group '" + gr.id + "'");
      }
    }
    if (interior.contains(g.start_node)) {
      report("group inbound", g.start_node, "start node lies inside unordered group '" + gr.id + "'");
    }
    for (const auto& n : interior) {
      if (g.done_nodes.contains(n)) {
        report("group done", n, "done node lies inside unordered group '" + gr.id + "'");
      }
    }
  }
  return out;
}

}  // namespace tutorlab::graph
