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
#include "graph_fixtures.hpp"

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <map>
#include <regex>

#include "tutorlab/common/strings.hpp"

namespace tutorlab::testing {
namespace {

using graph::BehaviorGraph;
using graph::Link;
using graph::LinkKind;
using graph::Sai;
using nlohmann::json;

const std::vector<std::string> kWidgets{"w0", "w1", "w2"};
const std::vector<std::string> kInputs{"1", "2", "3", "a"};

json random_input_doc(Rng& rng) {
  switch (rng.below(6)) {
    case 0:
    case 1:
    case 2:
      return {{"kind", "exact"}, {"value", kInputs[rng.below(kInputs.size())]}};
    case 3: {
      const double lo = static_cast<double>(1 + rng.below(3));
      return {{"kind", "range"}, {"lo", lo}, {"hi", lo + static_cast<double>(rng.below(2))}};
    }
    case 4:
      return {{"kind", "pattern"}, {"regex", rng.bernoulli(0.5) ? "[12]" : "[a-z]+"}};
    default:
      return {{"kind", "any"}};
  }
}

// Independent re-implementation of the four core input kinds.
bool oracle_input_matches(const json& doc, const std::string& raw) {
  std::string input = raw;
  input.erase(0, input.find_first_not_of(" \t\r\n"));
  input.erase(input.find_last_not_of(" \t\r\n") + 1);
  const std::string kind = doc.at("kind");
  if (kind == "any") return true;
  if (kind == "exact") {
    std::string v = doc.at("value");
    v.erase(0, v.find_first_not_of(" \t\r\n"));
    v.erase(v.find_last_not_of(" \t\r\n") + 1);
    return v == input;
  }
  if (kind == "range") {
    if (input.empty()) return false;
    char* end = nullptr;
    const double x = std::strtod(input.c_str(), &end);
    if (end != input.c_str() + input.size()) return false;
    return doc.at("lo").get<double>() <= x && x <= doc.at("hi").get<double>();
  }
  if (kind == "pattern") {
    return std::regex_match(input, std::regex(doc.at("regex").get<std::string>()));
  }
  std::abort();
}

bool oracle_matches(const Link& l, const Sai& sai) {
  return l.matcher->selection == sai.selection && l.matcher->action == sai.action &&
         oracle_input_matches(l.matcher->input->to_json(), sai.input);
}

}  // namespace

graph::BehaviorGraph chain_graph(int steps) {
  json doc;
  doc["problem"] = "chain" + std::to_string(steps);
  doc["start_node"] = "n0";
  doc["interface"] = json::array();
  doc["nodes"] = json::array();
  doc["links"] = json::array();
  doc["kc_model"] = json::object();
  for (int i = 0; i <= steps; ++i) {
    json node{{"id", "n" + std::to_string(i)}};
    if (i == steps) node["done"] = true;
    doc["nodes"].push_back(node);
  }
  for (int i = 1; i <= steps; ++i) {
    const std::string widget = "cell_A" + std::to_string(i);
    const std::string kc = "k" + std::to_string(i);
    doc["interface"].push_back({{"id", widget}, {"kind", "text_input"}});
    doc["kc_model"][kc] = "skill " + std::to_string(i);
    doc["links"].push_back({{"id", "s" + std::to_string(i)},
                            {"from", "n" + std::to_string(i - 1)},
                            {"to", "n" + std::to_string(i)},
                            {"kind", "correct"},
                            {"selection", widget},
                            {"action", "UpdateText"},
                            {"input", {{"kind", "exact"}, {"value", std::to_string(40 + i)}}},
                            {"kcs", {kc}},
                            {"hints", {"h" + std::to_string(i) + ".1", "h" + std::to_string(i) + ".2"}}});
  }
  return graph::graph_from_json(doc);
}

graph::BehaviorGraph random_graph(Rng& rng) {
  json doc;
  doc["problem"] = "gen";
  doc["start_node"] = "n0";
  doc["interface"] = json::array();
  for (const auto& w : kWidgets) doc["interface"].push_back({{"id", w}, {"kind", "text_input"}});
  doc["kc_model"] = {{"k1", ""}, {"k2", ""}};
  doc["links"] = json::array();
  doc["groups"] = json::array();

  int node_count = 1;
  int link_count = 0;
  int group_count = 0;
  const int max_links = 1 + static_cast<int>(rng.below(8));
  std::vector<int> open{0};            // nodes that may grow outgoing steps
  std::set<int> sealed;                // tutor sources and group interiors
  std::set<int> group_entries;
  std::set<int> has_out;
  auto new_node = [&] { return node_count++; };
  auto name = [](int n) { return "n" + std::to_string(n); };
  auto add_link = [&](int from, int to, const std::string& kind) -> json& {
    json l{{"id", "l" + std::to_string(link_count++)},
           {"from", name(from)},
           {"to", name(to)},
           {"kind", kind},
           {"selection", kWidgets[rng.below(kWidgets.size())]},
           {"action", "UpdateText"}};
    if (kind == "tutor_performed") {
      l["input"] = "t";
    } else {
      l["input"] = random_input_doc(rng);
      l["kcs"] = {rng.bernoulli(0.5) ? "k1" : "k2"};
    }
    if (kind == "correct") l["hints"] = {"hint"};
    if (kind == "buggy") l["buggy_message"] = "buggy";
    doc["links"].push_back(std::move(l));
    return doc["links"].back();
  };

  while (link_count < max_links && !open.empty()) {
    const int from = open[rng.below(open.size())];
    const int remaining = max_links - link_count;
    const auto choice = rng.below(10);
    if (choice < 4 || remaining < 2) {
      if (choice == 0 && !has_out.contains(from)) {
        const int to = new_node();
        add_link(from, to, "tutor_performed");
        sealed.insert(from);
        has_out.insert(from);
        open.push_back(to);
      } else if (choice == 1 && has_out.contains(from) && node_count > 1) {
        add_link(from, from, "buggy");
      } else {
        // Plain step, sometimes converging on an existing later node.
        const int to = (rng.bernoulli(0.2) && node_count > from + 1)
                           ? from + 1 + static_cast<int>(rng.below(node_count - from - 1))
                           : new_node();
        if (to == from || sealed.contains(to)) continue;
        add_link(from, to, "correct");
        has_out.insert(from);
        if (std::find(open.begin(), open.end(), to) == open.end()) open.push_back(to);
      }
    } else if (choice < 7 && group_count < 3 && !group_entries.contains(from)) {
      const int size = std::min<int>(remaining, 2 + static_cast<int>(rng.below(2)));
      json group{{"id", "g" + std::to_string(group_count++)},
                 {"ordering", rng.bernoulli(0.85) ? "unordered" : "ordered"},
                 {"member_links", json::array()}};
      int cur = from;
      for (int i = 0; i < size; ++i) {
        const int to = new_node();
        group["member_links"].push_back(add_link(cur, to, "correct")["id"]);
        if (i + 1 < size) {
          sealed.insert(to);
          has_out.insert(to);
        }
        cur = to;
      }
      if (rng.bernoulli(0.4) && link_count < max_links) {
        add_link(from, from, "buggy");
      }
      group_entries.insert(from);
      has_out.insert(from);
      open.push_back(cur);
      doc["groups"].push_back(std::move(group));
    } else if (!has_out.contains(from) || rng.bernoulli(0.5)) {
      // Alternative branch out of the same node.
      const int a = new_node();
      add_link(from, a, "correct");
      if (link_count < max_links) add_link(from, rng.bernoulli(0.3) ? a : new_node(), "correct");
      has_out.insert(from);
      open.push_back(a);
      if (node_count - 1 != a) open.push_back(node_count - 1);
    }
    open.erase(std::remove_if(open.begin(), open.end(),
                              [&](int n) { return sealed.contains(n); }),
               open.end());
  }

  doc["nodes"] = json::array();
  for (int n = 0; n < node_count; ++n) {
    bool done = !has_out.contains(n);
    if (!done && !sealed.contains(n) && rng.bernoulli(0.1)) done = true;
    // Interior nodes of unordered groups may not be done.
    if (sealed.contains(n) && has_out.contains(n)) done = false;
    json node{{"id", name(n)}};
    if (done) node["done"] = true;
    doc["nodes"].push_back(std::move(node));
  }
  return graph::graph_from_json(doc);
}

std::vector<Sai> probe_alphabet() {
  std::vector<Sai> out;
  for (const auto& w : kWidgets) {
    for (const auto& in : kInputs) out.push_back({w, "UpdateText", in});
  }
  return out;
}

std::set<SaiSequence> oracle_completing_sequences(const BehaviorGraph& g,
                                                  const std::vector<Sai>& alphabet) {
  // Unordered group chains, rebuilt from the group declarations.
  struct Chain {
    std::string entry;
    std::string exit;
    std::vector<const Link*> members;
  };
  std::map<std::string, Chain> chain_at;  // entry node -> chain
  std::set<std::string> grouped;
  for (const auto& group : g.groups) {
    if (group.ordering != graph::GroupOrdering::kUnordered) continue;
    Chain c;
    std::set<std::string> tos;
    for (const auto& id : group.member_links) {
      c.members.push_back(g.find_link(id));
      tos.insert(c.members.back()->to);
      grouped.insert(id);
    }
    std::set<std::string> froms;
    for (const Link* l : c.members) froms.insert(l->from);
    for (const Link* l : c.members) {
      if (!tos.contains(l->from)) c.entry = l->from;
      if (!froms.contains(l->to)) c.exit = l->to;
    }
    chain_at[c.entry] = c;
  }

  std::vector<std::vector<const Link*>> paths;
  std::function<void(std::string, std::vector<const Link*>)> walk =
      [&](std::string node, std::vector<const Link*> path) {
        // Tutor-performed links are taken without student input.
        for (bool moved = true; moved;) {
          moved = false;
          for (const auto& l : g.links) {
            if (l.kind == LinkKind::kTutorPerformed && l.from == node) {
              node = l.to;
              moved = true;
              break;
            }
          }
        }
        if (g.done_nodes.contains(node)) {
          paths.push_back(path);
          return;
        }
        for (const auto& l : g.links) {
          if (l.kind == LinkKind::kCorrect && l.from == node && !grouped.contains(l.id)) {
            auto next = path;
            next.push_back(&l);
            walk(l.to, next);
          }
        }
        if (auto it = chain_at.find(node); it != chain_at.end()) {
          auto order = it->second.members;
          std::sort(order.begin(), order.end());
          do {
            auto next = path;
            next.insert(next.end(), order.begin(), order.end());
            walk(it->second.exit, next);
          } while (std::next_permutation(order.begin(), order.end()));
        }
      };
  walk(g.start_node, {});

  std::set<SaiSequence> accepted;
  for (const auto& path : paths) {
    std::vector<SaiSequence> partial{{}};
    for (const Link* l : path) {
      std::vector<SaiSequence> grown;
      for (const auto& prefix : partial) {
        for (const auto& a : alphabet) {
          if (!oracle_matches(*l, a)) continue;
          auto seq = prefix;
          seq.push_back(a);
          grown.push_back(std::move(seq));
        }
      }
      partial = std::move(grown);
    }
    accepted.insert(partial.begin(), partial.end());
  }
  std::set<SaiSequence> out;
  for (const auto& seq : accepted) {
    bool prefix_completes = false;
    for (std::size_t k = 0; k < seq.size() && !prefix_completes; ++k) {
      prefix_completes = accepted.contains(SaiSequence(seq.begin(), seq.begin() + k));
    }
    if (!prefix_completes) out.insert(seq);
  }
  return out;
}

std::set<SaiSequence> tracer_completing_sequences(const graph::Tracer& tracer,
                                                  const std::vector<Sai>& alphabet) {
  std::set<SaiSequence> out;
  std::function<void(const graph::TracerState&, SaiSequence&)> dfs =
      [&](const graph::TracerState& state, SaiSequence& seq) {
        if (state.completed) {
          out.insert(seq);
          return;
        }
        for (const auto& a : alphabet) {
          graph::Transaction txn;
          txn.selection = a.selection;
          txn.action = a.action;
          txn.input = a.input;
          auto result = tracer.trace(state, txn, false);
          if (result.evaluation.outcome != graph::Outcome::kCorrect) continue;
          seq.push_back(a);
          dfs(result.state, seq);
          seq.pop_back();
        }
      };
  SaiSequence seq;
  dfs(tracer.init_state(), seq);
  return out;
}

}  // namespace tutorlab::testing
