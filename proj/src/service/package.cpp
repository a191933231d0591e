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

#include "tutorlab/service/package.hpp"

#include <fstream>
#include <set>

#include "tutorlab/common/error.hpp"

namespace tutorlab::service {

using nlohmann::json;

const graph::BehaviorGraph* Package::find_problem(const std::string& name) const {
  for (const auto& g : problems) {
    if (g.problem_name == name) return &g;
  }
  return nullptr;
}

const selection::Curriculum* Package::find_curriculum(const std::string& id) const {
  for (const auto& c : curricula) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

namespace {

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
}

student::KcParams params_from_json(const json& row) {
  student::KcParams p;
  p.p_init = row.value("p_init", p.p_init);
  p.p_transit = row.value("p_transit", p.p_transit);
  p.p_slip = row.value("p_slip", p.p_slip);
  p.p_guess = row.value("p_guess", p.p_guess);
  return p;
}

}  // namespace

Package package_from_json(const json& doc, const std::filesystem::path& base_dir) {
  Package pkg;
  try {
    pkg.name = doc.at("name").get<std::string>();
    pkg.version = doc.value("version", 0);
    if (doc.contains("kc_model")) {
      for (const auto& [kc, desc] : doc.at("kc_model").items()) {
        pkg.kc_model[kc] = desc.is_string() ? desc.get<std::string>() : std::string();
      }
    }
    if (doc.contains("kc_params")) {
      const auto& params = doc.at("kc_params");
      if (params.is_array()) {
        for (const auto& row : params) pkg.kc_params[row.at("kc").get<std::string>()] = params_from_json(row);
      } else {
        for (const auto& [kc, row] : params.items()) pkg.kc_params[kc] = params_from_json(row);
      }
    }
    for (const auto& p : doc.at("problems")) {
      const json graph_doc = p.is_string() ? read_json_file(base_dir / p.get<std::string>()) : p;
      auto g = graph::graph_from_json(graph_doc);
      if (!graph_doc.contains("kc_model")) g.kc_model = pkg.kc_model;
      pkg.problems.push_back(std::move(g));
    }
    for (const auto& c : doc.value("curricula", json::array())) {
      pkg.curricula.push_back(selection::curriculum_from_json(c));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, "package: " + std::string(e.what()));
  }
  for (const auto& [kc, desc] : pkg.kc_model) pkg.kc_params.try_emplace(kc);
  for (auto& c : pkg.curricula) {
    for (auto& problem : c.problems) {
      const auto* g = pkg.find_problem(problem.name);
      if (!problem.kcs.empty() || !g) continue;
      for (const auto& link : g->links) problem.kcs.insert(link.kcs.begin(), link.kcs.end());
    }
  }
  return pkg;
}

Package load_package_dir(const std::filesystem::path& dir) {
  return package_from_json(read_json_file(dir / "package.json"), dir);
}

json package_to_json(const Package& pkg) {
  json doc{{"name", pkg.name}, {"kc_model", pkg.kc_model}};
  if (pkg.version > 0) doc["version"] = pkg.version;
  json params = json::array();
  for (const auto& [kc, p] : pkg.kc_params) {
    params.push_back({{"kc", kc}, {"p_init", p.p_init}, {"p_transit", p.p_transit},
                      {"p_slip", p.p_slip}, {"p_guess", p.p_guess}});
  }
  doc["kc_params"] = params;
  doc["curricula"] = json::array();
  for (const auto& c : pkg.curricula) doc["curricula"].push_back(selection::curriculum_to_json(c));
  doc["problems"] = json::array();
  for (const auto& g : pkg.problems) doc["problems"].push_back(graph::graph_to_json(g));
  return doc;
}

std::vector<graph::Diagnostic> validate_package(const Package& pkg) {
  std::vector<graph::Diagnostic> out;
  auto report = [&](std::string code, std::string subject, std::string message) {
    out.push_back({std::move(code), std::move(subject), std::move(message)});
  };
  if (pkg.name.empty()) report("missing package name", "", "package name is empty");
  std::set<std::string> names;
  for (const auto& g : pkg.problems) {
    if (!names.insert(g.problem_name).second) {
      report("duplicate problem", g.problem_name, "problem '" + g.problem_name + "' is defined twice");
    }
    for (auto d : graph::validate_graph(g)) {
      d.subject = g.problem_name + "/" + d.subject;
      out.push_back(std::move(d));
    }
    for (const auto& link : g.links) {
      for (const auto& kc : link.kcs) {
        if (!pkg.kc_model.contains(kc)) {
          report("unknown kc", g.problem_name + "/" + link.id,
                 "KC '" + kc + "' is not declared in the package KC model");
        }
      }
    }
  }
  for (const auto& [kc, p] : pkg.kc_params) {
    if (!pkg.kc_model.contains(kc)) {
      report("unknown kc", kc, "parameters given for undeclared KC '" + kc + "'");
    }
    try {
      student::check_params(p);
    } catch (const Error& e) {
      report("invalid params", kc, e.what());
    }
  }
  std::set<std::string> curriculum_ids;
  for (const auto& c : pkg.curricula) {
    if (!curriculum_ids.insert(c.id).second) {
      report("duplicate curriculum", c.id, "curriculum '" + c.id + "' is defined twice");
    }
    for (const auto& p : c.problems) {
      if (!pkg.find_problem(p.name)) {
        report("unknown problem", c.id, "curriculum '" + c.id + "' lists unknown problem '" + p.name + "'");
      }
      for (const auto& kc : p.kcs) {
        if (!pkg.kc_model.contains(kc)) {
          report("unknown kc", c.id + "/" + p.name, "KC '" + kc + "' is not declared in the package KC model");
        }
      }
    }
  }
  return out;
}

ValidationError::ValidationError(std::vector<graph::Diagnostic> diagnostics)
    : Error(ErrorCode::kValidationFailed,
            std::to_string(diagnostics.size()) + " validation problem(s)" +
                (diagnostics.empty() ? std::string() : ", first: " + diagnostics.front().message)),
      diagnostics_(std::move(diagnostics)) {}

}  // namespace tutorlab::service
