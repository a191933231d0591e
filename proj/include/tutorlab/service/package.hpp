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

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tutorlab/common/error.hpp"
#include "tutorlab/graph/behavior_graph.hpp"
#include "tutorlab/selection/task_selection.hpp"
#include "tutorlab/student/student_model.hpp"

namespace tutorlab::service {

// A publishable tutor: behavior graphs, the curricula that sequence them,
// and the KC model with its BKT parameters.
struct Package {
  std::string name;
  int version = 0;  // assigned on publish
  std::map<std::string, std::string> kc_model;
  student::KcParamsTable kc_params;  // every KC in kc_model, defaults filled in
  std::vector<selection::Curriculum> curricula;
  std::vector<graph::BehaviorGraph> problems;

  const graph::BehaviorGraph* find_problem(const std::string& name) const;
  const selection::Curriculum* find_curriculum(const std::string& id) const;
};

// Package document:
//   {"name", "kc_model": {kc: description},
//    "kc_params": [{"kc", "p_init", "p_transit", "p_slip", "p_guess"}],
//    "curricula": [{"id", "policy", "problems": [...]}],
//    "problems": [graph document | "relative/path.json"]}
// Graphs without their own kc_model inherit the package's. Curriculum
// problems listed without KCs get the KCs of their graph. Throws
// kParseError.
Package package_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
// Reads DIR/package.json.
Package load_package_dir(const std::filesystem::path& dir);
// Self-contained form, every graph inline.
nlohmann::json package_to_json(const Package& package);

// Graph diagnostics (subject "problem/link"), plus package-level problems:
// duplicate or unknown problems in curricula, graph KCs missing from the
// package KC model, invalid parameters.
std::vector<graph::Diagnostic> validate_package(const Package& package);

// kValidationFailed, carrying the diagnostics.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<graph::Diagnostic> diagnostics);
  const std::vector<graph::Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<graph::Diagnostic> diagnostics_;
};

}  // namespace tutorlab::service
