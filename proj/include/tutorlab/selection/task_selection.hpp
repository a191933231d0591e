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
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tutorlab/student/student_model.hpp"

namespace tutorlab::selection {

struct Policy {
  enum class Kind { kFixed, kMastery, kCustom };
  Kind kind = Kind::kFixed;
  std::string custom_name;  // kCustom only

  // "fixed", "mastery", or "custom:<name>".
  static Policy parse(std::string_view text);
  std::string to_string() const;

  friend bool operator==(const Policy&, const Policy&) = default;
};

struct CurriculumProblem {
  std::string name;
  std::set<std::string> kcs;

  friend bool operator==(const CurriculumProblem&, const CurriculumProblem&) = default;
};

struct Curriculum {
  std::string id;
  std::vector<CurriculumProblem> problems;
  Policy policy;

  bool contains(const std::string& problem) const;
  const CurriculumProblem* find(const std::string& problem) const;
};

Curriculum curriculum_from_json(const nlohmann::json& doc);
nlohmann::json curriculum_to_json(const Curriculum& curriculum);

struct ProgressRecord {
  std::string student_id;
  std::set<std::string> completed_problems;
  std::optional<std::string> in_progress;
};

struct PolicyContext {
  student::StudentModel model;
  Curriculum curriculum;
  ProgressRecord progress;
  std::uint64_t seed = 0;
};

using PolicyFn = std::function<std::optional<std::string>(const PolicyContext&)>;

// First uncompleted problem in curriculum order.
std::optional<std::string> next_task_fixed(const PolicyContext& ctx);

// First uncompleted problem, in curriculum order, that still exercises a KC
// the student has not mastered. Returns nullopt once every remaining problem
// covers only mastered KCs.
std::optional<std::string> next_task_mastery(const PolicyContext& ctx);

// Sample custom policy: a seeded uniform draw among the problems the mastery
// policy would consider.
std::optional<std::string> random_unmastered(const PolicyContext& ctx);

class PolicyRegistry {
 public:
  // Throws kDuplicatePolicy if the name is taken.
  void register_policy(const std::string& name, PolicyFn policy);
  bool contains(const std::string& name) const { return policies_.contains(name); }

  // Resumes an in-progress problem, otherwise dispatches on the policy.
  // Throws kUnknownPolicy for unregistered custom names and kPolicyContract
  // when a policy returns a completed problem or one outside the curriculum.
  std::optional<std::string> select_next(const PolicyContext& ctx,
                                         const Policy& policy) const;
  std::optional<std::string> select_next(const PolicyContext& ctx) const {
    return select_next(ctx, ctx.curriculum.policy);
  }

 private:
  std::map<std::string, PolicyFn> policies_;
};

}  // namespace tutorlab::selection
