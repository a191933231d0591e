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

#include "tutorlab/selection/task_selection.hpp"

#include "tutorlab/common/error.hpp"
#include "tutorlab/common/random.hpp"

namespace tutorlab::selection {
namespace {

constexpr std::string_view kCustomPrefix = "custom:";

std::vector<const CurriculumProblem*> unmastered_candidates(const PolicyContext& ctx) {
  const auto mastered = student::mastered_kcs(ctx.model);
  std::vector<const CurriculumProblem*> out;
  for (const auto& p : ctx.curriculum.problems) {
    if (ctx.progress.completed_problems.contains(p.name)) continue;
    for (const auto& kc : p.kcs) {
      if (!mastered.contains(kc)) {
        out.push_back(&p);
        break;
      }
    }
  }
  return out;
}

}  // namespace

Policy Policy::parse(std::string_view text) {
  if (text == "fixed") return {Kind::kFixed, {}};
  if (text == "mastery") return {Kind::kMastery, {}};
  if (text.starts_with(kCustomPrefix) && text.size() > kCustomPrefix.size()) {
    return {Kind::kCustom, std::string(text.substr(kCustomPrefix.size()))};
  }
  throw Error(ErrorCode::kParseError,
              "policy must be fixed, mastery or custom:<name>, got '" + std::string(text) + "'");
}

std::string Policy::to_string() const {
  switch (kind) {
    case Kind::kFixed:
      return "fixed";
    case Kind::kMastery:
      return "mastery";
    case Kind::kCustom:
      return std::string(kCustomPrefix) + custom_name;
  }
  return "fixed";
}

bool Curriculum::contains(const std::string& problem) const { return find(problem) != nullptr; }

const CurriculumProblem* Curriculum::find(const std::string& problem) const {
  for (const auto& p : problems) {
    if (p.name == problem) return &p;
  }
  return nullptr;
}

Curriculum curriculum_from_json(const nlohmann::json& doc) {
  try {
    Curriculum c;
    c.id = doc.at("id").get<std::string>();
    c.policy = Policy::parse(doc.value("policy", std::string("fixed")));
    for (const auto& p : doc.at("problems")) {
      CurriculumProblem problem;
      if (p.is_string()) {
        problem.name = p.get<std::string>();
      } else {
        problem.name = p.at("name").get<std::string>();
        if (p.contains("kcs")) problem.kcs = p.at("kcs").get<std::set<std::string>>();
      }
      if (c.contains(problem.name)) {
        throw Error(ErrorCode::kParseError,
                    "curriculum '" + c.id + "' lists problem '" + problem.name + "' twice");
      }
      c.problems.push_back(std::move(problem));
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("curriculum: ") + e.what());
  }
}

nlohmann::json curriculum_to_json(const Curriculum& c) {
  nlohmann::json doc{{"id", c.id}, {"policy", c.policy.to_string()}, {"problems", nlohmann::json::array()}};
  for (const auto& p : c.problems) doc["problems"].push_back({{"name", p.name}, {"kcs", p.kcs}});
  return doc;
}

std::optional<std::string> next_task_fixed(const PolicyContext& ctx) {
  for (const auto& p : ctx.curriculum.problems) {
    if (!ctx.progress.completed_problems.contains(p.name)) return p.name;
  }
  return std::nullopt;
}

std::optional<std::string> next_task_mastery(const PolicyContext& ctx) {
  const auto candidates = unmastered_candidates(ctx);
  if (candidates.empty()) return std::nullopt;
  return candidates.front()->name;
}

std::optional<std::string> random_unmastered(const PolicyContext& ctx) {
  const auto candidates = unmastered_candidates(ctx);
  if (candidates.empty()) return std::nullopt;
  Rng rng(ctx.seed);
  return candidates[rng.below(candidates.size())]->name;
}

void PolicyRegistry::register_policy(const std::string& name, PolicyFn policy) {
  if (name.empty() || !policy) {
    throw Error(ErrorCode::kInvalidArgument, "policy needs a name and a function");
  }
  if (!policies_.emplace(name, std::move(policy)).second) {
    throw Error(ErrorCode::kDuplicatePolicy, "policy '" + name + "' already registered");
  }
}

std::optional<std::string> PolicyRegistry::select_next(const PolicyContext& ctx,
                                                       const Policy& policy) const {
  const auto& progress = ctx.progress;
  if (progress.in_progress && ctx.curriculum.contains(*progress.in_progress) &&
      !progress.completed_problems.contains(*progress.in_progress)) {
    return progress.in_progress;
  }
  std::optional<std::string> choice;
  switch (policy.kind) {
    case Policy::Kind::kFixed:
      choice = next_task_fixed(ctx);
      break;
    case Policy::Kind::kMastery:
      choice = next_task_mastery(ctx);
      break;
    case Policy::Kind::kCustom: {
      const auto it = policies_.find(policy.custom_name);
      if (it == policies_.end()) {
        throw Error(ErrorCode::kUnknownPolicy, "no policy named '" + policy.custom_name + "'");
      }
      choice = it->second(ctx);
      break;
    }
  }
  if (choice) {
    if (!ctx.curriculum.contains(*choice)) {
      throw Error(ErrorCode::kPolicyContract, "policy '" + policy.to_string() + "' chose '" +
                                                  *choice + "', which is not in curriculum '" +
                                                  ctx.curriculum.id + "'");
    }
    if (progress.completed_problems.contains(*choice)) {
      throw Error(ErrorCode::kPolicyContract,
                  "policy '" + policy.to_string() + "' chose completed problem '" + *choice + "'");
    }
  }
  return choice;
}

}  // namespace tutorlab::selection
