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
#include "tutorlab/student/student_model.hpp"

#include <cmath>
#include <limits>

#include "tutorlab/common/error.hpp"

namespace tutorlab::student {
namespace {

bool is_probability(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

}  // namespace

void check_params(const KcParams& p) {
  if (!is_probability(p.p_init) || !is_probability(p.p_transit) ||
      !is_probability(p.p_slip) || !is_probability(p.p_guess)) {
    throw Error(ErrorCode::kInvalidParams, "KC parameters must lie in [0, 1]");
  }
  if (p.p_slip + p.p_guess >= 1.0) {
    throw Error(ErrorCode::kInvalidParams, "p_slip + p_guess must be below 1");
  }
}

KcBelief bkt_update(const KcBelief& belief, const KcParams& params, Observation observed) {
  check_params(params);
  const double known = belief.p_mastery;
  double posterior;
  if (observed == Observation::kCorrect) {
    const double evidence_known = known * (1.0 - params.p_slip);
    const double denom = evidence_known + (1.0 - known) * params.p_guess;
    posterior = denom > 0.0 ? evidence_known / denom : known;
  } else {
    const double evidence_known = known * params.p_slip;
    const double denom = evidence_known + (1.0 - known) * (1.0 - params.p_guess);
    posterior = denom > 0.0 ? evidence_known / denom : known;
  }
  KcBelief next = belief;
  next.p_mastery = posterior + (1.0 - posterior) * params.p_transit;
  next.opportunities += 1;
  return next;
}

void DetectorRegistry::register_detector(Detector detector) {
  for (const auto& d : detectors_) {
    if (d.name == detector.name) {
      throw Error(ErrorCode::kDuplicateDetector, "detector '" + detector.name + "' already registered");
    }
  }
  if (!detector.update || !(detector.lower <= detector.upper)) {
    throw Error(ErrorCode::kInvalidArgument, "detector '" + detector.name + "' needs an update function and lower <= upper");
  }
  detectors_.push_back(std::move(detector));
}

std::vector<std::string> DetectorRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& d : detectors_) out.push_back(d.name);
  return out;
}

Detector consecutive_errors_detector() {
  Detector d;
  d.name = "consecutive_errors";
  d.lower = 0.0;
  d.upper = std::numeric_limits<int>::max();
  d.update = [](const StudentModel& model, const log::TransactionRecord& r) {
    const auto it = model.custom_vars.find("consecutive_errors");
    const double current = it == model.custom_vars.end() ? 0.0 : it->second;
    switch (r.outcome) {
      case graph::Outcome::kCorrect:
        return 0.0;
      case graph::Outcome::kIncorrect:
        return current + 1.0;
      case graph::Outcome::kHint:
        return current;
    }
    return current;
  };
  return d;
}

StudentModel apply_transaction(StudentModel model, const graph::Evaluation& eval,
                               const KcParamsTable& params_table,
                               const DetectorRegistry& detectors,
                               const log::TransactionRecord& record) {
  for (const auto& kc : eval.kcs) {
    if (!params_table.contains(kc)) {
      throw Error(ErrorCode::kUnknownKc, "no parameters for KC '" + kc + "'");
    }
  }
  if (eval.attempt_at_step == 1) {
    const auto observed = eval.outcome == graph::Outcome::kCorrect ? Observation::kCorrect
                                                                   : Observation::kIncorrect;
    for (const auto& kc : eval.kcs) {
      const KcParams& params = params_table.at(kc);
      auto [it, fresh] = model.beliefs.try_emplace(kc, KcBelief{kc, params.p_init, 0});
      it->second = bkt_update(it->second, params, observed);
    }
  }
  for (const auto& d : detectors.detectors()) {
    const double value = d.update(model, record);
    if (!std::isfinite(value) || value < d.lower || value > d.upper) {
      throw Error(ErrorCode::kDetectorContract,
                  "detector '" + d.name + "' produced out-of-bounds value " + std::to_string(value));
    }
    model.custom_vars[d.name] = value;
  }
  return model;
}

StudentModel apply_transaction(StudentModel model, const graph::Evaluation& eval,
                               const KcParamsTable& params_table,
                               const DetectorRegistry& detectors) {
  log::LogContext ctx;
  ctx.student_id = model.student_id;
  return apply_transaction(std::move(model), eval, params_table, detectors,
                           log::draft_record(eval, ctx));
}

double mastery_of(const StudentModel& model, const std::string& kc,
                  const KcParamsTable& params_table) {
  if (const auto it = model.beliefs.find(kc); it != model.beliefs.end()) {
    return it->second.p_mastery;
  }
  if (const auto it = params_table.find(kc); it != params_table.end()) {
    return it->second.p_init;
  }
  return 0.0;
}

std::set<std::string> mastered_kcs(const StudentModel& model) {
  std::set<std::string> out;
  for (const auto& [kc, belief] : model.beliefs) {
    if (belief.p_mastery >= model.mastery_threshold) out.insert(kc);
  }
  return out;
}

}  // namespace tutorlab::student
