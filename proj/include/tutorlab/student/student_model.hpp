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

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tutorlab/graph/tracer.hpp"
#include "tutorlab/log/record.hpp"

namespace tutorlab::student {

inline constexpr double kDefaultMasteryThreshold = 0.95;

struct KcParams {
  double p_init = 0.25;
  double p_transit = 0.2;
  double p_slip = 0.1;
  double p_guess = 0.2;

  friend bool operator==(const KcParams&, const KcParams&) = default;
};

// Throws Error(kInvalidParams) unless every probability is in [0,1] and
// p_slip + p_guess < 1.
void check_params(const KcParams& params);

using KcParamsTable = std::map<std::string, KcParams>;

struct KcBelief {
  std::string kc;
  double p_mastery = 0.0;
  int opportunities = 0;

  friend bool operator==(const KcBelief&, const KcBelief&) = default;
};

struct StudentModel {
  std::string student_id;
  std::map<std::string, KcBelief> beliefs;
  std::map<std::string, double> custom_vars;
  double mastery_threshold = kDefaultMasteryThreshold;

  friend bool operator==(const StudentModel&, const StudentModel&) = default;
};

enum class Observation { kCorrect, kIncorrect };

// One step of Bayesian Knowledge Tracing: condition on the observation, then
// apply the learning transition.
KcBelief bkt_update(const KcBelief& belief, const KcParams& params, Observation observed);

// A named custom student-model variable recomputed after every transaction.
struct Detector {
  std::string name;
  double lower = 0.0;
  double upper = 0.0;
  std::function<double(const StudentModel&, const log::TransactionRecord&)> update;
};

class DetectorRegistry {
 public:
  // Throws Error(kDuplicateDetector) if the name is taken.
  void register_detector(Detector detector);
  const std::vector<Detector>& detectors() const { return detectors_; }
  std::vector<std::string> names() const;

 private:
  std::vector<Detector> detectors_;
};

// Counts the current run of INCORRECT outcomes; a CORRECT resets it and hints
// leave it unchanged.
Detector consecutive_errors_detector();

// Folds one evaluation into the model. Only the first action at a step
// (attempt or hint) moves KC beliefs; hints count as incorrect. Detectors
// run afterwards on every call, in registration order, and see the record.
// Throws kUnknownKc before changing anything if a KC has no parameters.
StudentModel apply_transaction(StudentModel model, const graph::Evaluation& eval,
                               const KcParamsTable& params_table,
                               const DetectorRegistry& detectors,
                               const log::TransactionRecord& record);

// Same, with the record drafted from the evaluation alone.
StudentModel apply_transaction(StudentModel model, const graph::Evaluation& eval,
                               const KcParamsTable& params_table,
                               const DetectorRegistry& detectors = {});

// Mastery probability for a KC, falling back to its p_init when the student
// has not been observed on it yet.
double mastery_of(const StudentModel& model, const std::string& kc,
                  const KcParamsTable& params_table);

std::set<std::string> mastered_kcs(const StudentModel& model);

}  // namespace tutorlab::student
