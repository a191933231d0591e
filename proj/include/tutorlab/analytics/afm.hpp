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
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tutorlab/analytics/opportunity_table.hpp"

namespace tutorlab::analytics {

// logit p = theta_i + sum over k in K(s) of (beta_k + gamma_k * T_ik)
struct AfmModel {
  std::map<std::string, double> theta;
  std::map<std::string, double> beta;
  std::map<std::string, double> gamma;
  double lambda_theta = 1.0;
  // Extra L2 weight on beta_k and gamma_k, set for KCs whose observations
  // are all correct or all incorrect so their estimates stay finite.
  std::map<std::string, double> kc_penalty;
  // Use T_ik - 1 (prior practice) instead of T_ik in the predictor.
  bool zero_based = false;
};

struct AfmGradient {
  std::map<std::string, double> theta;
  std::map<std::string, double> beta;
  std::map<std::string, double> gamma;
};

// Parameters missing from the model count as zero.
std::vector<double> afm_predict(const AfmModel& model, const OpportunityTable& table);
// Bernoulli log-likelihood of the rows, no penalties.
double afm_data_log_likelihood(const AfmModel& model, const OpportunityTable& table);
// Data log-likelihood minus lambda/2 sum theta^2 and the KC penalties.
double afm_objective(const AfmModel& model, const OpportunityTable& table);
AfmGradient afm_gradient(const AfmModel& model, const OpportunityTable& table);

struct AfmConfig {
  double lambda_theta = 1.0;
  int max_iter = 200;
  double tol = 1e-6;
  bool zero_based = false;
  double degenerate_penalty = 1.0;
  // Called with the model and objective after every accepted step.
  std::function<void(const AfmModel&, double)> on_iterate;
};

struct AfmFit {
  AfmModel model;
  double log_likelihood = 0.0;       // penalized, as maximized
  double data_log_likelihood = 0.0;  // unpenalized
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> degenerate_kcs;
  // Objective after each accepted step, starting from the zero model.
  std::vector<double> objective_trace;
};

// Projected Newton ascent with backtracking; gamma is clamped at zero after
// every step. Converges when the projected gradient's max-norm drops below
// tol. Throws kInvalidArgument for fewer than two students or no KCs.
AfmFit fit_afm(const OpportunityTable& table, const AfmConfig& config = {});

struct KcModelCandidate {
  std::string name;
  // Null for the KC labels as logged.
  std::optional<KcRelabeling> relabeling;
};

struct KcModelScore {
  std::string name;
  double log_likelihood = 0.0;  // data log-likelihood at the fit
  int parameters = 0;           // |theta| + |beta| + |gamma|
  int observations = 0;         // table rows
  double aic = 0.0;
  double bic = 0.0;
  bool converged = false;
  std::vector<std::string> degenerate_kcs;
};

struct KcModelComparison {
  std::vector<KcModelScore> scores;  // input order
  std::vector<std::size_t> by_aic;   // best first, ties in input order
  std::vector<std::size_t> by_bic;
};

// Throws kInvalidArgument with fewer than two candidates.
KcModelComparison compare_kc_models(const log::LogStore& store,
                                    const std::vector<KcModelCandidate>& models,
                                    const AfmConfig& config = {});

// {"models": [{"name": ..., "steps": {"Problem|Step": ["kc", ...]}}]}; a
// model without "steps" stands for the logged labels.
std::vector<KcModelCandidate> kc_models_from_json(const nlohmann::json& doc);

}  // namespace tutorlab::analytics
