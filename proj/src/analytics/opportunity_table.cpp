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

#include "tutorlab/analytics/opportunity_table.hpp"

#include <algorithm>

#include "tutorlab/common/error.hpp"

namespace tutorlab::analytics {

int OpportunityTable::kc_index(const std::string& kc) const {
  const auto it = std::find(kcs.begin(), kcs.end(), kc);
  return it == kcs.end() ? -1 : static_cast<int>(it - kcs.begin());
}

namespace {

int intern(std::vector<std::string>& names, std::map<std::string, int>& index,
           const std::string& name) {
  const auto [it, inserted] = index.try_emplace(name, static_cast<int>(names.size()));
  if (inserted) names.push_back(name);
  return it->second;
}

const std::vector<std::string>& kcs_for(const log::TransactionRecord& r,
                                        const KcRelabeling* kc_model) {
  if (kc_model) {
    if (auto it = kc_model->find(r.problem_name + "|" + r.step_name); it != kc_model->end()) {
      return it->second;
    }
    if (auto it = kc_model->find(r.step_name); it != kc_model->end()) return it->second;
  }
  return r.kcs;
}

}  // namespace

OpportunityTable build_opportunity_table(const log::LogStore& store,
                                         const KcRelabeling* kc_model) {
  if (store.empty()) throw Error(ErrorCode::kEmptyStore, "the log store has no records");
  OpportunityTable table;
  std::map<std::string, int> student_index;
  std::map<std::string, int> kc_index;
  std::map<std::pair<int, int>, int> counts;
  for (const auto& r : store.records()) {
    if (!r.first_attempt()) continue;
    const auto& labels = kcs_for(r, kc_model);
    if (labels.empty()) continue;
    OpportunityRow row;
    row.student = intern(table.students, student_index, r.anon_student_id);
    row.problem = r.problem_name;
    row.step = r.step_name;
    row.y = r.outcome == log::Outcome::kCorrect ? 1 : 0;
    for (const auto& label : labels) {
      const int k = intern(table.kcs, kc_index, label);
      if (std::find(row.kcs.begin(), row.kcs.end(), k) != row.kcs.end()) continue;
      row.kcs.push_back(k);
      row.opportunities.push_back(++counts[{row.student, k}]);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

namespace {

LearningCurve curve_from(std::map<int, std::pair<int, int>> errors_and_n, std::string kc) {
  LearningCurve curve{std::move(kc), {}};
  for (const auto& [t, en] : errors_and_n) {
    curve.points.push_back({t, static_cast<double>(en.first) / en.second, en.second});
  }
  return curve;
}

}  // namespace

LearningCurve learning_curve(const OpportunityTable& table, const std::string& kc) {
  const int k = table.kc_index(kc);
  if (k < 0) throw Error(ErrorCode::kUnknownKc, "KC '" + kc + "' does not occur in the table");
  std::map<int, std::pair<int, int>> by_t;
  for (const auto& row : table.rows) {
    for (std::size_t j = 0; j < row.kcs.size(); ++j) {
      if (row.kcs[j] != k) continue;
      auto& en = by_t[row.opportunities[j]];
      en.first += 1 - row.y;
      en.second += 1;
    }
  }
  return curve_from(std::move(by_t), kc);
}

LearningCurve aggregate_learning_curve(const OpportunityTable& table) {
  std::map<int, std::pair<int, int>> by_t;
  for (const auto& row : table.rows) {
    for (int t : row.opportunities) {
      auto& en = by_t[t];
      en.first += 1 - row.y;
      en.second += 1;
    }
  }
  return curve_from(std::move(by_t), "");
}

double curve_slope(const LearningCurve& curve, int lo, int hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& p : curve.points) {
    if (p.opportunity < lo || p.opportunity > hi) continue;
    const double x = p.opportunity;
    sx += x;
    sy += p.error_rate;
    sxx += x * x;
    sxy += x * p.error_rate;
    ++n;
  }
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "a slope needs at least two curve points");
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace tutorlab::analytics
