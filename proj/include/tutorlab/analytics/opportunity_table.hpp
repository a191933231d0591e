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

#include <map>
#include <string>
#include <vector>

#include "tutorlab/log/log_store.hpp"

namespace tutorlab::analytics {

// Alternative KC model: step -> KC set. Keys are "Problem|Step" or just
// "Step"; the qualified key wins. Steps with no entry keep their logged KCs.
using KcRelabeling = std::map<std::string, std::vector<std::string>>;

struct OpportunityRow {
  int student = 0;             // index into OpportunityTable::students
  std::string problem;
  std::string step;
  std::vector<int> kcs;        // indices into OpportunityTable::kcs
  std::vector<int> opportunities;  // parallel to kcs, 1-based
  int y = 0;                   // 1 iff the first attempt was CORRECT
};

// First attempts only, in log order. Students and KCs are numbered in order
// of first appearance.
struct OpportunityTable {
  std::vector<std::string> students;
  std::vector<std::string> kcs;
  std::vector<OpportunityRow> rows;

  // -1 when absent.
  int kc_index(const std::string& kc) const;
};

// Tutor-performed records and rows without any KC are skipped; opportunity
// counts are recounted from the first attempts themselves. Throws
// kEmptyStore.
OpportunityTable build_opportunity_table(const log::LogStore& store,
                                         const KcRelabeling* kc_model = nullptr);

struct CurvePoint {
  int opportunity = 0;
  double error_rate = 0.0;
  int n = 0;
};

struct LearningCurve {
  std::string kc;  // empty for the aggregate over all KCs
  std::vector<CurvePoint> points;
};

// Error rate per opportunity for one KC. Throws kUnknownKc.
LearningCurve learning_curve(const OpportunityTable& table, const std::string& kc);
// Pools every (row, KC) observation by opportunity.
LearningCurve aggregate_learning_curve(const OpportunityTable& table);

// Least-squares slope of error rate against opportunity over points with
// lo <= t <= hi. Throws kInvalidArgument with fewer than two points.
double curve_slope(const LearningCurve& curve, int lo, int hi);

}  // namespace tutorlab::analytics
