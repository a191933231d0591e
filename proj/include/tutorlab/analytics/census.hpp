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
#include <iosfwd>
#include <string>
#include <vector>

#include "tutorlab/common/time.hpp"

namespace tutorlab::analytics {

struct DatasetRegistryEntry {
  std::string dataset_id;
  std::string project_id;
  std::string name;
  std::int64_t transactions = 0;
  CivilDate start_date{1970, 1, 1};
};

enum class Season { kSpring, kSummer, kFall };

// Jan-May Spring, Jun-Aug Summer, Sep-Dec Fall.
Season season_of(const CivilDate& date);

struct CensusResult {
  std::vector<DatasetRegistryEntry> kept;  // registry order
  std::size_t count = 0;
};

// Keeps datasets with at least 300 transactions whose name mentions neither
// "test" nor "pilot", then at most one per project and semester: the one
// with the most transactions, earliest in the registry on ties.
CensusResult census_filter(const std::vector<DatasetRegistryEntry>& registry);

// Header: dataset_id, project_id, name, transactions, start_date
// (YYYY-MM-DD). Throws kSchemaMismatch / kMalformedRow with line numbers.
std::vector<DatasetRegistryEntry> parse_registry_tsv(std::istream& in);
void write_registry_tsv(const std::vector<DatasetRegistryEntry>& entries, std::ostream& out);

}  // namespace tutorlab::analytics
