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

#include "tutorlab/analytics/census.hpp"

#include <istream>
#include <map>
#include <ostream>
#include <tuple>

#include "tutorlab/common/error.hpp"
#include "tutorlab/common/strings.hpp"

namespace tutorlab::analytics {
namespace {

constexpr std::int64_t kMinTransactions = 300;

const std::vector<std::string>& registry_columns() {
  static const std::vector<std::string> kColumns{"dataset_id", "project_id", "name",
                                                 "transactions", "start_date"};
  return kColumns;
}

std::string format_date(const CivilDate& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", d.year, d.month, d.day);
  return buf;
}

}  // namespace

Season season_of(const CivilDate& date) {
  if (date.month <= 5) return Season::kSpring;
  if (date.month <= 8) return Season::kSummer;
  return Season::kFall;
}

CensusResult census_filter(const std::vector<DatasetRegistryEntry>& registry) {
  using Key = std::tuple<std::string, int, Season>;
  std::map<Key, std::size_t> best;  // group -> registry index
  for (std::size_t i = 0; i < registry.size(); ++i) {
    const auto& e = registry[i];
    if (e.transactions < kMinTransactions) continue;
    const std::string name = to_lower(e.name);
    if (name.find("test") != std::string::npos || name.find("pilot") != std::string::npos) continue;
    const Key key{e.project_id, e.start_date.year, season_of(e.start_date)};
    const auto [it, inserted] = best.try_emplace(key, i);
    if (!inserted && e.transactions > registry[it->second].transactions) it->second = i;
  }
  std::vector<bool> keep(registry.size(), false);
  for (const auto& [key, index] : best) keep[index] = true;
  CensusResult out;
  for (std::size_t i = 0; i < registry.size(); ++i) {
    if (keep[i]) out.kept.push_back(registry[i]);
  }
  out.count = out.kept.size();
  return out;
}

std::vector<DatasetRegistryEntry> parse_registry_tsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kSchemaMismatch, "registry is empty", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  for (const auto& h : split(line, '\t')) header.emplace_back(trim(h));
  if (header != registry_columns()) {
    throw Error(ErrorCode::kSchemaMismatch,
                "registry header must be: " + join(registry_columns(), ", "), 1);
  }
  std::vector<DatasetRegistryEntry> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto bad = [&](const std::string& why) {
      return Error(ErrorCode::kMalformedRow, "line " + std::to_string(line_no) + ": " + why, line_no);
    };
    const auto f = split(line, '\t');
    if (f.size() != registry_columns().size()) throw bad("expected 5 fields");
    DatasetRegistryEntry e;
    e.dataset_id = std::string(trim(f[0]));
    e.project_id = std::string(trim(f[1]));
    e.name = f[2];
    long long count = 0;
    if (!parse_int(trim(f[3]), count) || count < 0) throw bad("transactions must be a count >= 0");
    e.transactions = count;
    try {
      e.start_date = civil_date(parse_iso8601(trim(f[4])));
    } catch (const Error&) {
      throw bad("start_date must be YYYY-MM-DD");
    }
    out.push_back(std::move(e));
  }
  return out;
}

void write_registry_tsv(const std::vector<DatasetRegistryEntry>& entries, std::ostream& out) {
  out << join(registry_columns(), "\t") << '\n';
  for (const auto& e : entries) {
    out << e.dataset_id << '\t' << e.project_id << '\t' << e.name << '\t' << e.transactions
        << '\t' << format_date(e.start_date) << '\n';
  }
}

}  // namespace tutorlab::analytics
