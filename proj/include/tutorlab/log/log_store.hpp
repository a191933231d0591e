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
#include <fstream>
#include <iosfwd>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "tutorlab/log/record.hpp"
#include "tutorlab/student/student_model.hpp"

namespace tutorlab::log {

// Standard export columns, in order. Custom-variable columns follow.
const std::vector<std::string>& standard_columns();

// Append-only sequence of records with stable row numbers. Also keeps the
// per-(student, KC) first-attempt counters used to fill in opportunities.
class LogStore {
 public:
  explicit LogStore(std::vector<std::string> custom_columns = {});

  // Appends the record for one evaluated transaction: next row number,
  // opportunity counts (a first attempt advances each of its KCs; retries
  // repeat the first attempt's counts) and the model's custom variables.
  // Throws kClockSkew if ctx.time precedes the session's last record.
  const TransactionRecord& log_transaction(const graph::Evaluation& eval, const LogContext& ctx,
                                           const student::StudentModel& model);

  // Appends a tutor-performed interface update.
  const TransactionRecord& log_tutor_action(const graph::Sai& action, const LogContext& ctx);

  // Appends a fully formed record (imports, recovery). Rows must increase
  // and times must not go backwards within a session.
  const TransactionRecord& append(TransactionRecord record);

  const std::vector<TransactionRecord>& records() const { return records_; }
  const std::vector<std::string>& custom_columns() const { return custom_columns_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  friend bool operator==(const LogStore& a, const LogStore& b) {
    return a.records_ == b.records_ && a.custom_columns_ == b.custom_columns_;
  }

 private:
  using StepKey = std::tuple<std::string, std::string, std::string, std::string>;

  void check_time(const TransactionRecord& record) const;
  void index(const TransactionRecord& record);
  std::vector<int> opportunities_for(const TransactionRecord& record) const;

  std::vector<TransactionRecord> records_;
  std::vector<std::string> custom_columns_;
  std::map<std::pair<std::string, std::string>, int> kc_counts_;
  std::map<StepKey, std::vector<int>> first_attempt_opps_;
  std::map<std::string, TimestampMs> session_last_time_;
};

// Tab-separated export, one line per KC per record. Tabs, newlines and
// backslashes inside fields are backslash-escaped.
void write_tsv(const LogStore& store, std::ostream& out);
std::string to_tsv(const LogStore& store);
// Returns the number of bytes written; throws kIoFailure.
std::uintmax_t export_tsv(const LogStore& store, const std::filesystem::path& path);

// Inverse of write_tsv. Outcome tokens are case-insensitive. Throws
// kSchemaMismatch for a wrong header and kMalformedRow (with the 1-based
// file line) for bad rows.
LogStore parse_tsv(std::istream& in);
LogStore import_tsv(const std::filesystem::path& path);

// The durable form of a store: its export file, extended line by line as
// records are appended. Reopening an existing file restores the store.
class DurableLog {
 public:
  // Throws kSchemaMismatch if an existing file's custom columns differ.
  DurableLog(std::filesystem::path path, std::vector<std::string> custom_columns);

  const LogStore& store() const { return store_; }

  const TransactionRecord& log_transaction(const graph::Evaluation& eval, const LogContext& ctx,
                                           const student::StudentModel& model);
  const TransactionRecord& log_tutor_action(const graph::Sai& action, const LogContext& ctx);

 private:
  const TransactionRecord& persist(const TransactionRecord& record);

  std::filesystem::path path_;
  LogStore store_;
  std::ofstream out_;
};

}  // namespace tutorlab::log
