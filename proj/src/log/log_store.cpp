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

#include "tutorlab/log/log_store.hpp"

#include <sstream>

#include "tutorlab/common/error.hpp"
#include "tutorlab/common/strings.hpp"

namespace tutorlab::log {
namespace {

std::string escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\t':
        out += "\\t";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\r':
        out += "\\r";
        break;
      case '\\':
        out += "\\\\";
        break;
      default:
        out += c;
    }
  }
  return out;
}

bool unescape(std::string_view s, std::string& out) {
  out.clear();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out += s[i];
      continue;
    }
    if (++i == s.size()) return false;
    switch (s[i]) {
      case 't':
        out += '\t';
        break;
      case 'n':
        out += '\n';
        break;
      case 'r':
        out += '\r';
        break;
      case '\\':
        out += '\\';
        break;
      default:
        return false;
    }
  }
  return true;
}

void write_header(const std::vector<std::string>& custom, std::ostream& out) {
  std::vector<std::string> cols = standard_columns();
  for (const auto& c : custom) cols.push_back(escape(c));
  out << join(cols, "\t") << '\n';
}

void write_record(const TransactionRecord& r, const std::vector<std::string>& custom,
                  std::ostream& out) {
  const std::size_t lines = r.kcs.empty() ? 1 : r.kcs.size();
  for (std::size_t k = 0; k < lines; ++k) {
    std::vector<std::string> f;
    f.reserve(standard_columns().size() + custom.size());
    f.push_back(std::to_string(r.row));
    f.push_back(escape(r.anon_student_id));
    f.push_back(escape(r.session_id));
    f.push_back(format_iso8601(r.time));
    f.push_back(escape(r.level_assignment));
    f.push_back(escape(r.problem_name));
    f.push_back(escape(r.step_name));
    f.push_back(std::to_string(r.attempt_at_step));
    f.push_back(std::string(graph::to_string(r.outcome)));
    f.push_back(escape(r.selection));
    f.push_back(escape(r.action));
    f.push_back(escape(r.input));
    f.push_back(escape(r.feedback_text));
    f.push_back(r.help_level ? std::to_string(*r.help_level) : std::string());
    f.push_back(escape(r.condition_name));
    f.push_back(r.kcs.empty() ? std::string() : escape(r.kcs[k]));
    f.push_back(r.kcs.empty() ? std::string() : std::to_string(r.opportunities.at(k)));
    for (const auto& c : custom) {
      const auto it = r.custom.find(c);
      f.push_back(it == r.custom.end() ? std::string() : format_double(it->second));
    }
    out << join(f, "\t") << '\n';
  }
}

}  // namespace

const std::vector<std::string>& standard_columns() {
  static const std::vector<std::string> kColumns{
      "Row",         "Anon Student Id", "Session Id",     "Time",       "Level (Assignment)",
      "Problem Name", "Step Name",      "Attempt At Step", "Outcome",   "Selection",
      "Action",      "Input",           "Feedback Text",  "Help Level", "Condition Name",
      "KC (Default)", "Opportunity (Default)"};
  return kColumns;
}

LogStore::LogStore(std::vector<std::string> custom_columns)
    : custom_columns_(std::move(custom_columns)) {}

void LogStore::check_time(const TransactionRecord& record) const {
  const auto it = session_last_time_.find(record.session_id);
  if (it != session_last_time_.end() && record.time < it->second) {
    throw Error(ErrorCode::kClockSkew, "record at " + format_iso8601(record.time) +
                                           " precedes session '" + record.session_id +
                                           "' last record at " + format_iso8601(it->second));
  }
}

std::vector<int> LogStore::opportunities_for(const TransactionRecord& r) const {
  std::vector<int> opps;
  const StepKey key{r.anon_student_id, r.level_assignment, r.problem_name, r.step_name};
  if (!r.first_attempt()) {
    const auto it = first_attempt_opps_.find(key);
    if (it != first_attempt_opps_.end() && it->second.size() == r.kcs.size()) return it->second;
  }
  for (const auto& kc : r.kcs) {
    const auto it = kc_counts_.find({r.anon_student_id, kc});
    const int prior = it == kc_counts_.end() ? 0 : it->second;
    opps.push_back(r.first_attempt() ? prior + 1 : std::max(prior, 1));
  }
  return opps;
}

void LogStore::index(const TransactionRecord& r) {
  session_last_time_[r.session_id] = r.time;
  if (!r.first_attempt()) return;
  for (std::size_t k = 0; k < r.kcs.size(); ++k) {
    int& count = kc_counts_[{r.anon_student_id, r.kcs[k]}];
    count = std::max(count + 1, r.opportunities.at(k));
  }
  first_attempt_opps_[{r.anon_student_id, r.level_assignment, r.problem_name, r.step_name}] =
      r.opportunities;
}

const TransactionRecord& LogStore::log_transaction(const graph::Evaluation& eval,
                                                   const LogContext& ctx,
                                                   const student::StudentModel& model) {
  TransactionRecord r = draft_record(eval, ctx);
  r.row = records_.empty() ? 1 : records_.back().row + 1;
  check_time(r);
  r.opportunities = opportunities_for(r);
  r.custom = model.custom_vars;
  for (const auto& [name, value] : r.custom) {
    if (std::find(custom_columns_.begin(), custom_columns_.end(), name) == custom_columns_.end()) {
      custom_columns_.push_back(name);
    }
  }
  index(r);
  records_.push_back(std::move(r));
  return records_.back();
}

const TransactionRecord& LogStore::log_tutor_action(const graph::Sai& action,
                                                    const LogContext& ctx) {
  TransactionRecord r = tutor_action_record(action, ctx);
  r.row = records_.empty() ? 1 : records_.back().row + 1;
  check_time(r);
  index(r);
  records_.push_back(std::move(r));
  return records_.back();
}

const TransactionRecord& LogStore::append(TransactionRecord record) {
  if (!records_.empty() && record.row <= records_.back().row) {
    throw Error(ErrorCode::kMalformedRow, "row " + std::to_string(record.row) +
                                              " does not follow row " +
                                              std::to_string(records_.back().row));
  }
  if (record.opportunities.size() != record.kcs.size()) {
    throw Error(ErrorCode::kMalformedRow, "KC and opportunity lists differ in length");
  }
  if (record.attempt_at_step < 1) {
    throw Error(ErrorCode::kMalformedRow, "attempt at step must be at least 1");
  }
  check_time(record);
  for (const auto& [name, value] : record.custom) {
    if (std::find(custom_columns_.begin(), custom_columns_.end(), name) == custom_columns_.end()) {
      custom_columns_.push_back(name);
    }
  }
  index(record);
  records_.push_back(std::move(record));
  return records_.back();
}

void write_tsv(const LogStore& store, std::ostream& out) {
  write_header(store.custom_columns(), out);
  for (const auto& r : store.records()) write_record(r, store.custom_columns(), out);
}

std::string to_tsv(const LogStore& store) {
  std::ostringstream out;
  write_tsv(store, out);
  return out.str();
}

std::uintmax_t export_tsv(const LogStore& store, const std::filesystem::path& path) {
  const std::string text = to_tsv(store);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path.string());
  return text.size();
}

LogStore parse_tsv(std::istream& in) {
  const auto& standard = standard_columns();
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kSchemaMismatch, "file is empty; expected a header row", 1);
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line, '\t');
  for (std::size_t i = 0; i < standard.size(); ++i) {
    if (i >= header.size() || header[i] != standard[i]) {
      throw Error(ErrorCode::kSchemaMismatch,
                  "header column " + std::to_string(i + 1) + " should be '" + standard[i] +
                      "', found '" + (i < header.size() ? header[i] : std::string("<missing>")) + "'",
                  1);
    }
  }
  std::vector<std::string> custom;
  for (std::size_t i = standard.size(); i < header.size(); ++i) {
    std::string name;
    if (!unescape(header[i], name) || name.empty()) {
      throw Error(ErrorCode::kSchemaMismatch, "bad custom column name '" + header[i] + "'", 1);
    }
    custom.push_back(name);
  }

  LogStore store(custom);
  std::optional<TransactionRecord> pending;
  std::vector<std::string> pending_fields;
  int line_no = 1;
  auto flush = [&](int at_line) {
    if (!pending) return;
    try {
      store.append(std::move(*pending));
    } catch (const Error& e) {
      throw Error(ErrorCode::kMalformedRow, e.what(), at_line);
    }
    pending.reset();
  };

  int pending_line = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    auto bad = [&](const std::string& why) -> Error {
      return Error(ErrorCode::kMalformedRow, "line " + std::to_string(line_no) + ": " + why, line_no);
    };
    if (fields.size() != header.size()) {
      throw bad("expected " + std::to_string(header.size()) + " fields, found " +
                std::to_string(fields.size()));
    }
    std::vector<std::string> text(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i == 3 || i == 8) {
        text[i] = fields[i];
      } else if (!unescape(fields[i], text[i])) {
        throw bad("bad escape sequence in column '" + header[i] + "'");
      }
    }
    long long row = 0;
    if (!parse_int(text[0], row)) throw bad("Row is not an integer");

    // Lines after the first of a multi-KC record only contribute a KC.
    std::vector<std::string> shared(text.begin(), text.begin() + 15);
    for (std::size_t i = 17; i < text.size(); ++i) shared.push_back(text[i]);
    const bool continuation = pending && pending->row == row;
    if (continuation && shared != pending_fields) {
      throw bad("lines of row " + std::to_string(row) + " disagree outside the KC columns");
    }
    if (!continuation) {
      flush(pending_line);
      TransactionRecord r;
      r.row = row;
      r.anon_student_id = text[1];
      r.session_id = text[2];
      try {
        r.time = parse_iso8601(text[3]);
        r.outcome = graph::outcome_from_string(text[8]);
      } catch (const Error& e) {
        throw bad(e.what());
      }
      r.level_assignment = text[4];
      r.problem_name = text[5];
      r.step_name = text[6];
      long long attempt = 0;
      if (!parse_int(text[7], attempt) || attempt < 1) throw bad("Attempt At Step must be >= 1");
      r.attempt_at_step = static_cast<int>(attempt);
      r.selection = text[9];
      r.action = text[10];
      r.input = text[11];
      r.feedback_text = text[12];
      if (!text[13].empty()) {
        long long level = 0;
        if (!parse_int(text[13], level) || level < 1) throw bad("Help Level must be >= 1");
        r.help_level = static_cast<int>(level);
      }
      r.condition_name = text[14];
      for (std::size_t c = 0; c < custom.size(); ++c) {
        const std::string& cell = text[standard.size() + c];
        if (cell.empty()) continue;
        double v = 0.0;
        if (!parse_double(cell, v)) throw bad("custom column '" + custom[c] + "' is not numeric");
        r.custom[custom[c]] = v;
      }
      pending = std::move(r);
      pending_fields = std::move(shared);
      pending_line = line_no;
    } else if (pending->kcs.empty()) {
      throw bad("continuation line for a record without KCs");
    }
    if (text[15].empty()) {
      if (!text[16].empty()) throw bad("Opportunity without a KC");
      if (continuation) throw bad("empty KC on a continuation line");
    } else {
      long long opp = 0;
      if (!parse_int(text[16], opp) || opp < 1) throw bad("Opportunity must be >= 1");
      pending->kcs.push_back(text[15]);
      pending->opportunities.push_back(static_cast<int>(opp));
    }
  }
  flush(pending_line);
  return store;
}

LogStore import_tsv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot read " + path.string());
  return parse_tsv(in);
}

DurableLog::DurableLog(std::filesystem::path path, std::vector<std::string> custom_columns)
    : path_(std::move(path)), store_(custom_columns) {
  const bool existing = std::filesystem::exists(path_) && std::filesystem::file_size(path_) > 0;
  if (existing) {
    store_ = import_tsv(path_);
    if (store_.custom_columns() != custom_columns) {
      throw Error(ErrorCode::kSchemaMismatch,
                  path_.string() + " was written with different custom columns");
    }
  }
  out_.open(path_, std::ios::binary | std::ios::app);
  if (!out_) throw Error(ErrorCode::kIoFailure, "cannot open " + path_.string());
  if (!existing) {
    write_header(store_.custom_columns(), out_);
    out_.flush();
  }
}

const TransactionRecord& DurableLog::persist(const TransactionRecord& record) {
  write_record(record, store_.custom_columns(), out_);
  out_.flush();
  if (!out_) throw Error(ErrorCode::kIoFailure, "cannot append to " + path_.string());
  return record;
}

const TransactionRecord& DurableLog::log_transaction(const graph::Evaluation& eval,
                                                     const LogContext& ctx,
                                                     const student::StudentModel& model) {
  for (const auto& [name, value] : model.custom_vars) {
    const auto& cols = store_.custom_columns();
    if (std::find(cols.begin(), cols.end(), name) == cols.end()) {
      throw Error(ErrorCode::kSchemaMismatch, "custom variable '" + name + "' has no column in " +
                                                  path_.string());
    }
  }
  return persist(store_.log_transaction(eval, ctx, model));
}

const TransactionRecord& DurableLog::log_tutor_action(const graph::Sai& action,
                                                      const LogContext& ctx) {
  return persist(store_.log_tutor_action(action, ctx));
}

}  // namespace tutorlab::log
