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
#include <string>
#include <string_view>

namespace tutorlab {

// Milliseconds since the Unix epoch, UTC.
using TimestampMs = std::int64_t;

// "2026-03-04T05:06:07.089Z"
std::string format_iso8601(TimestampMs t);

// Accepts the format written by format_iso8601, with or without the
// millisecond part and trailing 'Z', and a bare "YYYY-MM-DD" date.
// Throws Error(kParseError) on anything else.
TimestampMs parse_iso8601(std::string_view text);

struct CivilDate {
  int year;
  unsigned month;  // 1..12
  unsigned day;    // 1..31
};

CivilDate civil_date(TimestampMs t);

class Clock {
 public:
  virtual ~Clock() = default;
  virtual TimestampMs now() const = 0;
};

class SystemClock final : public Clock {
 public:
  TimestampMs now() const override;
};

// Deterministic clock for simulations and tests.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(TimestampMs start) : now_(start) {}
  TimestampMs now() const override { return now_; }
  void advance(TimestampMs delta_ms) { now_ += delta_ms; }
  void set(TimestampMs t) { now_ = t; }

 private:
  TimestampMs now_;
};

}  // namespace tutorlab
