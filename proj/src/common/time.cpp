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
#include "tutorlab/common/time.hpp"

#include <chrono>
#include <cstdio>

#include "tutorlab/common/error.hpp"
#include "tutorlab/common/strings.hpp"

namespace tutorlab {
namespace {

using std::chrono::days;
using std::chrono::floor;
using std::chrono::milliseconds;
using std::chrono::sys_days;

bool read_digits(std::string_view s, std::size_t pos, std::size_t n, int& out) {
  if (pos + n > s.size()) return false;
  int v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    v = v * 10 + (s[i] - '0');
  }
  out = v;
  return true;
}

}  // namespace

std::string format_iso8601(TimestampMs t) {
  const auto tp = std::chrono::sys_time<milliseconds>(milliseconds(t));
  const auto day = floor<days>(tp);
  const std::chrono::year_month_day ymd(day);
  const std::chrono::hh_mm_ss hms(tp - day);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()),
                static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()),
                static_cast<int>(hms.subseconds().count()));
  return buf;
}

TimestampMs parse_iso8601(std::string_view text) {
  const std::string_view s = trim(text);
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0, ms = 0;
  auto fail = [&]() -> TimestampMs {
    throw Error(ErrorCode::kParseError,
                "bad timestamp '" + std::string(text) + "'");
  };
  if (!read_digits(s, 0, 4, y) || s.size() < 10 || s[4] != '-' ||
      !read_digits(s, 5, 2, mo) || s[7] != '-' || !read_digits(s, 8, 2, d)) {
    return fail();
  }
  std::size_t pos = 10;
  if (pos < s.size()) {
    if ((s[pos] != 'T' && s[pos] != ' ') || !read_digits(s, pos + 1, 2, h) ||
        s.size() < pos + 9 || s[pos + 3] != ':' ||
        !read_digits(s, pos + 4, 2, mi) || s[pos + 6] != ':' ||
        !read_digits(s, pos + 7, 2, sec)) {
      return fail();
    }
    pos += 9;
    if (pos < s.size() && s[pos] == '.') {
      if (!read_digits(s, pos + 1, 3, ms)) return fail();
      pos += 4;
    }
    if (pos < s.size() && s[pos] == 'Z') ++pos;
    if (pos != s.size()) return fail();
  }
  const std::chrono::year_month_day ymd{std::chrono::year(y),
                                        std::chrono::month(mo),
                                        std::chrono::day(d)};
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 60) return fail();
  const auto tp = sys_days(ymd) + std::chrono::hours(h) +
                  std::chrono::minutes(mi) + std::chrono::seconds(sec) +
                  milliseconds(ms);
  return std::chrono::duration_cast<milliseconds>(tp.time_since_epoch())
      .count();
}

CivilDate civil_date(TimestampMs t) {
  const auto tp = std::chrono::sys_time<milliseconds>(milliseconds(t));
  const std::chrono::year_month_day ymd(floor<days>(tp));
  return {static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
          static_cast<unsigned>(ymd.day())};
}

TimestampMs SystemClock::now() const {
  return std::chrono::duration_cast<milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace tutorlab
