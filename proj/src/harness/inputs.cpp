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

#include "tutorlab/harness/inputs.hpp"

#include <regex>
#include <vector>

#include "tutorlab/common/strings.hpp"

namespace tutorlab::harness {

namespace {

// Strips the regex syntax that commonly appears in step patterns.
std::string literal_of(std::string pattern) {
  static const std::vector<std::pair<std::regex, std::string>> rewrites{
      {std::regex(R"(\\s[*?])"), ""},
      {std::regex(R"(\\s\+)"), " "},
      {std::regex(R"(\\d\+)"), "1"},
      {std::regex(R"(\\([.+*?()/\\-]))"), "$1"},
      {std::regex(R"(^\^|\$$)"), ""},
  };
  for (const auto& [re, with] : rewrites) pattern = std::regex_replace(pattern, re, with);
  return pattern;
}

}  // namespace

std::optional<std::string> sample_correct_input(const graph::InputMatcher& matcher) {
  const auto doc = matcher.to_json();
  const std::string kind = doc.at("kind").get<std::string>();
  std::vector<std::string> candidates;
  if (kind == "exact" || kind == "linear_expr") {
    candidates.push_back(doc.at("value").get<std::string>());
  } else if (kind == "range") {
    const double lo = doc.at("lo").get<double>();
    const double hi = doc.at("hi").get<double>();
    candidates.push_back(format_double((lo + hi) / 2));
    candidates.push_back(format_double(lo));
  } else if (kind == "pattern") {
    candidates.push_back(literal_of(doc.at("regex").get<std::string>()));
  }
  candidates.push_back("answer");
  for (const auto& c : candidates) {
    if (matcher.matches(c)) return c;
  }
  return std::nullopt;
}

std::optional<std::string> sample_incorrect_input(const graph::InputMatcher& matcher, Rng& rng) {
  std::vector<std::string> candidates{"-1", "0", "99999", "not sure", "?"};
  if (const auto right = sample_correct_input(matcher)) {
    double v = 0;
    if (parse_double(*right, v)) {
      candidates.push_back(format_double(v + 1));
      candidates.push_back(format_double(v - 1));
    }
    candidates.push_back(*right + "1");
  }
  std::span<std::string> view(candidates);
  rng.shuffle(view);
  for (const auto& c : candidates) {
    if (!matcher.matches(c)) return c;
  }
  return std::nullopt;
}

std::optional<graph::Sai> correct_attempt(const graph::Link& link) {
  if (!link.matcher || !link.matcher->input) return std::nullopt;
  const auto input = sample_correct_input(*link.matcher->input);
  if (!input) return std::nullopt;
  return graph::Sai{link.matcher->selection, link.matcher->action, *input};
}

}  // namespace tutorlab::harness
