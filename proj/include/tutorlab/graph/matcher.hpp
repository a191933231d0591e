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
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace tutorlab::graph {

// Decides whether a student's input text satisfies one step. Matchers are
// immutable and shared between graphs loaded from the same document.
class InputMatcher {
 public:
  virtual ~InputMatcher() = default;

  virtual bool matches(std::string_view input) const = 0;
  // Stable kind tag used in the package document ("exact", "range", ...).
  virtual std::string_view kind() const = 0;
  virtual nlohmann::json to_json() const = 0;
  // Authoring problems (bad range, uncompilable pattern); nullopt when fine.
  virtual std::optional<std::string> check() const { return std::nullopt; }
};

using MatcherPtr = std::shared_ptr<const InputMatcher>;

// Compares after trimming leading/trailing whitespace on both sides.
class ExactMatcher final : public InputMatcher {
 public:
  explicit ExactMatcher(std::string value, bool case_insensitive = false);
  bool matches(std::string_view input) const override;
  std::string_view kind() const override { return "exact"; }
  nlohmann::json to_json() const override;

  const std::string& value() const { return value_; }
  bool case_insensitive() const { return case_insensitive_; }

 private:
  std::string value_;
  bool case_insensitive_;
};

class NumberRangeMatcher final : public InputMatcher {
 public:
  NumberRangeMatcher(double lo, double hi, bool inclusive = true);
  bool matches(std::string_view input) const override;
  std::string_view kind() const override { return "range"; }
  nlohmann::json to_json() const override;
  std::optional<std::string> check() const override;

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  bool inclusive() const { return inclusive_; }

 private:
  double lo_;
  double hi_;
  bool inclusive_;
};

// ECMAScript regular expression that must match the whole trimmed input.
class PatternMatcher final : public InputMatcher {
 public:
  explicit PatternMatcher(std::string pattern, bool case_insensitive = false);
  bool matches(std::string_view input) const override;
  std::string_view kind() const override { return "pattern"; }
  nlohmann::json to_json() const override;
  std::optional<std::string> check() const override;

  const std::string& pattern() const { return pattern_; }

 private:
  std::string pattern_;
  bool case_insensitive_;
  std::optional<std::regex> compiled_;
  std::string compile_error_;
};

class AnyMatcher final : public InputMatcher {
 public:
  bool matches(std::string_view) const override { return true; }
  std::string_view kind() const override { return "any"; }
  nlohmann::json to_json() const override;
};

// Linear expression in a single variable, compared by coefficients:
// "2x+3", "3 + 2*x" and "x + x + 3" are all equivalent.
struct LinearForm {
  double coefficient = 0.0;
  double constant = 0.0;
};

// Parses sums/differences/products of numbers and one variable, with
// parentheses. Returns nullopt if the text is not linear in `variable`.
std::optional<LinearForm> parse_linear(std::string_view text,
                                       std::string_view variable);

class LinearExpressionMatcher final : public InputMatcher {
 public:
  LinearExpressionMatcher(std::string target, std::string variable);
  bool matches(std::string_view input) const override;
  std::string_view kind() const override { return "linear_expr"; }
  nlohmann::json to_json() const override;
  std::optional<std::string> check() const override;

 private:
  std::string target_text_;
  std::string variable_;
  std::optional<LinearForm> target_;
};

// Maps the "kind" tag of an input matcher document to a factory. The four
// core kinds and "linear_expr" are always present; extensions may add more.
class MatcherFactory {
 public:
  using Builder = std::function<MatcherPtr(const nlohmann::json&)>;

  static MatcherFactory& instance();

  // Throws Error(kConflict) if the kind is already registered.
  void register_kind(std::string kind, Builder builder);
  // Throws Error(kParseError) on unknown kinds or missing fields.
  MatcherPtr build(const nlohmann::json& doc) const;

 private:
  MatcherFactory();
  std::map<std::string, Builder, std::less<>> builders_;
};

}  // namespace tutorlab::graph
