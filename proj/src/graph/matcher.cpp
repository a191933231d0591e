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
#include "tutorlab/graph/matcher.hpp"

#include <cctype>
#include <cmath>

#include "tutorlab/common/error.hpp"
#include "tutorlab/common/strings.hpp"

namespace tutorlab::graph {
namespace {

using nlohmann::json;

bool equal_text(std::string_view a, std::string_view b, bool case_insensitive) {
  if (!case_insensitive) return a == b;
  return to_lower(a) == to_lower(b);
}

// Recursive-descent evaluator producing a LinearForm, or failing when the
// expression is non-linear or malformed.
class LinearParser {
 public:
  LinearParser(std::string_view text, std::string_view variable)
      : s_(text), var_(variable) {}

  std::optional<LinearForm> parse() {
    auto v = expr();
    skip_ws();
    if (!v || pos_ != s_.size()) return std::nullopt;
    return v;
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  bool at_factor_start() {
    skip_ws();
    if (pos_ >= s_.size()) return false;
    const char c = s_[pos_];
    return c == '(' || std::isdigit(static_cast<unsigned char>(c)) || c == '.' ||
           s_.substr(pos_).starts_with(var_);
  }

  std::optional<LinearForm> expr() {
    auto lhs = term();
    if (!lhs) return std::nullopt;
    while (true) {
      if (eat('+')) {
        auto rhs = term();
        if (!rhs) return std::nullopt;
        lhs->coefficient += rhs->coefficient;
        lhs->constant += rhs->constant;
      } else if (eat('-')) {
        auto rhs = term();
        if (!rhs) return std::nullopt;
        lhs->coefficient -= rhs->coefficient;
        lhs->constant -= rhs->constant;
      } else {
        return lhs;
      }
    }
  }

  static std::optional<LinearForm> multiply(LinearForm a, LinearForm b) {
    if (a.coefficient != 0.0 && b.coefficient != 0.0) return std::nullopt;
    return LinearForm{a.coefficient * b.constant + b.coefficient * a.constant,
                      a.constant * b.constant};
  }

  std::optional<LinearForm> term() {
    auto lhs = unary();
    if (!lhs) return std::nullopt;
    while (true) {
      if (eat('*')) {
        auto rhs = unary();
        if (!rhs) return std::nullopt;
        lhs = multiply(*lhs, *rhs);
      } else if (eat('/')) {
        auto rhs = unary();
        if (!rhs || rhs->coefficient != 0.0 || rhs->constant == 0.0) return std::nullopt;
        lhs->coefficient /= rhs->constant;
        lhs->constant /= rhs->constant;
      } else if (at_factor_start()) {
        // Implicit multiplication: "2x", "3(x+1)".
        auto rhs = factor();
        if (!rhs) return std::nullopt;
        lhs = multiply(*lhs, *rhs);
      } else {
        return lhs;
      }
      if (!lhs) return std::nullopt;
    }
  }

  std::optional<LinearForm> unary() {
    if (eat('-')) {
      auto v = unary();
      if (!v) return std::nullopt;
      return LinearForm{-v->coefficient, -v->constant};
    }
    if (eat('+')) return unary();
    return factor();
  }

  std::optional<LinearForm> factor() {
    skip_ws();
    if (eat('(')) {
      auto v = expr();
      if (!v || !eat(')')) return std::nullopt;
      return v;
    }
    if (!var_.empty() && s_.substr(pos_).starts_with(var_)) {
      pos_ += var_.size();
      return LinearForm{1.0, 0.0};
    }
    const std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) {
      ++pos_;
    }
    double value = 0.0;
    if (start == pos_ || !parse_double(s_.substr(start, pos_ - start), value)) {
      return std::nullopt;
    }
    return LinearForm{0.0, value};
  }

  std::string_view s_;
  std::string_view var_;
  std::size_t pos_ = 0;
};

bool json_flag(const json& doc, const char* key) {
  return doc.contains(key) && doc.at(key).get<bool>();
}

}  // namespace

ExactMatcher::ExactMatcher(std::string value, bool case_insensitive)
    : value_(std::move(value)), case_insensitive_(case_insensitive) {}

bool ExactMatcher::matches(std::string_view input) const {
  return equal_text(trim(input), trim(value_), case_insensitive_);
}

json ExactMatcher::to_json() const {
  json doc{{"kind", "exact"}, {"value", value_}};
  if (case_insensitive_) doc["case_insensitive"] = true;
  return doc;
}

NumberRangeMatcher::NumberRangeMatcher(double lo, double hi, bool inclusive)
    : lo_(lo), hi_(hi), inclusive_(inclusive) {}

bool NumberRangeMatcher::matches(std::string_view input) const {
  double v = 0.0;
  if (!parse_double(input, v)) return false;
  return inclusive_ ? (lo_ <= v && v <= hi_) : (lo_ < v && v < hi_);
}

json NumberRangeMatcher::to_json() const {
  json doc{{"kind", "range"}, {"lo", lo_}, {"hi", hi_}};
  if (!inclusive_) doc["inclusive"] = false;
  return doc;
}

std::optional<std::string> NumberRangeMatcher::check() const {
  if (!std::isfinite(lo_) || !std::isfinite(hi_)) return "range bounds must be finite";
  if (lo_ > hi_) return "range has lo > hi";
  return std::nullopt;
}

PatternMatcher::PatternMatcher(std::string pattern, bool case_insensitive)
    : pattern_(std::move(pattern)), case_insensitive_(case_insensitive) {
  try {
    auto flags = std::regex::ECMAScript;
    if (case_insensitive_) flags |= std::regex::icase;
    compiled_.emplace(pattern_, flags);
  } catch (const std::regex_error& e) {
    compile_error_ = e.what();
  }
}

bool PatternMatcher::matches(std::string_view input) const {
  if (!compiled_) return false;
  const std::string_view t = trim(input);
  return std::regex_match(t.begin(), t.end(), *compiled_);
}

json PatternMatcher::to_json() const {
  json doc{{"kind", "pattern"}, {"regex", pattern_}};
  if (case_insensitive_) doc["case_insensitive"] = true;
  return doc;
}

std::optional<std::string> PatternMatcher::check() const {
  if (!compiled_) return "pattern does not compile: " + compile_error_;
  return std::nullopt;
}

json AnyMatcher::to_json() const { return json{{"kind", "any"}}; }

std::optional<LinearForm> parse_linear(std::string_view text,
                                       std::string_view variable) {
  return LinearParser(text, variable).parse();
}

LinearExpressionMatcher::LinearExpressionMatcher(std::string target,
                                                 std::string variable)
    : target_text_(std::move(target)),
      variable_(std::move(variable)),
      target_(parse_linear(target_text_, variable_)) {}

bool LinearExpressionMatcher::matches(std::string_view input) const {
  if (!target_) return false;
  const auto got = parse_linear(input, variable_);
  if (!got) return false;
  constexpr double kTol = 1e-9;
  return std::abs(got->coefficient - target_->coefficient) <= kTol &&
         std::abs(got->constant - target_->constant) <= kTol;
}

json LinearExpressionMatcher::to_json() const {
  return json{{"kind", "linear_expr"}, {"value", target_text_}, {"variable", variable_}};
}

std::optional<std::string> LinearExpressionMatcher::check() const {
  if (variable_.empty()) return "linear_expr needs a variable";
  if (!target_) return "target is not a linear expression in " + variable_;
  return std::nullopt;
}

MatcherFactory& MatcherFactory::instance() {
  static MatcherFactory factory;
  return factory;
}

MatcherFactory::MatcherFactory() {
  builders_["exact"] = [](const json& d) -> MatcherPtr {
    return std::make_shared<ExactMatcher>(d.at("value").get<std::string>(),
                                          json_flag(d, "case_insensitive"));
  };
  builders_["range"] = [](const json& d) -> MatcherPtr {
    const bool inclusive = d.contains("inclusive") ? d.at("inclusive").get<bool>() : true;
    return std::make_shared<NumberRangeMatcher>(d.at("lo").get<double>(),
                                                d.at("hi").get<double>(), inclusive);
  };
  builders_["pattern"] = [](const json& d) -> MatcherPtr {
    return std::make_shared<PatternMatcher>(d.at("regex").get<std::string>(),
                                            json_flag(d, "case_insensitive"));
  };
  builders_["any"] = [](const json&) -> MatcherPtr {
    return std::make_shared<AnyMatcher>();
  };
  builders_["linear_expr"] = [](const json& d) -> MatcherPtr {
    return std::make_shared<LinearExpressionMatcher>(
        d.at("value").get<std::string>(), d.value("variable", std::string("x")));
  };
}

void MatcherFactory::register_kind(std::string kind, Builder builder) {
  if (builders_.contains(kind)) {
    throw Error(ErrorCode::kConflict, "matcher kind '" + kind + "' already registered");
  }
  builders_.emplace(std::move(kind), std::move(builder));
}

MatcherPtr MatcherFactory::build(const json& doc) const {
  if (!doc.is_object() || !doc.contains("kind") || !doc.at("kind").is_string()) {
    throw Error(ErrorCode::kParseError, "input matcher needs a string 'kind'");
  }
  const auto kind = doc.at("kind").get<std::string>();
  const auto it = builders_.find(kind);
  if (it == builders_.end()) {
    throw Error(ErrorCode::kParseError, "unknown input matcher kind '" + kind + "'");
  }
  try {
    return it->second(doc);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError,
                "input matcher '" + kind + "': " + e.what());
  }
}

}  // namespace tutorlab::graph
