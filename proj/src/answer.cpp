/*
  Copyright (c) 2026 polypot contributors

  Licensed under the Apache License, Version 2.0 (the "License");
  you may not use this file except in compliance with the License.
  You may obtain a copy of the License at

  http://www.apache.org/licenses/LICENSE-2.0

  Unless required by applicable law or agreed to in writing, software
  distributed under the License is distributed on an "AS IS" BASIS,
  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
  See the License for the specific language governing permissions and
  limitations under the License.
*/

#include "answer.hpp"

#include <cctype>
#include <cmath>

#include "errors.hpp"
#include "util.hpp"

namespace polypot {

namespace {

using nlohmann::json;

/// Balanced-brace content starting right after an opening '{' at `open`.
/// Returns nullopt when braces never balance.
std::optional<std::string> brace_content(std::string_view text,
                                         std::size_t open) {
  int depth = 0;
  for (std::size_t i = open; i < text.size(); ++i) {
    if (text[i] == '{') {
      ++depth;
    } else if (text[i] == '}') {
      --depth;
      if (depth == 0) {
        return std::string(text.substr(open + 1, i - open - 1));
      }
    }
  }
  return std::nullopt;
}

std::optional<std::string> last_boxed_content(std::string_view text) {
  constexpr std::string_view kBoxed = "\\boxed";
  std::size_t pos = text.rfind(kBoxed);
  if (pos == std::string_view::npos) return std::nullopt;
  std::size_t open = pos + kBoxed.size();
  while (open < text.size() && std::isspace(static_cast<unsigned char>(text[open]))) {
    ++open;
  }
  if (open >= text.size() || text[open] != '{') return std::nullopt;
  auto content = brace_content(text, open);
  if (!content) return std::nullopt;
  // Innermost content of nested \boxed{...}.
  if (content->find(kBoxed) != std::string::npos) {
    if (auto inner = last_boxed_content(*content)) return inner;
  }
  return content;
}

/// "#### 1,234" style GSM8K answers carry thousands separators.
std::string strip_numeric_commas(const std::string& s) {
  std::string t = trim(s);
  if (t.find(',') == std::string::npos) return t;
  std::size_t i = 0;
  if (i < t.size() && (t[i] == '+' || t[i] == '-')) ++i;
  bool digits_and_commas = i < t.size();
  for (; i < t.size(); ++i) {
    char c = t[i];
    if (!std::isdigit(static_cast<unsigned char>(c)) && c != ',' && c != '.') {
      digits_and_commas = false;
      break;
    }
  }
  if (!digits_and_commas) return t;
  std::string out;
  out.reserve(t.size());
  for (char c : t) {
    if (c != ',') out.push_back(c);
  }
  return out;
}

std::optional<std::string> string_field(const json& record, const char* name) {
  auto it = record.find(name);
  if (it == record.end()) return std::nullopt;
  if (it->is_string()) return it->get<std::string>();
  return std::nullopt;
}

}  // namespace

AnswerValue AnswerValue::number(double value) {
  if (!std::isfinite(value)) {
    throw InvalidInput("answer number must be finite");
  }
  AnswerValue v;
  v.kind_ = Kind::Number;
  v.number_ = value;
  return v;
}

AnswerValue AnswerValue::text(std::string_view raw) {
  AnswerValue v;
  v.kind_ = Kind::Text;
  v.text_ = canonical_text(raw);
  return v;
}

std::string AnswerValue::canonical_key() const {
  if (kind_ == Kind::Number) return format_double(number_);
  return text_;
}

json AnswerValue::to_json() const {
  json j;
  if (kind_ == Kind::Number) {
    j["kind"] = "number";
    j["value"] = number_;
  } else {
    j["kind"] = "text";
    j["value"] = text_;
  }
  return j;
}

AnswerValue AnswerValue::from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "number") {
    return AnswerValue::number(j.at("value").get<double>());
  }
  if (kind == "text") {
    return AnswerValue::text(j.at("value").get<std::string>());
  }
  throw ParseError("unknown answer kind: " + kind);
}

AnswerValue parse_answer(std::string_view raw_stdout) {
  std::string last_line;
  for (const std::string& line : split_lines(raw_stdout)) {
    if (!trim(line).empty()) last_line = line;
  }
  std::string token = trim(last_line);
  if (token.empty()) {
    throw ParseError("empty program output");
  }
  if (auto v = parse_numeral(token)) return AnswerValue::number(*v);
  if (auto v = parse_rational(token)) return AnswerValue::number(*v);
  return AnswerValue::text(token);
}

bool answers_equal(const AnswerValue& a, const AnswerValue& b,
                   const Tolerance& tol) {
  if (tol.abs_tol < 0 || tol.rel_tol < 0) {
    throw InvalidInput("tolerances must be non-negative");
  }
  auto numbers_equal = [&](double x, double y) {
    double scale = std::max(std::fabs(x), std::fabs(y));
    return std::fabs(x - y) <= std::max(tol.abs_tol, tol.rel_tol * scale);
  };
  if (a.is_number() && b.is_number()) {
    return numbers_equal(a.number_value(), b.number_value());
  }
  if (!a.is_number() && !b.is_number()) {
    return a.text_value() == b.text_value();
  }
  // Mixed kinds: coerce the text side when it looks numeric.
  const AnswerValue& num = a.is_number() ? a : b;
  const AnswerValue& txt = a.is_number() ? b : a;
  if (auto v = coerce_numeric(txt.text_value())) {
    return numbers_equal(num.number_value(), *v);
  }
  return false;
}

GoldFormat gold_format_from_string(std::string_view name) {
  std::string n = lower_ascii(trim(name));
  if (n == "gsm8k") return GoldFormat::GSM8K;
  if (n == "math") return GoldFormat::MATH;
  if (n == "plain" || n == "plainjsonl" || n.empty()) {
    return GoldFormat::PlainJSONL;
  }
  throw UsageError("unknown gold format: " + std::string(name));
}

std::string_view to_string(GoldFormat fmt) {
  switch (fmt) {
    case GoldFormat::GSM8K:
      return "gsm8k";
    case GoldFormat::MATH:
      return "math";
    case GoldFormat::PlainJSONL:
      return "plain";
  }
  return "plain";
}

AnswerValue math_latex_to_answer(std::string_view content) {
  std::string s = trim(content);
  // Strip surrounding inline-math dollars.
  while (s.size() >= 2 && s.front() == '$' && s.back() == '$') {
    s = trim(std::string_view(s).substr(1, s.size() - 2));
  }
  double sign = 1.0;
  std::string_view body(s);
  if (!body.empty() && (body.front() == '+' || body.front() == '-')) {
    if (body.front() == '-') sign = -1.0;
    body.remove_prefix(1);
    while (!body.empty() && body.front() == ' ') body.remove_prefix(1);
  }
  constexpr std::string_view kFrac = "\\frac";
  if (body.substr(0, kFrac.size()) == kFrac) {
    std::string_view rest = body.substr(kFrac.size());
    std::size_t open = 0;
    while (open < rest.size() && rest[open] == ' ') ++open;
    if (open < rest.size() && rest[open] == '{') {
      auto numerator = brace_content(rest, open);
      if (numerator) {
        // Skip to the closing brace of the numerator, then to the next '{'.
        int depth = 0;
        std::size_t i = open;
        for (; i < rest.size(); ++i) {
          if (rest[i] == '{') ++depth;
          if (rest[i] == '}') {
            --depth;
            if (depth == 0) break;
          }
        }
        std::size_t open2 = i + 1;
        while (open2 < rest.size() && rest[open2] == ' ') ++open2;
        if (open2 < rest.size() && rest[open2] == '{') {
          auto denominator = brace_content(rest, open2);
          if (denominator) {
            auto a = coerce_numeric(*numerator);
            auto b = coerce_numeric(*denominator);
            if (a && b && *b != 0.0 && std::isfinite(*a / *b)) {
              return AnswerValue::number(sign * (*a / *b));
            }
          }
        }
      }
    }
    return AnswerValue::text(s);
  }
  if (auto v = coerce_numeric(s)) return AnswerValue::number(*v);
  return AnswerValue::text(s);
}

AnswerValue extract_gold(const json& record, GoldFormat fmt) {
  switch (fmt) {
    case GoldFormat::GSM8K: {
      auto answer = string_field(record, "answer");
      if (!answer) throw GoldMissing("gsm8k record has no answer field");
      constexpr std::string_view kMarker = "#### ";
      std::size_t pos = answer->rfind(kMarker);
      if (pos == std::string::npos) {
        throw GoldMissing("gsm8k answer has no '#### ' marker");
      }
      std::string tail = strip_numeric_commas(answer->substr(pos + kMarker.size()));
      if (trim(tail).empty()) {
        throw GoldMissing("gsm8k answer marker is empty");
      }
      return parse_answer(tail);
    }
    case GoldFormat::MATH: {
      auto solution = string_field(record, "solution");
      if (!solution) solution = string_field(record, "answer");
      if (!solution) throw GoldMissing("math record has no solution/answer field");
      auto boxed = last_boxed_content(*solution);
      if (!boxed) throw GoldMissing("math solution has no \\boxed{...} expression");
      return math_latex_to_answer(*boxed);
    }
    case GoldFormat::PlainJSONL: {
      auto it = record.find("answer");
      if (it == record.end()) throw GoldMissing("record has no answer field");
      if (it->is_number()) return AnswerValue::number(it->get<double>());
      if (it->is_string()) {
        if (trim(it->get<std::string>()).empty()) {
          throw GoldMissing("answer field is empty");
        }
        return parse_answer(it->get<std::string>());
      }
      throw GoldMissing("answer field has unsupported type");
    }
  }
  throw GoldMissing("unreachable gold format");
}

}  // namespace polypot
