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

#ifndef POLYPOT_ANSWER_HPP
#define POLYPOT_ANSWER_HPP

#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

namespace polypot {

/// Normalized answer: a finite real number or a canonicalized text token.
class AnswerValue {
 public:
  enum class Kind { Number, Text };

  static AnswerValue number(double value);
  static AnswerValue text(std::string_view raw);

  Kind kind() const { return kind_; }
  bool is_number() const { return kind_ == Kind::Number; }
  double number_value() const { return number_; }
  const std::string& text_value() const { return text_; }

  /// Stable string form used for vote keys and serialized output.
  std::string canonical_key() const;

  nlohmann::json to_json() const;
  static AnswerValue from_json(const nlohmann::json& j);

 private:
  Kind kind_ = Kind::Text;
  double number_ = 0.0;
  std::string text_;
};

struct Tolerance {
  double abs_tol = 1e-4;
  double rel_tol = 1e-4;
};

/// Parse the last non-empty stdout line: numeral, then "a/b" rational,
/// then canonical text. Throws ParseError only when stdout has no
/// non-empty line.
AnswerValue parse_answer(std::string_view raw_stdout);

/// Symmetric equivalence. Numbers compare within
/// max(abs_tol, rel_tol * max(|a|, |b|)); text compares canonically; mixed
/// kinds compare numerically when the text side coerces to a number.
bool answers_equal(const AnswerValue& a, const AnswerValue& b,
                   const Tolerance& tol);

enum class GoldFormat { GSM8K, MATH, PlainJSONL };

GoldFormat gold_format_from_string(std::string_view name);
std::string_view to_string(GoldFormat fmt);

/// Pull the gold answer out of a raw dataset record. GSM8K reads the text
/// after the final "#### " marker; MATH reads the innermost content of the
/// final \boxed{...}; Plain reads the answer field verbatim.
AnswerValue extract_gold(const nlohmann::json& record, GoldFormat fmt);

/// Bounded LaTeX normalization: signs, \frac{a}{b}, plain numerals and
/// simple rationals; everything else becomes canonical text.
AnswerValue math_latex_to_answer(std::string_view content);

}  // namespace polypot

#endif  // POLYPOT_ANSWER_HPP
