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

#include <cmath>
#include <random>

#include "answer.hpp"
#include "doctest.h"
#include "errors.hpp"
#include "json.hpp"

using namespace polypot;
using nlohmann::json;

namespace {
const Tolerance kTol{1e-4, 1e-4};
}

TEST_CASE("parse_answer numerals") {
  CHECK(parse_answer("72.0\n").is_number());
  CHECK(parse_answer("72.0\n").number_value() == doctest::Approx(72.0));
  CHECK(parse_answer("-3.5").number_value() == doctest::Approx(-3.5));
  CHECK(parse_answer("1.5e3").number_value() == doctest::Approx(1500.0));
  CHECK(parse_answer("  41  \n").number_value() == doctest::Approx(41.0));
}

TEST_CASE("parse_answer rationals") {
  CHECK(parse_answer("3/4").number_value() == doctest::Approx(0.75));
  CHECK(parse_answer("7/2").number_value() == doctest::Approx(3.5));
  CHECK(parse_answer("-3/4").number_value() == doctest::Approx(-0.75));
  // Division by zero is not a rational; falls back to text.
  CHECK_FALSE(parse_answer("3/0").is_number());
}

TEST_CASE("parse_answer text fallback") {
  AnswerValue v = parse_answer("2*sqrt(5)");
  CHECK_FALSE(v.is_number());
  CHECK(v.text_value() == "2*sqrt(5)");
  // Non-finite numerals become text, never NaN/Inf numbers.
  CHECK_FALSE(parse_answer("inf").is_number());
  CHECK_FALSE(parse_answer("nan").is_number());
}

TEST_CASE("parse_answer uses the last non-empty line") {
  AnswerValue v = parse_answer("debug noise\nmore noise\n\n72\n\n");
  CHECK(v.is_number());
  CHECK(v.number_value() == doctest::Approx(72.0));
}

TEST_CASE("parse_answer rejects empty stdout only") {
  CHECK_THROWS_AS(parse_answer(""), ParseError);
  CHECK_THROWS_AS(parse_answer("\n \n\t\n"), ParseError);
}

TEST_CASE("parse_answer text canonicalization is idempotent") {
  AnswerValue once = parse_answer("  Two   WORDS \n");
  CHECK(once.text_value() == "two words");
  AnswerValue twice = parse_answer(once.text_value());
  CHECK(twice.text_value() == once.text_value());
}

TEST_CASE("answers_equal basics") {
  CHECK(answers_equal(AnswerValue::number(72.0), AnswerValue::number(72), kTol));
  CHECK(answers_equal(AnswerValue::number(0.33333),
                      AnswerValue::number(1.0 / 3.0), {0.0, 1e-3}));
  CHECK_FALSE(
      answers_equal(AnswerValue::number(41), AnswerValue::number(42), kTol));
  CHECK(answers_equal(AnswerValue::text(" Two  Words"),
                      AnswerValue::text("two words "), kTol));
  CHECK_FALSE(
      answers_equal(AnswerValue::text("a"), AnswerValue::text("b"), kTol));
}

TEST_CASE("answers_equal mixed-kind coercion") {
  CHECK(answers_equal(AnswerValue::number(0.75), AnswerValue::text("3/4"), kTol));
  CHECK(answers_equal(AnswerValue::text("72.0"), AnswerValue::number(72), kTol));
  CHECK_FALSE(answers_equal(AnswerValue::number(5),
                            AnswerValue::text("sqrt(25)"), kTol));
}

TEST_CASE("answers_equal validates tolerances") {
  CHECK_THROWS_AS(answers_equal(AnswerValue::number(1), AnswerValue::number(1),
                                {-1.0, 0.0}),
                  InvalidInput);
}

TEST_CASE("answers_equal reflexivity and symmetry properties") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> mag(-1e6, 1e6);
  for (int i = 0; i < 500; ++i) {
    AnswerValue a = AnswerValue::number(mag(rng));
    AnswerValue b = AnswerValue::number(mag(rng));
    CHECK(answers_equal(a, a, kTol));
    CHECK(answers_equal(a, b, kTol) == answers_equal(b, a, kTol));
  }
  // Symmetry must also hold at very different magnitudes.
  AnswerValue big = AnswerValue::number(100.0);
  AnswerValue small = AnswerValue::number(60.0);
  Tolerance wide{0.0, 0.5};
  CHECK(answers_equal(big, small, wide) == answers_equal(small, big, wide));
  AnswerValue t = AnswerValue::text("x + y");
  CHECK(answers_equal(t, t, kTol));
}

TEST_CASE("extract_gold gsm8k") {
  json record = {{"answer", "Some reasoning...\n#### 72"}};
  AnswerValue v = extract_gold(record, GoldFormat::GSM8K);
  CHECK(v.number_value() == doctest::Approx(72.0));

  json with_commas = {{"answer", "steps\n#### 1,250"}};
  CHECK(extract_gold(with_commas, GoldFormat::GSM8K).number_value() ==
        doctest::Approx(1250.0));

  // The last marker wins.
  json two_markers = {{"answer", "#### 5\nmore\n#### 9"}};
  CHECK(extract_gold(two_markers, GoldFormat::GSM8K).number_value() ==
        doctest::Approx(9.0));

  CHECK_THROWS_AS(extract_gold(json{{"answer", "no marker"}}, GoldFormat::GSM8K),
                  GoldMissing);
  CHECK_THROWS_AS(extract_gold(json::object(), GoldFormat::GSM8K), GoldMissing);
}

TEST_CASE("extract_gold math boxed expressions") {
  json frac = {{"solution", "Thus the answer is $\\boxed{\\frac{3}{4}}$."}};
  CHECK(extract_gold(frac, GoldFormat::MATH).number_value() ==
        doctest::Approx(0.75));

  json negative = {{"answer", "So $\\boxed{-\\frac{1}{2}}$"}};
  CHECK(extract_gold(negative, GoldFormat::MATH).number_value() ==
        doctest::Approx(-0.5));

  json plain = {{"solution", "gives \\boxed{42}"}};
  CHECK(extract_gold(plain, GoldFormat::MATH).number_value() ==
        doctest::Approx(42.0));

  json nested = {{"solution", "\\boxed{\\boxed{7}}"}};
  CHECK(extract_gold(nested, GoldFormat::MATH).number_value() ==
        doctest::Approx(7.0));

  // The final boxed expression wins.
  json two = {{"solution", "\\boxed{1} wait, actually \\boxed{2}"}};
  CHECK(extract_gold(two, GoldFormat::MATH).number_value() ==
        doctest::Approx(2.0));

  json symbolic = {{"solution", "hence \\boxed{2\\sqrt{5}}"}};
  AnswerValue v = extract_gold(symbolic, GoldFormat::MATH);
  CHECK_FALSE(v.is_number());
  CHECK(v.text_value() == "2\\sqrt{5}");

  CHECK_THROWS_AS(extract_gold(json{{"solution", "no box"}}, GoldFormat::MATH),
                  GoldMissing);
}

TEST_CASE("extract_gold plain") {
  CHECK(extract_gold(json{{"answer", "41"}}, GoldFormat::PlainJSONL)
            .number_value() == doctest::Approx(41.0));
  CHECK(extract_gold(json{{"answer", 7}}, GoldFormat::PlainJSONL)
            .number_value() == doctest::Approx(7.0));
  AnswerValue text =
      extract_gold(json{{"answer", "x=2"}}, GoldFormat::PlainJSONL);
  CHECK_FALSE(text.is_number());
  CHECK_THROWS_AS(extract_gold(json::object(), GoldFormat::PlainJSONL),
                  GoldMissing);
}

TEST_CASE("answer json round trip") {
  AnswerValue n = AnswerValue::number(3.5);
  CHECK(answers_equal(AnswerValue::from_json(n.to_json()), n, kTol));
  AnswerValue t = AnswerValue::text("2*sqrt(5)");
  CHECK(AnswerValue::from_json(t.to_json()).text_value() == t.text_value());
}

TEST_CASE("number invariant rejects non-finite values") {
  CHECK_THROWS_AS(AnswerValue::number(std::nan("")), InvalidInput);
  CHECK_THROWS_AS(AnswerValue::number(INFINITY), InvalidInput);
}
