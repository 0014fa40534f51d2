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
#include <sstream>

#include "doctest.h"
#include "errors.hpp"
#include "eval.hpp"
#include "support.hpp"
#include "util.hpp"

using namespace polypot;
using namespace polypot::testing;

namespace {

/// Synthetic corpus: question i has gold i, categories alternate.
struct Synthetic {
  std::vector<QuestionRecord> corpus;
  std::vector<ProgramSolution> solutions;
  std::vector<RunOutcome> outcomes;
  ToolchainRegistry registry;

  EvalContext context(std::uint64_t seed = 0) const {
    EvalContext ctx;
    ctx.corpus = &corpus;
    ctx.solutions = &solutions;
    ctx.outcomes = &outcomes;
    ctx.registry = &registry;
    ctx.tol = Tolerance{1e-4, 1e-4};
    ctx.seed = seed;
    return ctx;
  }
};

/// correct(q, lang_index): whether that language answers gold; failed(q,
/// lang_index): whether the run failed outright.
Synthetic make_synthetic(
    std::size_t n,
    const std::function<bool(std::size_t, std::size_t)>& correct,
    const std::function<bool(std::size_t, std::size_t)>& failed =
        [](std::size_t, std::size_t) { return false; }) {
  Synthetic s;
  s.registry = load_registry();
  const std::vector<std::string> langs = s.registry.language_ids();
  for (std::size_t q = 0; q < n; ++q) {
    char id[16];
    std::snprintf(id, sizeof(id), "s%02zu", q);
    QuestionRecord record;
    record.id = id;
    record.question = "synthetic question " + std::string(id);
    record.gold = AnswerValue::number(static_cast<double>(q));
    record.source_dataset = "synthetic";
    record.category = (q % 2 == 0) ? "even" : "odd";
    s.corpus.push_back(record);
    for (std::size_t l = 0; l < langs.size(); ++l) {
      s.solutions.push_back({record.id, langs[l], "stub source"});
      if (failed(q, l)) {
        s.outcomes.push_back(failed_outcome(record.id, langs[l]));
      } else {
        double value = correct(q, l) ? static_cast<double>(q)
                                     : static_cast<double>(q) + 1000.0;
        s.outcomes.push_back(ok_outcome(record.id, langs[l], value));
      }
    }
  }
  return s;
}

}  // namespace

TEST_CASE("parse_strategy names and aliases") {
  CHECK(parse_strategy("self-consistency").name == "self-consistency");
  CHECK(parse_strategy("self_consistency").name == "self-consistency");
  CHECK(parse_strategy("Voting-Scoring").name == "vote-score");
  CHECK(parse_strategy("upper-bound").name == "upper-bound");
  StrategyConfig single = parse_strategy("single:python");
  CHECK(single.name == "single");
  CHECK(single.fixed_language == "python");
  CHECK(single.display_name() == "single:python");
  CHECK_THROWS_AS(parse_strategy("best-effort"), UsageError);
  CHECK_THROWS_AS(parse_strategy("single:"), UsageError);
}

TEST_CASE("upper bound accuracy counts questions any language solves") {
  // 7 of 10 questions solvable by at least one language.
  Synthetic s = make_synthetic(10, [](std::size_t q, std::size_t l) {
    return q < 7 && l == (q % 4);
  });
  EvalEntry entry = evaluate_strategy(parse_strategy("upper-bound"), s.context());
  CHECK(entry.overall_accuracy == doctest::Approx(0.7));
  CHECK(entry.n == 10);
  CHECK(entry.correct == 7);
}

TEST_CASE("single-language evaluation consults only that language") {
  Synthetic s = make_synthetic(8, [](std::size_t q, std::size_t l) {
    return l == 0 ? q % 2 == 0 : true;
  });
  EvalEntry entry =
      evaluate_strategy(parse_strategy("single:python"), s.context());
  CHECK(entry.overall_accuracy == doctest::Approx(0.5));

  // A language with no solutions at all scores zero.
  Synthetic missing = make_synthetic(4, [](std::size_t, std::size_t) {
    return true;
  });
  missing.solutions.clear();
  missing.outcomes.clear();
  EvalEntry zero =
      evaluate_strategy(parse_strategy("single:python"), missing.context());
  CHECK(zero.overall_accuracy == doctest::Approx(0.0));
}

TEST_CASE("self-consistency accuracy with agreeing majorities") {
  // Three languages agree on gold everywhere; majority always right.
  Synthetic s = make_synthetic(6, [](std::size_t, std::size_t l) {
    return l != 3;
  });
  EvalEntry entry =
      evaluate_strategy(parse_strategy("self-consistency"), s.context());
  CHECK(entry.overall_accuracy == doctest::Approx(1.0));
}

TEST_CASE("abstains count as incorrect") {
  Synthetic s = make_synthetic(
      4, [](std::size_t, std::size_t) { return false; },
      [](std::size_t, std::size_t) { return true; });  // all runs fail
  EvalEntry entry =
      evaluate_strategy(parse_strategy("self-consistency"), s.context());
  CHECK(entry.overall_accuracy == doctest::Approx(0.0));
  for (const auto& d : entry.decisions) CHECK(d.abstain);
}

TEST_CASE("per-category tallies split by record category") {
  // Even questions always solvable by python, odd never.
  Synthetic s = make_synthetic(10, [](std::size_t q, std::size_t) {
    return q % 2 == 0;
  });
  EvalEntry entry =
      evaluate_strategy(parse_strategy("single:python"), s.context());
  REQUIRE(entry.categories.size() == 2);
  CHECK(entry.categories[0].first == "even");
  CHECK(entry.categories[0].second.accuracy() == doctest::Approx(1.0));
  CHECK(entry.categories[1].first == "odd");
  CHECK(entry.categories[1].second.accuracy() == doctest::Approx(0.0));
}

TEST_CASE("evaluation is deterministic given the seed") {
  Synthetic s = make_synthetic(12, [](std::size_t q, std::size_t l) {
    return (q + l) % 3 == 0;
  });
  EvalEntry a = evaluate_strategy(parse_strategy("random"), s.context(42));
  EvalEntry b = evaluate_strategy(parse_strategy("random"), s.context(42));
  REQUIRE(a.decisions.size() == b.decisions.size());
  for (std::size_t i = 0; i < a.decisions.size(); ++i) {
    CHECK(a.decisions[i].to_json().dump() == b.decisions[i].to_json().dump());
  }
  EvalEntry c = evaluate_strategy(parse_strategy("random"), s.context(43));
  bool any_different = false;
  for (std::size_t i = 0; i < a.decisions.size(); ++i) {
    if (a.decisions[i].chosen_language != c.decisions[i].chosen_language) {
      any_different = true;
    }
  }
  CHECK(any_different);
}

TEST_CASE("upper bound dominates every strategy row") {
  Synthetic s = make_synthetic(16, [](std::size_t q, std::size_t l) {
    return (q * 7 + l * 3) % 5 < 2;
  });
  EvalEntry ub = evaluate_strategy(parse_strategy("upper-bound"), s.context());
  for (const char* name : {"random", "self-consistency", "single:python"}) {
    EvalEntry other = evaluate_strategy(parse_strategy(name), s.context());
    CHECK(ub.overall_accuracy >= other.overall_accuracy);
  }
}

TEST_CASE("render_report averages category accuracies") {
  EvalEntry entry;
  entry.strategy = "demo";
  entry.n = 20;
  entry.correct = 12;
  entry.overall_accuracy = 0.6;
  entry.categories = {{"alpha", {10, 5}}, {"beta", {10, 7}}};
  RenderedReport report = render_report({entry});

  std::istringstream csv(report.csv);
  std::string header, row;
  std::getline(csv, header);
  std::getline(csv, row);
  CHECK(header == "strategy,alpha,beta,average");
  // demo,0.5,0.7,0.6 with full-precision doubles.
  std::vector<std::string> cells;
  std::stringstream ss(row);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  REQUIRE(cells.size() == 4);
  double alpha = std::stod(cells[1]);
  double beta = std::stod(cells[2]);
  double average = std::stod(cells[3]);
  CHECK(std::fabs(average - (alpha + beta) / 2.0) <= 1e-12);
  CHECK(average == doctest::Approx(0.6));
}

TEST_CASE("render_report renders empty categories as a dash") {
  EvalEntry a;
  a.strategy = "first";
  a.categories = {{"alpha", {4, 2}}, {"beta", {0, 0}}};
  EvalEntry b;
  b.strategy = "second";
  b.categories = {{"alpha", {4, 4}}};
  RenderedReport report = render_report({a, b});
  CHECK(report.markdown.find("—") != std::string::npos);
  // Row order follows the entries order.
  CHECK(report.csv.find("first") < report.csv.find("second"));
  CHECK_THROWS_AS(render_report({}), UsageError);
}

TEST_CASE("render_report is byte-stable") {
  Synthetic s = make_synthetic(9, [](std::size_t q, std::size_t l) {
    return (q + l) % 2 == 0;
  });
  std::vector<EvalEntry> entries;
  for (const char* name : {"random", "upper-bound"}) {
    entries.push_back(evaluate_strategy(parse_strategy(name), s.context(7)));
  }
  RenderedReport r1 = render_report(entries);
  RenderedReport r2 = render_report(entries);
  CHECK(r1.csv == r2.csv);
  CHECK(r1.markdown == r2.markdown);
}
