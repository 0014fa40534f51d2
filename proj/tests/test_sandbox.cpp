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

#include <algorithm>
#include <map>

#include "doctest.h"
#include "errors.hpp"
#include "sandbox.hpp"
#include "support.hpp"

using namespace polypot;
using namespace polypot::testing;

namespace {

const Tolerance kTol{1e-4, 1e-4};

ToolchainRegistry python_registry(double timeout_s = 10.0) {
  ToolchainRegistry base = load_registry();
  ToolchainSpec spec = base.at("python");
  spec.timeout_s = timeout_s;
  ToolchainRegistry out;
  out.add(spec);
  return out;
}

ProgramSolution python_program(std::string id, std::string body) {
  return {std::move(id), "python", std::move(body)};
}

}  // namespace

TEST_CASE("wrap_program embeds the solution and prelude") {
  ToolchainRegistry registry = load_registry();
  ProgramSolution solution = python_program("q1", "def solution():\n    return 72\n");
  std::string unit = wrap_program(solution, registry.at("python"));
  CHECK(unit.find("def solution():") != std::string::npos);
  CHECK(unit.find("import sympy as sp") != std::string::npos);
  CHECK(unit.find("{{SOLUTION}}") == std::string::npos);
  CHECK(unit.find("{{PRECISION}}") == std::string::npos);
}

TEST_CASE("wrap_program validates inputs") {
  ToolchainRegistry registry = load_registry();
  const ToolchainSpec& python = registry.at("python");

  ProgramSolution wrong_lang{"q1", "cpp", "def solution(): return 1"};
  CHECK_THROWS_AS(wrap_program(wrong_lang, python), InvalidInput);

  ProgramSolution empty{"q1", "python", "   "};
  CHECK_THROWS_AS(wrap_program(empty, python), InvalidInput);

  ProgramSolution no_solution{"q1", "python", "def other(): return 1"};
  CHECK_THROWS_AS(wrap_program(no_solution, python), InvalidInput);

  ToolchainSpec broken = python;
  broken.wrapper_template = "no placeholder here";
  ProgramSolution ok{"q1", "python", "def solution(): return 1"};
  CHECK_THROWS_AS(wrap_program(ok, broken), TemplateError);
}

TEST_CASE("execute_one runs a constant python program") {
  ToolchainRegistry registry = python_registry();
  SandboxExecutor executor(registry, test_workspace());
  RunOutcome outcome =
      executor.execute_one(python_program("q1", "def solution(): return 72\n"));
  REQUIRE(outcome.status == RunStatus::Ok);
  REQUIRE(outcome.answer.has_value());
  CHECK(outcome.stdout_text == "72\n");
  CHECK(outcome.answer->number_value() == doctest::Approx(72.0));
}

TEST_CASE("float results keep python's x.0 form") {
  // 48 + 48/2 goes through float division, so the unit prints 72.0.
  ToolchainRegistry registry = python_registry();
  SandboxExecutor executor(registry, test_workspace());
  std::string natalia = split_programs(read_text_file(
      assets_dir() / "fewshot" / "gsm8k_python.txt"))[0];
  RunOutcome outcome = executor.execute_one(python_program("natalia", natalia));
  REQUIRE(outcome.status == RunStatus::Ok);
  CHECK(outcome.stdout_text == "72.0\n");
  CHECK(outcome.answer->number_value() == doctest::Approx(72.0));
}

TEST_CASE("cpp float results print without trailing .0") {
  ToolchainRegistry registry = load_registry();
  if (!registry.available("cpp")) {
    MESSAGE("skipping: no C++ toolchain on this machine");
    return;
  }
  SandboxExecutor executor(registry, test_workspace());
  RunOutcome outcome = executor.execute_one(
      {"q1", "cpp", "float solution(){return 41;}\n"});
  REQUIRE(outcome.status == RunStatus::Ok);
  CHECK(outcome.stdout_text == "41\n");
  CHECK(outcome.answer->number_value() == doctest::Approx(41.0));
}

TEST_CASE("status partition: answer present iff Ok") {
  ToolchainRegistry registry = python_registry(1.0);
  SandboxExecutor executor(registry, test_workspace());

  SUBCASE("runtime error") {
    RunOutcome o = executor.execute_one(
        python_program("q1", "def solution(): return 1 / 0\n"));
    CHECK(o.status == RunStatus::RuntimeError);
    CHECK_FALSE(o.answer.has_value());
    CHECK(o.detail.find("ZeroDivisionError") != std::string::npos);
  }
  SUBCASE("timeout") {
    RunOutcome o = executor.execute_one(python_program(
        "q1", "def solution():\n    while True:\n        pass\n"));
    CHECK(o.status == RunStatus::Timeout);
    CHECK_FALSE(o.answer.has_value());
    // Enforced within timeout + 1s.
    CHECK(o.wall_time_s < 2.0);
  }
  SUBCASE("empty stdout parses to ParseError") {
    RunOutcome o = executor.execute_one(
        python_program("q1", "def solution(): return ''\n"));
    CHECK(o.status == RunStatus::ParseError);
    CHECK_FALSE(o.answer.has_value());
  }
}

TEST_CASE("compile errors are distinct from runtime errors") {
  ToolchainRegistry registry = load_registry();
  if (!registry.available("cpp")) {
    MESSAGE("skipping: no C++ toolchain on this machine");
    return;
  }
  SandboxExecutor executor(registry, test_workspace());
  RunOutcome o = executor.execute_one(
      {"q1", "cpp", "float solution( { return oops; }\n"});
  CHECK(o.status == RunStatus::CompileError);
  CHECK_FALSE(o.detail.empty());
}

TEST_CASE("missing toolchain binary is its own failure mode") {
  ToolchainRegistry registry;
  ToolchainSpec spec = load_registry().at("python");
  spec.run_command = {"polypot-no-such-interpreter", "{{FILE}}"};
  registry.add(spec);
  SandboxExecutor executor(registry, test_workspace());
  ProgramSolution solution = python_program("q1", "def solution(): return 1\n");
  CHECK_THROWS_AS(executor.execute_one(solution), ToolchainUnavailable);

  std::vector<ProgramSolution> batch{solution};
  std::vector<RunOutcome> outcomes = executor.execute_batch(batch, 2);
  REQUIRE(outcomes.size() == 1);
  CHECK(outcomes[0].status == RunStatus::ToolchainMissing);
}

TEST_CASE("non-numeric stdout becomes a text answer") {
  ToolchainRegistry registry = python_registry();
  SandboxExecutor executor(registry, test_workspace());
  RunOutcome o = executor.execute_one(
      python_program("q1", "def solution():\n    return 2 * sp.sqrt(5)\n"));
  REQUIRE(o.status == RunStatus::Ok);
  CHECK_FALSE(o.answer->is_number());
  CHECK(o.answer->text_value() == "2*sqrt(5)");
}

TEST_CASE("sympy rationals survive the pipeline as numbers") {
  ToolchainRegistry registry = python_registry();
  SandboxExecutor executor(registry, test_workspace());
  // Sum of the roots of (2x+3)(x-4)+(2x+3)(x-6): -3/2 and 5, so 7/2.
  std::string program = split_programs(read_text_file(
      assets_dir() / "fewshot" / "math_python.txt"))[1];
  RunOutcome o = executor.execute_one(python_program("roots", program));
  REQUIRE(o.status == RunStatus::Ok);
  CHECK(o.answer->is_number());
  CHECK(o.answer->number_value() == doctest::Approx(3.5));
}

TEST_CASE("math python exemplars produce their derived answers") {
  // f(6)=27; roots sum 7/2; triangle area 17.5; one nonnegative solution.
  ToolchainRegistry registry = python_registry();
  SandboxExecutor executor(registry, test_workspace());
  std::vector<std::string> programs = split_programs(
      read_text_file(assets_dir() / "fewshot" / "math_python.txt"));
  REQUIRE(programs.size() == 4);
  const double expected[] = {27.0, 3.5, 17.5, 1.0};
  std::vector<ProgramSolution> batch;
  for (std::size_t i = 0; i < programs.size(); ++i) {
    batch.push_back(python_program("math-" + std::to_string(i), programs[i]));
  }
  std::vector<RunOutcome> outcomes = executor.execute_batch(batch, 4);
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    REQUIRE(outcomes[i].status == RunStatus::Ok);
    CHECK(outcomes[i].answer->number_value() == doctest::Approx(expected[i]));
  }
}

TEST_CASE("fixture programs agree across available languages") {
  ToolchainRegistry registry = load_registry();
  std::vector<std::string> langs = available_languages(registry);
  REQUIRE(langs.size() >= 1);
  SandboxExecutor executor(registry, test_workspace());
  std::vector<ProgramSolution> solutions = fixture_solutions(langs);
  std::vector<RunOutcome> outcomes = executor.execute_batch(solutions, 4);

  std::map<std::string, double> gold;
  for (const auto& q : fixture_questions()) gold[q.id] = q.gold;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    INFO("question ", solutions[i].question_id, " language ",
         solutions[i].language);
    REQUIRE(outcomes[i].status == RunStatus::Ok);
    CHECK(answers_equal(*outcomes[i].answer,
                        AnswerValue::number(gold[solutions[i].question_id]),
                        kTol));
  }
}

TEST_CASE("execute_batch is input-order aligned and parallelism independent") {
  // Generous timeout: interpreter startup under 8-way contention must
  // never flip a status.
  ToolchainRegistry registry = python_registry(30.0);
  SandboxExecutor executor(registry, test_workspace());
  std::vector<ProgramSolution> batch;
  for (int i = 0; i < 6; ++i) {
    batch.push_back(python_program(
        "q" + std::to_string(i),
        "def solution(): return " + std::to_string(i * 7) + "\n"));
  }
  batch.push_back(python_program("q-bad", "def solution(): return 1/0\n"));

  std::vector<RunOutcome> seq = executor.execute_batch(batch, 1);
  std::vector<RunOutcome> par = executor.execute_batch(batch, 8);
  REQUIRE(seq.size() == batch.size());
  REQUIRE(par.size() == batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    CHECK(seq[i].question_id == batch[i].question_id);
    CHECK(seq[i].status == par[i].status);
    if (seq[i].answer) {
      REQUIRE(par[i].answer);
      CHECK(seq[i].answer->canonical_key() == par[i].answer->canonical_key());
    }
  }
}

TEST_CASE("run directories are removed after execution") {
  ToolchainRegistry registry = python_registry();
  TempDir workspace(test_workspace(), "cleanup");
  SandboxExecutor executor(registry, workspace.path());
  executor.execute_one(python_program("q1", "def solution(): return 1\n"));
  executor.execute_one(python_program("q2", "def solution(): return 1/0\n"));
  std::size_t leftovers = 0;
  for ([[maybe_unused]] const auto& entry :
       std::filesystem::directory_iterator(workspace.path())) {
    ++leftovers;
  }
  CHECK(leftovers == 0);
}

TEST_CASE("execute_batch on an empty list") {
  ToolchainRegistry registry = python_registry();
  SandboxExecutor executor(registry, test_workspace());
  CHECK(executor.execute_batch(std::vector<ProgramSolution>{}, 4).empty());
  CHECK_THROWS_AS(executor.execute_batch(std::vector<ProgramSolution>{}, 0),
                  InvalidInput);
}

TEST_CASE("run outcome json round trip") {
  RunOutcome o = ok_outcome("q1", "python", 72.0);
  RunOutcome back = RunOutcome::from_json(o.to_json());
  CHECK(back.question_id == o.question_id);
  CHECK(back.status == o.status);
  CHECK(back.answer->canonical_key() == o.answer->canonical_key());

  RunOutcome t = failed_outcome("q2", "cpp", RunStatus::Timeout);
  CHECK(RunOutcome::from_json(t.to_json()).status == RunStatus::Timeout);
}

TEST_CASE("registry config validation") {
  ToolchainRegistry registry = load_registry();
  CHECK(registry.language_ids() ==
        std::vector<std::string>{"python", "cpp", "java", "matlab"});
  CHECK(registry.display_name("cpp") == "C++");
  CHECK(registry.language_index("java") == 2);
  CHECK(registry.find("fortran") == nullptr);
  CHECK_THROWS_AS(registry.at("fortran"), ToolchainUnavailable);

  ToolchainRegistry subset = registry.subset({"python", "cpp"});
  CHECK(subset.language_ids() == std::vector<std::string>{"python", "cpp"});
  CHECK_THROWS_AS(registry.subset({"python", "fortran"}), UsageError);

  ToolchainSpec dup = registry.at("python");
  ToolchainRegistry fresh;
  fresh.add(dup);
  CHECK_THROWS_AS(fresh.add(dup), ConfigError);

  ToolchainSpec bad_id = dup;
  bad_id.language.id = "Python";
  CHECK_THROWS_AS(fresh.add(bad_id), ConfigError);

  ToolchainSpec bad_timeout = dup;
  bad_timeout.language.id = "p2";
  bad_timeout.timeout_s = 0.0;
  CHECK_THROWS_AS(fresh.add(bad_timeout), ConfigError);
}
