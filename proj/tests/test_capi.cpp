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

// Exercises the shared-library surface exactly as an external C client
// would: engine handles, status codes and file-driven commands.

#include <cstring>
#include <filesystem>
#include <string>

#include "datagen.hpp"
#include "doctest.h"
#include "gateway.hpp"
#include "json.hpp"
#include "polypot.h"
#include "support.hpp"
#include "util.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct EngineHandle {
  polypot_engine* engine = nullptr;
  ~EngineHandle() { polypot_engine_destroy(engine); }
};

std::string engine_config_json(const fs::path& workspace,
                               const fs::path& fixtures = {}) {
  json config = {
      {"assets_dir", polypot::testing::assets_dir().string()},
      {"workspace_root", workspace.string()},
      {"languages", json::array({"python"})},
      {"seed", 0},
      {"parallelism", 2},
  };
  if (!fixtures.empty()) {
    config["backend"] = {{"kind", "mock"}, {"fixtures_dir", fixtures.string()}};
  }
  return config.dump();
}

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::string(polypot_version()) != "");
  CHECK(std::string(polypot_status_name(POLYPOT_OK)) == "ok");
  CHECK(std::string(polypot_status_name(POLYPOT_ERR_USAGE)) == "usage_error");
  CHECK(std::string(polypot_status_name(POLYPOT_ERR_TOOLCHAIN)) ==
        "toolchain_error");
}

TEST_CASE("default config is valid JSON and sized correctly") {
  size_t needed = polypot_default_config(nullptr, 0);
  REQUIRE(needed > 2);
  std::string buffer(needed, 'x');
  size_t again = polypot_default_config(buffer.data(), buffer.size());
  CHECK(again == needed);
  buffer.resize(needed - 1);
  json parsed = json::parse(buffer);
  CHECK(parsed.contains("tolerance"));
  CHECK(parsed.contains("backend"));
}

TEST_CASE("engine creation validates configuration") {
  polypot_engine* engine = nullptr;
  CHECK(polypot_engine_create("{not json", &engine) == POLYPOT_ERR_CONFIG);
  CHECK(engine == nullptr);

  json bad = {{"registry_path", "/nonexistent/toolchains.json"}};
  CHECK(polypot_engine_create(bad.dump().c_str(), &engine) == POLYPOT_ERR_IO);

  CHECK(polypot_engine_create("{}", nullptr) == POLYPOT_ERR_USAGE);
}

TEST_CASE("exec and eval through the C surface") {
  polypot::TempDir workspace(polypot::testing::test_workspace(), "capi");
  EngineHandle handle;
  REQUIRE(polypot_engine_create(engine_config_json(workspace.path()).c_str(),
                                &handle.engine) == POLYPOT_OK);

  fs::path solutions = polypot::testing::fixtures_dir() / "smoke_solutions.jsonl";
  fs::path corpus = polypot::testing::fixtures_dir() / "smoke_corpus.jsonl";
  fs::path outcomes = workspace.path() / "outcomes.jsonl";

  REQUIRE(polypot_run_exec(handle.engine, solutions.string().c_str(),
                           outcomes.string().c_str()) == POLYPOT_OK);
  json summary = json::parse(polypot_engine_last_summary(handle.engine));
  CHECK(summary.at("solutions") == 3);
  CHECK(summary.at("ok") == 3);
  REQUIRE(fs::exists(outcomes));

  fs::path eval_dir = workspace.path() / "eval";
  REQUIRE(polypot_run_eval(handle.engine,
                           "self-consistency,random,upper-bound",
                           corpus.string().c_str(),
                           solutions.string().c_str(),
                           eval_dir.string().c_str(), nullptr) == POLYPOT_OK);
  CHECK(fs::exists(eval_dir / "report.csv"));
  CHECK(fs::exists(eval_dir / "report.md"));
  REQUIRE(fs::exists(eval_dir / "decisions.jsonl"));
  // 3 strategies x 3 questions, each row tagged with its strategy.
  std::string decision_text =
      polypot::read_text_file(eval_dir / "decisions.jsonl");
  CHECK(polypot::split_lines(decision_text).size() == 9);

  json eval_summary = json::parse(polypot_engine_last_summary(handle.engine));
  // Every smoke program answers its gold, so all strategies are perfect.
  for (const auto& entry : eval_summary.at("strategies")) {
    CHECK(entry.at("accuracy").get<double>() == doctest::Approx(1.0));
  }
}

TEST_CASE("route rejects unknown strategies with a usage error") {
  polypot::TempDir workspace(polypot::testing::test_workspace(), "capi");
  EngineHandle handle;
  REQUIRE(polypot_engine_create(engine_config_json(workspace.path()).c_str(),
                                &handle.engine) == POLYPOT_OK);
  fs::path corpus = polypot::testing::fixtures_dir() / "smoke_corpus.jsonl";
  fs::path solutions = polypot::testing::fixtures_dir() / "smoke_solutions.jsonl";
  fs::path out = workspace.path() / "decisions.jsonl";
  polypot_status status = polypot_run_route(
      handle.engine, "clairvoyant", corpus.string().c_str(),
      solutions.string().c_str(), out.string().c_str(), nullptr);
  CHECK(status == POLYPOT_ERR_USAGE);
  CHECK(std::string(polypot_engine_last_error(handle.engine))
            .find("clairvoyant") != std::string::npos);
}

TEST_CASE("missing input files surface as io errors") {
  polypot::TempDir workspace(polypot::testing::test_workspace(), "capi");
  EngineHandle handle;
  REQUIRE(polypot_engine_create(engine_config_json(workspace.path()).c_str(),
                                &handle.engine) == POLYPOT_OK);
  fs::path out = workspace.path() / "outcomes.jsonl";
  CHECK(polypot_run_exec(handle.engine, "/nonexistent/solutions.jsonl",
                         out.string().c_str()) == POLYPOT_ERR_IO);
  CHECK(polypot_run_exec(handle.engine, nullptr, out.string().c_str()) ==
        POLYPOT_ERR_USAGE);
}

TEST_CASE("matrix exports through the C surface") {
  polypot::TempDir workspace(polypot::testing::test_workspace(), "capi");
  EngineHandle handle;
  REQUIRE(polypot_engine_create(engine_config_json(workspace.path()).c_str(),
                                &handle.engine) == POLYPOT_OK);

  json matrix = {
      {"languages", json::array({"python"})},
      {"rows",
       json::array(
           {{{"question_id", "m1"},
             {"question", "how many?"},
             {"dataset", "unit"},
             {"cells", {{"python", {{"correct", true}, {"source", "ok"}}}}}},
            {{"question_id", "m2"},
             {"question", "how much?"},
             {"dataset", "unit"},
             {"cells",
              {{"python", {{"correct", false}, {"source", "bad"}}}}}}})}};
  fs::path matrix_path = workspace.path() / "matrix.json";
  polypot::write_text_file(matrix_path, matrix.dump());

  fs::path prefs = workspace.path() / "prefs.jsonl";
  REQUIRE(polypot_run_export_prefs(handle.engine, matrix_path.string().c_str(),
                                   prefs.string().c_str()) == POLYPOT_OK);
  // Single-language matrix: no (correct, incorrect) cross pairs exist.
  json prefs_summary = json::parse(polypot_engine_last_summary(handle.engine));
  CHECK(prefs_summary.at("pairs") == 0);

  fs::path scorer_dir = workspace.path() / "scorer";
  REQUIRE(polypot_run_export_scorer_data(handle.engine,
                                         matrix_path.string().c_str(), "prior",
                                         scorer_dir.string().c_str()) ==
          POLYPOT_OK);
  CHECK(fs::exists(scorer_dir / "scorer_prior_python.jsonl"));

  fs::path csv = workspace.path() / "stats.csv";
  fs::path md = workspace.path() / "stats.md";
  REQUIRE(polypot_run_stats(handle.engine, matrix_path.string().c_str(),
                            nullptr, csv.string().c_str(),
                            md.string().c_str()) == POLYPOT_OK);
  CHECK(polypot::read_text_file(csv).find("unit,2,1") != std::string::npos);
}

TEST_CASE("datagen pipeline through the C surface") {
  polypot::TempDir workspace(polypot::testing::test_workspace(), "capi");
  fs::path fixtures = workspace.path() / "fixtures";
  fs::create_directories(fixtures);

  // Two questions, two languages. Mock fixtures cover both python
  // candidates (one per question), a wrong-answer cpp candidate for the
  // first question, and nothing for the second cpp candidate.
  std::vector<std::pair<std::string, std::string>> corpus_rows = {
      {"d1", "A box holds 3 bags of 4 pears. How many pears?"},
      {"d2", "A rope of 20 m is cut into 5 m pieces. How many pieces?"},
  };
  std::vector<json> corpus_lines = {
      {{"id", "d1"}, {"question", corpus_rows[0].second}, {"answer", "12"}},
      {{"id", "d2"}, {"question", corpus_rows[1].second}, {"answer", "4"}},
  };
  fs::path corpus = workspace.path() / "corpus.jsonl";
  {
    std::string text;
    for (const json& line : corpus_lines) text += line.dump() + "\n";
    polypot::write_text_file(corpus, text);
  }

  auto plant = [&](const polypot::ObjectLanguage& lang,
                   const std::string& question, const std::string& program) {
    std::string prompt = polypot::build_generation_prompt(
        lang, polypot::ExemplarSet::GSM8K, question,
        polypot::testing::assets_dir() / "fewshot");
    polypot::write_text_file(
        fixtures / (polypot::prompt_fixture_key(prompt) + ".txt"), program);
  };
  plant({"python", "Python"}, corpus_rows[0].second,
        "def solution():\n    return 3 * 4\n");
  plant({"python", "Python"}, corpus_rows[1].second,
        "def solution():\n    return 20 / 5\n");
  plant({"cpp", "C++"}, corpus_rows[0].second,
        "float solution() { return 13; }\n");  // wrong on purpose

  json config = {
      {"assets_dir", polypot::testing::assets_dir().string()},
      {"workspace_root", workspace.path().string()},
      {"languages", json::array({"python", "cpp"})},
      {"parallelism", 2},
      {"backend", {{"kind", "mock"}, {"fixtures_dir", fixtures.string()}}},
  };
  EngineHandle handle;
  REQUIRE(polypot_engine_create(config.dump().c_str(), &handle.engine) ==
          POLYPOT_OK);

  fs::path out_dir = workspace.path() / "datagen";
  REQUIRE(polypot_run_datagen(handle.engine, corpus.string().c_str(),
                              out_dir.string().c_str(), nullptr) == POLYPOT_OK);
  json summary = json::parse(polypot_engine_last_summary(handle.engine));
  CHECK(summary.at("questions") == 2);
  CHECK(summary.at("generated") == 3);
  CHECK(summary.at("kept") == 2);       // both python programs
  CHECK(summary.at("rejected") == 1);   // wrong cpp program
  CHECK(summary.at("generation_failures") == 1);  // missing cpp fixture

  CHECK(fs::exists(out_dir / "sft.jsonl"));
  CHECK(fs::exists(out_dir / "rejected.jsonl"));
  CHECK(fs::exists(out_dir / "failures.jsonl"));
  CHECK(fs::exists(out_dir / "stats.csv"));
  fs::path matrix_path = out_dir / "matrix.json";
  REQUIRE(fs::exists(matrix_path));

  // d1 has a correct python and an incorrect cpp program: one pair.
  fs::path prefs = workspace.path() / "prefs.jsonl";
  REQUIRE(polypot_run_export_prefs(handle.engine, matrix_path.string().c_str(),
                                   prefs.string().c_str()) == POLYPOT_OK);
  CHECK(json::parse(polypot_engine_last_summary(handle.engine)).at("pairs") ==
        1);

  // Case-based routing against the produced matrix; mock embeddings are
  // deterministic hash-basis vectors, so no fixtures are needed.
  fs::path decisions = workspace.path() / "case-decisions.jsonl";
  json options = {{"train_matrix", matrix_path.string()}, {"threshold", 1}};
  fs::path solutions = polypot::testing::fixtures_dir() / "smoke_solutions.jsonl";
  polypot_status status = polypot_run_route(
      handle.engine, "case-based", corpus.string().c_str(),
      solutions.string().c_str(), decisions.string().c_str(),
      options.dump().c_str());
  REQUIRE(status == POLYPOT_OK);
  REQUIRE(fs::exists(decisions));
  std::string decision_text = polypot::read_text_file(decisions);
  CHECK(polypot::split_lines(decision_text).size() == 2);

  // Without a solutions file, candidates come from the backend. A prior
  // strategy generates only its selected language.
  fs::path lazy_decisions = workspace.path() / "lazy-decisions.jsonl";
  REQUIRE(polypot_run_route(handle.engine, "single:python",
                            corpus.string().c_str(), nullptr,
                            lazy_decisions.string().c_str(),
                            nullptr) == POLYPOT_OK);
  json lazy_summary = json::parse(polypot_engine_last_summary(handle.engine));
  CHECK(lazy_summary.at("generated") == 2);  // python only, one per question
  CHECK(lazy_summary.at("generation_failures") == 0);

  // A posterior strategy generates every active language.
  fs::path lazy_eval = workspace.path() / "lazy-eval";
  REQUIRE(polypot_run_eval(handle.engine, "upper-bound,single:python",
                           corpus.string().c_str(), nullptr,
                           lazy_eval.string().c_str(), nullptr) == POLYPOT_OK);
  json eval_summary = json::parse(polypot_engine_last_summary(handle.engine));
  CHECK(eval_summary.at("generated") == 3);  // the d2 cpp fixture is absent
  CHECK(eval_summary.at("generation_failures") == 1);
  for (const auto& entry : eval_summary.at("strategies")) {
    CHECK(entry.at("accuracy").get<double>() == doctest::Approx(1.0));
  }
}

TEST_CASE("parse_answer helper") {
  char buffer[64];
  int is_number = -1;
  REQUIRE(polypot_parse_answer("72.0\n", buffer, sizeof(buffer), &is_number) ==
          POLYPOT_OK);
  CHECK(std::string(buffer) == "72");
  CHECK(is_number == 1);

  REQUIRE(polypot_parse_answer("2*sqrt(5)", buffer, sizeof(buffer),
                               &is_number) == POLYPOT_OK);
  CHECK(std::string(buffer) == "2*sqrt(5)");
  CHECK(is_number == 0);

  CHECK(polypot_parse_answer("", buffer, sizeof(buffer), nullptr) ==
        POLYPOT_ERR_PARSE);
  char tiny[2];
  CHECK(polypot_parse_answer("123456", tiny, sizeof(tiny), nullptr) ==
        POLYPOT_ERR_USAGE);
  CHECK(polypot_parse_answer(nullptr, buffer, sizeof(buffer), nullptr) ==
        POLYPOT_ERR_USAGE);
}

TEST_CASE("answers_equal helper") {
  CHECK(polypot_answers_equal("72.0", "72", 1e-4, 1e-4) == 1);
  CHECK(polypot_answers_equal("3/4", "0.75", 1e-4, 1e-4) == 1);
  CHECK(polypot_answers_equal("41", "42", 1e-4, 1e-4) == 0);
  CHECK(polypot_answers_equal("x", "y", 1e-4, 1e-4) == 0);
  CHECK(polypot_answers_equal("", "1", 1e-4, 1e-4) == -1);
  CHECK(polypot_answers_equal("1", "1", -1.0, 1e-4) == -1);
}
