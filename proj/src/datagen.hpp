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

#ifndef POLYPOT_DATAGEN_HPP
#define POLYPOT_DATAGEN_HPP

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gateway.hpp"
#include "matrix.hpp"
#include "records.hpp"
#include "sandbox.hpp"

namespace polypot {

/// Which few-shot exemplar set to prepend; each set has its own question
/// and per-language solution files.
enum class ExemplarSet { GSM8K, MATH };

ExemplarSet exemplar_set_from_string(std::string_view name);
std::string_view exemplar_prefix(ExemplarSet set);

/// Task line + exemplar questions + per-language exemplar solutions +
/// target question. Throws ExamplesMissing when the (language, set) files
/// are absent.
std::string build_generation_prompt(const ObjectLanguage& language,
                                    ExemplarSet set, std::string_view question,
                                    const std::filesystem::path& fewshot_dir);

/// Pull the program out of raw model output: first fenced code block when
/// fenced, bare output when it already starts like code, otherwise the
/// region starting at the solution signature. Throws ParseError when no
/// solution function is found.
std::string extract_solution_source(std::string_view model_output,
                                    std::string_view language_id);

struct GenerationFailure {
  std::string question_id;
  std::string language;
  std::string message;
};

struct GenerationOptions {
  int max_tokens = 1024;
  double temperature = 0.7;
  std::string model_id;
};

struct MultiLangGeneration {
  std::vector<ProgramSolution> solutions;
  std::vector<GenerationFailure> failures;
};

/// One candidate per requested language; per-language failures are
/// recorded, not fatal.
MultiLangGeneration generate_multilang(const QuestionRecord& record,
                                       const std::vector<ObjectLanguage>& languages,
                                       Gateway& gateway, ExemplarSet set,
                                       const std::filesystem::path& fewshot_dir,
                                       const GenerationOptions& options);

struct FilterResult {
  std::vector<ProgramSolution> kept;
  CorrectnessMatrix matrix;
  std::vector<std::string> warnings;
};

/// Execute-and-filter: keep a program iff it runs Ok and its answer
/// matches the gold label. The matrix records a boolean (and the source)
/// for every (question, language) pair, dropped programs included.
FilterResult execute_filter(const std::vector<ProgramSolution>& solutions,
                            const std::vector<QuestionRecord>& records,
                            const SandboxExecutor& executor,
                            const Tolerance& tol, int parallelism);

struct SftTemplate {
  std::string instruction;
  std::string input_template;  // {{LANGUAGE}} and {{QUESTION}} placeholders

  static SftTemplate load(const std::filesystem::path& prompts_dir);
  std::string render_input(std::string_view language_name,
                           std::string_view question) const;
};

/// One JSONL object per kept solution, ordered by (question_id, registry
/// language order).
std::vector<nlohmann::json> emit_sft(const std::vector<ProgramSolution>& kept,
                                     const std::vector<QuestionRecord>& records,
                                     const SftTemplate& tmpl,
                                     const ToolchainRegistry& registry);

/// Inverse of emit_sft for round-trips: JSONL lines back to solutions.
std::vector<ProgramSolution> parse_sft(const std::vector<nlohmann::json>& lines);

struct DatasetStats {
  struct Row {
    std::string dataset;
    std::int64_t origin = 0;
    std::vector<std::int64_t> kept;  // aligned with languages
  };
  std::vector<std::string> languages;
  std::vector<Row> rows;

  std::string to_csv() const;
  std::string to_markdown(const ToolchainRegistry& registry) const;
};

/// Per-dataset, per-language kept counts. origin_counts overrides the row
/// count when the corpus was larger than the generated matrix.
DatasetStats dataset_stats(const CorrectnessMatrix& matrix,
                           const std::map<std::string, std::int64_t>& origin_counts);

}  // namespace polypot

#endif  // POLYPOT_DATAGEN_HPP
