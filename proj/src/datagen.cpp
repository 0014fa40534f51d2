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

#include "datagen.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "errors.hpp"
#include "util.hpp"

namespace fs = std::filesystem;

namespace polypot {

namespace {

using nlohmann::json;

std::string exemplar_label(ExemplarSet set) {
  return set == ExemplarSet::GSM8K ? "GSM8K" : "MATH";
}

bool line_is_blank(const std::string& line) { return trim(line).empty(); }

bool looks_like_code_start(const std::string& line) {
  static const char* prefixes[] = {
      "def ",    "import ",  "from ",   "function ", "float ",
      "double ", "int ",     "long ",   "public ",   "static ",
      "#include", "using ",  "class ",  "//",        "#",
  };
  std::string t = trim(line);
  for (const char* p : prefixes) {
    if (t.rfind(p, 0) == 0) return true;
  }
  return false;
}

std::optional<std::string> first_fenced_block(std::string_view text) {
  std::vector<std::string> lines = split_lines(text);
  std::optional<std::size_t> open;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).rfind("```", 0) != 0) continue;
    if (!open) {
      open = i;
      continue;
    }
    std::ostringstream block;
    for (std::size_t k = *open + 1; k < i; ++k) block << lines[k] << "\n";
    return block.str();
  }
  return std::nullopt;
}

std::size_t find_signature_line(const std::vector<std::string>& lines,
                                std::string_view language_id) {
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string t = trim(lines[i]);
    if (t.find("solution") == std::string::npos) continue;
    if (language_id == "python") {
      if (t.rfind("def solution", 0) == 0) return i;
    } else if (language_id == "matlab") {
      if (t.rfind("function", 0) == 0 &&
          t.find("solution") != std::string::npos) {
        return i;
      }
    } else {
      // Brace languages: a declaration-looking line mentioning solution(.
      if (t.find("solution") != std::string::npos &&
          t.find('(') != std::string::npos && t.find(';') == std::string::npos &&
          looks_like_code_start(t)) {
        return i;
      }
    }
  }
  return lines.size();
}

std::string slice_python(const std::vector<std::string>& lines,
                         std::size_t start) {
  std::ostringstream out;
  out << lines[start] << "\n";
  for (std::size_t i = start + 1; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line_is_blank(line) || line[0] == ' ' || line[0] == '\t') {
      out << line << "\n";
      continue;
    }
    break;
  }
  return out.str();
}

std::string slice_braced(const std::vector<std::string>& lines,
                         std::size_t start) {
  std::ostringstream out;
  int depth = 0;
  bool opened = false;
  for (std::size_t i = start; i < lines.size(); ++i) {
    out << lines[i] << "\n";
    for (char c : lines[i]) {
      if (c == '{') {
        ++depth;
        opened = true;
      } else if (c == '}') {
        --depth;
      }
    }
    if (opened && depth <= 0) break;
  }
  return out.str();
}

std::string slice_matlab(const std::vector<std::string>& lines,
                         std::size_t start) {
  std::size_t last_end = start;
  for (std::size_t i = start; i < lines.size(); ++i) {
    if (trim(lines[i]) == "end") last_end = i;
  }
  std::ostringstream out;
  for (std::size_t i = start; i <= last_end; ++i) out << lines[i] << "\n";
  return out.str();
}

}  // namespace

ExemplarSet exemplar_set_from_string(std::string_view name) {
  std::string n = lower_ascii(trim(name));
  if (n == "gsm8k") return ExemplarSet::GSM8K;
  if (n == "math") return ExemplarSet::MATH;
  throw UsageError("unknown exemplar set: " + std::string(name));
}

std::string_view exemplar_prefix(ExemplarSet set) {
  return set == ExemplarSet::GSM8K ? "gsm8k" : "math";
}

std::string build_generation_prompt(const ObjectLanguage& language,
                                    ExemplarSet set, std::string_view question,
                                    const fs::path& fewshot_dir) {
  const std::string prefix(exemplar_prefix(set));
  fs::path questions_path = fewshot_dir / (prefix + "_questions.txt");
  fs::path solutions_path = fewshot_dir / (prefix + "_" + language.id + ".txt");
  std::error_code ec;
  if (!fs::exists(questions_path, ec) || !fs::exists(solutions_path, ec)) {
    throw ExamplesMissing("no few-shot examples for (" + language.id + ", " +
                          exemplar_label(set) + ") under " +
                          fewshot_dir.string());
  }
  std::string questions = trim(read_text_file(questions_path));
  std::string solutions = trim(read_text_file(solutions_path));
  const std::string label = exemplar_label(set);

  std::ostringstream prompt;
  prompt << "Please use " << language.display_name
         << " functions to solve math problems. The function name is "
            "\"solution()\" and return the result. The following are some "
            "cases:\n\n";
  prompt << "Example Questions of " << label << ":\n" << questions << "\n\n";
  prompt << "Example Solutions of " << language.display_name << " in " << label
         << ":\n"
         << solutions << "\n\n";
  prompt << "Question: " << question;
  return prompt.str();
}

std::string extract_solution_source(std::string_view model_output,
                                    std::string_view language_id) {
  std::string text(model_output);
  if (auto fenced = first_fenced_block(text)) {
    text = *fenced;
  }
  std::string trimmed = trim(text);
  if (trimmed.empty()) {
    throw ParseError("model output is empty");
  }
  if (trimmed.find("solution") == std::string::npos) {
    throw ParseError("model output has no solution function");
  }
  std::vector<std::string> lines = split_lines(trimmed);
  // Bare program: keep it whole (helpers and imports may precede the
  // solution function).
  if (!lines.empty() && looks_like_code_start(lines.front())) {
    return trimmed + "\n";
  }
  std::size_t start = find_signature_line(lines, language_id);
  if (start >= lines.size()) {
    throw ParseError("model output has no solution signature for language " +
                     std::string(language_id));
  }
  std::string sliced;
  if (language_id == "python") {
    sliced = slice_python(lines, start);
  } else if (language_id == "matlab") {
    sliced = slice_matlab(lines, start);
  } else {
    sliced = slice_braced(lines, start);
  }
  sliced = trim(sliced);
  if (sliced.empty()) {
    throw ParseError("could not slice a solution function from model output");
  }
  return sliced + "\n";
}

MultiLangGeneration generate_multilang(const QuestionRecord& record,
                                       const std::vector<ObjectLanguage>& languages,
                                       Gateway& gateway, ExemplarSet set,
                                       const fs::path& fewshot_dir,
                                       const GenerationOptions& options) {
  MultiLangGeneration out;
  for (const ObjectLanguage& language : languages) {
    try {
      GenerationRequest request;
      request.prompt =
          build_generation_prompt(language, set, record.question, fewshot_dir);
      request.max_tokens = options.max_tokens;
      request.temperature = options.temperature;
      request.model_id = options.model_id;
      std::string raw = gateway.complete(request);
      ProgramSolution solution;
      solution.question_id = record.id;
      solution.language = language.id;
      solution.source = extract_solution_source(raw, language.id);
      out.solutions.push_back(std::move(solution));
    } catch (const Error& e) {
      out.failures.push_back({record.id, language.id, e.what()});
    }
  }
  return out;
}

FilterResult execute_filter(const std::vector<ProgramSolution>& solutions,
                            const std::vector<QuestionRecord>& records,
                            const SandboxExecutor& executor,
                            const Tolerance& tol, int parallelism) {
  std::map<std::string, const QuestionRecord*> by_id;
  for (const auto& record : records) {
    by_id.emplace(record.id, &record);
  }

  FilterResult result;
  result.matrix = CorrectnessMatrix(executor.registry().language_ids());
  for (const auto& record : records) {
    result.matrix.add_row(record.id, record.question, record.source_dataset,
                          record.category);
  }

  std::vector<ProgramSolution> unique;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& solution : solutions) {
    if (by_id.find(solution.question_id) == by_id.end()) {
      throw UsageError("solution references unknown question " +
                       solution.question_id);
    }
    if (result.matrix.language_index(solution.language) < 0) {
      result.warnings.push_back("skipping solution for unregistered language " +
                                solution.language);
      continue;
    }
    if (!seen.emplace(solution.question_id, solution.language).second) {
      result.warnings.push_back("duplicate solution for (" +
                                solution.question_id + ", " +
                                solution.language + "); keeping the first");
      continue;
    }
    result.matrix.cell(solution.question_id, solution.language).source =
        solution.source;
    unique.push_back(solution);
  }

  std::vector<RunOutcome> outcomes = executor.execute_batch(unique, parallelism);
  std::set<std::string> missing_toolchains;
  for (std::size_t i = 0; i < unique.size(); ++i) {
    const ProgramSolution& solution = unique[i];
    const RunOutcome& outcome = outcomes[i];
    if (outcome.status == RunStatus::ToolchainMissing) {
      missing_toolchains.insert(solution.language);
    }
    bool correct = outcome.ok() &&
                   answers_equal(*outcome.answer,
                                 by_id.at(solution.question_id)->gold, tol);
    result.matrix.cell(solution.question_id, solution.language).correct =
        correct;
    if (correct) result.kept.push_back(solution);
  }
  for (const std::string& language : missing_toolchains) {
    result.warnings.push_back("toolchain for language '" + language +
                              "' unavailable; its programs were marked "
                              "not-correct");
  }
  return result;
}

SftTemplate SftTemplate::load(const fs::path& prompts_dir) {
  SftTemplate tmpl;
  tmpl.instruction = trim(read_text_file(prompts_dir / "sft_instruction.txt"));
  tmpl.input_template = trim(read_text_file(prompts_dir / "sft_input.txt"));
  return tmpl;
}

std::string SftTemplate::render_input(std::string_view language_name,
                                      std::string_view question) const {
  std::string out = replace_all(input_template, "{{LANGUAGE}}", language_name);
  return replace_all(out, "{{QUESTION}}", question);
}

std::vector<json> emit_sft(const std::vector<ProgramSolution>& kept,
                           const std::vector<QuestionRecord>& records,
                           const SftTemplate& tmpl,
                           const ToolchainRegistry& registry) {
  std::map<std::string, const QuestionRecord*> by_id;
  for (const auto& record : records) by_id.emplace(record.id, &record);

  std::vector<const ProgramSolution*> ordered;
  ordered.reserve(kept.size());
  for (const auto& s : kept) ordered.push_back(&s);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [&](const ProgramSolution* a, const ProgramSolution* b) {
                     if (a->question_id != b->question_id) {
                       return a->question_id < b->question_id;
                     }
                     return registry.language_index(a->language) <
                            registry.language_index(b->language);
                   });

  std::vector<json> lines;
  lines.reserve(ordered.size());
  for (const ProgramSolution* s : ordered) {
    auto it = by_id.find(s->question_id);
    if (it == by_id.end()) {
      throw UsageError("kept solution references unknown question " +
                       s->question_id);
    }
    lines.push_back({{"question_id", s->question_id},
                     {"language", s->language},
                     {"instruction", tmpl.instruction},
                     {"input", tmpl.render_input(registry.display_name(s->language),
                                                 it->second->question)},
                     {"output", s->source}});
  }
  return lines;
}

std::vector<ProgramSolution> parse_sft(const std::vector<json>& lines) {
  std::vector<ProgramSolution> out;
  out.reserve(lines.size());
  for (const json& j : lines) {
    out.push_back({j.at("question_id").get<std::string>(),
                   j.at("language").get<std::string>(),
                   j.at("output").get<std::string>()});
  }
  return out;
}

DatasetStats dataset_stats(const CorrectnessMatrix& matrix,
                           const std::map<std::string, std::int64_t>& origin_counts) {
  DatasetStats stats;
  stats.languages = matrix.languages();
  std::vector<std::string> order;
  std::map<std::string, std::size_t> row_of;
  for (const auto& row : matrix.rows()) {
    if (row_of.find(row.dataset) == row_of.end()) {
      row_of[row.dataset] = stats.rows.size();
      DatasetStats::Row r;
      r.dataset = row.dataset;
      r.kept.assign(stats.languages.size(), 0);
      stats.rows.push_back(std::move(r));
    }
    DatasetStats::Row& r = stats.rows[row_of[row.dataset]];
    r.origin += 1;
    for (std::size_t i = 0; i < row.cells.size(); ++i) {
      if (row.cells[i].correct) r.kept[i] += 1;
    }
  }
  for (auto& r : stats.rows) {
    auto it = origin_counts.find(r.dataset);
    if (it != origin_counts.end()) r.origin = it->second;
  }
  return stats;
}

std::string DatasetStats::to_csv() const {
  std::ostringstream out;
  out << "dataset,origin";
  for (const auto& lang : languages) out << "," << lang;
  out << "\n";
  for (const auto& row : rows) {
    out << row.dataset << "," << row.origin;
    for (std::int64_t n : row.kept) out << "," << n;
    out << "\n";
  }
  return out.str();
}

std::string DatasetStats::to_markdown(const ToolchainRegistry& registry) const {
  std::ostringstream out;
  out << "| Dataset | Origin |";
  for (const auto& lang : languages) {
    out << " " << registry.display_name(lang) << " |";
  }
  out << "\n|---|---|";
  for (std::size_t i = 0; i < languages.size(); ++i) out << "---|";
  out << "\n";
  for (const auto& row : rows) {
    out << "| " << row.dataset << " | " << row.origin << " |";
    for (std::int64_t n : row.kept) out << " " << n << " |";
    out << "\n";
  }
  return out.str();
}

}  // namespace polypot
