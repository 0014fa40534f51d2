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

#ifndef POLYPOT_TESTS_SUPPORT_HPP
#define POLYPOT_TESTS_SUPPORT_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "answer.hpp"
#include "records.hpp"
#include "sandbox.hpp"
#include "toolchain.hpp"
#include "util.hpp"

namespace polypot::testing {

inline std::filesystem::path assets_dir() {
  return std::filesystem::path(POLYPOT_ASSETS_DIR);
}

inline std::filesystem::path fixtures_dir() {
  return std::filesystem::path(POLYPOT_FIXTURES_DIR);
}

inline std::filesystem::path test_workspace() {
  return std::filesystem::temp_directory_path() / "polypot-tests";
}

inline ToolchainRegistry load_registry() {
  return ToolchainRegistry::load(assets_dir() / "toolchains.json");
}

/// Split an exemplar file into its individual programs. A new program
/// starts after a blank line when the next line looks like a top-level
/// definition (so blank lines inside function bodies do not split).
inline std::vector<std::string> split_programs(const std::string& text) {
  static const char* starts[] = {"def ",      "import ", "from ",  "function ",
                                 "float ",    "double ", "int ",   "long ",
                                 "public ",   "static "};
  auto is_start = [&](const std::string& line) {
    for (const char* s : starts) {
      if (line.rfind(s, 0) == 0) return true;
    }
    return false;
  };
  std::vector<std::string> programs;
  std::string current;
  bool pending_break = false;
  for (const std::string& line : split_lines(text)) {
    if (trim(line).empty()) {
      pending_break = true;
      current += "\n";
      continue;
    }
    if (pending_break && is_start(line) && !trim(current).empty()) {
      programs.push_back(trim(current) + "\n");
      current.clear();
    }
    pending_break = false;
    current += line + "\n";
  }
  if (!trim(current).empty()) programs.push_back(trim(current) + "\n");
  return programs;
}

struct FixtureQuestion {
  std::string id;
  double gold;
  std::string category;
};

/// The four fixture questions and their arithmetic golds:
/// 48 + 48/2 = 72; 381 - 149 - 20*7 = 92; 12 * 50/60 = 10;
/// 200 - (30+46+38+11+18+16) = 41.
inline const std::vector<FixtureQuestion>& fixture_questions() {
  static const std::vector<FixtureQuestion> questions = {
      {"natalia-clips", 72.0, "basic-arithmetic"},
      {"elliot-pages", 92.0, "schedules"},
      {"weng-babysitting", 10.0, "rates"},
      {"alexis-shoes", 41.0, "basic-arithmetic"},
  };
  return questions;
}

/// The 4x4 fixture programs, parsed from the few-shot exemplar files.
inline std::vector<ProgramSolution> fixture_solutions(
    const std::vector<std::string>& languages) {
  std::vector<ProgramSolution> solutions;
  for (const std::string& language : languages) {
    std::string text =
        read_text_file(assets_dir() / "fewshot" / ("gsm8k_" + language + ".txt"));
    std::vector<std::string> programs = split_programs(text);
    if (programs.size() != fixture_questions().size()) {
      throw std::runtime_error("expected 4 fixture programs for " + language +
                               ", got " + std::to_string(programs.size()));
    }
    for (std::size_t i = 0; i < programs.size(); ++i) {
      solutions.push_back(
          {fixture_questions()[i].id, language, programs[i]});
    }
  }
  return solutions;
}

inline std::vector<QuestionRecord> fixture_records() {
  std::vector<QuestionRecord> records;
  std::string questions_text =
      read_text_file(assets_dir() / "fewshot" / "gsm8k_questions.txt");
  std::vector<std::string> lines;
  for (const std::string& line : split_lines(questions_text)) {
    if (!trim(line).empty()) lines.push_back(line);
  }
  for (std::size_t i = 0; i < fixture_questions().size(); ++i) {
    const FixtureQuestion& q = fixture_questions()[i];
    QuestionRecord record;
    record.id = q.id;
    record.question = i < lines.size() ? lines[i] : q.id;
    record.gold = AnswerValue::number(q.gold);
    record.source_dataset = "gsm8k-fixture";
    record.category = q.category;
    records.push_back(std::move(record));
  }
  return records;
}

/// Languages from the default registry whose toolchains resolve on this
/// machine.
inline std::vector<std::string> available_languages(
    const ToolchainRegistry& registry) {
  std::vector<std::string> out;
  for (const std::string& id : registry.language_ids()) {
    if (registry.available(id)) out.push_back(id);
  }
  return out;
}

inline RunOutcome ok_outcome(std::string question_id, std::string language,
                             double answer) {
  RunOutcome o;
  o.question_id = std::move(question_id);
  o.language = std::move(language);
  o.status = RunStatus::Ok;
  o.answer = AnswerValue::number(answer);
  o.stdout_text = format_double(answer) + "\n";
  return o;
}

inline RunOutcome failed_outcome(std::string question_id, std::string language,
                                 RunStatus status = RunStatus::Timeout) {
  RunOutcome o;
  o.question_id = std::move(question_id);
  o.language = std::move(language);
  o.status = status;
  return o;
}

}  // namespace polypot::testing

#endif  // POLYPOT_TESTS_SUPPORT_HPP
