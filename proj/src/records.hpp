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

#ifndef POLYPOT_RECORDS_HPP
#define POLYPOT_RECORDS_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "answer.hpp"
#include "json.hpp"
#include "sandbox.hpp"

namespace polypot {

struct QuestionRecord {
  std::string id;
  std::string question;
  AnswerValue gold;
  std::string source_dataset;
  std::optional<std::string> category;
};

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path,
                 const std::vector<nlohmann::json>& lines);

/// Load a corpus JSONL. Accepts question/problem and answer/solution field
/// spellings; a per-record "format" field overrides the default gold
/// format. Records without an id get one from their line number.
std::vector<QuestionRecord> load_corpus(const std::filesystem::path& path,
                                        GoldFormat default_format);

std::vector<ProgramSolution> load_solutions(const std::filesystem::path& path);
void save_solutions(const std::filesystem::path& path,
                    const std::vector<ProgramSolution>& solutions);

void save_outcomes(const std::filesystem::path& path,
                   const std::vector<RunOutcome>& outcomes);
std::vector<RunOutcome> load_outcomes(const std::filesystem::path& path);

}  // namespace polypot

#endif  // POLYPOT_RECORDS_HPP
