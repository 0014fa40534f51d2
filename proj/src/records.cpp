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

#include "records.hpp"

#include <cstdio>
#include <set>
#include <sstream>

#include "errors.hpp"
#include "util.hpp"

namespace fs = std::filesystem;

namespace polypot {

namespace {

using nlohmann::json;

std::optional<std::string> first_string_field(
    const json& record, std::initializer_list<const char*> names) {
  for (const char* name : names) {
    auto it = record.find(name);
    if (it != record.end() && it->is_string()) return it->get<std::string>();
  }
  return std::nullopt;
}

}  // namespace

std::vector<json> read_jsonl(const fs::path& path) {
  std::string content = read_text_file(path);
  std::vector<json> out;
  std::size_t line_no = 0;
  for (const std::string& line : split_lines(content)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw IoError(path.string() + ":" + std::to_string(line_no) +
                    ": invalid JSON: " + e.what());
    }
  }
  return out;
}

void write_jsonl(const fs::path& path, const std::vector<json>& lines) {
  std::ostringstream out;
  for (const json& j : lines) {
    out << j.dump() << "\n";
  }
  write_text_file_atomic(path, out.str());
}

std::vector<QuestionRecord> load_corpus(const fs::path& path,
                                        GoldFormat default_format) {
  std::vector<QuestionRecord> records;
  std::set<std::string> seen_ids;
  std::size_t index = 0;
  for (const json& j : read_jsonl(path)) {
    ++index;
    QuestionRecord record;
    GoldFormat fmt = default_format;
    if (auto f = first_string_field(j, {"format"})) {
      fmt = gold_format_from_string(*f);
    }
    if (auto id = first_string_field(j, {"id", "question_id"})) {
      record.id = *id;
    } else {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "q%06zu", index);
      record.id = buf;
    }
    auto question = first_string_field(j, {"question", "problem"});
    if (!question || trim(*question).empty()) {
      throw IoError(path.string() + ": record " + record.id +
                    " has no question text");
    }
    record.question = *question;
    record.gold = extract_gold(j, fmt);
    if (auto ds = first_string_field(j, {"source_dataset", "dataset"})) {
      record.source_dataset = *ds;
    } else {
      record.source_dataset = std::string(to_string(fmt));
    }
    if (auto cat = first_string_field(j, {"category", "type", "subject"})) {
      record.category = *cat;
    }
    if (!seen_ids.insert(record.id).second) {
      throw IoError(path.string() + ": duplicate question id " + record.id);
    }
    records.push_back(std::move(record));
  }
  return records;
}

std::vector<ProgramSolution> load_solutions(const fs::path& path) {
  std::vector<ProgramSolution> out;
  for (const json& j : read_jsonl(path)) {
    ProgramSolution s;
    auto qid = first_string_field(j, {"question_id", "id"});
    auto lang = first_string_field(j, {"language", "lang"});
    auto source = first_string_field(j, {"source", "program", "output"});
    if (!qid || !lang || !source) {
      throw IoError(path.string() +
                    ": solution records need question_id, language, source");
    }
    s.question_id = *qid;
    s.language = *lang;
    s.source = *source;
    out.push_back(std::move(s));
  }
  return out;
}

void save_solutions(const fs::path& path,
                    const std::vector<ProgramSolution>& solutions) {
  std::vector<json> lines;
  lines.reserve(solutions.size());
  for (const auto& s : solutions) {
    lines.push_back({{"question_id", s.question_id},
                     {"language", s.language},
                     {"source", s.source}});
  }
  write_jsonl(path, lines);
}

void save_outcomes(const fs::path& path,
                   const std::vector<RunOutcome>& outcomes) {
  std::vector<json> lines;
  lines.reserve(outcomes.size());
  for (const auto& o : outcomes) lines.push_back(o.to_json());
  write_jsonl(path, lines);
}

std::vector<RunOutcome> load_outcomes(const fs::path& path) {
  std::vector<RunOutcome> out;
  for (const json& j : read_jsonl(path)) {
    out.push_back(RunOutcome::from_json(j));
  }
  return out;
}

}  // namespace polypot
