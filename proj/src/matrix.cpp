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

#include "matrix.hpp"

#include <utility>

#include "errors.hpp"
#include "util.hpp"

namespace fs = std::filesystem;

namespace polypot {

using nlohmann::json;

CorrectnessMatrix::CorrectnessMatrix(std::vector<std::string> languages)
    : languages_(std::move(languages)) {
  if (languages_.empty()) {
    throw InvalidInput("correctness matrix needs at least one language");
  }
}

int CorrectnessMatrix::language_index(std::string_view id) const {
  for (std::size_t i = 0; i < languages_.size(); ++i) {
    if (languages_[i] == id) return static_cast<int>(i);
  }
  return -1;
}

MatrixRow& CorrectnessMatrix::add_row(std::string question_id,
                                      std::string question,
                                      std::string dataset,
                                      std::optional<std::string> category) {
  if (find_row(question_id) != nullptr) {
    throw InvalidInput("duplicate matrix row: " + question_id);
  }
  MatrixRow row;
  row.question_id = std::move(question_id);
  row.question = std::move(question);
  row.dataset = std::move(dataset);
  row.category = std::move(category);
  row.cells.resize(languages_.size());
  rows_.push_back(std::move(row));
  row_index_.emplace(rows_.back().question_id, rows_.size() - 1);
  return rows_.back();
}

const MatrixRow* CorrectnessMatrix::find_row(std::string_view question_id) const {
  auto it = row_index_.find(question_id);
  return it == row_index_.end() ? nullptr : &rows_[it->second];
}

MatrixRow* CorrectnessMatrix::find_row(std::string_view question_id) {
  auto it = row_index_.find(question_id);
  return it == row_index_.end() ? nullptr : &rows_[it->second];
}

MatrixCell& CorrectnessMatrix::cell(std::string_view question_id,
                                    std::string_view language) {
  MatrixRow* row = find_row(question_id);
  int lang = language_index(language);
  if (row == nullptr || lang < 0) {
    throw InvalidInput("no matrix cell for (" + std::string(question_id) +
                       ", " + std::string(language) + ")");
  }
  return row->cells[static_cast<std::size_t>(lang)];
}

const MatrixCell& CorrectnessMatrix::cell(std::string_view question_id,
                                          std::string_view language) const {
  return const_cast<CorrectnessMatrix*>(this)->cell(question_id, language);
}

double CorrectnessMatrix::upper_bound_accuracy() const {
  if (rows_.empty()) return 0.0;
  std::size_t solvable = 0;
  for (const auto& row : rows_) {
    for (const auto& cell : row.cells) {
      if (cell.correct) {
        ++solvable;
        break;
      }
    }
  }
  return static_cast<double>(solvable) / static_cast<double>(rows_.size());
}

json CorrectnessMatrix::to_json() const {
  json j;
  j["languages"] = languages_;
  json rows = json::array();
  for (const auto& row : rows_) {
    json r;
    r["question_id"] = row.question_id;
    r["question"] = row.question;
    r["dataset"] = row.dataset;
    if (row.category) r["category"] = *row.category;
    json cells = json::object();
    for (std::size_t i = 0; i < languages_.size(); ++i) {
      json c;
      c["correct"] = row.cells[i].correct;
      if (row.cells[i].source) c["source"] = *row.cells[i].source;
      cells[languages_[i]] = std::move(c);
    }
    r["cells"] = std::move(cells);
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  return j;
}

CorrectnessMatrix CorrectnessMatrix::from_json(const json& j) {
  CorrectnessMatrix m(j.at("languages").get<std::vector<std::string>>());
  for (const auto& r : j.at("rows")) {
    std::optional<std::string> category;
    if (r.contains("category")) category = r["category"].get<std::string>();
    MatrixRow& row = m.add_row(r.at("question_id").get<std::string>(),
                               r.value("question", std::string()),
                               r.value("dataset", std::string()), category);
    const json& cells = r.at("cells");
    for (std::size_t i = 0; i < m.languages_.size(); ++i) {
      auto it = cells.find(m.languages_[i]);
      if (it == cells.end()) continue;
      row.cells[i].correct = it->value("correct", false);
      if (it->contains("source")) {
        row.cells[i].source = (*it)["source"].get<std::string>();
      }
    }
  }
  return m;
}

CorrectnessMatrix CorrectnessMatrix::load(const fs::path& path) {
  try {
    return from_json(json::parse(read_text_file(path)));
  } catch (const json::exception& e) {
    throw IoError("invalid matrix file " + path.string() + ": " + e.what());
  }
}

void CorrectnessMatrix::save(const fs::path& path) const {
  write_text_file_atomic(path, to_json().dump(2) + "\n");
}

}  // namespace polypot
