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

#ifndef POLYPOT_MATRIX_HPP
#define POLYPOT_MATRIX_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace polypot {

struct MatrixCell {
  bool correct = false;
  std::optional<std::string> source;  // the program that produced the cell
};

struct MatrixRow {
  std::string question_id;
  std::string question;
  std::string dataset;
  std::optional<std::string> category;
  std::vector<MatrixCell> cells;  // aligned with matrix languages
};

/// Complete question x language grid of correctness booleans. Language
/// order is fixed to the registry order it was built with; every row has
/// one cell per language.
class CorrectnessMatrix {
 public:
  CorrectnessMatrix() = default;
  explicit CorrectnessMatrix(std::vector<std::string> languages);

  const std::vector<std::string>& languages() const { return languages_; }
  const std::vector<MatrixRow>& rows() const { return rows_; }

  int language_index(std::string_view id) const;  // -1 when absent
  MatrixRow& add_row(std::string question_id, std::string question,
                     std::string dataset,
                     std::optional<std::string> category);
  const MatrixRow* find_row(std::string_view question_id) const;
  MatrixRow* find_row(std::string_view question_id);

  MatrixCell& cell(std::string_view question_id, std::string_view language);
  const MatrixCell& cell(std::string_view question_id,
                         std::string_view language) const;

  /// Fraction of rows with at least one true cell (the oracle ceiling).
  double upper_bound_accuracy() const;

  nlohmann::json to_json() const;
  static CorrectnessMatrix from_json(const nlohmann::json& j);
  static CorrectnessMatrix load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> languages_;
  std::vector<MatrixRow> rows_;
  std::map<std::string, std::size_t, std::less<>> row_index_;
};

}  // namespace polypot

#endif  // POLYPOT_MATRIX_HPP
