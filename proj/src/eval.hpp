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

#ifndef POLYPOT_EVAL_HPP
#define POLYPOT_EVAL_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gateway.hpp"
#include "records.hpp"
#include "router.hpp"

namespace polypot {

/// One routing strategy plus its knobs. `name` is canonical:
/// single:<lang>, random, upper-bound, self-consistency, prior-scorer,
/// posterior-scorer, vote-score, case-based.
struct StrategyConfig {
  std::string name;
  std::string fixed_language;  // single:<lang>
  int threshold = 10;          // case-based
  std::optional<std::filesystem::path> train_matrix;  // case-based

  std::string display_name() const;
};

StrategyConfig parse_strategy(std::string_view text);

struct CategoryStat {
  std::int64_t n = 0;
  std::int64_t correct = 0;
  double accuracy() const {
    return n == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(n);
  }
};

struct EvalEntry {
  std::string strategy;
  std::int64_t n = 0;
  std::int64_t correct = 0;
  double overall_accuracy = 0.0;
  std::vector<std::pair<std::string, CategoryStat>> categories;  // corpus order
  std::vector<RoutingDecision> decisions;  // corpus order
  std::vector<bool> corrects;              // aligned with decisions
};

/// Shared inputs for evaluating strategies over one corpus: records,
/// their pre-executed per-language outcomes, and the model plumbing a
/// strategy may consult.
struct EvalContext {
  const std::vector<QuestionRecord>* corpus = nullptr;
  const std::vector<ProgramSolution>* solutions = nullptr;
  const std::vector<RunOutcome>* outcomes = nullptr;  // aligned with solutions
  const ToolchainRegistry* registry = nullptr;
  Gateway* gateway = nullptr;              // scorer/embedding strategies
  const ScorerPrompts* prompts = nullptr;  // scorer strategies
  Tolerance tol;
  std::uint64_t seed = 0;
};

/// Route every question, compare the chosen answer to gold, and tally
/// overall and per-category accuracy. Abstains and per-question strategy
/// failures count as incorrect.
EvalEntry evaluate_strategy(const StrategyConfig& config, const EvalContext& ctx);

struct RenderedReport {
  std::string csv;       // raw accuracies, full precision
  std::string markdown;  // percentages
};

/// Rows = strategies, columns = categories + Average (unweighted mean of
/// the row's non-empty category accuracies). Empty categories render as
/// an em dash.
RenderedReport render_report(const std::vector<EvalEntry>& entries);

}  // namespace polypot

#endif  // POLYPOT_EVAL_HPP
