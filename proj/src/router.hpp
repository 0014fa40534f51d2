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

#ifndef POLYPOT_ROUTER_HPP
#define POLYPOT_ROUTER_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "answer.hpp"
#include "datagen.hpp"
#include "gateway.hpp"
#include "matrix.hpp"
#include "sandbox.hpp"

namespace polypot {

struct RoutingDiagnostics {
  std::vector<std::pair<std::string, int>> votes;      // answer key -> count
  std::vector<std::pair<std::string, double>> scores;  // language -> score
  bool tie = false;  // true only when randomness or a tie-break was consulted
  std::uint64_t seed = 0;
};

struct RoutingDecision {
  std::string strategy;
  std::string question_id;
  std::string chosen_language;  // empty iff abstain
  std::optional<AnswerValue> chosen_answer;
  bool abstain = false;
  RoutingDiagnostics diagnostics;

  nlohmann::json to_json() const;
};

/// Embeddings for the training questions a case-based router can consult.
class NeighborIndex {
 public:
  void add(std::string question_id, EmbeddingVector embedding);
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const std::string& metric() const { return metric_; }

  /// Embed every matrix row's question through the gateway.
  static NeighborIndex build(const CorrectnessMatrix& matrix, Gateway& gateway);

  struct Ranked {
    double similarity;
    const std::string* question_id;
  };
  /// Descending cosine similarity; equal similarities order by ascending
  /// question id so rankings are insertion-order independent.
  std::vector<Ranked> ranked(const EmbeddingVector& query) const;

 private:
  struct Entry {
    std::string question_id;
    EmbeddingVector embedding;
  };
  std::vector<Entry> entries_;
  std::string metric_ = "cosine";
};

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

using Embedder = std::function<EmbeddingVector(const std::string&)>;
using PriorScorer = std::function<double(const std::string& query)>;
using PosteriorScorer = std::function<double(
    const std::string& language, const std::string& query, const std::string& code)>;

/// Scan training questions by similarity; the first language to
/// accumulate `threshold` correct neighbors wins. Falls back to the
/// max-count language (registry order on ties) when no counter reaches
/// the threshold.
RoutingDecision case_based_select(const std::string& question_id,
                                  const std::string& query,
                                  const Embedder& embedder,
                                  const NeighborIndex& index,
                                  const CorrectnessMatrix& matrix,
                                  int threshold);

/// Argmax over per-language scorers evaluated on the query alone. Failed
/// scorers drop their language; all failing is an error.
RoutingDecision prior_score_select(
    const std::string& question_id, const std::string& query,
    const std::vector<std::pair<std::string, PriorScorer>>& scorers);

/// Majority vote over answer-equivalence classes of Ok outcomes; vote
/// ties break by a seeded uniform draw; no Ok outcome at all abstains.
RoutingDecision self_consistency_select(const std::string& question_id,
                                        const std::vector<RunOutcome>& outcomes,
                                        const Tolerance& tol,
                                        std::uint64_t seed);

/// Argmax of scorer(query, code) over languages whose run succeeded.
RoutingDecision posterior_score_select(const std::string& question_id,
                                       const std::string& query,
                                       const std::vector<ProgramSolution>& solutions,
                                       const std::vector<RunOutcome>& outcomes,
                                       const PosteriorScorer& scorer);

/// Vote first; a unique plurality wins outright (identical to
/// self-consistency there), otherwise the scorer picks among the tied
/// classes' representatives.
RoutingDecision vote_then_score_select(const std::string& question_id,
                                       const std::string& query,
                                       const std::vector<ProgramSolution>& solutions,
                                       const std::vector<RunOutcome>& outcomes,
                                       const PosteriorScorer& scorer,
                                       const Tolerance& tol, std::uint64_t seed);

RoutingDecision random_select(const std::string& question_id,
                              const std::vector<std::string>& languages,
                              std::uint64_t seed);

/// Oracle: correct iff any language's Ok answer matches gold; picks the
/// first such language in input order, abstains otherwise.
RoutingDecision upper_bound_select(const std::string& question_id,
                                   const std::vector<RunOutcome>& outcomes,
                                   const AnswerValue& gold, const Tolerance& tol);

/// Every (correct, incorrect) language pair per question, skipping
/// questions that are all-correct or all-incorrect.
std::vector<nlohmann::json> export_preference_pairs(const CorrectnessMatrix& matrix,
                                                    const SftTemplate& tmpl,
                                                    const ToolchainRegistry& registry);

enum class ScorerExportMode { Prior, Posterior };

ScorerExportMode scorer_export_mode_from_string(std::string_view name);

/// Per-language training records: label = cell correctness, features =
/// question text (prior) or question + stored code (posterior).
std::map<std::string, std::vector<nlohmann::json>> export_scorer_training(
    const CorrectnessMatrix& matrix, ScorerExportMode mode);

}  // namespace polypot

#endif  // POLYPOT_ROUTER_HPP
