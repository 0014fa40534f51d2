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

#include "router.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "errors.hpp"
#include "util.hpp"

namespace polypot {

namespace {

using nlohmann::json;

/// Answer-equivalence classes of the Ok outcomes, in input order. The
/// representative is the first member; classing uses answers_equal against
/// that representative.
struct VoteClass {
  AnswerValue representative;
  std::vector<const RunOutcome*> members;
};

std::vector<VoteClass> vote_classes(const std::vector<RunOutcome>& outcomes,
                                    const Tolerance& tol) {
  std::vector<VoteClass> classes;
  for (const RunOutcome& outcome : outcomes) {
    if (!outcome.ok() || !outcome.answer) continue;
    bool placed = false;
    for (VoteClass& cls : classes) {
      if (answers_equal(*outcome.answer, cls.representative, tol)) {
        cls.members.push_back(&outcome);
        placed = true;
        break;
      }
    }
    if (!placed) {
      classes.push_back({*outcome.answer, {&outcome}});
    }
  }
  return classes;
}

std::vector<std::pair<std::string, int>> vote_counts(
    const std::vector<VoteClass>& classes) {
  std::vector<std::pair<std::string, int>> votes;
  votes.reserve(classes.size());
  for (const VoteClass& cls : classes) {
    votes.emplace_back(cls.representative.canonical_key(),
                       static_cast<int>(cls.members.size()));
  }
  return votes;
}

std::vector<std::size_t> max_vote_classes(const std::vector<VoteClass>& classes) {
  std::vector<std::size_t> winners;
  std::size_t best = 0;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    std::size_t n = classes[i].members.size();
    if (n > best) {
      best = n;
      winners.clear();
    }
    if (n == best) winners.push_back(i);
  }
  return winners;
}

RoutingDecision abstain_decision(std::string strategy, std::string question_id,
                                 std::uint64_t seed) {
  RoutingDecision d;
  d.strategy = std::move(strategy);
  d.question_id = std::move(question_id);
  d.abstain = true;
  d.diagnostics.seed = seed;
  return d;
}

/// Deterministic uniform pick that does not depend on the standard
/// library's distribution implementation.
std::size_t seeded_pick(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  return static_cast<std::size_t>(rng() % n);
}

const ProgramSolution* solution_for_language(
    const std::vector<ProgramSolution>& solutions, std::string_view language) {
  for (const auto& s : solutions) {
    if (s.language == language) return &s;
  }
  return nullptr;
}

}  // namespace

json RoutingDecision::to_json() const {
  json j;
  j["strategy"] = strategy;
  j["question_id"] = question_id;
  j["abstain"] = abstain;
  if (!abstain) j["language"] = chosen_language;
  if (chosen_answer) j["answer"] = chosen_answer->to_json();
  json diag;
  json votes = json::object();
  for (const auto& [key, count] : diagnostics.votes) votes[key] = count;
  diag["votes"] = std::move(votes);
  json scores = json::object();
  for (const auto& [lang, score] : diagnostics.scores) scores[lang] = score;
  diag["scores"] = std::move(scores);
  diag["tie"] = diagnostics.tie;
  diag["seed"] = diagnostics.seed;
  j["diagnostics"] = std::move(diag);
  return j;
}

void NeighborIndex::add(std::string question_id, EmbeddingVector embedding) {
  if (embedding.values.empty()) {
    throw InvalidInput("neighbor embedding must be non-empty");
  }
  entries_.push_back({std::move(question_id), std::move(embedding)});
}

NeighborIndex NeighborIndex::build(const CorrectnessMatrix& matrix,
                                   Gateway& gateway) {
  NeighborIndex index;
  for (const MatrixRow& row : matrix.rows()) {
    index.add(row.question_id, gateway.embed(row.question));
  }
  return index;
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.values.size() != b.values.size()) {
    throw InvalidInput("embedding dimensions differ: " +
                       std::to_string(a.values.size()) + " vs " +
                       std::to_string(b.values.size()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    dot += a.values[i] * b.values[i];
    na += a.values[i] * a.values[i];
    nb += b.values[i] * b.values[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<NeighborIndex::Ranked> NeighborIndex::ranked(
    const EmbeddingVector& query) const {
  std::vector<Ranked> out;
  out.reserve(entries_.size());
  for (const Entry& entry : entries_) {
    out.push_back({cosine_similarity(query, entry.embedding), &entry.question_id});
  }
  std::sort(out.begin(), out.end(), [](const Ranked& a, const Ranked& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return *a.question_id < *b.question_id;
  });
  return out;
}

RoutingDecision case_based_select(const std::string& question_id,
                                  const std::string& query,
                                  const Embedder& embedder,
                                  const NeighborIndex& index,
                                  const CorrectnessMatrix& matrix,
                                  int threshold) {
  if (index.empty()) {
    throw EmptyIndex("case-based selection needs a non-empty neighbor index");
  }
  if (threshold < 1) {
    throw InvalidInput("case-based threshold must be >= 1");
  }
  const auto& languages = matrix.languages();
  std::vector<int> counts(languages.size(), 0);

  RoutingDecision decision;
  decision.strategy = "case-based";
  decision.question_id = question_id;

  EmbeddingVector query_embedding = embedder(query);
  for (const auto& ranked : index.ranked(query_embedding)) {
    const MatrixRow* row = matrix.find_row(*ranked.question_id);
    if (row == nullptr) {
      throw UsageError("neighbor index references question '" +
                       *ranked.question_id + "' missing from the matrix");
    }
    std::vector<std::size_t> reached;
    for (std::size_t lang = 0; lang < languages.size(); ++lang) {
      if (!row->cells[lang].correct) continue;
      if (++counts[lang] == threshold) reached.push_back(lang);
    }
    if (!reached.empty()) {
      // Registry order settles languages reaching the threshold on the
      // same neighbor.
      decision.chosen_language = languages[reached.front()];
      decision.diagnostics.tie = reached.size() > 1;
      for (std::size_t lang = 0; lang < languages.size(); ++lang) {
        decision.diagnostics.scores.emplace_back(languages[lang], counts[lang]);
      }
      return decision;
    }
  }

  // No counter reached the threshold: max count, registry order on ties.
  int best = *std::max_element(counts.begin(), counts.end());
  std::size_t winner = 0;
  std::size_t n_best = 0;
  for (std::size_t lang = 0; lang < languages.size(); ++lang) {
    if (counts[lang] == best) {
      if (n_best == 0) winner = lang;
      ++n_best;
    }
  }
  decision.chosen_language = languages[winner];
  decision.diagnostics.tie = n_best > 1;
  for (std::size_t lang = 0; lang < languages.size(); ++lang) {
    decision.diagnostics.scores.emplace_back(languages[lang], counts[lang]);
  }
  return decision;
}

RoutingDecision prior_score_select(
    const std::string& question_id, const std::string& query,
    const std::vector<std::pair<std::string, PriorScorer>>& scorers) {
  if (scorers.empty()) {
    throw InvalidInput("prior selection needs at least one scorer");
  }
  RoutingDecision decision;
  decision.strategy = "prior-scorer";
  decision.question_id = question_id;

  bool have_best = false;
  double best_score = 0.0;
  std::size_t n_best = 0;
  for (const auto& [language, scorer] : scorers) {
    double score;
    try {
      score = scorer(query);
    } catch (const std::exception&) {
      continue;  // failed scorer drops its language
    }
    decision.diagnostics.scores.emplace_back(language, score);
    if (!have_best || score > best_score) {
      have_best = true;
      best_score = score;
      decision.chosen_language = language;
      n_best = 1;
    } else if (score == best_score) {
      ++n_best;  // earlier (registry-order) language already holds the slot
    }
  }
  if (!have_best) {
    throw ScorerFailure("every language scorer failed for question " +
                        question_id);
  }
  decision.diagnostics.tie = n_best > 1;
  return decision;
}

RoutingDecision self_consistency_select(const std::string& question_id,
                                        const std::vector<RunOutcome>& outcomes,
                                        const Tolerance& tol,
                                        std::uint64_t seed) {
  std::vector<VoteClass> classes = vote_classes(outcomes, tol);
  if (classes.empty()) {
    return abstain_decision("self-consistency", question_id, seed);
  }
  RoutingDecision decision;
  decision.strategy = "self-consistency";
  decision.question_id = question_id;
  decision.diagnostics.seed = seed;
  decision.diagnostics.votes = vote_counts(classes);

  std::vector<std::size_t> winners = max_vote_classes(classes);
  std::size_t chosen = winners.front();
  if (winners.size() > 1) {
    chosen = winners[seeded_pick(seed, winners.size())];
    decision.diagnostics.tie = true;
  }
  const VoteClass& cls = classes[chosen];
  decision.chosen_language = cls.members.front()->language;
  decision.chosen_answer = cls.representative;
  return decision;
}

RoutingDecision posterior_score_select(const std::string& question_id,
                                       const std::string& query,
                                       const std::vector<ProgramSolution>& solutions,
                                       const std::vector<RunOutcome>& outcomes,
                                       const PosteriorScorer& scorer) {
  RoutingDecision decision;
  decision.strategy = "posterior-scorer";
  decision.question_id = question_id;

  std::vector<const RunOutcome*> candidates;
  for (const RunOutcome& outcome : outcomes) {
    if (outcome.ok()) candidates.push_back(&outcome);
  }
  if (candidates.empty()) {
    return abstain_decision("posterior-scorer", question_id, 0);
  }
  if (candidates.size() == 1) {
    decision.chosen_language = candidates.front()->language;
    decision.chosen_answer = candidates.front()->answer;
    return decision;
  }

  const RunOutcome* best = nullptr;
  double best_score = 0.0;
  std::size_t n_best = 0;
  for (const RunOutcome* candidate : candidates) {
    const ProgramSolution* solution =
        solution_for_language(solutions, candidate->language);
    std::string code = solution != nullptr ? solution->source : std::string();
    double score;
    try {
      score = scorer(candidate->language, query, code);
    } catch (const std::exception&) {
      continue;
    }
    decision.diagnostics.scores.emplace_back(candidate->language, score);
    if (best == nullptr || score > best_score) {
      best = candidate;
      best_score = score;
      n_best = 1;
    } else if (score == best_score) {
      ++n_best;
    }
  }
  if (best == nullptr) {
    throw ScorerFailure("every posterior scorer call failed for question " +
                        question_id);
  }
  decision.chosen_language = best->language;
  decision.chosen_answer = best->answer;
  decision.diagnostics.tie = n_best > 1;
  return decision;
}

RoutingDecision vote_then_score_select(const std::string& question_id,
                                       const std::string& query,
                                       const std::vector<ProgramSolution>& solutions,
                                       const std::vector<RunOutcome>& outcomes,
                                       const PosteriorScorer& scorer,
                                       const Tolerance& tol, std::uint64_t seed) {
  std::vector<VoteClass> classes = vote_classes(outcomes, tol);
  if (classes.empty()) {
    return abstain_decision("vote-score", question_id, seed);
  }
  RoutingDecision decision;
  decision.strategy = "vote-score";
  decision.question_id = question_id;
  decision.diagnostics.seed = seed;
  decision.diagnostics.votes = vote_counts(classes);

  std::vector<std::size_t> winners = max_vote_classes(classes);
  if (winners.size() == 1) {
    const VoteClass& cls = classes[winners.front()];
    decision.chosen_language = cls.members.front()->language;
    decision.chosen_answer = cls.representative;
    return decision;
  }

  decision.diagnostics.tie = true;
  const VoteClass* best = nullptr;
  double best_score = 0.0;
  for (std::size_t index : winners) {
    const VoteClass& cls = classes[index];
    const RunOutcome* rep = cls.members.front();
    const ProgramSolution* solution =
        solution_for_language(solutions, rep->language);
    std::string code = solution != nullptr ? solution->source : std::string();
    double score;
    try {
      score = scorer(rep->language, query, code);
    } catch (const std::exception&) {
      continue;
    }
    decision.diagnostics.scores.emplace_back(rep->language, score);
    if (best == nullptr || score > best_score) {
      best = &cls;
      best_score = score;
    }
  }
  if (best == nullptr) {
    // Scorer gave nothing to go on; fall back to the seeded vote draw.
    const VoteClass& cls = classes[winners[seeded_pick(seed, winners.size())]];
    decision.chosen_language = cls.members.front()->language;
    decision.chosen_answer = cls.representative;
    return decision;
  }
  decision.chosen_language = best->members.front()->language;
  decision.chosen_answer = best->representative;
  return decision;
}

RoutingDecision random_select(const std::string& question_id,
                              const std::vector<std::string>& languages,
                              std::uint64_t seed) {
  if (languages.empty()) {
    throw InvalidInput("random selection needs at least one language");
  }
  RoutingDecision decision;
  decision.strategy = "random";
  decision.question_id = question_id;
  decision.chosen_language = languages[seeded_pick(seed, languages.size())];
  decision.diagnostics.seed = seed;
  decision.diagnostics.tie = true;  // randomness was consulted
  return decision;
}

RoutingDecision upper_bound_select(const std::string& question_id,
                                   const std::vector<RunOutcome>& outcomes,
                                   const AnswerValue& gold, const Tolerance& tol) {
  for (const RunOutcome& outcome : outcomes) {
    if (outcome.ok() && outcome.answer &&
        answers_equal(*outcome.answer, gold, tol)) {
      RoutingDecision decision;
      decision.strategy = "upper-bound";
      decision.question_id = question_id;
      decision.chosen_language = outcome.language;
      decision.chosen_answer = outcome.answer;
      return decision;
    }
  }
  return abstain_decision("upper-bound", question_id, 0);
}

std::vector<json> export_preference_pairs(const CorrectnessMatrix& matrix,
                                          const SftTemplate& tmpl,
                                          const ToolchainRegistry& registry) {
  std::vector<json> pairs;
  const auto& languages = matrix.languages();
  for (const MatrixRow& row : matrix.rows()) {
    std::vector<std::size_t> correct;
    std::vector<std::size_t> incorrect;
    for (std::size_t lang = 0; lang < languages.size(); ++lang) {
      const MatrixCell& cell = row.cells[lang];
      if (!cell.source) continue;
      if (cell.correct) {
        correct.push_back(lang);
      } else {
        incorrect.push_back(lang);
      }
    }
    for (std::size_t c : correct) {
      for (std::size_t w : incorrect) {
        // The prompt follows the chosen (correct) language's SFT shape.
        std::string prompt =
            tmpl.instruction + "\n\n" +
            tmpl.render_input(registry.display_name(languages[c]), row.question);
        pairs.push_back({{"question_id", row.question_id},
                         {"prompt", prompt},
                         {"chosen", *row.cells[c].source},
                         {"rejected", *row.cells[w].source},
                         {"chosen_language", languages[c]},
                         {"rejected_language", languages[w]}});
      }
    }
  }
  return pairs;
}

ScorerExportMode scorer_export_mode_from_string(std::string_view name) {
  std::string n = lower_ascii(trim(name));
  if (n == "prior") return ScorerExportMode::Prior;
  if (n == "posterior") return ScorerExportMode::Posterior;
  throw UsageError("scorer export mode must be 'prior' or 'posterior'");
}

std::map<std::string, std::vector<json>> export_scorer_training(
    const CorrectnessMatrix& matrix, ScorerExportMode mode) {
  std::map<std::string, std::vector<json>> out;
  const auto& languages = matrix.languages();
  for (const std::string& language : languages) {
    out.emplace(language, std::vector<json>());
  }
  for (const MatrixRow& row : matrix.rows()) {
    for (std::size_t lang = 0; lang < languages.size(); ++lang) {
      const MatrixCell& cell = row.cells[lang];
      json record = {{"question_id", row.question_id},
                     {"question", row.question},
                     {"label", cell.correct}};
      if (mode == ScorerExportMode::Posterior) {
        if (!cell.source) continue;  // nothing to embed for this cell
        record["code"] = *cell.source;
      }
      out[languages[lang]].push_back(std::move(record));
    }
  }
  return out;
}

}  // namespace polypot
