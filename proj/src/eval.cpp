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

#include "eval.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "errors.hpp"
#include "util.hpp"

namespace polypot {

namespace {

struct PerQuestion {
  std::vector<const ProgramSolution*> solutions;  // registry order
  std::vector<const RunOutcome*> outcomes;        // aligned with solutions
};

/// Group solutions/outcomes per question, ordered by registry language
/// index for deterministic downstream tie-breaking.
std::map<std::string, PerQuestion> group_by_question(const EvalContext& ctx) {
  std::map<std::string, PerQuestion> grouped;
  for (std::size_t i = 0; i < ctx.solutions->size(); ++i) {
    const ProgramSolution& s = (*ctx.solutions)[i];
    PerQuestion& pq = grouped[s.question_id];
    pq.solutions.push_back(&s);
    pq.outcomes.push_back(&(*ctx.outcomes)[i]);
  }
  for (auto& [qid, pq] : grouped) {
    std::vector<std::size_t> order(pq.solutions.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return ctx.registry->language_index(pq.solutions[a]->language) <
             ctx.registry->language_index(pq.solutions[b]->language);
    });
    PerQuestion sorted;
    for (std::size_t i : order) {
      sorted.solutions.push_back(pq.solutions[i]);
      sorted.outcomes.push_back(pq.outcomes[i]);
    }
    pq = std::move(sorted);
  }
  return grouped;
}

const RunOutcome* outcome_for_language(const PerQuestion& pq,
                                       std::string_view language) {
  for (std::size_t i = 0; i < pq.solutions.size(); ++i) {
    if (pq.solutions[i]->language == language) return pq.outcomes[i];
  }
  return nullptr;
}

/// Machinery a strategy needs beyond the per-question rows; built once
/// per evaluate_strategy call.
struct StrategyRuntime {
  std::vector<std::pair<std::string, PriorScorer>> prior_scorers;
  PosteriorScorer posterior_scorer;
  CorrectnessMatrix train_matrix;
  NeighborIndex index;
  Embedder embedder;
};

void require_gateway(const StrategyConfig& config, const EvalContext& ctx) {
  if (ctx.gateway == nullptr) {
    throw UsageError("strategy '" + config.name + "' needs a model backend");
  }
}

StrategyRuntime build_runtime(const StrategyConfig& config,
                              const EvalContext& ctx) {
  StrategyRuntime rt;
  if (config.name == "prior-scorer") {
    require_gateway(config, ctx);
    if (ctx.prompts == nullptr) {
      throw UsageError("prior-scorer needs scorer prompt templates");
    }
    for (const auto& spec : ctx.registry->specs()) {
      const std::string display = spec.language.display_name;
      rt.prior_scorers.emplace_back(
          spec.language.id, [&ctx, display](const std::string& query) {
            return ctx.gateway->yes_no_score(
                            ctx.prompts->render_prior(query, display))
                .score;
          });
    }
  } else if (config.name == "posterior-scorer" || config.name == "vote-score") {
    require_gateway(config, ctx);
    if (ctx.prompts == nullptr) {
      throw UsageError(config.name + " needs scorer prompt templates");
    }
    rt.posterior_scorer = [&ctx](const std::string& language,
                                 const std::string& query,
                                 const std::string& code) {
      return ctx.gateway
          ->yes_no_score(ctx.prompts->render_posterior(
              query, ctx.registry->display_name(language), code))
          .score;
    };
  } else if (config.name == "case-based") {
    require_gateway(config, ctx);
    if (!config.train_matrix) {
      throw UsageError("case-based needs a training matrix path");
    }
    rt.train_matrix = CorrectnessMatrix::load(*config.train_matrix);
    rt.index = NeighborIndex::build(rt.train_matrix, *ctx.gateway);
    rt.embedder = [&ctx](const std::string& text) {
      return ctx.gateway->embed(text);
    };
  } else if (config.name == "single") {
    if (ctx.registry->find(config.fixed_language) == nullptr) {
      throw UsageError("single-language strategy: unknown language '" +
                       config.fixed_language + "'");
    }
  }
  return rt;
}

RoutingDecision route_question(const StrategyConfig& config,
                               const StrategyRuntime& rt, const EvalContext& ctx,
                               const QuestionRecord& record,
                               const PerQuestion& pq, std::uint64_t seed) {
  std::vector<RunOutcome> outcomes;
  std::vector<ProgramSolution> solutions;
  outcomes.reserve(pq.outcomes.size());
  solutions.reserve(pq.solutions.size());
  for (std::size_t i = 0; i < pq.outcomes.size(); ++i) {
    outcomes.push_back(*pq.outcomes[i]);
    solutions.push_back(*pq.solutions[i]);
  }

  if (config.name == "single") {
    RoutingDecision d;
    d.strategy = config.display_name();
    d.question_id = record.id;
    d.chosen_language = config.fixed_language;
    if (const RunOutcome* o = outcome_for_language(pq, config.fixed_language);
        o != nullptr && o->ok()) {
      d.chosen_answer = o->answer;
    }
    return d;
  }
  if (config.name == "random") {
    RoutingDecision d =
        random_select(record.id, ctx.registry->language_ids(), seed);
    if (const RunOutcome* o = outcome_for_language(pq, d.chosen_language);
        o != nullptr && o->ok()) {
      d.chosen_answer = o->answer;
    }
    return d;
  }
  if (config.name == "upper-bound") {
    return upper_bound_select(record.id, outcomes, record.gold, ctx.tol);
  }
  if (config.name == "self-consistency") {
    return self_consistency_select(record.id, outcomes, ctx.tol, seed);
  }
  if (config.name == "posterior-scorer") {
    return posterior_score_select(record.id, record.question, solutions,
                                  outcomes, rt.posterior_scorer);
  }
  if (config.name == "vote-score") {
    return vote_then_score_select(record.id, record.question, solutions,
                                  outcomes, rt.posterior_scorer, ctx.tol, seed);
  }
  if (config.name == "prior-scorer") {
    RoutingDecision d =
        prior_score_select(record.id, record.question, rt.prior_scorers);
    if (const RunOutcome* o = outcome_for_language(pq, d.chosen_language);
        o != nullptr && o->ok()) {
      d.chosen_answer = o->answer;
    }
    return d;
  }
  if (config.name == "case-based") {
    RoutingDecision d = case_based_select(record.id, record.question,
                                          rt.embedder, rt.index,
                                          rt.train_matrix, config.threshold);
    if (const RunOutcome* o = outcome_for_language(pq, d.chosen_language);
        o != nullptr && o->ok()) {
      d.chosen_answer = o->answer;
    }
    return d;
  }
  throw UsageError("unknown strategy: " + config.name);
}

bool decision_correct(const RoutingDecision& decision,
                      const QuestionRecord& record, const EvalContext& ctx,
                      const PerQuestion& pq) {
  if (decision.abstain) return false;
  if (decision.chosen_answer) {
    return answers_equal(*decision.chosen_answer, record.gold, ctx.tol);
  }
  // Language-only decision: consult that language's outcome.
  const RunOutcome* o = outcome_for_language(pq, decision.chosen_language);
  return o != nullptr && o->ok() && o->answer &&
         answers_equal(*o->answer, record.gold, ctx.tol);
}

}  // namespace

std::string StrategyConfig::display_name() const {
  if (name == "single") return "single:" + fixed_language;
  return name;
}

StrategyConfig parse_strategy(std::string_view text) {
  std::string t = lower_ascii(trim(text));
  for (char& c : t) {
    if (c == '_') c = '-';
  }
  StrategyConfig config;
  if (t.rfind("single:", 0) == 0) {
    config.name = "single";
    config.fixed_language = t.substr(7);
    if (config.fixed_language.empty()) {
      throw UsageError("single:<language> needs a language id");
    }
    return config;
  }
  static const char* known[] = {"random",        "upper-bound",
                                "self-consistency", "prior-scorer",
                                "posterior-scorer", "vote-score",
                                "case-based"};
  for (const char* k : known) {
    if (t == k) {
      config.name = k;
      return config;
    }
  }
  if (t == "voting-scoring" || t == "vote-then-score") {
    config.name = "vote-score";
    return config;
  }
  throw UsageError("unknown strategy: " + std::string(text));
}

EvalEntry evaluate_strategy(const StrategyConfig& config, const EvalContext& ctx) {
  if (ctx.corpus == nullptr || ctx.solutions == nullptr ||
      ctx.outcomes == nullptr || ctx.registry == nullptr) {
    throw UsageError("evaluation context is incomplete");
  }
  if (ctx.solutions->size() != ctx.outcomes->size()) {
    throw UsageError("solutions and outcomes are misaligned");
  }

  StrategyRuntime rt = build_runtime(config, ctx);
  std::map<std::string, PerQuestion> grouped = group_by_question(ctx);
  const PerQuestion empty_pq;

  EvalEntry entry;
  entry.strategy = config.display_name();
  std::map<std::string, std::size_t> category_slot;

  std::uint64_t index = 0;
  for (const QuestionRecord& record : *ctx.corpus) {
    auto it = grouped.find(record.id);
    const PerQuestion& pq = it != grouped.end() ? it->second : empty_pq;
    std::uint64_t seed = ctx.seed + index;

    RoutingDecision decision;
    bool correct = false;
    try {
      decision = route_question(config, rt, ctx, record, pq, seed);
      correct = decision_correct(decision, record, ctx, pq);
    } catch (const Error&) {
      // Per-question strategy failure tallies as incorrect.
      decision.strategy = config.display_name();
      decision.question_id = record.id;
      decision.abstain = true;
      decision.diagnostics.seed = seed;
    }

    entry.n += 1;
    entry.correct += correct ? 1 : 0;
    const std::string bucket =
        record.category ? *record.category : record.source_dataset;
    auto slot = category_slot.find(bucket);
    if (slot == category_slot.end()) {
      slot = category_slot.emplace(bucket, entry.categories.size()).first;
      entry.categories.emplace_back(bucket, CategoryStat{});
    }
    CategoryStat& stat = entry.categories[slot->second].second;
    stat.n += 1;
    stat.correct += correct ? 1 : 0;

    entry.decisions.push_back(std::move(decision));
    entry.corrects.push_back(correct);
    ++index;
  }
  entry.overall_accuracy =
      entry.n == 0 ? 0.0
                   : static_cast<double>(entry.correct) /
                         static_cast<double>(entry.n);
  return entry;
}

RenderedReport render_report(const std::vector<EvalEntry>& entries) {
  if (entries.empty()) {
    throw UsageError("render_report needs at least one evaluation entry");
  }
  // Column order: categories as first seen across entries.
  std::vector<std::string> columns;
  for (const EvalEntry& entry : entries) {
    for (const auto& [name, stat] : entry.categories) {
      if (std::find(columns.begin(), columns.end(), name) == columns.end()) {
        columns.push_back(name);
      }
    }
  }

  std::ostringstream csv;
  csv << "strategy";
  for (const std::string& col : columns) csv << "," << col;
  csv << ",average\n";

  std::ostringstream md;
  md << "| Strategy |";
  for (const std::string& col : columns) md << " " << col << " |";
  md << " Average |\n|---|";
  for (std::size_t i = 0; i <= columns.size(); ++i) md << "---|";
  md << "\n";

  for (const EvalEntry& entry : entries) {
    std::map<std::string, const CategoryStat*> stats;
    for (const auto& [name, stat] : entry.categories) stats[name] = &stat;

    csv << entry.strategy;
    md << "| " << entry.strategy << " |";
    double sum = 0.0;
    std::size_t populated = 0;
    for (const std::string& col : columns) {
      auto it = stats.find(col);
      if (it == stats.end() || it->second->n == 0) {
        csv << ",";
        md << " — |";
        continue;
      }
      double acc = it->second->accuracy();
      sum += acc;
      ++populated;
      csv << "," << format_double(acc);
      char pct[32];
      std::snprintf(pct, sizeof(pct), "%.2f", acc * 100.0);
      md << " " << pct << " |";
    }
    double average = populated == 0 ? 0.0 : sum / static_cast<double>(populated);
    csv << "," << format_double(average) << "\n";
    char pct[32];
    std::snprintf(pct, sizeof(pct), "%.2f", average * 100.0);
    md << " " << pct << " |\n";
  }

  return {csv.str(), md.str()};
}

}  // namespace polypot
