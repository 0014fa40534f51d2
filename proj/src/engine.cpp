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

#include "engine.hpp"

#include <cstdlib>
#include <map>
#include <set>

#include "datagen.hpp"
#include "errors.hpp"
#include "matrix.hpp"
#include "records.hpp"
#include "router.hpp"
#include "util.hpp"

#ifndef POLYPOT_DEFAULT_ASSETS_DIR
#define POLYPOT_DEFAULT_ASSETS_DIR ""
#endif

namespace fs = std::filesystem;

namespace polypot {

namespace {

using nlohmann::json;

fs::path path_or(const json& j, const char* field, const fs::path& fallback) {
  auto it = j.find(field);
  if (it == j.end() || it->is_null()) return fallback;
  return fs::path(it->get<std::string>());
}

GoldFormat format_from_options(const json& options) {
  if (options.contains("format")) {
    return gold_format_from_string(options["format"].get<std::string>());
  }
  return GoldFormat::PlainJSONL;
}

ExemplarSet exemplar_for(const QuestionRecord& record,
                         const std::string& exemplars) {
  if (exemplars == "auto") {
    return lower_ascii(record.source_dataset).find("math") != std::string::npos
               ? ExemplarSet::MATH
               : ExemplarSet::GSM8K;
  }
  return exemplar_set_from_string(exemplars);
}

GenerationOptions generation_options(const json& options) {
  GenerationOptions out;
  out.max_tokens = options.value("max_tokens", 1024);
  out.temperature = options.value("temperature", 0.7);
  out.model_id = options.value("model", std::string());
  return out;
}

bool is_posterior_strategy(const StrategyConfig& config) {
  return config.name == "self-consistency" ||
         config.name == "posterior-scorer" || config.name == "vote-score" ||
         config.name == "upper-bound";
}

}  // namespace

EngineConfig EngineConfig::defaults() {
  EngineConfig config;
  config.assets_dir = fs::path(POLYPOT_DEFAULT_ASSETS_DIR);
  if (const char* env = std::getenv("POLYPOT_ASSETS")) {
    config.assets_dir = fs::path(env);
  }
  if (!config.assets_dir.empty()) {
    config.registry_path = config.assets_dir / "toolchains.json";
    config.fewshot_dir = config.assets_dir / "fewshot";
    config.prompts_dir = config.assets_dir / "prompts";
  }
  if (const char* env = std::getenv("POLYPOT_WORKSPACE")) {
    config.workspace_root = fs::path(env);
  } else {
    config.workspace_root = fs::temp_directory_path() / "polypot";
  }
  config.cache_dir = config.workspace_root / "cache";
  return config;
}

EngineConfig EngineConfig::from_json(const json& j) {
  EngineConfig config = defaults();
  if (j.contains("assets_dir") && !j["assets_dir"].is_null()) {
    config.assets_dir = fs::path(j["assets_dir"].get<std::string>());
    config.registry_path = config.assets_dir / "toolchains.json";
    config.fewshot_dir = config.assets_dir / "fewshot";
    config.prompts_dir = config.assets_dir / "prompts";
  }
  config.registry_path = path_or(j, "registry_path", config.registry_path);
  config.fewshot_dir = path_or(j, "fewshot_dir", config.fewshot_dir);
  config.prompts_dir = path_or(j, "prompts_dir", config.prompts_dir);
  config.workspace_root = path_or(j, "workspace_root", config.workspace_root);
  config.cache_dir = path_or(j, "cache_dir", config.cache_dir);
  if (j.contains("languages") && !j["languages"].is_null()) {
    config.languages = j["languages"].get<std::vector<std::string>>();
  }
  if (j.contains("tolerance")) {
    config.tol.abs_tol = j["tolerance"].value("abs", config.tol.abs_tol);
    config.tol.rel_tol = j["tolerance"].value("rel", config.tol.rel_tol);
  }
  config.seed = j.value("seed", config.seed);
  config.parallelism = j.value("parallelism", config.parallelism);
  if (j.contains("backend")) {
    const json& b = j["backend"];
    config.backend.kind = b.value("kind", config.backend.kind);
    config.backend.fixtures_dir =
        path_or(b, "fixtures_dir", config.backend.fixtures_dir);
    config.backend.embed_dim = b.value("embed_dim", config.backend.embed_dim);
    config.backend.base_url = b.value("base_url", config.backend.base_url);
    config.backend.chat_model = b.value("chat_model", config.backend.chat_model);
    config.backend.embed_model =
        b.value("embed_model", config.backend.embed_model);
    config.backend.api_key_env =
        b.value("api_key_env", config.backend.api_key_env);
    config.backend.max_retries =
        b.value("max_retries", config.backend.max_retries);
    config.backend.backoff_s = b.value("backoff_s", config.backend.backoff_s);
    config.backend.max_in_flight =
        b.value("max_in_flight", config.backend.max_in_flight);
  }
  return config;
}

json EngineConfig::to_json() const {
  json j;
  j["assets_dir"] = assets_dir.string();
  j["registry_path"] = registry_path.string();
  j["fewshot_dir"] = fewshot_dir.string();
  j["prompts_dir"] = prompts_dir.string();
  j["workspace_root"] = workspace_root.string();
  j["cache_dir"] = cache_dir.string();
  j["languages"] = languages;
  j["tolerance"] = {{"abs", tol.abs_tol}, {"rel", tol.rel_tol}};
  j["seed"] = seed;
  j["parallelism"] = parallelism;
  j["backend"] = {{"kind", backend.kind},
                  {"fixtures_dir", backend.fixtures_dir.string()},
                  {"embed_dim", backend.embed_dim},
                  {"base_url", backend.base_url},
                  {"chat_model", backend.chat_model},
                  {"embed_model", backend.embed_model},
                  {"api_key_env", backend.api_key_env},
                  {"max_retries", backend.max_retries},
                  {"backoff_s", backend.backoff_s},
                  {"max_in_flight", backend.max_in_flight}};
  return j;
}

Engine::Engine(EngineConfig config) : config_(std::move(config)) {
  if (config_.registry_path.empty()) {
    throw ConfigError(
        "no toolchain registry configured (set assets_dir or registry_path)");
  }
  full_registry_ = ToolchainRegistry::load(config_.registry_path);
  active_registry_ = config_.languages.empty()
                         ? full_registry_
                         : full_registry_.subset(config_.languages);
  if (active_registry_.empty()) {
    throw ConfigError("active language set is empty");
  }
  if (config_.parallelism < 1) {
    throw ConfigError("parallelism must be >= 1");
  }
  executor_ = std::make_unique<SandboxExecutor>(active_registry_,
                                                config_.workspace_root);
}

Gateway& Engine::gateway() {
  if (gateway_) return *gateway_;
  std::unique_ptr<ModelBackend> backend;
  if (config_.backend.kind == "mock") {
    if (config_.backend.fixtures_dir.empty()) {
      throw ConfigError("mock backend needs backend.fixtures_dir");
    }
    backend = std::make_unique<MockBackend>(
        config_.backend.fixtures_dir, config_.backend.embed_dim, "mock-chat",
        "mock-embed");
  } else if (config_.backend.kind == "remote") {
    RemoteBackendConfig remote;
    remote.base_url = config_.backend.base_url;
    remote.chat_model = config_.backend.chat_model;
    remote.embed_model = config_.backend.embed_model;
    remote.max_retries = config_.backend.max_retries;
    remote.backoff_s = config_.backend.backoff_s;
    if (const char* key = std::getenv(config_.backend.api_key_env.c_str())) {
      remote.api_key = key;
    } else if (const char* fallback = std::getenv("OPENAI_API_KEY")) {
      remote.api_key = fallback;
    }
    backend = std::make_unique<RemoteBackend>(std::move(remote));
  } else {
    throw ConfigError("unknown backend kind: " + config_.backend.kind);
  }
  GatewayOptions options;
  options.cache_dir = config_.cache_dir;
  options.max_in_flight = config_.backend.max_in_flight;
  gateway_ = std::make_unique<Gateway>(std::move(backend), options);
  return *gateway_;
}

const ScorerPrompts* Engine::prompts() {
  if (!prompts_) {
    prompts_ = ScorerPrompts::load(config_.prompts_dir);
  }
  return &*prompts_;
}

json Engine::cmd_exec(const fs::path& solutions_path, const fs::path& out_path) {
  std::vector<ProgramSolution> solutions = load_solutions(solutions_path);
  std::vector<RunOutcome> outcomes =
      executor_->execute_batch(solutions, config_.parallelism);
  save_outcomes(out_path, outcomes);
  std::int64_t ok = 0;
  for (const auto& o : outcomes) ok += o.ok() ? 1 : 0;
  return {{"solutions", solutions.size()},
          {"ok", ok},
          {"outcomes_path", out_path.string()}};
}

json Engine::cmd_datagen(const fs::path& corpus_path, const fs::path& out_dir,
                         const json& options) {
  std::vector<QuestionRecord> corpus =
      load_corpus(corpus_path, format_from_options(options));
  const std::string exemplars = options.value("exemplars", std::string("auto"));

  std::vector<ObjectLanguage> languages;
  for (const auto& spec : active_registry_.specs()) {
    languages.push_back(spec.language);
  }
  GenerationOptions gen_options = generation_options(options);

  Gateway& gw = gateway();
  std::vector<MultiLangGeneration> generations(corpus.size());
  parallel_for(corpus.size(), config_.parallelism, [&](std::size_t i) {
    const QuestionRecord& record = corpus[i];
    generations[i] =
        generate_multilang(record, languages, gw, exemplar_for(record, exemplars),
                           config_.fewshot_dir, gen_options);
  });

  std::vector<ProgramSolution> solutions;
  std::vector<GenerationFailure> failures;
  for (auto& gen : generations) {
    for (auto& s : gen.solutions) solutions.push_back(std::move(s));
    for (auto& f : gen.failures) failures.push_back(std::move(f));
  }

  FilterResult filtered = execute_filter(solutions, corpus, *executor_,
                                         config_.tol, config_.parallelism);

  fs::create_directories(out_dir);
  SftTemplate tmpl = SftTemplate::load(config_.prompts_dir);
  write_jsonl(out_dir / "sft.jsonl",
              emit_sft(filtered.kept, corpus, tmpl, active_registry_));

  // Dropped programs feed the preference exports later.
  std::vector<ProgramSolution> rejected;
  std::map<std::pair<std::string, std::string>, bool> kept_set;
  for (const auto& s : filtered.kept) {
    kept_set[{s.question_id, s.language}] = true;
  }
  for (const auto& s : solutions) {
    if (kept_set.find({s.question_id, s.language}) == kept_set.end()) {
      rejected.push_back(s);
    }
  }
  save_solutions(out_dir / "rejected.jsonl", rejected);

  filtered.matrix.save(out_dir / "matrix.json");

  std::map<std::string, std::int64_t> origin_counts;
  for (const auto& record : corpus) origin_counts[record.source_dataset] += 1;
  DatasetStats stats = dataset_stats(filtered.matrix, origin_counts);
  write_text_file_atomic(out_dir / "stats.csv", stats.to_csv());
  write_text_file_atomic(out_dir / "stats.md",
                         stats.to_markdown(active_registry_));

  std::vector<json> failure_lines;
  for (const auto& f : failures) {
    failure_lines.push_back({{"question_id", f.question_id},
                             {"language", f.language},
                             {"message", f.message}});
  }
  write_jsonl(out_dir / "failures.jsonl", failure_lines);

  json summary = {{"questions", corpus.size()},
                  {"generated", solutions.size()},
                  {"kept", filtered.kept.size()},
                  {"rejected", rejected.size()},
                  {"generation_failures", failures.size()},
                  {"out_dir", out_dir.string()}};
  if (!filtered.warnings.empty()) summary["warnings"] = filtered.warnings;
  return summary;
}

StrategyConfig Engine::strategy_from_options(const std::string& strategy,
                                             const json& options) const {
  StrategyConfig config = parse_strategy(strategy);
  config.threshold = options.value("threshold", config.threshold);
  if (options.contains("train_matrix")) {
    config.train_matrix = fs::path(options["train_matrix"].get<std::string>());
  }
  return config;
}

EvalEntry Engine::run_strategy(const StrategyConfig& config,
                               const std::vector<QuestionRecord>& corpus,
                               const std::vector<ProgramSolution>& solutions,
                               const std::vector<RunOutcome>& outcomes) {
  EvalContext ctx;
  ctx.corpus = &corpus;
  ctx.solutions = &solutions;
  ctx.outcomes = &outcomes;
  ctx.registry = &active_registry_;
  ctx.tol = config_.tol;
  ctx.seed = config_.seed;
  const bool needs_gateway =
      config.name == "prior-scorer" || config.name == "posterior-scorer" ||
      config.name == "vote-score" || config.name == "case-based";
  if (needs_gateway) {
    ctx.gateway = &gateway();
    ctx.prompts = prompts();
  }
  return evaluate_strategy(config, ctx);
}

Engine::MaterializedRun Engine::materialize_solutions(
    const std::vector<StrategyConfig>& configs,
    const std::vector<QuestionRecord>& corpus, const fs::path& solutions_path,
    const json& options) {
  MaterializedRun run;
  if (!solutions_path.empty()) {
    run.solutions = load_solutions(solutions_path);
    run.outcomes = executor_->execute_batch(run.solutions, config_.parallelism);
    return run;
  }

  // No pre-generated solutions: produce them through the model backend.
  // Posterior strategies need every language; a purely prior strategy
  // set only needs each question's selected language, which is the
  // whole point of routing before generation.
  const std::string exemplars = options.value("exemplars", std::string("auto"));
  GenerationOptions gen_options = generation_options(options);
  Gateway& gw = gateway();

  bool need_all_languages = false;
  for (const StrategyConfig& config : configs) {
    if (is_posterior_strategy(config)) need_all_languages = true;
  }

  std::vector<std::vector<ObjectLanguage>> todo(corpus.size());
  if (need_all_languages) {
    for (auto& langs : todo) {
      for (const auto& spec : active_registry_.specs()) {
        langs.push_back(spec.language);
      }
    }
  } else {
    // Route first on the question alone, then generate only what the
    // strategies selected.
    std::vector<ProgramSolution> no_solutions;
    std::vector<RunOutcome> no_outcomes;
    std::map<std::string, std::set<std::string>> selected;
    for (const StrategyConfig& config : configs) {
      EvalEntry routed = run_strategy(config, corpus, no_solutions, no_outcomes);
      for (const RoutingDecision& d : routed.decisions) {
        if (!d.abstain) selected[d.question_id].insert(d.chosen_language);
      }
    }
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      for (const std::string& lang : selected[corpus[i].id]) {
        todo[i].push_back(active_registry_.at(lang).language);
      }
    }
  }

  std::vector<MultiLangGeneration> generations(corpus.size());
  parallel_for(corpus.size(), config_.parallelism, [&](std::size_t i) {
    generations[i] = generate_multilang(corpus[i], todo[i], gw,
                                        exemplar_for(corpus[i], exemplars),
                                        config_.fewshot_dir, gen_options);
  });
  for (auto& gen : generations) {
    run.generation_failures += gen.failures.size();
    for (auto& s : gen.solutions) run.solutions.push_back(std::move(s));
  }
  run.generated = run.solutions.size();
  run.outcomes = executor_->execute_batch(run.solutions, config_.parallelism);
  return run;
}

json Engine::cmd_route(const std::string& strategy, const fs::path& corpus_path,
                       const fs::path& solutions_path, const fs::path& out_path,
                       const json& options) {
  std::vector<QuestionRecord> corpus =
      load_corpus(corpus_path, format_from_options(options));
  StrategyConfig config = strategy_from_options(strategy, options);
  MaterializedRun run =
      materialize_solutions({config}, corpus, solutions_path, options);
  EvalEntry entry = run_strategy(config, corpus, run.solutions, run.outcomes);
  std::vector<json> lines;
  lines.reserve(entry.decisions.size());
  for (const auto& d : entry.decisions) lines.push_back(d.to_json());
  write_jsonl(out_path, lines);
  json summary = {{"strategy", entry.strategy},
                  {"questions", entry.n},
                  {"decisions_path", out_path.string()}};
  if (solutions_path.empty()) {
    summary["generated"] = run.generated;
    summary["generation_failures"] = run.generation_failures;
  }
  return summary;
}

json Engine::cmd_eval(const std::vector<std::string>& strategies,
                      const fs::path& corpus_path, const fs::path& solutions_path,
                      const fs::path& out_dir, const json& options) {
  if (strategies.empty()) {
    throw UsageError("eval needs at least one strategy");
  }
  std::vector<QuestionRecord> corpus =
      load_corpus(corpus_path, format_from_options(options));
  std::vector<StrategyConfig> configs;
  configs.reserve(strategies.size());
  for (const std::string& name : strategies) {
    configs.push_back(strategy_from_options(name, options));
  }
  MaterializedRun run =
      materialize_solutions(configs, corpus, solutions_path, options);
  const std::vector<ProgramSolution>& solutions = run.solutions;
  const std::vector<RunOutcome>& outcomes = run.outcomes;

  fs::create_directories(out_dir);
  std::vector<EvalEntry> entries;
  std::vector<json> decision_lines;
  json summary_entries = json::array();
  fs::path decisions_path = out_dir / "decisions.jsonl";
  for (const StrategyConfig& config : configs) {
    EvalEntry entry = run_strategy(config, corpus, solutions, outcomes);
    for (std::size_t i = 0; i < entry.decisions.size(); ++i) {
      json line = entry.decisions[i].to_json();
      line["correct"] = static_cast<bool>(entry.corrects[i]);
      decision_lines.push_back(std::move(line));
    }
    summary_entries.push_back({{"strategy", entry.strategy},
                               {"accuracy", entry.overall_accuracy},
                               {"n", entry.n},
                               {"correct", entry.correct}});
    entries.push_back(std::move(entry));
  }
  write_jsonl(decisions_path, decision_lines);

  RenderedReport report = render_report(entries);
  write_text_file_atomic(out_dir / "report.csv", report.csv);
  write_text_file_atomic(out_dir / "report.md", report.markdown);

  json summary = {{"strategies", summary_entries},
                  {"report_csv", (out_dir / "report.csv").string()},
                  {"report_md", (out_dir / "report.md").string()},
                  {"decisions_path", decisions_path.string()}};
  if (solutions_path.empty()) {
    summary["generated"] = run.generated;
    summary["generation_failures"] = run.generation_failures;
  }
  return summary;
}

json Engine::cmd_export_prefs(const fs::path& matrix_path,
                              const fs::path& out_path) {
  CorrectnessMatrix matrix = CorrectnessMatrix::load(matrix_path);
  SftTemplate tmpl = SftTemplate::load(config_.prompts_dir);
  std::vector<json> pairs =
      export_preference_pairs(matrix, tmpl, active_registry_);
  write_jsonl(out_path, pairs);
  return {{"pairs", pairs.size()}, {"out_path", out_path.string()}};
}

json Engine::cmd_export_scorer_data(const fs::path& matrix_path,
                                    const std::string& mode,
                                    const fs::path& out_dir) {
  CorrectnessMatrix matrix = CorrectnessMatrix::load(matrix_path);
  ScorerExportMode export_mode = scorer_export_mode_from_string(mode);
  auto per_language = export_scorer_training(matrix, export_mode);
  fs::create_directories(out_dir);
  json files = json::object();
  std::int64_t total = 0;
  for (const auto& [language, lines] : per_language) {
    fs::path path = out_dir / ("scorer_" + mode + "_" + language + ".jsonl");
    write_jsonl(path, lines);
    files[language] = path.string();
    total += static_cast<std::int64_t>(lines.size());
  }
  return {{"mode", mode}, {"records", total}, {"files", files}};
}

json Engine::cmd_stats(const fs::path& matrix_path,
                       const std::optional<fs::path>& corpus_path,
                       const fs::path& out_csv, const fs::path& out_md) {
  CorrectnessMatrix matrix = CorrectnessMatrix::load(matrix_path);
  std::map<std::string, std::int64_t> origin_counts;
  if (corpus_path) {
    for (const auto& record :
         load_corpus(*corpus_path, GoldFormat::PlainJSONL)) {
      origin_counts[record.source_dataset] += 1;
    }
  }
  DatasetStats stats = dataset_stats(matrix, origin_counts);
  write_text_file_atomic(out_csv, stats.to_csv());
  write_text_file_atomic(out_md, stats.to_markdown(active_registry_));
  return {{"datasets", stats.rows.size()},
          {"csv", out_csv.string()},
          {"md", out_md.string()}};
}

}  // namespace polypot
