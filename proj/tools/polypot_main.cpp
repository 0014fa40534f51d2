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

// Thin shell over the polypot C API: assembles the engine configuration
// from a config file plus flag overrides (flags win) and dispatches one
// pipeline command per invocation.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "polypot.h"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitDomainError = 1;
constexpr int kExitUsage = 2;

struct GlobalFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> parallelism;
  std::optional<double> tolerance_abs;
  std::optional<double> tolerance_rel;
  std::optional<std::string> languages;  // comma separated
  std::optional<std::string> backend;    // mock | remote
  std::optional<std::string> assets_dir;
  std::optional<std::string> workspace;
  std::optional<std::string> fixtures_dir;
  std::optional<std::string> base_url;
};

json default_config() {
  size_t needed = polypot_default_config(nullptr, 0);
  std::string buffer(needed, '\0');
  polypot_default_config(buffer.data(), buffer.size());
  buffer.resize(needed - 1);  // drop the NUL
  return json::parse(buffer);
}

std::vector<std::string> split_csv(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

json build_engine_config(const GlobalFlags& flags) {
  json config = default_config();
  if (!flags.config_path.empty()) {
    std::ifstream in(flags.config_path);
    if (!in) {
      throw std::runtime_error("cannot read config file: " + flags.config_path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    json file_config = json::parse(ss.str());
    config.merge_patch(file_config);
  }
  if (flags.assets_dir) {
    config["assets_dir"] = *flags.assets_dir;
    config.erase("registry_path");
    config.erase("fewshot_dir");
    config.erase("prompts_dir");
  }
  if (flags.seed) config["seed"] = *flags.seed;
  if (flags.parallelism) config["parallelism"] = *flags.parallelism;
  if (flags.tolerance_abs) config["tolerance"]["abs"] = *flags.tolerance_abs;
  if (flags.tolerance_rel) config["tolerance"]["rel"] = *flags.tolerance_rel;
  if (flags.languages) config["languages"] = split_csv(*flags.languages);
  if (flags.backend) config["backend"]["kind"] = *flags.backend;
  if (flags.fixtures_dir) config["backend"]["fixtures_dir"] = *flags.fixtures_dir;
  if (flags.base_url) config["backend"]["base_url"] = *flags.base_url;
  if (flags.workspace) config["workspace_root"] = *flags.workspace;
  return config;
}

int finish(polypot_engine* engine, polypot_status status) {
  if (status == POLYPOT_OK) {
    const char* summary = polypot_engine_last_summary(engine);
    if (summary != nullptr && *summary != '\0') {
      std::cout << json::parse(summary).dump(2) << "\n";
    }
    return kExitOk;
  }
  std::cerr << "polypot: " << polypot_status_name(status) << ": "
            << polypot_engine_last_error(engine) << "\n";
  return status == POLYPOT_ERR_USAGE ? kExitUsage : kExitDomainError;
}

std::string options_string(const json& options) {
  return options.empty() ? std::string() : options.dump();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"polypot: multilingual program-of-thought execution, routing "
               "and dataset construction"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(polypot_version()));

  GlobalFlags flags;
  app.add_option("--config", flags.config_path,
                 "Engine configuration JSON file (flags override it)");
  app.add_option("--seed", flags.seed, "Base random seed (default 0)");
  app.add_option("--parallelism", flags.parallelism,
                 "Worker pool size for sandboxed execution");
  app.add_option("--tolerance-abs", flags.tolerance_abs,
                 "Absolute numeric answer tolerance");
  app.add_option("--tolerance-rel", flags.tolerance_rel,
                 "Relative numeric answer tolerance");
  app.add_option("--languages", flags.languages,
                 "Comma-separated active object languages "
                 "(default: all registry languages)");
  app.add_option("--backend", flags.backend, "Model backend: mock or remote")
      ->check(CLI::IsMember({"mock", "remote"}));
  app.add_option("--assets", flags.assets_dir,
                 "Assets directory (toolchains, wrappers, few-shot files)");
  app.add_option("--workspace", flags.workspace,
                 "Workspace root for sandboxed runs");
  app.add_option("--fixtures", flags.fixtures_dir,
                 "Mock backend fixture directory");
  app.add_option("--base-url", flags.base_url,
                 "Remote backend base URL (e.g. https://api.openai.com/v1)");

  // datagen
  auto* cmd_datagen = app.add_subcommand(
      "datagen", "Generate, execute-and-filter, and export training data");
  std::string dg_corpus, dg_out = "datagen-out", dg_format, dg_exemplars;
  std::optional<int> dg_max_tokens;
  std::optional<double> dg_temperature;
  cmd_datagen->add_option("--corpus", dg_corpus, "Corpus JSONL file")
      ->required();
  cmd_datagen->add_option("--out-dir", dg_out, "Output directory");
  cmd_datagen->add_option("--format", dg_format,
                          "Gold format: plain, gsm8k or math");
  cmd_datagen->add_option("--exemplars", dg_exemplars,
                          "Few-shot set: auto, gsm8k or math");
  cmd_datagen->add_option("--max-tokens", dg_max_tokens,
                          "Generation token budget");
  cmd_datagen->add_option("--temperature", dg_temperature,
                          "Generation temperature");

  // exec
  auto* cmd_exec = app.add_subcommand(
      "exec", "Execute a solutions file in the sandbox and record outcomes");
  std::string ex_solutions, ex_out = "outcomes.jsonl";
  cmd_exec->add_option("--solutions", ex_solutions, "Solutions JSONL file")
      ->required();
  cmd_exec->add_option("--out", ex_out, "Outcomes JSONL output path");

  // route
  auto* cmd_route = app.add_subcommand(
      "route", "Run one selection strategy and write routing decisions");
  std::string rt_strategy, rt_corpus, rt_solutions, rt_out = "decisions.jsonl";
  std::string rt_format, rt_train_matrix;
  std::optional<int> rt_threshold;
  cmd_route->add_option("--strategy", rt_strategy, "Strategy name")->required();
  cmd_route->add_option("--corpus", rt_corpus, "Corpus JSONL file")->required();
  cmd_route->add_option("--solutions", rt_solutions,
                        "Solutions JSONL file (omit to generate candidates "
                        "through the model backend)");
  cmd_route->add_option("--out", rt_out, "Decisions JSONL output path");
  cmd_route->add_option("--format", rt_format, "Gold format");
  cmd_route->add_option("--train-matrix", rt_train_matrix,
                        "Correctness matrix for case-based routing");
  cmd_route->add_option("--threshold", rt_threshold,
                        "Case-based correct-neighbor threshold");

  // eval
  auto* cmd_eval = app.add_subcommand(
      "eval", "Evaluate strategies over a corpus and render reports");
  std::vector<std::string> ev_strategies;
  std::string ev_corpus, ev_solutions, ev_out = "eval-out";
  std::string ev_format, ev_train_matrix;
  std::optional<int> ev_threshold;
  cmd_eval
      ->add_option("--strategy", ev_strategies,
                   "Strategy name (repeatable or comma-separated)")
      ->required();
  cmd_eval->add_option("--corpus", ev_corpus, "Corpus JSONL file")->required();
  cmd_eval->add_option("--solutions", ev_solutions,
                       "Solutions JSONL file (omit to generate candidates "
                       "through the model backend)");
  cmd_eval->add_option("--out-dir", ev_out, "Report output directory");
  cmd_eval->add_option("--format", ev_format, "Gold format");
  cmd_eval->add_option("--train-matrix", ev_train_matrix,
                       "Correctness matrix for case-based routing");
  cmd_eval->add_option("--threshold", ev_threshold,
                       "Case-based correct-neighbor threshold");

  // export-prefs
  auto* cmd_prefs = app.add_subcommand(
      "export-prefs", "Export preference pairs from a correctness matrix");
  std::string pf_matrix, pf_out = "preference_pairs.jsonl";
  cmd_prefs->add_option("--matrix", pf_matrix, "Correctness matrix JSON file")
      ->required();
  cmd_prefs->add_option("--out", pf_out, "Preference pairs JSONL output path");

  // export-scorer-data
  auto* cmd_scorer = app.add_subcommand(
      "export-scorer-data", "Export per-language scorer training data");
  std::string sc_matrix, sc_mode, sc_out = "scorer-data";
  cmd_scorer->add_option("--matrix", sc_matrix, "Correctness matrix JSON file")
      ->required();
  cmd_scorer->add_option("--mode", sc_mode, "prior or posterior")
      ->required()
      ->check(CLI::IsMember({"prior", "posterior"}));
  cmd_scorer->add_option("--out-dir", sc_out, "Output directory");

  // stats
  auto* cmd_stats = app.add_subcommand(
      "stats", "Render kept-sample counts from a correctness matrix");
  std::string st_matrix, st_corpus, st_csv = "stats.csv", st_md = "stats.md";
  cmd_stats->add_option("--matrix", st_matrix, "Correctness matrix JSON file")
      ->required();
  cmd_stats->add_option("--corpus", st_corpus,
                        "Corpus JSONL for origin counts (optional)");
  cmd_stats->add_option("--out-csv", st_csv, "CSV output path");
  cmd_stats->add_option("--out-md", st_md, "Markdown output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  std::string config_json;
  try {
    config_json = build_engine_config(flags).dump();
  } catch (const std::exception& e) {
    std::cerr << "polypot: " << e.what() << "\n";
    return kExitDomainError;
  }

  polypot_engine* engine = nullptr;
  polypot_status status = polypot_engine_create(config_json.c_str(), &engine);
  if (status != POLYPOT_OK) {
    std::cerr << "polypot: engine creation failed ("
              << polypot_status_name(status) << ")\n";
    return status == POLYPOT_ERR_USAGE ? kExitUsage : kExitDomainError;
  }

  int exit_code = kExitDomainError;
  if (cmd_datagen->parsed()) {
    json options;
    if (!dg_format.empty()) options["format"] = dg_format;
    if (!dg_exemplars.empty()) options["exemplars"] = dg_exemplars;
    if (dg_max_tokens) options["max_tokens"] = *dg_max_tokens;
    if (dg_temperature) options["temperature"] = *dg_temperature;
    status = polypot_run_datagen(engine, dg_corpus.c_str(), dg_out.c_str(),
                                 options_string(options).c_str());
    exit_code = finish(engine, status);
  } else if (cmd_exec->parsed()) {
    status = polypot_run_exec(engine, ex_solutions.c_str(), ex_out.c_str());
    exit_code = finish(engine, status);
  } else if (cmd_route->parsed()) {
    json options;
    if (!rt_format.empty()) options["format"] = rt_format;
    if (!rt_train_matrix.empty()) options["train_matrix"] = rt_train_matrix;
    if (rt_threshold) options["threshold"] = *rt_threshold;
    status = polypot_run_route(engine, rt_strategy.c_str(), rt_corpus.c_str(),
                               rt_solutions.c_str(), rt_out.c_str(),
                               options_string(options).c_str());
    exit_code = finish(engine, status);
  } else if (cmd_eval->parsed()) {
    json options;
    if (!ev_format.empty()) options["format"] = ev_format;
    if (!ev_train_matrix.empty()) options["train_matrix"] = ev_train_matrix;
    if (ev_threshold) options["threshold"] = *ev_threshold;
    std::string strategies;
    for (const std::string& s : ev_strategies) {
      if (!strategies.empty()) strategies += ",";
      strategies += s;
    }
    status = polypot_run_eval(engine, strategies.c_str(), ev_corpus.c_str(),
                              ev_solutions.c_str(), ev_out.c_str(),
                              options_string(options).c_str());
    exit_code = finish(engine, status);
  } else if (cmd_prefs->parsed()) {
    status = polypot_run_export_prefs(engine, pf_matrix.c_str(), pf_out.c_str());
    exit_code = finish(engine, status);
  } else if (cmd_scorer->parsed()) {
    status = polypot_run_export_scorer_data(engine, sc_matrix.c_str(),
                                            sc_mode.c_str(), sc_out.c_str());
    exit_code = finish(engine, status);
  } else if (cmd_stats->parsed()) {
    status = polypot_run_stats(engine, st_matrix.c_str(),
                               st_corpus.empty() ? nullptr : st_corpus.c_str(),
                               st_csv.c_str(), st_md.c_str());
    exit_code = finish(engine, status);
  }

  polypot_engine_destroy(engine);
  return exit_code;
}
