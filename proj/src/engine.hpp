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

#ifndef POLYPOT_ENGINE_HPP
#define POLYPOT_ENGINE_HPP

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "answer.hpp"
#include "eval.hpp"
#include "gateway.hpp"
#include "json.hpp"
#include "sandbox.hpp"
#include "toolchain.hpp"

namespace polypot {

struct BackendConfig {
  std::string kind = "mock";  // mock | remote
  std::filesystem::path fixtures_dir;
  int embed_dim = 32;
  std::string base_url;
  std::string chat_model = "gpt-3.5-turbo";
  std::string embed_model = "text-embedding-3-small";
  std::string api_key_env = "POLYPOT_API_KEY";
  int max_retries = 3;
  double backoff_s = 0.25;
  int max_in_flight = 8;
};

struct EngineConfig {
  std::filesystem::path assets_dir;
  std::filesystem::path registry_path;
  std::filesystem::path fewshot_dir;
  std::filesystem::path prompts_dir;
  std::filesystem::path workspace_root;
  std::filesystem::path cache_dir;
  std::vector<std::string> languages;  // empty: all registry languages
  BackendConfig backend;
  Tolerance tol;
  std::uint64_t seed = 0;
  int parallelism = 4;

  static EngineConfig defaults();
  static EngineConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Ties the registry, sandbox executor and model gateway together and
/// exposes the pipeline commands the C API and CLI run. All heavyweight
/// inputs and outputs go through files.
class Engine {
 public:
  explicit Engine(EngineConfig config);

  const EngineConfig& config() const { return config_; }
  const ToolchainRegistry& registry() const { return active_registry_; }
  const SandboxExecutor& executor() const { return *executor_; }
  Gateway& gateway();

  nlohmann::json cmd_exec(const std::filesystem::path& solutions_path,
                          const std::filesystem::path& out_path);
  nlohmann::json cmd_datagen(const std::filesystem::path& corpus_path,
                             const std::filesystem::path& out_dir,
                             const nlohmann::json& options);
  /// solutions_path may be empty for route/eval: candidates are then
  /// generated through the model backend. Prior strategies generate only
  /// each question's selected language; posterior strategies generate
  /// every active language.
  nlohmann::json cmd_route(const std::string& strategy,
                           const std::filesystem::path& corpus_path,
                           const std::filesystem::path& solutions_path,
                           const std::filesystem::path& out_path,
                           const nlohmann::json& options);
  nlohmann::json cmd_eval(const std::vector<std::string>& strategies,
                          const std::filesystem::path& corpus_path,
                          const std::filesystem::path& solutions_path,
                          const std::filesystem::path& out_dir,
                          const nlohmann::json& options);
  nlohmann::json cmd_export_prefs(const std::filesystem::path& matrix_path,
                                  const std::filesystem::path& out_path);
  nlohmann::json cmd_export_scorer_data(const std::filesystem::path& matrix_path,
                                        const std::string& mode,
                                        const std::filesystem::path& out_dir);
  nlohmann::json cmd_stats(const std::filesystem::path& matrix_path,
                           const std::optional<std::filesystem::path>& corpus_path,
                           const std::filesystem::path& out_csv,
                           const std::filesystem::path& out_md);

 private:
  StrategyConfig strategy_from_options(const std::string& strategy,
                                       const nlohmann::json& options) const;
  EvalEntry run_strategy(const StrategyConfig& config,
                         const std::vector<QuestionRecord>& corpus,
                         const std::vector<ProgramSolution>& solutions,
                         const std::vector<RunOutcome>& outcomes);

  struct MaterializedRun {
    std::vector<ProgramSolution> solutions;
    std::vector<RunOutcome> outcomes;
    std::size_t generated = 0;
    std::size_t generation_failures = 0;
  };
  MaterializedRun materialize_solutions(
      const std::vector<StrategyConfig>& configs,
      const std::vector<QuestionRecord>& corpus,
      const std::filesystem::path& solutions_path,
      const nlohmann::json& options);

  EngineConfig config_;
  ToolchainRegistry full_registry_;
  ToolchainRegistry active_registry_;
  std::unique_ptr<SandboxExecutor> executor_;
  std::unique_ptr<Gateway> gateway_;
  std::optional<ScorerPrompts> prompts_;

  const ScorerPrompts* prompts();
};

}  // namespace polypot

#endif  // POLYPOT_ENGINE_HPP
