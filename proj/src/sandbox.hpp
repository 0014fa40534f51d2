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

#ifndef POLYPOT_SANDBOX_HPP
#define POLYPOT_SANDBOX_HPP

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "answer.hpp"
#include "json.hpp"
#include "toolchain.hpp"

namespace polypot {

/// One candidate program: a bare function named "solution" in some object
/// language.
struct ProgramSolution {
  std::string question_id;
  std::string language;
  std::string source;
};

enum class RunStatus {
  Ok,
  CompileError,
  RuntimeError,
  Timeout,
  ParseError,
  ToolchainMissing,
};

std::string_view to_string(RunStatus status);
RunStatus run_status_from_string(std::string_view name);

struct RunOutcome {
  std::string question_id;
  std::string language;
  RunStatus status = RunStatus::RuntimeError;
  std::string stdout_text;
  double wall_time_s = 0.0;
  std::optional<AnswerValue> answer;  // present iff status == Ok
  std::string detail;                 // compiler/runtime diagnostics tail

  bool ok() const { return status == RunStatus::Ok; }
  nlohmann::json to_json() const;
  static RunOutcome from_json(const nlohmann::json& j);
};

/// Render the complete runnable unit: prelude, then the wrapper template
/// with {{SOLUTION}} (and optional {{PRECISION}}) substituted. Throws
/// TemplateError when the placeholder is absent and InvalidInput when the
/// source does not declare a solution() callable.
std::string wrap_program(const ProgramSolution& solution,
                         const ToolchainSpec& spec);

/// Executes wrapped programs in fresh temp directories under a workspace
/// root, one child process per run.
class SandboxExecutor {
 public:
  SandboxExecutor(const ToolchainRegistry& registry,
                  std::filesystem::path workspace_root);

  /// Throws ToolchainUnavailable when the configured binary is absent;
  /// every other failure mode is reported in the outcome status.
  RunOutcome execute_one(const ProgramSolution& solution) const;

  /// Input-order-aligned outcomes; per-item errors become per-item
  /// outcomes (ToolchainMissing and friends), never a batch abort.
  std::vector<RunOutcome> execute_batch(std::span<const ProgramSolution> solutions,
                                        int parallelism) const;

  const ToolchainRegistry& registry() const { return *registry_; }
  const std::filesystem::path& workspace_root() const { return workspace_root_; }

 private:
  const ToolchainRegistry* registry_;
  std::filesystem::path workspace_root_;
};

}  // namespace polypot

#endif  // POLYPOT_SANDBOX_HPP
