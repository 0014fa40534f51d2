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

#include "sandbox.hpp"

#include <utility>

#include "errors.hpp"
#include "process.hpp"
#include "util.hpp"

namespace fs = std::filesystem;

namespace polypot {

namespace {

using nlohmann::json;

constexpr std::string_view kSolutionPlaceholder = "{{SOLUTION}}";
constexpr std::string_view kPrecisionPlaceholder = "{{PRECISION}}";

std::vector<std::string> substitute_command(
    const std::vector<std::string>& tmpl, const fs::path& run_dir,
    const fs::path& source_path, const fs::path& exe_path) {
  std::vector<std::string> argv;
  argv.reserve(tmpl.size());
  for (const std::string& arg : tmpl) {
    std::string s = replace_all(arg, "{{FILE}}", source_path.string());
    s = replace_all(s, "{{DIR}}", run_dir.string());
    s = replace_all(s, "{{EXE}}", exe_path.string());
    argv.push_back(std::move(s));
  }
  return argv;
}

std::string diagnostics_tail(const std::string& text, std::size_t max_len = 2000) {
  if (text.size() <= max_len) return trim(text);
  return trim(text.substr(text.size() - max_len));
}

void probe_toolchain(const ToolchainSpec& spec) {
  for (const auto* cmd : {&spec.compile_command, &spec.run_command}) {
    if (cmd->empty()) continue;
    const std::string& head = cmd->front();
    if (head.find("{{") != std::string::npos || head.rfind("./", 0) == 0) {
      continue;
    }
    if (!find_executable(head)) {
      throw ToolchainUnavailable("binary '" + head + "' for language " +
                                 spec.language.id + " not found on PATH");
    }
  }
}

}  // namespace

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Ok:
      return "ok";
    case RunStatus::CompileError:
      return "compile_error";
    case RunStatus::RuntimeError:
      return "runtime_error";
    case RunStatus::Timeout:
      return "timeout";
    case RunStatus::ParseError:
      return "parse_error";
    case RunStatus::ToolchainMissing:
      return "toolchain_missing";
  }
  return "runtime_error";
}

RunStatus run_status_from_string(std::string_view name) {
  if (name == "ok") return RunStatus::Ok;
  if (name == "compile_error") return RunStatus::CompileError;
  if (name == "runtime_error") return RunStatus::RuntimeError;
  if (name == "timeout") return RunStatus::Timeout;
  if (name == "parse_error") return RunStatus::ParseError;
  if (name == "toolchain_missing") return RunStatus::ToolchainMissing;
  throw ParseError("unknown run status: " + std::string(name));
}

json RunOutcome::to_json() const {
  json j;
  j["question_id"] = question_id;
  j["language"] = language;
  j["status"] = std::string(to_string(status));
  j["stdout"] = stdout_text;
  j["wall_time_s"] = wall_time_s;
  if (answer) j["answer"] = answer->to_json();
  if (!detail.empty()) j["detail"] = detail;
  return j;
}

RunOutcome RunOutcome::from_json(const json& j) {
  RunOutcome o;
  o.question_id = j.at("question_id").get<std::string>();
  o.language = j.at("language").get<std::string>();
  o.status = run_status_from_string(j.at("status").get<std::string>());
  o.stdout_text = j.value("stdout", std::string());
  o.wall_time_s = j.value("wall_time_s", 0.0);
  if (j.contains("answer")) o.answer = AnswerValue::from_json(j["answer"]);
  o.detail = j.value("detail", std::string());
  return o;
}

std::string wrap_program(const ProgramSolution& solution,
                         const ToolchainSpec& spec) {
  if (solution.language != spec.language.id) {
    throw InvalidInput("solution language '" + solution.language +
                       "' does not match toolchain '" + spec.language.id + "'");
  }
  if (trim(solution.source).empty()) {
    throw InvalidInput("solution source is empty for question " +
                       solution.question_id);
  }
  if (solution.source.find("solution") == std::string::npos) {
    throw InvalidInput("source does not declare a 'solution' callable");
  }
  std::size_t placeholders =
      count_occurrences(spec.wrapper_template, kSolutionPlaceholder);
  if (placeholders != 1) {
    throw TemplateError("wrapper template for " + spec.language.id +
                        " must contain {{SOLUTION}} exactly once");
  }
  std::string unit =
      replace_all(spec.wrapper_template, kSolutionPlaceholder, solution.source);
  unit = replace_all(unit, kPrecisionPlaceholder,
                     std::to_string(spec.output_precision));
  if (spec.prelude.empty()) return unit;
  std::string prelude = spec.prelude;
  if (!prelude.empty() && prelude.back() != '\n') prelude.push_back('\n');
  return prelude + "\n" + unit;
}

SandboxExecutor::SandboxExecutor(const ToolchainRegistry& registry,
                                 fs::path workspace_root)
    : registry_(&registry), workspace_root_(std::move(workspace_root)) {
  if (workspace_root_.empty()) {
    workspace_root_ = fs::temp_directory_path() / "polypot";
  }
}

RunOutcome SandboxExecutor::execute_one(const ProgramSolution& solution) const {
  const ToolchainSpec& spec = registry_->at(solution.language);
  probe_toolchain(spec);

  RunOutcome outcome;
  outcome.question_id = solution.question_id;
  outcome.language = solution.language;

  std::string unit = wrap_program(solution, spec);

  TempDir run_dir(workspace_root_, "run");
  fs::path source_path = run_dir.path() / spec.source_file;
  fs::path exe_path = run_dir.path() / "prog";
  write_text_file(source_path, unit);

  if (!spec.compile_command.empty()) {
    auto argv = substitute_command(spec.compile_command, run_dir.path(),
                                   source_path, exe_path);
    ProcessResult compiled =
        run_process(argv, run_dir.path(), spec.compile_timeout_s);
    if (compiled.timed_out) {
      outcome.status = RunStatus::CompileError;
      outcome.detail = "compile step timed out";
      return outcome;
    }
    if (compiled.exit_code != 0) {
      outcome.status = RunStatus::CompileError;
      outcome.detail = diagnostics_tail(compiled.stderr_text);
      return outcome;
    }
  }

  auto argv = substitute_command(spec.run_command, run_dir.path(), source_path,
                                 exe_path);
  ProcessResult ran = run_process(argv, run_dir.path(), spec.timeout_s);
  outcome.stdout_text = ran.stdout_text;
  outcome.wall_time_s = ran.wall_time_s;
  if (ran.timed_out) {
    outcome.status = RunStatus::Timeout;
    outcome.detail = "killed after " + format_double(spec.timeout_s) + "s";
    return outcome;
  }
  if (ran.exit_code != 0) {
    outcome.status = RunStatus::RuntimeError;
    outcome.detail = diagnostics_tail(ran.stderr_text);
    if (outcome.detail.empty() && ran.term_signal != 0) {
      outcome.detail = "terminated by signal " + std::to_string(ran.term_signal);
    }
    return outcome;
  }
  try {
    outcome.answer = parse_answer(ran.stdout_text);
    outcome.status = RunStatus::Ok;
  } catch (const ParseError& e) {
    outcome.status = RunStatus::ParseError;
    outcome.detail = e.what();
  }
  return outcome;
}

std::vector<RunOutcome> SandboxExecutor::execute_batch(
    std::span<const ProgramSolution> solutions, int parallelism) const {
  if (parallelism < 1) {
    throw InvalidInput("parallelism must be >= 1");
  }
  std::vector<RunOutcome> outcomes(solutions.size());
  parallel_for(solutions.size(), parallelism, [&](std::size_t i) {
    const ProgramSolution& solution = solutions[i];
    try {
      outcomes[i] = execute_one(solution);
    } catch (const ToolchainUnavailable& e) {
      outcomes[i] = RunOutcome{solution.question_id, solution.language,
                               RunStatus::ToolchainMissing, "", 0.0,
                               std::nullopt, e.what()};
    } catch (const Error& e) {
      outcomes[i] = RunOutcome{solution.question_id, solution.language,
                               RunStatus::RuntimeError, "", 0.0, std::nullopt,
                               e.what()};
    }
  });
  return outcomes;
}

}  // namespace polypot
