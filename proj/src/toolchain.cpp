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

#include "toolchain.hpp"

#include <cctype>
#include <set>

#include "errors.hpp"
#include "json.hpp"
#include "util.hpp"

namespace fs = std::filesystem;

namespace polypot {

namespace {

using nlohmann::json;

bool is_lower_token(std::string_view id) {
  if (id.empty()) return false;
  for (char c : id) {
    unsigned char u = static_cast<unsigned char>(c);
    if (!(std::islower(u) || std::isdigit(u) || c == '-' || c == '_' ||
          c == '+')) {
      return false;
    }
  }
  return true;
}

std::vector<std::string> argv_from_json(const json& j, const char* field) {
  std::vector<std::string> out;
  auto it = j.find(field);
  if (it == j.end() || it->is_null()) return out;
  if (!it->is_array()) {
    throw ConfigError(std::string(field) + " must be an argv array");
  }
  for (const auto& item : *it) {
    out.push_back(item.get<std::string>());
  }
  return out;
}

/// A command head that is a produced artifact ({{EXE}}, ./a.out) is not
/// probed; only real toolchain binaries are.
bool probeable_head(const std::string& head) {
  if (head.find("{{") != std::string::npos) return false;
  if (head.rfind("./", 0) == 0) return false;
  return true;
}

}  // namespace

void validate_toolchain_spec(const ToolchainSpec& spec) {
  if (!is_lower_token(spec.language.id)) {
    throw ConfigError("language id must be a non-empty lowercase token: '" +
                      spec.language.id + "'");
  }
  if (spec.run_command.empty()) {
    throw ConfigError("run_cmd must be non-empty for language " +
                      spec.language.id);
  }
  if (spec.timeout_s <= 0 || spec.compile_timeout_s <= 0) {
    throw ConfigError("timeouts must be positive for language " +
                      spec.language.id);
  }
  std::size_t placeholders =
      count_occurrences(spec.wrapper_template, "{{SOLUTION}}");
  if (placeholders != 1) {
    throw TemplateError("wrapper template for " + spec.language.id +
                        " must contain {{SOLUTION}} exactly once (found " +
                        std::to_string(placeholders) + ")");
  }
  if (spec.source_file.empty()) {
    throw ConfigError("source_file must be set for language " +
                      spec.language.id);
  }
}

ToolchainRegistry ToolchainRegistry::load(const fs::path& config_path) {
  json config;
  try {
    config = json::parse(read_text_file(config_path));
  } catch (const json::exception& e) {
    throw ConfigError("invalid toolchain config " + config_path.string() +
                      ": " + e.what());
  }
  const fs::path base = config_path.has_parent_path()
                            ? config_path.parent_path()
                            : fs::path(".");
  auto resolve = [&](const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
  };

  ToolchainRegistry registry;
  if (!config.contains("languages") || !config["languages"].is_array()) {
    throw ConfigError("toolchain config needs a 'languages' array");
  }
  for (const auto& entry : config["languages"]) {
    ToolchainSpec spec;
    spec.language.id = entry.at("id").get<std::string>();
    spec.language.display_name =
        entry.value("display_name", spec.language.id);
    spec.compile_command = argv_from_json(entry, "compile_cmd");
    spec.run_command = argv_from_json(entry, "run_cmd");
    spec.source_file = entry.value("source_file", std::string("main.txt"));
    spec.timeout_s = entry.value("timeout_s", 10.0);
    spec.compile_timeout_s = entry.value("compile_timeout_s", 30.0);
    spec.output_precision = entry.value("output_precision", 10);
    if (entry.contains("prelude_path")) {
      spec.prelude =
          read_text_file(resolve(entry["prelude_path"].get<std::string>()));
    }
    if (entry.contains("wrapper_path")) {
      spec.wrapper_template =
          read_text_file(resolve(entry["wrapper_path"].get<std::string>()));
    }
    registry.add(std::move(spec));
  }
  return registry;
}

void ToolchainRegistry::add(ToolchainSpec spec) {
  validate_toolchain_spec(spec);
  if (find(spec.language.id) != nullptr) {
    throw ConfigError("duplicate language id: " + spec.language.id);
  }
  specs_.push_back(std::move(spec));
}

const ToolchainSpec* ToolchainRegistry::find(std::string_view id) const {
  for (const auto& spec : specs_) {
    if (spec.language.id == id) return &spec;
  }
  return nullptr;
}

const ToolchainSpec& ToolchainRegistry::at(std::string_view id) const {
  const ToolchainSpec* spec = find(id);
  if (spec == nullptr) {
    throw ToolchainUnavailable("no toolchain configured for language '" +
                               std::string(id) + "'");
  }
  return *spec;
}

std::vector<std::string> ToolchainRegistry::language_ids() const {
  std::vector<std::string> ids;
  ids.reserve(specs_.size());
  for (const auto& spec : specs_) ids.push_back(spec.language.id);
  return ids;
}

int ToolchainRegistry::language_index(std::string_view id) const {
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    if (specs_[i].language.id == id) return static_cast<int>(i);
  }
  return -1;
}

std::string ToolchainRegistry::display_name(std::string_view id) const {
  const ToolchainSpec* spec = find(id);
  return spec != nullptr ? spec->language.display_name : std::string(id);
}

bool ToolchainRegistry::available(std::string_view id) const {
  const ToolchainSpec* spec = find(id);
  if (spec == nullptr) return false;
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = availability_cache_.find(id);
    if (it != availability_cache_.end()) return it->second;
  }
  bool ok = true;
  for (const auto* cmd : {&spec->compile_command, &spec->run_command}) {
    if (cmd->empty()) continue;
    const std::string& head = cmd->front();
    if (!probeable_head(head)) continue;
    if (!find_executable(head)) {
      ok = false;
      break;
    }
  }
  std::lock_guard<std::mutex> lock(cache_mutex_);
  availability_cache_.emplace(std::string(id), ok);
  return ok;
}

ToolchainRegistry ToolchainRegistry::subset(
    const std::vector<std::string>& ids) const {
  ToolchainRegistry out;
  std::set<std::string> wanted(ids.begin(), ids.end());
  for (const std::string& id : ids) {
    if (find(id) == nullptr) {
      throw UsageError("language '" + id + "' is not in the registry");
    }
  }
  for (const auto& spec : specs_) {
    if (wanted.count(spec.language.id) > 0) out.add(spec);
  }
  return out;
}

}  // namespace polypot
