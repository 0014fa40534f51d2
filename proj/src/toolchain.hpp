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

#ifndef POLYPOT_TOOLCHAIN_HPP
#define POLYPOT_TOOLCHAIN_HPP

#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace polypot {

struct ObjectLanguage {
  std::string id;            // lowercase token, unique within a registry
  std::string display_name;  // e.g. "C++"
};

/// Everything needed to turn a bare solution() function into a process:
/// wrapper/prelude text, compile and run argv templates, limits.
/// Command templates may reference {{FILE}}, {{DIR}} and {{EXE}}.
struct ToolchainSpec {
  ObjectLanguage language;
  std::vector<std::string> compile_command;  // empty: interpreted language
  std::vector<std::string> run_command;
  std::string prelude;
  std::string wrapper_template;  // must contain {{SOLUTION}} exactly once
  std::string source_file = "main.txt";
  double timeout_s = 10.0;
  double compile_timeout_s = 30.0;
  int output_precision = 10;
};

/// Ordered set of toolchains. The declaration order is the registry order
/// used for tie-breaking everywhere downstream.
class ToolchainRegistry {
 public:
  ToolchainRegistry() = default;

  // Copies carry the specs but start with a cold availability cache.
  ToolchainRegistry(const ToolchainRegistry& other) : specs_(other.specs_) {}
  ToolchainRegistry& operator=(const ToolchainRegistry& other) {
    if (this != &other) {
      specs_ = other.specs_;
      availability_cache_.clear();
    }
    return *this;
  }
  ToolchainRegistry(ToolchainRegistry&& other) noexcept
      : specs_(std::move(other.specs_)) {}
  ToolchainRegistry& operator=(ToolchainRegistry&& other) noexcept {
    if (this != &other) {
      specs_ = std::move(other.specs_);
      availability_cache_.clear();
    }
    return *this;
  }

  /// Load from a JSON config file. prelude_path/wrapper_path entries are
  /// resolved relative to the config file location.
  static ToolchainRegistry load(const std::filesystem::path& config_path);

  void add(ToolchainSpec spec);

  const ToolchainSpec* find(std::string_view id) const;
  const ToolchainSpec& at(std::string_view id) const;
  const std::vector<ToolchainSpec>& specs() const { return specs_; }
  std::vector<std::string> language_ids() const;
  int language_index(std::string_view id) const;  // -1 when absent
  std::string display_name(std::string_view id) const;
  bool empty() const { return specs_.empty(); }

  /// True when every configured command binary resolves. Results are
  /// cached per registry instance.
  bool available(std::string_view id) const;

  /// Registry restricted to `ids` (kept in this registry's order).
  ToolchainRegistry subset(const std::vector<std::string>& ids) const;

 private:
  std::vector<ToolchainSpec> specs_;
  mutable std::mutex cache_mutex_;
  mutable std::map<std::string, bool, std::less<>> availability_cache_;
};

void validate_toolchain_spec(const ToolchainSpec& spec);

}  // namespace polypot

#endif  // POLYPOT_TOOLCHAIN_HPP
