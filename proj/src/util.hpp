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

#ifndef POLYPOT_UTIL_HPP
#define POLYPOT_UTIL_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace polypot {

std::string trim(std::string_view s);
std::string lower_ascii(std::string_view s);

/// Trim, lowercase, and collapse internal whitespace runs to single spaces.
std::string canonical_text(std::string_view s);

/// Strict full-string parse of a decimal/scientific numeral. Rejects
/// partial matches and non-finite results.
std::optional<double> parse_numeral(std::string_view s);

/// "a/b" with integer numerator/denominator, b != 0, evaluated to a real.
std::optional<double> parse_rational(std::string_view s);

/// Numeral first, rational second; nullopt when neither form fits.
std::optional<double> coerce_numeric(std::string_view s);

/// Shortest round-trip decimal form (std::to_chars).
std::string format_double(double v);

std::uint64_t fnv1a64(std::string_view data);
std::string fnv1a64_hex(std::string_view data);

std::string replace_all(std::string_view text, std::string_view from,
                        std::string_view to);
std::size_t count_occurrences(std::string_view text, std::string_view needle);
std::vector<std::string> split_lines(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path,
                     std::string_view content);

/// Write to a sibling temp file, then rename into place.
void write_text_file_atomic(const std::filesystem::path& path,
                            std::string_view content);

/// Resolve `name` against PATH (or check it directly when it contains a
/// slash). Returns nullopt when no executable is found.
std::optional<std::filesystem::path> find_executable(const std::string& name);

/// Run body(0..count-1) on a bounded pool of worker threads. Exceptions
/// escaping body are rethrown (lowest index wins) after all workers join.
void parallel_for(std::size_t count, int parallelism,
                  const std::function<void(std::size_t)>& body);

/// mkdtemp-backed directory, removed on destruction.
class TempDir {
 public:
  TempDir(const std::filesystem::path& parent, const std::string& prefix);
  ~TempDir();

  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  TempDir(TempDir&& other) noexcept;
  TempDir& operator=(TempDir&& other) noexcept;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace polypot

#endif  // POLYPOT_UTIL_HPP
