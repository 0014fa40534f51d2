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

#ifndef POLYPOT_PROCESS_HPP
#define POLYPOT_PROCESS_HPP

#include <filesystem>
#include <string>
#include <vector>

namespace polypot {

struct ProcessResult {
  int exit_code = -1;
  int term_signal = 0;
  bool timed_out = false;
  std::string stdout_text;
  std::string stderr_text;
  double wall_time_s = 0.0;
};

/// Run argv as a child process group in `workdir` with stdin from
/// /dev/null and captured stdout/stderr. The whole group is SIGKILLed at
/// the deadline. Output capture is capped at a few MiB per stream; excess
/// is drained and dropped.
ProcessResult run_process(const std::vector<std::string>& argv,
                          const std::filesystem::path& workdir,
                          double timeout_s);

}  // namespace polypot

#endif  // POLYPOT_PROCESS_HPP
