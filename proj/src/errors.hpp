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

#ifndef POLYPOT_ERRORS_HPP
#define POLYPOT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace polypot {

/// Coarse error classes; these map 1:1 onto the C API status codes.
enum class ErrorCode {
  Usage,
  Io,
  Config,
  Toolchain,
  Backend,
  Parse,
  Internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

#define POLYPOT_DEFINE_ERROR(NAME, CODE)              \
  struct NAME : Error {                               \
    explicit NAME(const std::string& m)               \
        : Error(ErrorCode::CODE, std::string(#NAME) + \
                                     ": " + m) {}     \
  }

POLYPOT_DEFINE_ERROR(UsageError, Usage);
POLYPOT_DEFINE_ERROR(IoError, Io);
POLYPOT_DEFINE_ERROR(ConfigError, Config);
POLYPOT_DEFINE_ERROR(ParseError, Parse);
POLYPOT_DEFINE_ERROR(GoldMissing, Parse);
POLYPOT_DEFINE_ERROR(InvalidInput, Usage);
POLYPOT_DEFINE_ERROR(TemplateError, Config);
POLYPOT_DEFINE_ERROR(ToolchainUnavailable, Toolchain);
POLYPOT_DEFINE_ERROR(ExamplesMissing, Config);
POLYPOT_DEFINE_ERROR(BackendUnavailable, Backend);
POLYPOT_DEFINE_ERROR(FixtureMissing, Backend);
POLYPOT_DEFINE_ERROR(LogprobsUnsupported, Backend);
POLYPOT_DEFINE_ERROR(ScorerFailure, Backend);
POLYPOT_DEFINE_ERROR(EmptyIndex, Usage);

#undef POLYPOT_DEFINE_ERROR

}  // namespace polypot

#endif  // POLYPOT_ERRORS_HPP
