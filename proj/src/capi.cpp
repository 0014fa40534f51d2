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

#include "polypot.h"

#include <cstring>
#include <optional>
#include <string>

#include "answer.hpp"
#include "engine.hpp"
#include "errors.hpp"
#include "json.hpp"
#include "util.hpp"

#ifndef POLYPOT_VERSION
#define POLYPOT_VERSION "0.0.0"
#endif

using nlohmann::json;

struct polypot_engine {
  std::unique_ptr<polypot::Engine> impl;
  std::string last_error;
  std::string last_summary;
};

namespace {

polypot_status status_from_code(polypot::ErrorCode code) {
  switch (code) {
    case polypot::ErrorCode::Usage:
      return POLYPOT_ERR_USAGE;
    case polypot::ErrorCode::Io:
      return POLYPOT_ERR_IO;
    case polypot::ErrorCode::Config:
      return POLYPOT_ERR_CONFIG;
    case polypot::ErrorCode::Toolchain:
      return POLYPOT_ERR_TOOLCHAIN;
    case polypot::ErrorCode::Backend:
      return POLYPOT_ERR_BACKEND;
    case polypot::ErrorCode::Parse:
      return POLYPOT_ERR_PARSE;
    case polypot::ErrorCode::Internal:
      return POLYPOT_ERR_INTERNAL;
  }
  return POLYPOT_ERR_INTERNAL;
}

/// Run a command body, capturing the error message or summary on the
/// engine handle.
template <typename Body>
polypot_status guarded(polypot_engine* engine, Body&& body) {
  if (engine == nullptr || engine->impl == nullptr) {
    return POLYPOT_ERR_USAGE;
  }
  try {
    json summary = body(*engine->impl);
    engine->last_summary = summary.dump();
    return POLYPOT_OK;
  } catch (const polypot::Error& e) {
    engine->last_error = e.what();
    return status_from_code(e.code());
  } catch (const std::exception& e) {
    engine->last_error = e.what();
    return POLYPOT_ERR_INTERNAL;
  }
}

std::optional<std::string> required(const char* value) {
  if (value == nullptr || *value == '\0') return std::nullopt;
  return std::string(value);
}

json parse_options(const char* options_json) {
  if (options_json == nullptr || *options_json == '\0') {
    return json::object();
  }
  try {
    json j = json::parse(options_json);
    if (!j.is_object()) {
      throw polypot::UsageError("options must be a JSON object");
    }
    return j;
  } catch (const json::exception& e) {
    throw polypot::UsageError(std::string("invalid options JSON: ") + e.what());
  }
}

std::vector<std::string> split_csv(const std::string& csv) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    std::size_t end = csv.find(',', start);
    if (end == std::string::npos) end = csv.size();
    std::string item = polypot::trim(csv.substr(start, end - start));
    if (!item.empty()) out.push_back(item);
    start = end + 1;
  }
  return out;
}

}  // namespace

extern "C" {

const char* polypot_version(void) { return POLYPOT_VERSION; }

const char* polypot_status_name(polypot_status status) {
  switch (status) {
    case POLYPOT_OK:
      return "ok";
    case POLYPOT_ERR_USAGE:
      return "usage_error";
    case POLYPOT_ERR_IO:
      return "io_error";
    case POLYPOT_ERR_CONFIG:
      return "config_error";
    case POLYPOT_ERR_TOOLCHAIN:
      return "toolchain_error";
    case POLYPOT_ERR_BACKEND:
      return "backend_error";
    case POLYPOT_ERR_PARSE:
      return "parse_error";
    case POLYPOT_ERR_INTERNAL:
      return "internal_error";
  }
  return "unknown";
}

size_t polypot_default_config(char* buffer, size_t capacity) {
  std::string config = polypot::EngineConfig::defaults().to_json().dump(2);
  size_t needed = config.size() + 1;
  if (buffer != nullptr && capacity >= needed) {
    std::memcpy(buffer, config.c_str(), needed);
  }
  return needed;
}

polypot_status polypot_engine_create(const char* config_json,
                                     polypot_engine** out_engine) {
  if (out_engine == nullptr) return POLYPOT_ERR_USAGE;
  *out_engine = nullptr;
  auto handle = std::make_unique<polypot_engine>();
  try {
    polypot::EngineConfig config;
    if (config_json == nullptr || *config_json == '\0') {
      config = polypot::EngineConfig::defaults();
    } else {
      json j;
      try {
        j = json::parse(config_json);
      } catch (const json::exception& e) {
        throw polypot::ConfigError(std::string("invalid config JSON: ") +
                                   e.what());
      }
      config = polypot::EngineConfig::from_json(j);
    }
    handle->impl = std::make_unique<polypot::Engine>(std::move(config));
  } catch (const polypot::Error& e) {
    return status_from_code(e.code());
  } catch (const std::exception&) {
    return POLYPOT_ERR_INTERNAL;
  }
  *out_engine = handle.release();
  return POLYPOT_OK;
}

void polypot_engine_destroy(polypot_engine* engine) { delete engine; }

const char* polypot_engine_last_error(const polypot_engine* engine) {
  return engine == nullptr ? "" : engine->last_error.c_str();
}

const char* polypot_engine_last_summary(const polypot_engine* engine) {
  return engine == nullptr ? "" : engine->last_summary.c_str();
}

polypot_status polypot_run_exec(polypot_engine* engine,
                                const char* solutions_path,
                                const char* out_path) {
  return guarded(engine, [&](polypot::Engine& impl) {
    auto in = required(solutions_path);
    auto out = required(out_path);
    if (!in || !out) {
      throw polypot::UsageError("exec needs solutions_path and out_path");
    }
    return impl.cmd_exec(*in, *out);
  });
}

polypot_status polypot_run_datagen(polypot_engine* engine,
                                   const char* corpus_path, const char* out_dir,
                                   const char* options_json) {
  return guarded(engine, [&](polypot::Engine& impl) {
    auto corpus = required(corpus_path);
    auto out = required(out_dir);
    if (!corpus || !out) {
      throw polypot::UsageError("datagen needs corpus_path and out_dir");
    }
    return impl.cmd_datagen(*corpus, *out, parse_options(options_json));
  });
}

polypot_status polypot_run_route(polypot_engine* engine, const char* strategy,
                                 const char* corpus_path,
                                 const char* solutions_path,
                                 const char* out_path,
                                 const char* options_json) {
  return guarded(engine, [&](polypot::Engine& impl) {
    auto strat = required(strategy);
    auto corpus = required(corpus_path);
    auto out = required(out_path);
    if (!strat || !corpus || !out) {
      throw polypot::UsageError(
          "route needs strategy, corpus_path and out_path");
    }
    std::string solutions = required(solutions_path).value_or("");
    return impl.cmd_route(*strat, *corpus, solutions, *out,
                          parse_options(options_json));
  });
}

polypot_status polypot_run_eval(polypot_engine* engine,
                                const char* strategies_csv,
                                const char* corpus_path,
                                const char* solutions_path, const char* out_dir,
                                const char* options_json) {
  return guarded(engine, [&](polypot::Engine& impl) {
    auto strategies = required(strategies_csv);
    auto corpus = required(corpus_path);
    auto out = required(out_dir);
    if (!strategies || !corpus || !out) {
      throw polypot::UsageError(
          "eval needs strategies, corpus_path and out_dir");
    }
    std::string solutions = required(solutions_path).value_or("");
    return impl.cmd_eval(split_csv(*strategies), *corpus, solutions, *out,
                         parse_options(options_json));
  });
}

polypot_status polypot_run_export_prefs(polypot_engine* engine,
                                        const char* matrix_path,
                                        const char* out_path) {
  return guarded(engine, [&](polypot::Engine& impl) {
    auto matrix = required(matrix_path);
    auto out = required(out_path);
    if (!matrix || !out) {
      throw polypot::UsageError("export-prefs needs matrix_path and out_path");
    }
    return impl.cmd_export_prefs(*matrix, *out);
  });
}

polypot_status polypot_run_export_scorer_data(polypot_engine* engine,
                                              const char* matrix_path,
                                              const char* mode,
                                              const char* out_dir) {
  return guarded(engine, [&](polypot::Engine& impl) {
    auto matrix = required(matrix_path);
    auto m = required(mode);
    auto out = required(out_dir);
    if (!matrix || !m || !out) {
      throw polypot::UsageError(
          "export-scorer-data needs matrix_path, mode and out_dir");
    }
    return impl.cmd_export_scorer_data(*matrix, *m, *out);
  });
}

polypot_status polypot_run_stats(polypot_engine* engine,
                                 const char* matrix_path,
                                 const char* corpus_path, const char* out_csv,
                                 const char* out_md) {
  return guarded(engine, [&](polypot::Engine& impl) {
    auto matrix = required(matrix_path);
    auto csv = required(out_csv);
    auto md = required(out_md);
    if (!matrix || !csv || !md) {
      throw polypot::UsageError("stats needs matrix_path, out_csv and out_md");
    }
    std::optional<std::filesystem::path> corpus;
    if (auto c = required(corpus_path)) corpus = *c;
    return impl.cmd_stats(*matrix, corpus, *csv, *md);
  });
}

polypot_status polypot_parse_answer(const char* raw_stdout, char* buffer,
                                    size_t capacity, int* is_number) {
  if (raw_stdout == nullptr || buffer == nullptr) return POLYPOT_ERR_USAGE;
  try {
    polypot::AnswerValue answer = polypot::parse_answer(raw_stdout);
    std::string key = answer.canonical_key();
    if (key.size() + 1 > capacity) return POLYPOT_ERR_USAGE;
    std::memcpy(buffer, key.c_str(), key.size() + 1);
    if (is_number != nullptr) *is_number = answer.is_number() ? 1 : 0;
    return POLYPOT_OK;
  } catch (const polypot::Error& e) {
    return status_from_code(e.code());
  } catch (const std::exception&) {
    return POLYPOT_ERR_INTERNAL;
  }
}

int polypot_answers_equal(const char* a, const char* b, double abs_tol,
                          double rel_tol) {
  if (a == nullptr || b == nullptr || abs_tol < 0 || rel_tol < 0) return -1;
  try {
    polypot::AnswerValue va = polypot::parse_answer(a);
    polypot::AnswerValue vb = polypot::parse_answer(b);
    return polypot::answers_equal(va, vb, {abs_tol, rel_tol}) ? 1 : 0;
  } catch (const std::exception&) {
    return -1;
  }
}

}  // extern "C"
