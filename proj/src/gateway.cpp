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

#include "gateway.hpp"

#include <cctype>
#include <cmath>
#include <chrono>
#include <thread>
#include <utility>

#include "errors.hpp"
#include "httplib.h"
#include "json.hpp"
#include "util.hpp"

namespace fs = std::filesystem;

namespace polypot {

namespace {

using nlohmann::json;

std::string sanitize_for_path(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  for (char c : name) {
    unsigned char u = static_cast<unsigned char>(c);
    out.push_back(std::isalnum(u) || c == '-' || c == '.' ? c : '_');
  }
  return out.empty() ? std::string("default") : out;
}

bool transient_status(int status) {
  return status == 429 || (status >= 500 && status < 600);
}

struct SplitUrl {
  bool https = false;
  std::string host_port;
  std::string path_prefix;
};

SplitUrl split_url(const std::string& url) {
  SplitUrl out;
  std::string rest = url;
  if (rest.rfind("https://", 0) == 0) {
    out.https = true;
    rest = rest.substr(8);
  } else if (rest.rfind("http://", 0) == 0) {
    rest = rest.substr(7);
  } else {
    throw ConfigError("backend base_url must start with http:// or https://");
  }
  std::size_t slash = rest.find('/');
  if (slash == std::string::npos) {
    out.host_port = rest;
  } else {
    out.host_port = rest.substr(0, slash);
    out.path_prefix = rest.substr(slash);
    while (!out.path_prefix.empty() && out.path_prefix.back() == '/') {
      out.path_prefix.pop_back();
    }
  }
  if (out.host_port.empty()) {
    throw ConfigError("backend base_url has no host: " + url);
  }
  return out;
}

}  // namespace

std::string prompt_fixture_key(std::string_view prompt) {
  return fnv1a64_hex(prompt);
}

MockBackend::MockBackend(fs::path fixtures_dir, int embed_dim,
                         std::string model_id, std::string embed_model_id)
    : fixtures_dir_(std::move(fixtures_dir)),
      embed_dim_(embed_dim),
      model_id_(std::move(model_id)),
      embed_model_id_(std::move(embed_model_id)) {
  if (embed_dim_ < 1) {
    throw ConfigError("mock embed dimension must be >= 1");
  }
}

std::string MockBackend::complete(const GenerationRequest& request) {
  if (trim(request.prompt).empty()) {
    throw InvalidInput("prompt must be non-empty");
  }
  fs::path file =
      fixtures_dir_ / (prompt_fixture_key(request.prompt) + ".txt");
  std::error_code ec;
  if (!fs::exists(file, ec)) {
    throw FixtureMissing("no completion fixture " + file.string() +
                         " for this prompt");
  }
  return read_text_file(file);
}

YesNoScore MockBackend::yes_no_score(const std::string& prompt) {
  fs::path file =
      fixtures_dir_ / (prompt_fixture_key(prompt) + ".yesno.json");
  std::error_code ec;
  if (!fs::exists(file, ec)) {
    throw FixtureMissing("no yes/no fixture " + file.string() +
                         " for this prompt");
  }
  json j;
  try {
    j = json::parse(read_text_file(file));
  } catch (const json::exception& e) {
    throw ConfigError("bad yes/no fixture " + file.string() + ": " + e.what());
  }
  YesNoScore score;
  score.logprob_yes = j.at("yes").get<double>();
  score.logprob_no = j.at("no").get<double>();
  if (score.logprob_yes > 0 || score.logprob_no > 0) {
    throw ConfigError("logprob fixture values must be <= 0 in " +
                      file.string());
  }
  score.score = score.logprob_yes - score.logprob_no;
  return score;
}

EmbeddingVector MockBackend::embed(const std::string& text) {
  EmbeddingVector v;
  v.model_id = embed_model_id_;
  v.values.assign(static_cast<std::size_t>(embed_dim_), 0.0);
  std::size_t index =
      static_cast<std::size_t>(fnv1a64(text) % static_cast<std::uint64_t>(embed_dim_));
  v.values[index] = 1.0;
  return v;
}

RemoteBackend::RemoteBackend(RemoteBackendConfig config)
    : config_(std::move(config)) {
  if (config_.base_url.empty()) {
    throw ConfigError("remote backend needs a base_url");
  }
  split_url(config_.base_url);  // validate eagerly
}

std::string RemoteBackend::post_json(const std::string& path,
                                     const std::string& body) {
  SplitUrl url = split_url(config_.base_url);
  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }
  std::string full_path = url.path_prefix + path;

  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      double delay = config_.backoff_s * static_cast<double>(1 << (attempt - 1));
      std::this_thread::sleep_for(std::chrono::duration<double>(delay));
    }
    httplib::Result res;
    if (url.https) {
#ifdef CPPHTTPLIB_OPENSSL_SUPPORT
      httplib::SSLClient client(url.host_port);
      client.set_read_timeout(config_.timeout_s, 0);
      client.set_connection_timeout(config_.timeout_s, 0);
      res = client.Post(full_path, headers, body, "application/json");
#else
      throw BackendUnavailable("https endpoints need an OpenSSL build");
#endif
    } else {
      httplib::Client client(url.host_port);
      client.set_read_timeout(config_.timeout_s, 0);
      client.set_connection_timeout(config_.timeout_s, 0);
      res = client.Post(full_path, headers, body, "application/json");
    }
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) {
      return res->body;
    }
    last_error = "HTTP " + std::to_string(res->status) + ": " +
                 res->body.substr(0, 200);
    if (!transient_status(res->status)) {
      throw BackendUnavailable(last_error);
    }
  }
  throw BackendUnavailable("request failed after " +
                           std::to_string(config_.max_retries + 1) +
                           " attempts; last: " + last_error);
}

std::string RemoteBackend::complete(const GenerationRequest& request) {
  if (trim(request.prompt).empty()) {
    throw InvalidInput("prompt must be non-empty");
  }
  json body = {
      {"model", request.model_id.empty() ? config_.chat_model : request.model_id},
      {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})},
      {"max_tokens", request.max_tokens},
      {"temperature", request.temperature},
  };
  std::string raw = post_json("/chat/completions", body.dump());
  try {
    json j = json::parse(raw);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw BackendUnavailable(std::string("malformed completion response: ") +
                             e.what());
  }
}

YesNoScore RemoteBackend::yes_no_score(const std::string& prompt) {
  json body = {
      {"model", config_.chat_model},
      {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
      {"max_tokens", 1},
      {"temperature", 0.0},
      {"logprobs", true},
      {"top_logprobs", 20},
  };
  std::string raw = post_json("/chat/completions", body.dump());
  json j;
  try {
    j = json::parse(raw);
  } catch (const json::exception& e) {
    throw BackendUnavailable(std::string("malformed scorer response: ") +
                             e.what());
  }
  const json* top = nullptr;
  try {
    top = &j.at("choices").at(0).at("logprobs").at("content").at(0).at(
        "top_logprobs");
  } catch (const json::exception&) {
    throw LogprobsUnsupported("backend response carries no token logprobs");
  }
  // Tokens that miss the reported top list get a conservative floor.
  constexpr double kFloor = -100.0;
  YesNoScore score;
  score.logprob_yes = kFloor;
  score.logprob_no = kFloor;
  for (const auto& entry : *top) {
    std::string token = lower_ascii(trim(entry.value("token", std::string())));
    double logprob = entry.value("logprob", kFloor);
    if (token == "yes") score.logprob_yes = std::max(score.logprob_yes, logprob);
    if (token == "no") score.logprob_no = std::max(score.logprob_no, logprob);
  }
  score.score = score.logprob_yes - score.logprob_no;
  return score;
}

EmbeddingVector RemoteBackend::embed(const std::string& text) {
  json body = {
      {"model", config_.embed_model},
      {"input", text},
  };
  std::string raw = post_json("/embeddings", body.dump());
  try {
    json j = json::parse(raw);
    EmbeddingVector v;
    v.model_id = config_.embed_model;
    for (const auto& x : j.at("data").at(0).at("embedding")) {
      v.values.push_back(x.get<double>());
    }
    if (v.values.empty()) {
      throw BackendUnavailable("embedding response is empty");
    }
    return v;
  } catch (const json::exception& e) {
    throw BackendUnavailable(std::string("malformed embedding response: ") +
                             e.what());
  }
}

class Gateway::Slot {
 public:
  explicit Slot(std::counting_semaphore<>& sem) : sem_(sem) { sem_.acquire(); }
  ~Slot() { sem_.release(); }
  Slot(const Slot&) = delete;
  Slot& operator=(const Slot&) = delete;

 private:
  std::counting_semaphore<>& sem_;
};

Gateway::Gateway(std::unique_ptr<ModelBackend> backend, GatewayOptions options)
    : backend_(std::move(backend)),
      options_(std::move(options)),
      slots_(std::max(1, options_.max_in_flight)) {
  if (backend_ == nullptr) {
    throw ConfigError("gateway needs a backend");
  }
}

std::string Gateway::complete(const GenerationRequest& request) {
  if (trim(request.prompt).empty()) {
    throw InvalidInput("prompt must be non-empty");
  }
  if (request.max_tokens <= 0) {
    throw InvalidInput("max_tokens must be positive");
  }
  Slot slot(slots_);
  return backend_->complete(request);
}

YesNoScore Gateway::yes_no_score(const std::string& prompt) {
  if (trim(prompt).empty()) {
    throw InvalidInput("prompt must be non-empty");
  }
  Slot slot(slots_);
  return backend_->yes_no_score(prompt);
}

EmbeddingVector Gateway::embed(const std::string& text) {
  if (text.empty()) {
    throw InvalidInput("cannot embed empty text");
  }
  const std::string model = backend_->embed_model_id();
  fs::path cache_file;
  if (!options_.cache_dir.empty()) {
    cache_file = options_.cache_dir / sanitize_for_path(model) /
                 (fnv1a64_hex(text) + ".json");
    std::lock_guard<std::mutex> lock(cache_mutex_);
    std::error_code ec;
    if (fs::exists(cache_file, ec)) {
      json j = json::parse(read_text_file(cache_file));
      EmbeddingVector v;
      v.model_id = j.at("model_id").get<std::string>();
      v.values = j.at("values").get<std::vector<double>>();
      return v;
    }
  }
  EmbeddingVector v;
  {
    Slot slot(slots_);
    v = backend_->embed(text);
  }
  for (double value : v.values) {
    if (!std::isfinite(value)) {
      throw BackendUnavailable("embedding contains non-finite entries");
    }
  }
  if (!cache_file.empty()) {
    json j = {{"model_id", v.model_id},
              {"text_hash", fnv1a64_hex(text)},
              {"values", v.values}};
    std::lock_guard<std::mutex> lock(cache_mutex_);
    std::error_code ec;
    if (!fs::exists(cache_file, ec)) {
      write_text_file_atomic(cache_file, j.dump());
    }
  }
  return v;
}

ScorerPrompts ScorerPrompts::load(const fs::path& prompts_dir) {
  ScorerPrompts prompts;
  prompts.prior_template = read_text_file(prompts_dir / "prior_scorer.txt");
  prompts.posterior_template =
      read_text_file(prompts_dir / "posterior_scorer.txt");
  return prompts;
}

std::string ScorerPrompts::render_prior(std::string_view question,
                                        std::string_view language_name) const {
  std::string out = replace_all(prior_template, "{{QUESTION}}", question);
  return replace_all(out, "{{LANGUAGE}}", language_name);
}

std::string ScorerPrompts::render_posterior(std::string_view question,
                                            std::string_view language_name,
                                            std::string_view code) const {
  std::string out = replace_all(posterior_template, "{{QUESTION}}", question);
  out = replace_all(out, "{{LANGUAGE}}", language_name);
  return replace_all(out, "{{CODE}}", code);
}

}  // namespace polypot
