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

#ifndef POLYPOT_GATEWAY_HPP
#define POLYPOT_GATEWAY_HPP

#include <filesystem>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <vector>

namespace polypot {

struct GenerationRequest {
  std::string prompt;
  int max_tokens = 1024;
  double temperature = 0.0;
  std::string model_id;  // empty: backend default
};

struct YesNoScore {
  double logprob_yes = 0.0;
  double logprob_no = 0.0;
  double score = 0.0;  // logprob_yes - logprob_no
};

struct EmbeddingVector {
  std::vector<double> values;
  std::string model_id;
};

/// Key of the fixture file a mock backend serves for a given prompt.
std::string prompt_fixture_key(std::string_view prompt);

class ModelBackend {
 public:
  virtual ~ModelBackend() = default;
  virtual std::string complete(const GenerationRequest& request) = 0;
  virtual YesNoScore yes_no_score(const std::string& prompt) = 0;
  virtual EmbeddingVector embed(const std::string& text) = 0;
  virtual std::string embed_model_id() const = 0;
};

/// File-backed deterministic backend for offline runs and tests.
/// Completions come from <fixtures>/<key>.txt, Yes/No logprobs from
/// <fixtures>/<key>.yesno.json, and embeddings are the unit basis vector
/// with index hash(text) mod dimension.
class MockBackend final : public ModelBackend {
 public:
  MockBackend(std::filesystem::path fixtures_dir, int embed_dim,
              std::string model_id, std::string embed_model_id);

  std::string complete(const GenerationRequest& request) override;
  YesNoScore yes_no_score(const std::string& prompt) override;
  EmbeddingVector embed(const std::string& text) override;
  std::string embed_model_id() const override { return embed_model_id_; }

 private:
  std::filesystem::path fixtures_dir_;
  int embed_dim_;
  std::string model_id_;
  std::string embed_model_id_;
};

struct RemoteBackendConfig {
  std::string base_url;  // e.g. http://host:port/v1
  std::string chat_model = "gpt-3.5-turbo";
  std::string embed_model = "text-embedding-3-small";
  std::string api_key;   // may be empty for unauthenticated endpoints
  int max_retries = 3;
  double backoff_s = 0.25;
  int timeout_s = 60;
};

/// OpenAI-style chat-completions + embeddings client. Transient transport
/// failures (connect errors, 429, 5xx) are retried with exponential
/// backoff. Yes/No scoring requests next-token logprobs; backends that do
/// not return them raise LogprobsUnsupported.
class RemoteBackend final : public ModelBackend {
 public:
  explicit RemoteBackend(RemoteBackendConfig config);

  std::string complete(const GenerationRequest& request) override;
  YesNoScore yes_no_score(const std::string& prompt) override;
  EmbeddingVector embed(const std::string& text) override;
  std::string embed_model_id() const override { return config_.embed_model; }

 private:
  std::string post_json(const std::string& path, const std::string& body);
  RemoteBackendConfig config_;
};

struct GatewayOptions {
  std::filesystem::path cache_dir;  // empty: embedding cache disabled
  int max_in_flight = 8;
};

/// Uniform entry point over a backend: bounded in-flight requests plus a
/// content-addressed on-disk embedding cache keyed by (model, text hash).
class Gateway {
 public:
  Gateway(std::unique_ptr<ModelBackend> backend, GatewayOptions options);

  std::string complete(const GenerationRequest& request);
  YesNoScore yes_no_score(const std::string& prompt);
  EmbeddingVector embed(const std::string& text);

  ModelBackend& backend() { return *backend_; }

 private:
  class Slot;
  std::unique_ptr<ModelBackend> backend_;
  GatewayOptions options_;
  std::counting_semaphore<> slots_;
  std::mutex cache_mutex_;
};

/// The Yes/No scorer prompt templates are configuration, not code: two
/// editable text files with {{QUESTION}}, {{LANGUAGE}} and {{CODE}}
/// placeholders.
struct ScorerPrompts {
  std::string prior_template;
  std::string posterior_template;

  static ScorerPrompts load(const std::filesystem::path& prompts_dir);

  std::string render_prior(std::string_view question,
                           std::string_view language_name) const;
  std::string render_posterior(std::string_view question,
                               std::string_view language_name,
                               std::string_view code) const;
};

}  // namespace polypot

#endif  // POLYPOT_GATEWAY_HPP
