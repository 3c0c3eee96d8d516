// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "stance/corpus.hpp"

namespace stance {

struct ChatRequest {
  std::string model;
  std::string prompt;
  double temperature = 0.0;
  int max_tokens = 8;
};

struct ChatReply {
  std::string content;
  bool from_cache = false;
  int attempts = 1;
};

// Deterministic offline stand-in for the chat endpoint. Replies are a pure
// function of (policy, prompt).
struct MockPolicy {
  enum class Mode { KeywordOracle, PlantedAccuracy };

  Mode mode = Mode::KeywordOracle;
  // PlantedAccuracy: P(vote = Support | planted truth = Support).
  double per_vote_accuracy = 1.0;
  // P(vote = Support | planted truth = Against). Negative means "use the
  // unbiased default 1 - per_vote_accuracy", under which the correct-vote
  // fraction converges to per_vote_accuracy for both classes.
  double support_bias = -1.0;
  // Probability of an unparsable reply, drawn before the vote.
  double unparsable_rate = 0.0;
  std::uint64_t seed = 0;
  // Tokens that mark a prompt's planted stance; default to the synthetic
  // generator's default keywords.
  std::vector<std::string> pro_keywords = {"kwpro"};
  std::vector<std::string> anti_keywords = {"kwanti"};

  double effective_support_bias() const {
    return support_bias < 0.0 ? 1.0 - per_vote_accuracy : support_bias;
  }
  void validate() const;

  nlohmann::json to_json() const;
  static MockPolicy from_json(const nlohmann::json& obj);
  static MockPolicy from_file(const std::filesystem::path& path);
};

// Collision-resistant digest over (model, prompt bytes, temperature,
// max_tokens); stable across runs and platforms.
std::string cache_key(const ChatRequest& request);

class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual ChatReply complete(const ChatRequest& request) = 0;
};

class MockLlmClient final : public LlmClient {
 public:
  explicit MockLlmClient(MockPolicy policy);
  ChatReply complete(const ChatRequest& request) override;

  // The planted truth the mock reads off a prompt (majority of planted
  // keywords in the tweet block), exposed for tests.
  std::optional<StanceLabel> planted_truth(const std::string& prompt) const;

 private:
  MockPolicy policy_;
};

struct HttpResponse {
  int status = 0;
  std::string body;
  bool transport_error = false;  // timeout / connection failure
  std::string error;
};

// POSTs a JSON body to {base_url}/chat/completions. Swappable so retry
// behavior is testable without a server.
using ChatTransport = std::function<HttpResponse(const std::string& body)>;

// Builds the real transport from a base URL (scheme://host[:port][/prefix]).
// The API credential is sent as a bearer token.
ChatTransport make_http_transport(const std::string& base_url,
                                  const std::string& api_key,
                                  double timeout_seconds = 60.0);

struct RetryOptions {
  int max_attempts = 5;
  double backoff_base_seconds = 1.0;
  double backoff_factor = 2.0;
  double jitter_fraction = 0.2;  // +-20%
  std::function<void(double seconds)> sleeper;  // injectable for tests
  std::uint64_t jitter_seed = 0;
};

// Chat client with retry on 429/5xx/timeouts (exponential backoff with
// jitter); other 4xx and malformed bodies fail immediately.
class HttpLlmClient final : public LlmClient {
 public:
  HttpLlmClient(ChatTransport transport, RetryOptions options = {});
  ChatReply complete(const ChatRequest& request) override;

 private:
  ChatTransport transport_;
  RetryOptions options_;
};

// Write-through JSONL cache ({"key":..., "content":...}, last entry wins)
// in front of any client. Lookups and appends are serialized; safe for
// concurrent workers.
class CachedLlmClient final : public LlmClient {
 public:
  CachedLlmClient(std::shared_ptr<LlmClient> inner, std::filesystem::path cache_path);
  ChatReply complete(const ChatRequest& request) override;

  std::size_t size() const;

 private:
  std::shared_ptr<LlmClient> inner_;
  std::filesystem::path cache_path_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, std::string> entries_;
};

}  // namespace stance
