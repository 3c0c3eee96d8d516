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

#include "stance/llm.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <thread>

#include "stance/errors.hpp"
#include "stance/features.hpp"
#include "stance/rng.hpp"
#include "stance/util.hpp"

// After the Eigen-bearing headers: httplib pulls in <resolv.h>, whose _res
// macro collides with Eigen internals.
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

namespace stance {

using nlohmann::json;

namespace {

std::string double_repr(double value) {
  // Shortest round-trip representation; deterministic per the standard.
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

constexpr std::string_view kUnparsableReply = "Unable to determine.";

}  // namespace

void MockPolicy::validate() const {
  auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in01(per_vote_accuracy)) throw InputError("mock policy: per_vote_accuracy must be in [0,1]");
  if (!in01(unparsable_rate)) throw InputError("mock policy: unparsable_rate must be in [0,1]");
  if (support_bias >= 0.0 && !in01(support_bias)) {
    throw InputError("mock policy: support_bias must be in [0,1]");
  }
  if (pro_keywords.empty() && anti_keywords.empty()) {
    throw InputError("mock policy: needs pro or anti keywords");
  }
}

json MockPolicy::to_json() const {
  return json{{"mode", mode == Mode::KeywordOracle ? "keyword_oracle" : "planted_accuracy"},
              {"per_vote_accuracy", per_vote_accuracy},
              {"support_bias", support_bias},
              {"unparsable_rate", unparsable_rate},
              {"seed", seed},
              {"pro_keywords", pro_keywords},
              {"anti_keywords", anti_keywords}};
}

MockPolicy MockPolicy::from_json(const json& obj) {
  MockPolicy policy;
  if (!obj.is_object()) throw InputError("mock policy: expected a JSON object");
  if (obj.contains("mode")) {
    const std::string mode = obj["mode"].get<std::string>();
    if (mode == "keyword_oracle") {
      policy.mode = Mode::KeywordOracle;
    } else if (mode == "planted_accuracy") {
      policy.mode = Mode::PlantedAccuracy;
    } else {
      throw InputError("mock policy: unknown mode '" + mode + "'");
    }
  }
  if (obj.contains("per_vote_accuracy")) policy.per_vote_accuracy = obj["per_vote_accuracy"].get<double>();
  if (obj.contains("support_bias")) policy.support_bias = obj["support_bias"].get<double>();
  if (obj.contains("unparsable_rate")) policy.unparsable_rate = obj["unparsable_rate"].get<double>();
  if (obj.contains("seed")) policy.seed = obj["seed"].get<std::uint64_t>();
  if (obj.contains("pro_keywords")) policy.pro_keywords = obj["pro_keywords"].get<std::vector<std::string>>();
  if (obj.contains("anti_keywords")) policy.anti_keywords = obj["anti_keywords"].get<std::vector<std::string>>();
  policy.validate();
  return policy;
}

MockPolicy MockPolicy::from_file(const std::filesystem::path& path) {
  try {
    return from_json(json::parse(read_file(path)));
  } catch (const json::parse_error& e) {
    throw InputError("mock policy file " + path.string() + ": invalid JSON: " + e.what());
  }
}

std::string cache_key(const ChatRequest& request) {
  std::string material;
  material.reserve(request.prompt.size() + 64);
  material += request.model;
  material += '\x1f';
  material += double_repr(request.temperature);
  material += '\x1f';
  material += std::to_string(request.max_tokens);
  material += '\x1f';
  material += request.prompt;
  return sha256_hex(material);
}

MockLlmClient::MockLlmClient(MockPolicy policy) : policy_(std::move(policy)) {
  policy_.validate();
}

std::optional<StanceLabel> MockLlmClient::planted_truth(const std::string& prompt) const {
  // Scan the tweet block when the prompt follows the template; otherwise the
  // whole text. Majority of planted keywords decides; a tie is no signal.
  std::string_view block(prompt);
  const std::size_t begin = prompt.find("TWEETS\n");
  const std::size_t end = prompt.rfind("\nEND OF TWEETS");
  if (begin != std::string::npos && end != std::string::npos &&
      begin + 7 <= end) {
    block = std::string_view(prompt).substr(begin + 7, end - (begin + 7));
  }
  std::size_t pro = 0, anti = 0;
  for (const std::string& token : tokenize(block)) {
    if (std::find(policy_.pro_keywords.begin(), policy_.pro_keywords.end(), token) !=
        policy_.pro_keywords.end()) {
      ++pro;
    } else if (std::find(policy_.anti_keywords.begin(), policy_.anti_keywords.end(),
                         token) != policy_.anti_keywords.end()) {
      ++anti;
    }
  }
  if (pro > anti) return StanceLabel::Support;
  if (anti > pro) return StanceLabel::Against;
  return std::nullopt;
}

ChatReply MockLlmClient::complete(const ChatRequest& request) {
  const std::optional<StanceLabel> truth = planted_truth(request.prompt);
  if (policy_.mode == MockPolicy::Mode::KeywordOracle) {
    if (!truth) return ChatReply{std::string(kUnparsableReply), false, 1};
    return ChatReply{*truth == StanceLabel::Support ? "Support" : "Against", false, 1};
  }
  // PlantedAccuracy: all randomness is a hash of (seed, prompt), so the
  // reply is reproducible and independent of call order.
  SplitMix64 rng(derive_seed(policy_.seed, {"mock_vote", request.prompt}));
  if (policy_.unparsable_rate > 0.0 && rng.bernoulli(policy_.unparsable_rate)) {
    return ChatReply{std::string(kUnparsableReply), false, 1};
  }
  if (!truth) return ChatReply{std::string(kUnparsableReply), false, 1};
  const double p_support = *truth == StanceLabel::Support
                               ? policy_.per_vote_accuracy
                               : policy_.effective_support_bias();
  return ChatReply{rng.bernoulli(p_support) ? "Support" : "Against", false, 1};
}

ChatTransport make_http_transport(const std::string& base_url, const std::string& api_key,
                                  double timeout_seconds) {
  // Split scheme://authority from any path prefix (e.g. /v1).
  const std::size_t scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw InputError("llm base url must start with http:// or https://");
  }
  const std::size_t path_start = base_url.find('/', scheme_end + 3);
  std::string origin = base_url.substr(0, path_start);
  std::string prefix = path_start == std::string::npos ? "" : base_url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  const std::string path = prefix + "/chat/completions";

  auto client = std::make_shared<httplib::Client>(origin);
  client->set_connection_timeout(std::chrono::milliseconds(
      static_cast<int>(timeout_seconds * 1000)));
  client->set_read_timeout(std::chrono::milliseconds(static_cast<int>(timeout_seconds * 1000)));
  if (!api_key.empty()) client->set_bearer_token_auth(api_key);

  return [client, path](const std::string& body) -> HttpResponse {
    httplib::Result res = client->Post(path, body, "application/json");
    if (!res) {
      return HttpResponse{0, "", true, httplib::to_string(res.error())};
    }
    return HttpResponse{res->status, res->body, false, ""};
  };
}

HttpLlmClient::HttpLlmClient(ChatTransport transport, RetryOptions options)
    : transport_(std::move(transport)), options_(std::move(options)) {
  if (!options_.sleeper) {
    options_.sleeper = [](double seconds) {
      std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
    };
  }
}

ChatReply HttpLlmClient::complete(const ChatRequest& request) {
  const json body = {{"model", request.model},
                     {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})},
                     {"temperature", request.temperature},
                     {"max_tokens", request.max_tokens}};
  const std::string payload = body.dump();

  SplitMix64 jitter_rng(derive_seed(options_.jitter_seed, {"retry", cache_key(request)}));
  std::string last_error;
  for (int attempt = 1; attempt <= options_.max_attempts; ++attempt) {
    const HttpResponse res = transport_(payload);
    const bool retryable = res.transport_error || res.status == 429 || res.status >= 500;
    if (!res.transport_error && res.status == 200) {
      json reply;
      try {
        reply = json::parse(res.body);
      } catch (const json::parse_error& e) {
        throw LlmError(std::string("malformed response body: ") + e.what());
      }
      if (!reply.contains("choices") || !reply["choices"].is_array() ||
          reply["choices"].empty() || !reply["choices"][0].contains("message") ||
          !reply["choices"][0]["message"].contains("content") ||
          !reply["choices"][0]["message"]["content"].is_string()) {
        throw LlmError("malformed response body: missing choices[0].message.content");
      }
      return ChatReply{reply["choices"][0]["message"]["content"].get<std::string>(),
                       false, attempt};
    }
    if (!retryable) {
      throw LlmError("chat endpoint returned HTTP " + std::to_string(res.status) +
                     (res.body.empty() ? "" : ": " + res.body.substr(0, 200)));
    }
    last_error = res.transport_error ? ("transport error: " + res.error)
                                     : ("HTTP " + std::to_string(res.status));
    if (attempt < options_.max_attempts) {
      const double base = options_.backoff_base_seconds *
                          std::pow(options_.backoff_factor, attempt - 1);
      const double jitter =
          1.0 + options_.jitter_fraction * (2.0 * jitter_rng.uniform01() - 1.0);
      options_.sleeper(base * jitter);
    }
  }
  throw LlmError("chat request failed after " + std::to_string(options_.max_attempts) +
                 " attempts (last: " + last_error + ")");
}

CachedLlmClient::CachedLlmClient(std::shared_ptr<LlmClient> inner,
                                 std::filesystem::path cache_path)
    : inner_(std::move(inner)), cache_path_(std::move(cache_path)) {
  if (std::filesystem::exists(cache_path_)) {
    for_each_line(cache_path_, [&](std::size_t line_no, const std::string& line) {
      json obj;
      try {
        obj = json::parse(line);
      } catch (const json::parse_error& e) {
        throw InputError(cache_path_.string() + " line " + std::to_string(line_no) +
                         ": invalid cache entry: " + e.what());
      }
      if (!obj.contains("key") || !obj.contains("content")) {
        throw InputError(cache_path_.string() + " line " + std::to_string(line_no) +
                         ": cache entry needs key and content");
      }
      // Append-only file: a later entry for the same key wins.
      entries_[obj["key"].get<std::string>()] = obj["content"].get<std::string>();
    });
  }
}

std::size_t CachedLlmClient::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return entries_.size();
}

ChatReply CachedLlmClient::complete(const ChatRequest& request) {
  const std::string key = cache_key(request);
  {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto it = entries_.find(key);
    if (it != entries_.end()) return ChatReply{it->second, true, 1};
  }
  ChatReply reply = inner_->complete(request);
  {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto [it, inserted] = entries_.emplace(key, reply.content);
    if (inserted) {
      if (cache_path_.has_parent_path()) {
        std::filesystem::create_directories(cache_path_.parent_path());
      }
      std::ofstream out(cache_path_, std::ios::binary | std::ios::app);
      if (!out) throw RunError("cannot append to cache: " + cache_path_.string());
      out << json{{"key", key}, {"content", reply.content}}.dump() << '\n';
    }
  }
  return reply;
}

}  // namespace stance
