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

#include "stance/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "stance/errors.hpp"
#include "stance/rng.hpp"
#include "stance/util.hpp"

namespace stance {

using nlohmann::json;

std::string to_string(StanceLabel label) {
  return label == StanceLabel::Support ? "support" : "against";
}

std::optional<StanceLabel> stance_from_string(std::string_view s) {
  if (s == "support") return StanceLabel::Support;
  if (s == "against") return StanceLabel::Against;
  return std::nullopt;
}

std::string to_string(SampleMode mode) {
  return mode == SampleMode::Agnostic ? "agnostic" : "specific";
}

std::optional<SampleMode> sample_mode_from_string(std::string_view s) {
  if (s == "agnostic") return SampleMode::Agnostic;
  if (s == "specific") return SampleMode::Specific;
  return std::nullopt;
}

bool is_valid_target_id(std::string_view id) {
  if (id.empty()) return false;
  if (id.front() == '_' || id.back() == '_') return false;
  for (char c : id) {
    if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_')) return false;
  }
  return true;
}

namespace {

[[noreturn]] void fail_line(const std::filesystem::path& path, std::size_t line_no,
                            const std::string& what) {
  throw InputError(path.string() + " line " + std::to_string(line_no) + ": " + what);
}

UserRecord parse_user(const json& obj, const std::filesystem::path& path,
                      std::size_t line_no) {
  if (!obj.is_object()) fail_line(path, line_no, "record is not a JSON object");
  UserRecord user;
  if (!obj.contains("user_id") || !obj["user_id"].is_string()) {
    fail_line(path, line_no, "missing or non-string field 'user_id'");
  }
  user.user_id = obj["user_id"].get<std::string>();
  if (user.user_id.empty()) fail_line(path, line_no, "empty user_id");

  if (!obj.contains("stances") || !obj["stances"].is_object()) {
    fail_line(path, line_no, "missing or non-object field 'stances'");
  }
  for (const auto& [target, value] : obj["stances"].items()) {
    if (!is_valid_target_id(target)) {
      fail_line(path, line_no, "invalid target id '" + target +
                                   "' (must be lowercase snake-case)");
    }
    if (!value.is_string()) fail_line(path, line_no, "stance value must be a string");
    const auto label = stance_from_string(value.get<std::string>());
    if (!label) {
      fail_line(path, line_no, "unknown stance '" + value.get<std::string>() +
                                   "' for target '" + target +
                                   "' (expected \"support\" or \"against\")");
    }
    user.stances.emplace(target, *label);
  }

  if (!obj.contains("tweets") || !obj["tweets"].is_array()) {
    fail_line(path, line_no, "missing or non-array field 'tweets'");
  }
  std::unordered_set<std::string> seen_tweet_ids;
  for (const auto& t : obj["tweets"]) {
    if (!t.is_object()) fail_line(path, line_no, "tweet entry is not an object");
    Tweet tweet;
    if (!t.contains("id") || !t["id"].is_string()) {
      fail_line(path, line_no, "tweet missing string field 'id'");
    }
    tweet.id = t["id"].get<std::string>();
    if (tweet.id.empty()) fail_line(path, line_no, "empty tweet id");
    if (!seen_tweet_ids.insert(tweet.id).second) {
      fail_line(path, line_no, "duplicate tweet id '" + tweet.id + "' within user '" +
                                   user.user_id + "'");
    }
    if (!t.contains("text") || !t["text"].is_string()) {
      fail_line(path, line_no, "tweet missing string field 'text'");
    }
    tweet.text = t["text"].get<std::string>();
    if (trim(tweet.text).empty()) {
      fail_line(path, line_no, "tweet '" + tweet.id + "' has empty text");
    }
    if (t.contains("targets")) {
      if (!t["targets"].is_array()) fail_line(path, line_no, "tweet 'targets' must be an array");
      for (const auto& tgt : t["targets"]) {
        if (!tgt.is_string() || !is_valid_target_id(tgt.get<std::string>())) {
          fail_line(path, line_no, "invalid tweet target id");
        }
        tweet.targets.insert(tgt.get<std::string>());
      }
    }
    user.tweets.push_back(std::move(tweet));
  }
  return user;
}

}  // namespace

std::vector<UserRecord> load_corpus(const std::filesystem::path& path) {
  std::vector<UserRecord> users;
  std::unordered_set<std::string> seen_user_ids;
  for_each_line(path, [&](std::size_t line_no, const std::string& line) {
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      fail_line(path, line_no, std::string("invalid JSON: ") + e.what());
    }
    UserRecord user = parse_user(obj, path, line_no);
    if (!seen_user_ids.insert(user.user_id).second) {
      fail_line(path, line_no, "duplicate user_id '" + user.user_id + "'");
    }
    users.push_back(std::move(user));
  });
  return users;
}

void write_corpus(const std::vector<UserRecord>& users,
                  const std::filesystem::path& path) {
  std::string out;
  for (const UserRecord& user : users) {
    json stances = json::object();
    for (const auto& [target, label] : user.stances) stances[target] = to_string(label);
    json tweets = json::array();
    for (const Tweet& tweet : user.tweets) {
      json t;
      t["id"] = tweet.id;
      t["text"] = tweet.text;
      t["targets"] = json::array();
      for (const std::string& tgt : tweet.targets) t["targets"].push_back(tgt);
      tweets.push_back(std::move(t));
    }
    json obj;
    obj["user_id"] = user.user_id;
    obj["stances"] = std::move(stances);
    obj["tweets"] = std::move(tweets);
    out += obj.dump();
    out += '\n';
  }
  write_file(path, out);
}

CorpusSplit split_users(const std::vector<UserRecord>& users, double train_fraction,
                        std::uint64_t seed) {
  if (users.size() < 2) throw InputError("split_users: need at least 2 users");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InputError("split_users: train_fraction must be in (0,1)");
  }
  const std::size_t n = users.size();
  const auto n_train = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(n)));

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  SplitMix64 rng(derive_seed(seed, {"corpus_split"}));
  deterministic_shuffle(order, rng);

  CorpusSplit split;
  split.seed = seed;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string& uid = users[order[i]].user_id;
    if (i < n_train) {
      split.train.insert(uid);
    } else {
      split.test.insert(uid);
    }
  }
  return split;
}

std::vector<Tweet> sample_tweets(const UserRecord& user, const std::string& target_id,
                                 SampleMode mode, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InputError("sample_tweets: n must be positive");
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < user.tweets.size(); ++i) {
    const bool refs = user.tweets[i].references(target_id);
    if (mode == SampleMode::Agnostic ? !refs : refs) eligible.push_back(i);
  }
  if (eligible.empty()) {
    throw InputError("sample_tweets: user '" + user.user_id + "' has no " +
                     to_string(mode) + " tweets for target '" + target_id + "'");
  }
  // The seed stream deliberately excludes n: samples at different budgets
  // share one permutation, so smaller budgets are prefixes of larger ones.
  SplitMix64 rng(derive_seed(seed, {"tweet_sample", user.user_id, target_id,
                                    to_string(mode)}));
  const std::vector<std::size_t> picked =
      sample_prefix(eligible.size(), std::min(n, eligible.size()), rng);
  std::vector<Tweet> out;
  out.reserve(picked.size());
  for (std::size_t p : picked) out.push_back(user.tweets[eligible[p]]);
  return out;
}

}  // namespace stance
