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

#include "stance/synth.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "stance/errors.hpp"
#include "stance/rng.hpp"

namespace stance {

namespace {

constexpr std::size_t kFillerVocabSize = 200;

// Reserved tokens the filler vocabulary must avoid: keywords and lexicon
// tokens carry the planted signal.
std::unordered_set<std::string> reserved_tokens(const SynthConfig& config) {
  std::unordered_set<std::string> reserved;
  for (const auto& [target, set] : config.keyword_sets) {
    reserved.insert(set.pro.begin(), set.pro.end());
    reserved.insert(set.anti.begin(), set.anti.end());
  }
  for (const auto& dim : moral_dimensions()) reserved.insert(lexicon_token_for(dim));
  return reserved;
}

std::vector<std::string> make_filler_vocab(const SynthConfig& config) {
  const std::unordered_set<std::string> reserved = reserved_tokens(config);
  std::vector<std::string> vocab;
  std::unordered_set<std::string> seen;
  SplitMix64 rng(derive_seed(config.seed, {"filler_vocab"}));
  while (vocab.size() < kFillerVocabSize) {
    const std::size_t len = 4 + rng.below(5);  // 4..8 letters
    std::string word;
    for (std::size_t i = 0; i < len; ++i) {
      word.push_back(static_cast<char>('a' + rng.below(26)));
    }
    if (reserved.count(word) || !seen.insert(word).second) continue;
    vocab.push_back(std::move(word));
  }
  return vocab;
}

std::string user_id_for(std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "u%05zu", index);
  return buf;
}

std::string filler_text(SplitMix64& rng, const std::vector<std::string>& filler,
                        std::size_t n_tokens) {
  std::string text;
  for (std::size_t i = 0; i < n_tokens; ++i) {
    if (i > 0) text += ' ';
    text += filler[rng.below(filler.size())];
  }
  return text;
}

void insert_token(std::string& text, SplitMix64& rng, const std::string& token) {
  // Insert at a random word boundary.
  std::vector<std::size_t> boundaries;
  boundaries.push_back(0);
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == ' ') boundaries.push_back(i + 1);
  }
  const std::size_t at = boundaries[rng.below(boundaries.size())];
  text.insert(at, token + " ");
}

}  // namespace

std::string lexicon_token_for(const std::string& dimension) {
  std::string token = "lex";
  for (char c : dimension) {
    if (c != '.') token.push_back(c);
  }
  return token;
}

Lexicon planted_lexicon() {
  Lexicon lexicon;
  const auto& dims = moral_dimensions();
  for (std::size_t d = 0; d < dims.size(); ++d) {
    lexicon.words[lexicon_token_for(dims[d])][d] = 1.0;
  }
  return lexicon;
}

SynthConfig SynthConfig::defaults() {
  SynthConfig config;
  config.keyword_sets[kDefaultSynthTarget] =
      KeywordSet{{"kwpro"}, {"kwanti"}};
  return config;
}

void SynthConfig::validate() const {
  if (n_users == 0) throw InputError("synth: n_users must be positive");
  if (tweets_per_user == 0) throw InputError("synth: tweets_per_user must be positive");
  if (!(support_fraction > 0.0 && support_fraction < 1.0)) {
    throw InputError("synth: support_fraction must be in (0,1)");
  }
  if (!(keyword_rate >= 0.0 && keyword_rate <= 1.0)) {
    throw InputError("synth: keyword_rate must be in [0,1]");
  }
  if (!(lexicon_base_rate >= 0.0 && lexicon_base_rate <= 1.0)) {
    throw InputError("synth: lexicon_base_rate must be in [0,1]");
  }
  if (keyword_sets.empty()) throw InputError("synth: at least one target keyword set");
  for (const auto& [target, set] : keyword_sets) {
    if (!is_valid_target_id(target)) throw InputError("synth: invalid target id '" + target + "'");
    if (set.pro.empty() || set.anti.empty()) {
      throw InputError("synth: target '" + target + "' needs pro and anti keywords");
    }
    for (const auto& p : set.pro) {
      if (std::find(set.anti.begin(), set.anti.end(), p) != set.anti.end()) {
        throw InputError("synth: pro/anti keyword sets must be disjoint");
      }
    }
  }
  for (const auto& [dim, delta] : lexicon_effect) {
    if (moral_dimension_index(dim) < 0) {
      throw InputError("synth: unknown lexicon dimension '" + dim + "'");
    }
    const double against_rate = lexicon_base_rate + delta;
    if (against_rate < 0.0 || against_rate > 1.0) {
      throw InputError("synth: lexicon_effect for '" + dim +
                       "' pushes the Against rate outside [0,1]");
    }
  }
}

std::vector<UserRecord> generate(const SynthConfig& config) {
  config.validate();
  const std::vector<std::string> filler = make_filler_vocab(config);
  std::vector<std::string> targets;
  for (const auto& [target, set] : config.keyword_sets) targets.push_back(target);

  const auto& dims = moral_dimensions();
  std::vector<UserRecord> users;
  users.reserve(config.n_users);
  for (std::size_t u = 0; u < config.n_users; ++u) {
    UserRecord user;
    user.user_id = user_id_for(u);
    SplitMix64 rng(derive_seed(config.seed, {"user", user.user_id}));
    for (const auto& target : targets) {
      user.stances[target] = rng.bernoulli(config.support_fraction)
                                 ? StanceLabel::Support
                                 : StanceLabel::Against;
    }
    for (std::size_t t = 0; t < config.tweets_per_user; ++t) {
      Tweet tweet;
      tweet.id = user.user_id + "_t" + std::to_string(t);
      const std::size_t n_tokens = 5 + rng.below(6);  // 5..10 filler tokens
      tweet.text = filler_text(rng, filler, n_tokens);
      if (rng.bernoulli(config.keyword_rate)) {
        const std::string& target = targets[rng.below(targets.size())];
        const KeywordSet& set = config.keyword_sets.at(target);
        const auto& pool =
            user.stances.at(target) == StanceLabel::Support ? set.pro : set.anti;
        insert_token(tweet.text, rng, pool[rng.below(pool.size())]);
      }
      for (std::size_t d = 0; d < dims.size(); ++d) {
        double rate = config.lexicon_base_rate;
        const auto it = config.lexicon_effect.find(dims[d]);
        if (it != config.lexicon_effect.end()) {
          // Deltas shift the Against class of the first (anchor) target;
          // Support users stay at the base rate.
          const std::string& anchor = config.keyword_sets.begin()->first;
          if (user.stances.at(anchor) == StanceLabel::Against) rate += it->second;
        }
        if (rate > 0.0 && rng.bernoulli(rate)) {
          insert_token(tweet.text, rng, lexicon_token_for(dims[d]));
        }
      }
      user.tweets.push_back(std::move(tweet));
    }
    for (std::size_t t = 0; t < config.specific_tweets_per_user; ++t) {
      const std::string& target = targets[t % targets.size()];
      const KeywordSet& set = config.keyword_sets.at(target);
      Tweet tweet;
      tweet.id = user.user_id + "_s" + std::to_string(t);
      tweet.text = filler_text(rng, filler, 5 + rng.below(6));
      const auto& pool =
          user.stances.at(target) == StanceLabel::Support ? set.pro : set.anti;
      insert_token(tweet.text, rng, pool[rng.below(pool.size())]);
      tweet.targets.insert(target);
      user.tweets.push_back(std::move(tweet));
    }
    users.push_back(std::move(user));
  }
  return users;
}

std::optional<StanceLabel> oracle_vote(const Tweet& tweet, const SynthConfig& config,
                                       const std::string& target_id) {
  const auto it = config.keyword_sets.find(target_id);
  if (it == config.keyword_sets.end()) {
    throw InputError("oracle_vote: no keyword set for target '" + target_id + "'");
  }
  const std::vector<std::string> tokens = tokenize(tweet.text);
  for (const auto& token : tokens) {
    if (std::find(it->second.pro.begin(), it->second.pro.end(), token) !=
        it->second.pro.end()) {
      return StanceLabel::Support;
    }
    if (std::find(it->second.anti.begin(), it->second.anti.end(), token) !=
        it->second.anti.end()) {
      return StanceLabel::Against;
    }
  }
  return std::nullopt;
}

nlohmann::json truth_manifest(const SynthConfig& config,
                              const std::vector<UserRecord>& users) {
  nlohmann::json keyword_sets = nlohmann::json::object();
  for (const auto& [target, set] : config.keyword_sets) {
    keyword_sets[target] = {{"pro", set.pro}, {"anti", set.anti}};
  }
  nlohmann::json stances = nlohmann::json::object();
  for (const UserRecord& user : users) {
    nlohmann::json per_target = nlohmann::json::object();
    for (const auto& [target, label] : user.stances) per_target[target] = to_string(label);
    stances[user.user_id] = std::move(per_target);
  }
  return nlohmann::json{{"generator",
                         {{"n_users", config.n_users},
                          {"tweets_per_user", config.tweets_per_user},
                          {"specific_tweets_per_user", config.specific_tweets_per_user},
                          {"support_fraction", config.support_fraction},
                          {"keyword_rate", config.keyword_rate},
                          {"lexicon_base_rate", config.lexicon_base_rate},
                          {"lexicon_effect", config.lexicon_effect},
                          {"keyword_sets", keyword_sets},
                          {"seed", config.seed}}},
                        {"stances", stances}};
}

}  // namespace stance
