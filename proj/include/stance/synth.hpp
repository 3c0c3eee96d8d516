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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stance/analysis.hpp"
#include "stance/corpus.hpp"

namespace stance {

struct KeywordSet {
  std::vector<std::string> pro;
  std::vector<std::string> anti;
};

// Generator configuration. Everything downstream assumes at most one planted
// keyword per tweet, which keeps the per-tweet signal binary and the
// binomial acceptance math exact.
struct SynthConfig {
  std::size_t n_users = 200;
  std::size_t tweets_per_user = 50;
  // Additional target-specific tweets per user (targets = [target], always
  // keyword-bearing); exercises the detection-benchmark path.
  std::size_t specific_tweets_per_user = 0;
  double support_fraction = 0.5;
  std::map<std::string, KeywordSet> keyword_sets;  // per target, pro/anti disjoint
  double keyword_rate = 0.3;  // P(a tweet carries one stance-aligned keyword)
  // Lexicon-token injection: every dimension fires per tweet at the base
  // rate; per-dimension deltas are added for Against users (positive delta =
  // Against users emit more, giving a negative correlation with Support).
  double lexicon_base_rate = 0.0;
  std::map<std::string, double> lexicon_effect;  // dimension -> delta
  std::uint64_t seed = 1;

  static SynthConfig defaults();
  void validate() const;
};

inline const std::string kDefaultSynthTarget = "planted_topic";

// Deterministic per seed; per-user substreams make generation order-free.
std::vector<UserRecord> generate(const SynthConfig& config);

// The stance implied by a planted keyword for `target_id`, or nullopt for a
// filler-only tweet. Agrees with the generator's record by construction.
std::optional<StanceLabel> oracle_vote(const Tweet& tweet, const SynthConfig& config,
                                       const std::string& target_id);

// One synthetic lexicon token per moral dimension (weight 1), matching the
// tokens the generator injects and the bundled assets/lexicon_synthetic.csv.
Lexicon planted_lexicon();
std::string lexicon_token_for(const std::string& dimension);

// Sidecar truth manifest: config echo plus per-user latent stances.
nlohmann::json truth_manifest(const SynthConfig& config,
                              const std::vector<UserRecord>& users);

}  // namespace stance
