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
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace stance {

// The dataset has exactly two stance classes; there is no Neutral label.
enum class StanceLabel { Against = 0, Support = 1 };

std::string to_string(StanceLabel label);
std::optional<StanceLabel> stance_from_string(std::string_view s);
inline StanceLabel flipped(StanceLabel label) {
  return label == StanceLabel::Support ? StanceLabel::Against : StanceLabel::Support;
}

struct Tweet {
  std::string id;
  std::string text;
  // Target identifiers this tweet explicitly references. Empty means
  // target-agnostic for every target. A tweet referencing target A still
  // counts as agnostic for target B.
  std::set<std::string> targets;

  bool references(const std::string& target_id) const {
    return targets.count(target_id) > 0;
  }
};

struct UserRecord {
  std::string user_id;
  std::vector<Tweet> tweets;
  std::map<std::string, StanceLabel> stances;  // target id -> ground truth
};

struct CorpusSplit {
  std::set<std::string> train;
  std::set<std::string> test;
  std::uint64_t seed = 0;
};

enum class SampleMode { Agnostic, Specific };

std::string to_string(SampleMode mode);
std::optional<SampleMode> sample_mode_from_string(std::string_view s);

// Loads a JSONL corpus, one UserRecord per line:
//   {"user_id": "...", "stances": {"<target>": "support"|"against", ...},
//    "tweets": [{"id": "...", "text": "...", "targets": ["...", ...]}, ...]}
// The whole file is rejected on the first malformed line; the error names
// the line number.
std::vector<UserRecord> load_corpus(const std::filesystem::path& path);

// Inverse of load_corpus on validated records; load(write(x)) == x.
void write_corpus(const std::vector<UserRecord>& users,
                  const std::filesystem::path& path);

// Uniform random split without stratification; |train| = round(fraction * n).
// Same (corpus order, fraction, seed) always produces the same split.
CorpusSplit split_users(const std::vector<UserRecord>& users,
                        double train_fraction, std::uint64_t seed);

// Uniform sample without replacement of min(n, available) tweets matching the
// mode predicate for `target`. Deterministic per (user, target, mode, seed),
// and nested: the n1-sample is a prefix of the n2-sample for n1 <= n2 under
// the same seed. Throws if no tweet satisfies the mode.
std::vector<Tweet> sample_tweets(const UserRecord& user,
                                 const std::string& target_id, SampleMode mode,
                                 std::size_t n, std::uint64_t seed);

// Lowercase snake-case, as required of target identifiers in corpus files.
bool is_valid_target_id(std::string_view id);

}  // namespace stance
