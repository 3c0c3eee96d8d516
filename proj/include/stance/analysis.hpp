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

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "stance/corpus.hpp"
#include "stance/features.hpp"

namespace stance {

inline constexpr std::size_t kMoralDimensions = 10;

// The ten moral-foundation dimensions, fixed order:
// {care, fairness, loyalty, authority, sanctity} x {virtue, vice}.
const std::array<std::string, kMoralDimensions>& moral_dimensions();
int moral_dimension_index(std::string_view name);  // -1 if unknown

struct Lexicon {
  // word -> per-dimension weights (0 where the word carries none). A word's
  // presence in this map is what makes a token "lexicon-matched".
  std::unordered_map<std::string, std::array<double, kMoralDimensions>> words;
};

// CSV rows word,dimension,weight (a header row is skipped when present);
// weights must be finite and in [0,1].
Lexicon load_lexicon(const std::filesystem::path& path);

struct CorrelationRow {
  std::string feature;
  std::string target;
  double r = 0.0;
  std::size_t n = 0;
  double p_value = 1.0;
  bool significant = false;  // p < .01, maintained with p_value
};

// Pearson correlation of x against y coded {0,1} (identical to the
// point-biserial formula) plus the two-sided p-value from
// t = r * sqrt((n-2)/(1-r^2)) under Student-t with n-2 df.
// Requires n >= 3, both classes present, and non-constant x.
std::pair<double, double> point_biserial(const Eigen::VectorXd& x,
                                         const Eigen::VectorXd& y01);

// One user's worth of evidence for the correlation analyses: the user's
// target-agnostic tweets (tokenized) and the stance truth for the target.
struct UserDocs {
  std::string user_id;
  std::vector<std::vector<std::string>> tweet_tokens;
  StanceLabel stance = StanceLabel::Against;
};

struct KeywordCorrelationResult {
  std::vector<CorrelationRow> rows;   // sorted by |r| desc, term asc
  std::size_t skipped_constant = 0;   // terms with constant per-user feature
};

// Per-user feature for a term = mean TF-IDF weight of that term across the
// user's tweets; rows are point-biserial correlations against stance
// (Support coded 1), truncated to top_k by |r|.
KeywordCorrelationResult keyword_correlations(const std::vector<UserDocs>& users,
                                              const std::string& target_id,
                                              const Vocabulary& vocab,
                                              std::size_t top_k);

struct LexiconScores {
  std::array<double, kMoralDimensions> score{};  // mean weight over matched tokens
  std::size_t matched_tokens = 0;                // 0 flags an all-zero row
};

// Concatenates the user's target-agnostic tweets, tokenizes, and averages
// lexicon weights over matched tokens (zero and flagged when none match).
LexiconScores lexicon_scores(const UserRecord& user, const Lexicon& lexicon,
                             const std::string& target_id);
LexiconScores lexicon_scores_from_tokens(
    const std::vector<std::vector<std::string>>& tweet_tokens, const Lexicon& lexicon);

// One row per dimension, always 10, in moral_dimensions() order. Dimensions
// whose scores are constant across users degenerate to r=0, p=1.
std::vector<CorrelationRow> lexicon_correlations(const std::vector<UserDocs>& users,
                                                 const std::string& target_id,
                                                 const Lexicon& lexicon);

// CSV with header feature,target,r,n,p_value,significant.
std::string correlation_csv(const std::vector<CorrelationRow>& rows);

}  // namespace stance
