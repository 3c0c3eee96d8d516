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

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stance/corpus.hpp"

namespace stance {

struct VoteTally {
  std::size_t n_support = 0;
  std::size_t n_against = 0;
  std::size_t n_ignored = 0;  // unparsable per-tweet replies

  std::size_t total() const { return n_support + n_against + n_ignored; }
};

struct StanceScore {
  double value = 0.0;        // [0,1] for probability means, [-1,1] for vote scores
  std::size_t n_tweets = 0;  // the N the score was pooled over
};

// Per-target tuned decision thresholds.
using ThresholdConfig = std::map<std::string, double>;

// Majority rule over parsed votes; ignored tweets never count. A tie is
// Support (the vote-score rule at threshold 0 reads ">= 0"); zero parsed
// votes in either class is unparsable.
std::optional<StanceLabel> majority_vote(const VoteTally& tally);

// (n_support - n_against) / N where N counts every supplied tweet, ignored
// ones included. Throws when N is zero.
StanceScore vote_score(const VoteTally& tally);

// Arithmetic mean of per-tweet Support probabilities. Throws on empty input.
StanceScore prob_score(std::span<const double> probs);

// Support iff score >= threshold.
StanceLabel apply_threshold(const StanceScore& score, double threshold);

// Scans candidate thresholds (midpoints of consecutive distinct sorted score
// values, plus min-1 and max+1 sentinels) and returns the one maximizing
// balanced accuracy on the training pairs; ties go to the smallest candidate.
// Throws unless both classes are present.
double tune_threshold(
    const std::vector<std::pair<StanceScore, StanceLabel>>& train_scores);

// Balanced accuracy of the >= threshold rule on labelled scores.
double threshold_balanced_accuracy(
    const std::vector<std::pair<StanceScore, StanceLabel>>& scores,
    double threshold);

// {target_id: threshold} JSON file, written alongside the run manifest.
void save_thresholds(const ThresholdConfig& thresholds,
                     const std::filesystem::path& path);
ThresholdConfig load_thresholds(const std::filesystem::path& path);

}  // namespace stance
