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

#include "stance/pooling.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "stance/errors.hpp"
#include "stance/util.hpp"

namespace stance {

std::optional<StanceLabel> majority_vote(const VoteTally& tally) {
  if (tally.n_support == 0 && tally.n_against == 0) return std::nullopt;
  if (tally.n_support >= tally.n_against) return StanceLabel::Support;
  return StanceLabel::Against;
}

StanceScore vote_score(const VoteTally& tally) {
  const std::size_t n = tally.total();
  if (n == 0) throw InputError("vote_score: no tweets supplied");
  const double diff = static_cast<double>(tally.n_support) -
                      static_cast<double>(tally.n_against);
  return StanceScore{diff / static_cast<double>(n), n};
}

StanceScore prob_score(std::span<const double> probs) {
  if (probs.empty()) throw InputError("prob_score: empty probability list");
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw InputError("prob_score: probability outside [0,1]");
    }
    sum += p;
  }
  return StanceScore{sum / static_cast<double>(probs.size()), probs.size()};
}

StanceLabel apply_threshold(const StanceScore& score, double threshold) {
  return score.value >= threshold ? StanceLabel::Support : StanceLabel::Against;
}

double threshold_balanced_accuracy(
    const std::vector<std::pair<StanceScore, StanceLabel>>& scores,
    double threshold) {
  std::size_t support_total = 0, support_hit = 0;
  std::size_t against_total = 0, against_hit = 0;
  for (const auto& [score, truth] : scores) {
    const StanceLabel pred = apply_threshold(score, threshold);
    if (truth == StanceLabel::Support) {
      ++support_total;
      if (pred == truth) ++support_hit;
    } else {
      ++against_total;
      if (pred == truth) ++against_hit;
    }
  }
  const double recall_s =
      support_total ? static_cast<double>(support_hit) / support_total : 0.0;
  const double recall_a =
      against_total ? static_cast<double>(against_hit) / against_total : 0.0;
  return 0.5 * (recall_s + recall_a);
}

double tune_threshold(
    const std::vector<std::pair<StanceScore, StanceLabel>>& train_scores) {
  bool has_support = false, has_against = false;
  for (const auto& [score, truth] : train_scores) {
    (truth == StanceLabel::Support ? has_support : has_against) = true;
  }
  if (!has_support || !has_against) {
    throw InputError("tune_threshold: training scores must contain both classes");
  }

  std::vector<double> values;
  values.reserve(train_scores.size());
  for (const auto& [score, truth] : train_scores) values.push_back(score.value);
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  std::vector<double> candidates;
  candidates.push_back(values.front() - 1.0);
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    candidates.push_back(0.5 * (values[i] + values[i + 1]));
  }
  candidates.push_back(values.back() + 1.0);
  std::sort(candidates.begin(), candidates.end());

  // Balanced accuracy is a step function of the threshold; midpoints between
  // distinct scores plus the two sentinels hit every step. Ascending scan
  // with a strict improvement test gives the smallest maximizer.
  double best_threshold = candidates.front();
  double best_ba = -1.0;
  for (double candidate : candidates) {
    const double ba = threshold_balanced_accuracy(train_scores, candidate);
    if (ba > best_ba) {
      best_ba = ba;
      best_threshold = candidate;
    }
  }
  return best_threshold;
}

void save_thresholds(const ThresholdConfig& thresholds,
                     const std::filesystem::path& path) {
  nlohmann::json obj = nlohmann::json::object();
  for (const auto& [target, value] : thresholds) obj[target] = value;
  write_file(path, obj.dump(2) + "\n");
}

ThresholdConfig load_thresholds(const std::filesystem::path& path) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("thresholds file " + path.string() + ": invalid JSON: " + e.what());
  }
  if (!obj.is_object()) throw InputError("thresholds file must be a JSON object");
  ThresholdConfig out;
  for (const auto& [target, value] : obj.items()) {
    if (!value.is_number()) throw InputError("threshold for '" + target + "' must be a number");
    const double v = value.get<double>();
    if (!std::isfinite(v)) throw InputError("threshold for '" + target + "' must be finite");
    out[target] = v;
  }
  return out;
}

}  // namespace stance
