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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stance/corpus.hpp"

namespace stance {

// Support is the positive class. Unparsable predictions are kept split by
// truth class: they charge the true class's recall without contributing a
// false positive anywhere, and the split is what makes the metrics
// recomputable from the counts alone.
struct ConfusionCounts {
  std::size_t tp = 0;  // predicted Support, truth Support
  std::size_t fp = 0;  // predicted Support, truth Against
  std::size_t tn = 0;  // predicted Against, truth Against
  std::size_t fn = 0;  // predicted Against, truth Support
  std::size_t unparsable_truth_support = 0;
  std::size_t unparsable_truth_against = 0;

  std::size_t n_unparsable() const {
    return unparsable_truth_support + unparsable_truth_against;
  }
  std::size_t total() const { return tp + fp + tn + fn + n_unparsable(); }
};

struct CellKey {
  std::string target;
  std::string method;
  std::size_t tweets_per_user = 0;
};

struct MetricsReport {
  double f1_support = 0.0;
  double f1_against = 0.0;
  double balanced_accuracy = 0.0;
  ConfusionCounts counts;
  CellKey cell;
};

// Balanced accuracy = mean of per-class recalls; F1 per class from
// precision/recall, 0 when the denominator is 0.
MetricsReport score_counts(const ConfusionCounts& counts, CellKey cell = {});

// preds[i] == nullopt means the prediction was unparsable.
MetricsReport score(const std::vector<std::optional<StanceLabel>>& preds,
                    const std::vector<StanceLabel>& truth, CellKey cell = {});

// CSV header:
// target,method,tweets_per_user,f1_support,f1_against,balanced_accuracy,tp,fp,tn,fn,n_unparsable
// Metric columns are printed at 3 decimals (table precision); the JSON
// document carries full-precision values.
std::string metrics_csv(const std::vector<MetricsReport>& reports);
nlohmann::json metrics_json(const std::vector<MetricsReport>& reports);

// Evaluates one prediction procedure at every budget of an ascending grid.
// The runner receives the budget and returns per-user predictions aligned
// with `truth` (nested sampling is the runner's concern).
std::vector<std::pair<std::size_t, MetricsReport>> sweep_curve(
    const std::function<std::vector<std::optional<StanceLabel>>(std::size_t)>& runner,
    const std::vector<StanceLabel>& truth, const std::vector<std::size_t>& n_grid,
    CellKey base_cell = {});

}  // namespace stance
