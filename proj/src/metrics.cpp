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

#include "stance/metrics.hpp"

#include <algorithm>

#include "stance/errors.hpp"
#include "stance/util.hpp"

namespace stance {

namespace {

double safe_ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

}  // namespace

MetricsReport score_counts(const ConfusionCounts& c, CellKey cell) {
  const auto tp = static_cast<double>(c.tp);
  const auto fp = static_cast<double>(c.fp);
  const auto tn = static_cast<double>(c.tn);
  const auto fn = static_cast<double>(c.fn);
  const auto us = static_cast<double>(c.unparsable_truth_support);
  const auto ua = static_cast<double>(c.unparsable_truth_against);

  const double recall_s = safe_ratio(tp, tp + fn + us);
  const double recall_a = safe_ratio(tn, tn + fp + ua);
  const double precision_s = safe_ratio(tp, tp + fp);
  const double precision_a = safe_ratio(tn, tn + fn);

  MetricsReport report;
  report.counts = c;
  report.cell = std::move(cell);
  report.balanced_accuracy = 0.5 * (recall_s + recall_a);
  report.f1_support =
      safe_ratio(2.0 * precision_s * recall_s, precision_s + recall_s);
  report.f1_against =
      safe_ratio(2.0 * precision_a * recall_a, precision_a + recall_a);
  return report;
}

MetricsReport score(const std::vector<std::optional<StanceLabel>>& preds,
                    const std::vector<StanceLabel>& truth, CellKey cell) {
  if (preds.size() != truth.size()) {
    throw InputError("score: prediction/truth length mismatch");
  }
  if (preds.empty()) throw InputError("score: empty input");
  ConfusionCounts c;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const bool truth_support = truth[i] == StanceLabel::Support;
    if (!preds[i].has_value()) {
      ++(truth_support ? c.unparsable_truth_support : c.unparsable_truth_against);
    } else if (*preds[i] == StanceLabel::Support) {
      ++(truth_support ? c.tp : c.fp);
    } else {
      ++(truth_support ? c.fn : c.tn);
    }
  }
  return score_counts(c, std::move(cell));
}

std::string metrics_csv(const std::vector<MetricsReport>& reports) {
  std::string out =
      "target,method,tweets_per_user,f1_support,f1_against,balanced_accuracy,"
      "tp,fp,tn,fn,n_unparsable\n";
  for (const MetricsReport& r : reports) {
    out += r.cell.target;
    out += ',';
    out += r.cell.method;
    out += ',';
    out += std::to_string(r.cell.tweets_per_user);
    out += ',';
    out += format_fixed(r.f1_support, 3);
    out += ',';
    out += format_fixed(r.f1_against, 3);
    out += ',';
    out += format_fixed(r.balanced_accuracy, 3);
    out += ',';
    out += std::to_string(r.counts.tp);
    out += ',';
    out += std::to_string(r.counts.fp);
    out += ',';
    out += std::to_string(r.counts.tn);
    out += ',';
    out += std::to_string(r.counts.fn);
    out += ',';
    out += std::to_string(r.counts.n_unparsable());
    out += '\n';
  }
  return out;
}

nlohmann::json metrics_json(const std::vector<MetricsReport>& reports) {
  nlohmann::json out = nlohmann::json::object();
  for (const MetricsReport& r : reports) {
    const std::string key =
        r.cell.target + "|" + r.cell.method + "|" + std::to_string(r.cell.tweets_per_user);
    out[key] = {{"target", r.cell.target},
                {"method", r.cell.method},
                {"tweets_per_user", r.cell.tweets_per_user},
                {"f1_support", r.f1_support},
                {"f1_against", r.f1_against},
                {"balanced_accuracy", r.balanced_accuracy},
                {"tp", r.counts.tp},
                {"fp", r.counts.fp},
                {"tn", r.counts.tn},
                {"fn", r.counts.fn},
                {"n_unparsable", r.counts.n_unparsable()}};
  }
  return out;
}

std::vector<std::pair<std::size_t, MetricsReport>> sweep_curve(
    const std::function<std::vector<std::optional<StanceLabel>>(std::size_t)>& runner,
    const std::vector<StanceLabel>& truth, const std::vector<std::size_t>& n_grid,
    CellKey base_cell) {
  if (n_grid.empty()) throw InputError("sweep_curve: empty budget grid");
  if (!std::is_sorted(n_grid.begin(), n_grid.end()) ||
      std::adjacent_find(n_grid.begin(), n_grid.end()) != n_grid.end()) {
    throw InputError("sweep_curve: budget grid must be strictly ascending");
  }
  std::vector<std::pair<std::size_t, MetricsReport>> rows;
  rows.reserve(n_grid.size());
  for (std::size_t n : n_grid) {
    const auto preds = runner(n);
    CellKey cell = base_cell;
    cell.tweets_per_user = n;
    rows.emplace_back(n, score(preds, truth, std::move(cell)));
  }
  return rows;
}

}  // namespace stance
