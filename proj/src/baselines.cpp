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

#include "stance/baselines.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "stance/rng.hpp"

namespace stance {

Eigen::VectorXd to_y01(const std::vector<StanceLabel>& labels) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    y[static_cast<Eigen::Index>(i)] = labels[i] == StanceLabel::Support ? 1.0 : 0.0;
  }
  return y;
}

double logreg_loss_from_margins(const Eigen::VectorXd& margins,
                                const Eigen::VectorXd& y01,
                                const Eigen::VectorXd& weights, double l2_lambda) {
  const Eigen::Index m = margins.size();
  double total = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double z = margins[i];
    const double softplus = std::max(z, 0.0) + std::log1p(std::exp(-std::fabs(z)));
    total += softplus - y01[i] * z;
  }
  return total / static_cast<double>(m) + l2_lambda * weights.squaredNorm();
}

double predict_proba(const LinearModel& model, const DenseVec& x) {
  if (x.size() != model.weights.size()) {
    throw InputError("predict_proba: feature dimension mismatch");
  }
  return sigmoid(model.weights.dot(x) + model.bias);
}

double predict_proba(const LinearModel& model, const SparseVec& x) {
  if (x.size() != model.weights.size()) {
    throw InputError("predict_proba: feature dimension mismatch");
  }
  double z = model.bias;
  for (SparseVec::InnerIterator it(x); it; ++it) z += model.weights[it.index()] * it.value();
  return sigmoid(z);
}

namespace {

struct TreeBuilder {
  const Eigen::MatrixXd& X;
  const Eigen::VectorXd& y01;
  const ForestOptions& options;
  SplitMix64& rng;
  std::size_t features_per_split;
  DecisionTree tree;

  // Weighted Gini impurity of a candidate split, lower is better.
  static double gini(double n_support, double n_total) {
    if (n_total == 0.0) return 0.0;
    const double p = n_support / n_total;
    return 2.0 * p * (1.0 - p);
  }

  int build(std::vector<Eigen::Index>& rows, int depth) {
    const int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    std::uint32_t n_support = 0;
    for (Eigen::Index r : rows) n_support += y01[r] == 1.0 ? 1u : 0u;
    tree.nodes[node_id].n_support = n_support;
    tree.nodes[node_id].n_against = static_cast<std::uint32_t>(rows.size()) - n_support;

    const bool pure = n_support == 0 || n_support == rows.size();
    const bool depth_capped = options.max_depth >= 0 && depth >= options.max_depth;
    if (pure || rows.size() < options.min_samples_split || depth_capped) {
      return node_id;
    }

    // Sample ceil(sqrt(d)) distinct candidate features, then scan them in
    // ascending index order so equal-impurity ties resolve to the lowest
    // feature, then the lowest threshold.
    const Eigen::Index d = X.cols();
    std::vector<Eigen::Index> all_features(static_cast<std::size_t>(d));
    std::iota(all_features.begin(), all_features.end(), 0);
    for (std::size_t i = 0; i < features_per_split; ++i) {
      const std::size_t j = i + rng.below(all_features.size() - i);
      std::swap(all_features[i], all_features[j]);
    }
    std::vector<Eigen::Index> candidates(all_features.begin(),
                                         all_features.begin() +
                                             static_cast<std::ptrdiff_t>(features_per_split));
    std::sort(candidates.begin(), candidates.end());

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_impurity = std::numeric_limits<double>::infinity();
    std::vector<std::pair<double, double>> values;  // (x, y)
    for (Eigen::Index f : candidates) {
      values.clear();
      values.reserve(rows.size());
      for (Eigen::Index r : rows) values.emplace_back(X(r, f), y01[r]);
      std::sort(values.begin(), values.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      const double total = static_cast<double>(values.size());
      const double total_support = static_cast<double>(n_support);
      double left_n = 0.0, left_support = 0.0;
      for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        left_n += 1.0;
        left_support += values[i].second;
        if (values[i].first == values[i + 1].first) continue;
        const double right_n = total - left_n;
        const double right_support = total_support - left_support;
        const double impurity = (left_n * gini(left_support, left_n) +
                                 right_n * gini(right_support, right_n)) /
                                total;
        if (impurity < best_impurity) {
          best_impurity = impurity;
          best_feature = static_cast<int>(f);
          best_threshold = 0.5 * (values[i].first + values[i + 1].first);
        }
      }
    }
    if (best_feature < 0) return node_id;  // all candidate features constant

    std::vector<Eigen::Index> left_rows, right_rows;
    for (Eigen::Index r : rows) {
      (X(r, best_feature) <= best_threshold ? left_rows : right_rows).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    tree.nodes[node_id].feature = best_feature;
    tree.nodes[node_id].threshold = best_threshold;
    const int left = build(left_rows, depth + 1);
    tree.nodes[node_id].left = left;
    const int right = build(right_rows, depth + 1);
    tree.nodes[node_id].right = right;
    return node_id;
  }
};

}  // namespace

ForestModel train_forest(const Eigen::MatrixXd& X, const std::vector<StanceLabel>& labels,
                         const ForestOptions& options) {
  const Eigen::Index m = X.rows();
  if (static_cast<std::size_t>(m) != labels.size()) {
    throw InputError("train_forest: feature/label count mismatch");
  }
  if (m < 2) throw InputError("train_forest: need at least 2 examples");
  if (options.n_trees == 0) throw InputError("train_forest: n_trees must be positive");
  const Eigen::VectorXd y01 = to_y01(labels);
  if (y01.sum() == 0.0 || y01.sum() == static_cast<double>(m)) {
    throw InputError("train_forest: training data contains a single class");
  }
  const auto features_per_split = static_cast<std::size_t>(
      std::ceil(std::sqrt(static_cast<double>(X.cols()))));

  ForestModel model;
  model.options = options;
  model.trees.reserve(options.n_trees);
  for (std::size_t t = 0; t < options.n_trees; ++t) {
    SplitMix64 rng(derive_seed(options.seed, {"tree", std::to_string(t)}));
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(m));
    if (options.bootstrap) {
      for (auto& r : rows) r = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(m)));
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    TreeBuilder builder{X, y01, options, rng, features_per_split, {}};
    builder.build(rows, 0);
    model.trees.push_back(std::move(builder.tree));
  }
  return model;
}

double tree_predict_proba(const DecisionTree& tree, const DenseVec& x) {
  int node = 0;
  for (;;) {
    const TreeNode& n = tree.nodes[static_cast<std::size_t>(node)];
    if (n.is_leaf()) {
      const double total = static_cast<double>(n.n_support) + n.n_against;
      return static_cast<double>(n.n_support) / total;
    }
    if (x[n.feature] != x[n.feature]) {
      throw InputError("tree_predict_proba: NaN feature value");
    }
    node = x[n.feature] <= n.threshold ? n.left : n.right;
  }
}

double predict_proba(const ForestModel& model, const DenseVec& x) {
  if (model.trees.empty()) throw InputError("predict_proba: empty forest");
  double sum = 0.0;
  for (const DecisionTree& tree : model.trees) {
    if (!tree.nodes.empty() && tree.nodes[0].feature >= 0 &&
        x.size() <= tree.nodes[0].feature) {
      throw InputError("predict_proba: feature dimension mismatch");
    }
    sum += tree_predict_proba(tree, x);
  }
  return sum / static_cast<double>(model.trees.size());
}

int tree_depth(const DecisionTree& tree) {
  // Iterative depth over the explicit child links.
  int max_depth = 0;
  std::vector<std::pair<int, int>> stack{{0, 0}};
  while (!stack.empty()) {
    const auto [node, depth] = stack.back();
    stack.pop_back();
    max_depth = std::max(max_depth, depth);
    const TreeNode& n = tree.nodes[static_cast<std::size_t>(node)];
    if (!n.is_leaf()) {
      stack.emplace_back(n.left, depth + 1);
      stack.emplace_back(n.right, depth + 1);
    }
  }
  return max_depth;
}

CVPlan make_cv_plan(const std::vector<std::pair<std::string, StanceLabel>>& users,
                    int k, std::uint64_t seed) {
  if (k < 2) throw InputError("make_cv_plan: k must be >= 2");
  if (users.size() < static_cast<std::size_t>(k)) {
    throw InputError("make_cv_plan: fewer users than folds");
  }
  std::vector<std::size_t> order(users.size());
  std::iota(order.begin(), order.end(), 0);
  SplitMix64 rng(derive_seed(seed, {"cv_plan"}));
  deterministic_shuffle(order, rng);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return static_cast<int>(users[a].second) < static_cast<int>(users[b].second);
  });

  CVPlan plan;
  plan.k = k;
  std::vector<std::array<int, 2>> class_counts(static_cast<std::size_t>(k), {0, 0});
  std::vector<int> totals(static_cast<std::size_t>(k), 0);
  for (std::size_t idx : order) {
    const auto& [user_id, label] = users[idx];
    const int cls = static_cast<int>(label);
    int best_fold = 0;
    for (int f = 1; f < k; ++f) {
      const auto fu = static_cast<std::size_t>(f);
      const auto bu = static_cast<std::size_t>(best_fold);
      if (class_counts[fu][cls] < class_counts[bu][cls] ||
          (class_counts[fu][cls] == class_counts[bu][cls] && totals[fu] < totals[bu])) {
        best_fold = f;
      }
    }
    if (!plan.fold_of.emplace(user_id, best_fold).second) {
      throw InputError("make_cv_plan: duplicate user '" + user_id + "'");
    }
    ++class_counts[static_cast<std::size_t>(best_fold)][cls];
    ++totals[static_cast<std::size_t>(best_fold)];
  }
  return plan;
}

double tweet_balanced_accuracy(const std::vector<double>& probs,
                               const std::vector<StanceLabel>& labels) {
  if (probs.size() != labels.size() || probs.empty()) {
    throw InputError("tweet_balanced_accuracy: bad inputs");
  }
  std::size_t support_total = 0, support_hit = 0, against_total = 0, against_hit = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const bool pred_support = probs[i] >= 0.5;
    if (labels[i] == StanceLabel::Support) {
      ++support_total;
      if (pred_support) ++support_hit;
    } else {
      ++against_total;
      if (!pred_support) ++against_hit;
    }
  }
  const double rs = support_total ? static_cast<double>(support_hit) / support_total : 0.0;
  const double ra = against_total ? static_cast<double>(against_hit) / against_total : 0.0;
  return 0.5 * (rs + ra);
}

Eigen::MatrixXd subset_rows(const Eigen::MatrixXd& X,
                            const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
  }
  return out;
}

SparseRowMatrix subset_rows(const SparseRowMatrix& X,
                            const std::vector<Eigen::Index>& rows) {
  SparseRowMatrix out(static_cast<Eigen::Index>(rows.size()), X.cols());
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (SparseRowMatrix::InnerIterator it(X, rows[i]); it; ++it) {
      triplets.emplace_back(static_cast<Eigen::Index>(i), it.col(), it.value());
    }
  }
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

DepthSelection select_forest_depth(const Eigen::MatrixXd& X,
                                   const std::vector<StanceLabel>& y,
                                   const std::vector<std::string>& row_user,
                                   const CVPlan& plan, const std::vector<int>& grid,
                                   ForestOptions base) {
  if (grid.empty()) throw InputError("select_forest_depth: empty grid");
  // Ascending with unbounded (-1) last, so ties resolve to the smaller depth.
  std::vector<int> depths = grid;
  std::sort(depths.begin(), depths.end(), [](int a, int b) {
    if ((a < 0) != (b < 0)) return b < 0;
    return a < b;
  });
  DepthSelection selection;
  double best = -1.0;
  for (int depth : depths) {
    ForestOptions options = base;
    options.max_depth = depth;
    const double score = detail::cv_mean_balanced_accuracy(
        X, y, row_user, plan,
        [&](const Eigen::MatrixXd& train_x, const std::vector<StanceLabel>& train_y) {
          return train_forest(train_x, train_y, options);
        },
        [&](const ForestModel& model, Eigen::Index row) {
          return predict_proba(model, DenseVec(X.row(row)));
        });
    selection.scores.emplace_back(depth, score);
    if (score > best) {
      best = score;
      selection.max_depth = depth;
    }
  }
  return selection;
}

nlohmann::json to_json(const LinearModel& model) {
  std::vector<double> weights(model.weights.data(),
                              model.weights.data() + model.weights.size());
  return nlohmann::json{{"kind", "logreg"},
                        {"weights", weights},
                        {"bias", model.bias},
                        {"l2_lambda", model.l2_lambda}};
}

LinearModel linear_model_from_json(const nlohmann::json& obj) {
  if (!obj.contains("weights") || !obj.contains("bias")) {
    throw InputError("linear model JSON: missing weights/bias");
  }
  const auto weights = obj["weights"].get<std::vector<double>>();
  LinearModel model;
  model.weights = Eigen::Map<const Eigen::VectorXd>(weights.data(),
                                                    static_cast<Eigen::Index>(weights.size()));
  model.bias = obj["bias"].get<double>();
  model.l2_lambda = obj.value("l2_lambda", 0.0);
  return model;
}

nlohmann::json to_json(const ForestModel& model) {
  nlohmann::json trees = nlohmann::json::array();
  for (const DecisionTree& tree : model.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const TreeNode& n : tree.nodes) {
      nodes.push_back({n.feature, n.threshold, n.left, n.right, n.n_support, n.n_against});
    }
    trees.push_back(std::move(nodes));
  }
  return nlohmann::json{{"kind", "ranfor"},
                        {"trees", std::move(trees)},
                        {"n_trees", model.options.n_trees},
                        {"max_depth", model.options.max_depth},
                        {"seed", model.options.seed}};
}

ForestModel forest_model_from_json(const nlohmann::json& obj) {
  if (!obj.contains("trees") || !obj["trees"].is_array()) {
    throw InputError("forest model JSON: missing trees");
  }
  ForestModel model;
  model.options.n_trees = obj.value("n_trees", static_cast<std::size_t>(0));
  model.options.max_depth = obj.value("max_depth", -1);
  model.options.seed = obj.value("seed", static_cast<std::uint64_t>(0));
  for (const auto& tree_json : obj["trees"]) {
    DecisionTree tree;
    for (const auto& n : tree_json) {
      if (!n.is_array() || n.size() != 6) {
        throw InputError("forest model JSON: malformed node record");
      }
      TreeNode node;
      node.feature = n[0].get<int>();
      node.threshold = n[1].get<double>();
      node.left = n[2].get<int>();
      node.right = n[3].get<int>();
      node.n_support = n[4].get<std::uint32_t>();
      node.n_against = n[5].get<std::uint32_t>();
      tree.nodes.push_back(node);
    }
    if (tree.nodes.empty()) throw InputError("forest model JSON: empty tree");
    model.trees.push_back(std::move(tree));
  }
  return model;
}

}  // namespace stance
