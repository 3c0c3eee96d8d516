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
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "stance/corpus.hpp"
#include "stance/errors.hpp"
#include "stance/features.hpp"
#include "stance/pooling.hpp"

namespace stance {

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct LinearModel {
  Eigen::VectorXd weights;
  double bias = 0.0;
  double l2_lambda = 0.0;
};

struct LogRegOptions {
  int max_iterations = 5000;
  double gradient_tolerance = 1e-6;  // infinity norm, bias included
};

// Support is coded 1 throughout.
Eigen::VectorXd to_y01(const std::vector<StanceLabel>& labels);

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double predict_proba(const LinearModel& model, const DenseVec& x);
double predict_proba(const LinearModel& model, const SparseVec& x);

// J(w,b) = -(1/m) sum_i [y ln s + (1-y) ln(1-s)] + lambda * ||w||^2, with the
// bias unregularized. Computed through the softplus identity
// -[y ln s + (1-y) ln(1-s)] = softplus(z) - y z for numerical stability.
double logreg_loss_from_margins(const Eigen::VectorXd& margins,
                                const Eigen::VectorXd& y01,
                                const Eigen::VectorXd& weights, double l2_lambda);

template <class Matrix>
double logreg_loss(const Matrix& X, const Eigen::VectorXd& y01,
                   const Eigen::VectorXd& weights, double bias, double l2_lambda) {
  Eigen::VectorXd margins = X * weights;
  margins.array() += bias;
  return logreg_loss_from_margins(margins, y01, weights, l2_lambda);
}

template <class Matrix>
std::pair<Eigen::VectorXd, double> logreg_gradient(const Matrix& X,
                                                   const Eigen::VectorXd& y01,
                                                   const Eigen::VectorXd& weights,
                                                   double bias, double l2_lambda) {
  const double m = static_cast<double>(X.rows());
  Eigen::VectorXd margins = X * weights;
  margins.array() += bias;
  const Eigen::VectorXd resid =
      (margins.unaryExpr([](double z) { return sigmoid(z); }) - y01) / m;
  Eigen::VectorXd grad_w = X.transpose() * resid + 2.0 * l2_lambda * weights;
  return {std::move(grad_w), resid.sum()};
}

// Full-batch gradient descent with Armijo backtracking line search. Stops at
// gradient infinity-norm < tolerance or at the iteration cap. The descent
// direction is reused to make trial steps O(m): X*(w - t*g) = X*w - t*(X*g).
template <class Matrix>
LinearModel train_logreg(const Matrix& X, const std::vector<StanceLabel>& labels,
                         double l2_lambda, const LogRegOptions& opts = {}) {
  const Eigen::Index m = X.rows();
  const Eigen::Index d = X.cols();
  if (static_cast<std::size_t>(m) != labels.size()) {
    throw InputError("train_logreg: feature/label count mismatch");
  }
  if (m < 2) throw InputError("train_logreg: need at least 2 examples");
  if (l2_lambda < 0.0) throw InputError("train_logreg: negative l2_lambda");
  const Eigen::VectorXd y01 = to_y01(labels);
  if (y01.sum() == 0.0 || y01.sum() == static_cast<double>(m)) {
    throw InputError("train_logreg: training data contains a single class");
  }

  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  double b = 0.0;
  Eigen::VectorXd margins = Eigen::VectorXd::Zero(m);
  double loss = logreg_loss_from_margins(margins, y01, w, l2_lambda);
  if (!std::isfinite(loss)) throw RunError("train_logreg: non-finite loss");
  constexpr double kArmijo = 1e-4;
  double step = 1.0;

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    const Eigen::VectorXd resid =
        (margins.unaryExpr([](double z) { return sigmoid(z); }) - y01) /
        static_cast<double>(m);
    Eigen::VectorXd grad_w = X.transpose() * resid + 2.0 * l2_lambda * w;
    const double grad_b = resid.sum();
    const double grad_inf =
        std::max(d > 0 ? grad_w.cwiseAbs().maxCoeff() : 0.0, std::fabs(grad_b));
    if (grad_inf < opts.gradient_tolerance) break;

    const Eigen::VectorXd direction_margins = X * grad_w;
    const double grad_sq = grad_w.squaredNorm() + grad_b * grad_b;
    double t = step;
    bool accepted = false;
    Eigen::VectorXd trial_margins, trial_w;
    double trial_loss = 0.0;
    for (int halving = 0; halving < 80; ++halving) {
      trial_margins = margins - t * direction_margins;
      trial_margins.array() -= t * grad_b;
      trial_w = w - t * grad_w;
      trial_loss = logreg_loss_from_margins(trial_margins, y01, trial_w, l2_lambda);
      if (std::isfinite(trial_loss) && trial_loss <= loss - kArmijo * t * grad_sq) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;  // step underflow: no descent representable
    w = std::move(trial_w);
    b -= t * grad_b;
    margins = std::move(trial_margins);
    loss = trial_loss;
    step = std::min(t * 2.0, 1e6);
  }
  if (!std::isfinite(loss)) throw RunError("train_logreg: non-finite loss");
  return LinearModel{std::move(w), b, l2_lambda};
}

// CART node. feature < 0 marks a leaf; class counts are kept on every node
// so leaves can report the Support fraction.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::uint32_t n_support = 0;
  std::uint32_t n_against = 0;

  bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct ForestOptions {
  std::size_t n_trees = 100;
  int max_depth = -1;  // -1 = unbounded
  std::uint64_t seed = 0;
  bool bootstrap = true;  // test hook: false trains each tree on all rows
  std::size_t min_samples_split = 2;
};

struct ForestModel {
  std::vector<DecisionTree> trees;
  ForestOptions options;
};

// Bootstrap-aggregated CART with Gini splits, ceil(sqrt(d)) features sampled
// per node, and deterministic tie-breaks (lowest feature index, then lowest
// threshold). Deterministic given the seed.
ForestModel train_forest(const Eigen::MatrixXd& X, const std::vector<StanceLabel>& labels,
                         const ForestOptions& options);

// Mean over trees of the reached leaf's Support fraction (soft voting).
double predict_proba(const ForestModel& model, const DenseVec& x);
double tree_predict_proba(const DecisionTree& tree, const DenseVec& x);
int tree_depth(const DecisionTree& tree);

struct CVPlan {
  int k = 5;
  std::map<std::string, int> fold_of;  // user id -> fold
};

// Greedy stratified group assignment: users shuffled by seed, stably sorted
// by class, each placed in the fold with the fewest users of that class
// (ties: fewest users total, then lowest fold index).
CVPlan make_cv_plan(const std::vector<std::pair<std::string, StanceLabel>>& users,
                    int k, std::uint64_t seed);

// Tweet-level balanced accuracy of proba >= 0.5 predictions.
double tweet_balanced_accuracy(const std::vector<double>& probs,
                               const std::vector<StanceLabel>& labels);

Eigen::MatrixXd subset_rows(const Eigen::MatrixXd& X,
                            const std::vector<Eigen::Index>& rows);
SparseRowMatrix subset_rows(const SparseRowMatrix& X,
                            const std::vector<Eigen::Index>& rows);

namespace detail {

template <class Matrix, class FitFn, class ProbaFn>
double cv_mean_balanced_accuracy(const Matrix& X, const std::vector<StanceLabel>& y,
                                 const std::vector<std::string>& row_user,
                                 const CVPlan& plan, const FitFn& fit,
                                 const ProbaFn& proba) {
  if (static_cast<std::size_t>(X.rows()) != y.size() || y.size() != row_user.size()) {
    throw InputError("cross-validation: row count mismatch");
  }
  double total = 0.0;
  for (int fold = 0; fold < plan.k; ++fold) {
    std::vector<Eigen::Index> train_rows, test_rows;
    std::vector<StanceLabel> train_y, test_y;
    for (std::size_t i = 0; i < row_user.size(); ++i) {
      const auto it = plan.fold_of.find(row_user[i]);
      if (it == plan.fold_of.end()) {
        throw InputError("cross-validation: user '" + row_user[i] + "' missing from plan");
      }
      if (it->second == fold) {
        test_rows.push_back(static_cast<Eigen::Index>(i));
        test_y.push_back(y[i]);
      } else {
        train_rows.push_back(static_cast<Eigen::Index>(i));
        train_y.push_back(y[i]);
      }
    }
    if (train_rows.empty() || test_rows.empty()) {
      throw InputError("cross-validation: empty fold");
    }
    const auto model = fit(subset_rows(X, train_rows), train_y);
    std::vector<double> probs;
    probs.reserve(test_rows.size());
    for (Eigen::Index row : test_rows) {
      probs.push_back(proba(model, row));
    }
    total += tweet_balanced_accuracy(probs, test_y);
  }
  return total / plan.k;
}

}  // namespace detail

inline const std::vector<double> kDefaultLambdaGrid = {1e-3, 1e-2, 1e-1, 1.0, 10.0};
inline const std::vector<int> kDefaultDepthGrid = {2, 4, 8, 16, -1};  // -1 unbounded

struct LambdaSelection {
  double lambda = 0.0;
  std::vector<std::pair<double, double>> scores;  // (lambda, mean held-out BA)
};

struct DepthSelection {
  int max_depth = -1;
  std::vector<std::pair<int, double>> scores;  // (depth, mean held-out BA)
};

// Grid searches maximize mean held-out fold balanced accuracy at the tweet
// level; ties go to the smaller parameter (unbounded depth counts largest).
template <class Matrix>
LambdaSelection select_logreg_lambda(const Matrix& X, const std::vector<StanceLabel>& y,
                                     const std::vector<std::string>& row_user,
                                     const CVPlan& plan,
                                     const std::vector<double>& grid = kDefaultLambdaGrid,
                                     const LogRegOptions& opts = {}) {
  if (grid.empty()) throw InputError("select_logreg_lambda: empty grid");
  std::vector<double> lambdas = grid;
  std::sort(lambdas.begin(), lambdas.end());
  LambdaSelection selection;
  double best = -1.0;
  for (double lambda : lambdas) {
    const double score = detail::cv_mean_balanced_accuracy(
        X, y, row_user, plan,
        [&](const Matrix& train_x, const std::vector<StanceLabel>& train_y) {
          return train_logreg(train_x, train_y, lambda, opts);
        },
        [&](const LinearModel& model, Eigen::Index row) {
          return sigmoid(X.row(row).dot(model.weights) + model.bias);
        });
    selection.scores.emplace_back(lambda, score);
    if (score > best) {
      best = score;
      selection.lambda = lambda;
    }
  }
  return selection;
}

DepthSelection select_forest_depth(const Eigen::MatrixXd& X,
                                   const std::vector<StanceLabel>& y,
                                   const std::vector<std::string>& row_user,
                                   const CVPlan& plan,
                                   const std::vector<int>& grid = kDefaultDepthGrid,
                                   ForestOptions base = {});

// Eq. 1 pooling of per-tweet probabilities followed by the tuned threshold.
template <class Model, class Vec>
StanceLabel predict_user(const Model& model, const std::vector<Vec>& tweet_features,
                         double threshold) {
  if (tweet_features.empty()) throw InputError("predict_user: no usable tweets");
  std::vector<double> probs;
  probs.reserve(tweet_features.size());
  for (const auto& x : tweet_features) probs.push_back(predict_proba(model, x));
  return apply_threshold(prob_score(probs), threshold);
}

nlohmann::json to_json(const LinearModel& model);
LinearModel linear_model_from_json(const nlohmann::json& obj);
nlohmann::json to_json(const ForestModel& model);
ForestModel forest_model_from_json(const nlohmann::json& obj);

}  // namespace stance
