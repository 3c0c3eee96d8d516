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
#include <vector>

#include <json.hpp>

#include "stance/baselines.hpp"
#include "stance/corpus.hpp"
#include "stance/features.hpp"
#include "stance/llm.hpp"
#include "stance/pooling.hpp"
#include "stance/prompt.hpp"

namespace stance {

// One (user, target, method) outcome with its raw evidence.
struct Prediction {
  std::string user_id;
  std::string target;
  std::string method;
  std::optional<StanceLabel> predicted;  // nullopt = unparsable
  std::optional<double> score;           // vote score or Eq. 1 mean
  nlohmann::json evidence;
};

std::string predictions_jsonl(const std::vector<Prediction>& predictions);
std::vector<Prediction> load_predictions(const std::filesystem::path& path);

struct LlmPredictOptions {
  std::string model = "mock";
  SampleMode mode = SampleMode::Agnostic;
  std::size_t n_tweets = 50;
  std::uint64_t sample_seed = 0;
  double vote_threshold = 0.0;  // llm-pooled decision threshold (Eq. 2)
  std::size_t workers = 4;
};

// ULSP-LLM: all sampled tweets in one prompt, one reply per user.
std::vector<Prediction> predict_llm(LlmClient& client,
                                    const std::vector<const UserRecord*>& users,
                                    const TargetSpec& target,
                                    const LlmPredictOptions& options);

// ULSP-LLM (pooled): one prompt per tweet; votes pooled per user via the
// vote score and thresholded (threshold 0 = the majority rule; all replies
// unparsable = unparsable user). Per-user LLM failures are recorded as
// unparsable and the run continues.
std::vector<Prediction> predict_llm_pooled(LlmClient& client,
                                           const std::vector<const UserRecord*>& users,
                                           const TargetSpec& target,
                                           const LlmPredictOptions& options);

// (vote score, truth) pairs from pooled predictions, for threshold tuning.
std::vector<std::pair<StanceScore, StanceLabel>> collect_scores(
    const std::vector<Prediction>& predictions,
    const std::vector<const UserRecord*>& users, const std::string& target_id);

struct TrainOptions {
  std::string features = "tfidf";   // tfidf | embed
  std::string model_kind = "logreg";  // logreg | ranfor
  std::size_t n_tweets = 50;
  std::uint64_t sample_seed = 0;
  std::uint64_t cv_seed = 0;
  int k_folds = 5;
  int min_df = 2;
  std::size_t n_trees = 100;
  std::vector<double> lambda_grid = kDefaultLambdaGrid;
  std::vector<int> depth_grid = kDefaultDepthGrid;
  const EmbeddingTable* embeddings = nullptr;  // required for embed features
};

// Per-target trained model plus its tuned Eq. 1 threshold.
struct TargetModel {
  Vocabulary vocab;  // tfidf only
  std::optional<LinearModel> linear;
  std::optional<ForestModel> forest;
  double threshold = 0.5;
  double selected_lambda = 0.0;
  int selected_depth = -1;
  double cv_balanced_accuracy = 0.0;
};

struct TrainedBundle {
  std::string features;
  std::string model_kind;
  std::size_t n_tweets = 50;
  std::uint64_t sample_seed = 0;
  std::map<std::string, TargetModel> targets;

  std::string method_id() const;  // tfidf-logreg | embed-logreg | embed-ranfor
  ThresholdConfig thresholds() const;

  nlohmann::json to_json() const;
  static TrainedBundle from_json(const nlohmann::json& obj);
  void save(const std::filesystem::path& path) const;
  static TrainedBundle load(const std::filesystem::path& path);
};

// CV hyperparameter selection, refit on the full training split, then
// threshold tuning on training-user Eq. 1 scores. Throws when a target has a
// single class in the training split, naming the target.
TrainedBundle train_bundle(const std::vector<UserRecord>& users,
                           const std::set<std::string>& train_ids,
                           const std::vector<std::string>& target_ids,
                           const TrainOptions& options);

// Eq. 1 pooling of per-tweet model probabilities over sampled agnostic
// tweets, thresholded at the bundle's tuned T_target.
std::vector<Prediction> predict_trained(const TrainedBundle& bundle,
                                        const std::vector<const UserRecord*>& users,
                                        const std::string& target_id,
                                        std::size_t n_tweets, std::uint64_t sample_seed,
                                        const EmbeddingTable* embeddings);

// Users selected by split membership ("all" | "train" | "test").
std::vector<const UserRecord*> select_split(const std::vector<UserRecord>& users,
                                            const std::string& split,
                                            const CorpusSplit* corpus_split);

}  // namespace stance
