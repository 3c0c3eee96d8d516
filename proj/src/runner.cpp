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

#include "stance/runner.hpp"

#include <algorithm>
#include <iostream>

#include "stance/errors.hpp"
#include "stance/rng.hpp"
#include "stance/util.hpp"

namespace stance {

using nlohmann::json;

namespace {

json prediction_to_json(const Prediction& p) {
  json obj;
  obj["user_id"] = p.user_id;
  obj["target"] = p.target;
  obj["method"] = p.method;
  obj["predicted"] = p.predicted ? to_string(*p.predicted) : "unparsable";
  if (p.score) {
    obj["score"] = *p.score;
  } else {
    obj["score"] = nullptr;
  }
  obj["evidence"] = p.evidence;
  return obj;
}

std::vector<std::string> sampled_texts(const std::vector<Tweet>& tweets) {
  std::vector<std::string> texts;
  texts.reserve(tweets.size());
  for (const Tweet& t : tweets) texts.push_back(t.text);
  return texts;
}

}  // namespace

std::string predictions_jsonl(const std::vector<Prediction>& predictions) {
  std::string out;
  for (const Prediction& p : predictions) {
    out += prediction_to_json(p).dump();
    out += '\n';
  }
  return out;
}

std::vector<Prediction> load_predictions(const std::filesystem::path& path) {
  std::vector<Prediction> predictions;
  for_each_line(path, [&](std::size_t line_no, const std::string& line) {
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw InputError(path.string() + " line " + std::to_string(line_no) +
                       ": invalid JSON: " + e.what());
    }
    Prediction p;
    try {
      p.user_id = obj.at("user_id").get<std::string>();
      p.target = obj.at("target").get<std::string>();
      p.method = obj.at("method").get<std::string>();
      const std::string predicted = obj.at("predicted").get<std::string>();
      if (predicted == "unparsable") {
        p.predicted = std::nullopt;
      } else {
        const auto label = stance_from_string(predicted);
        if (!label) throw InputError("unknown predicted label '" + predicted + "'");
        p.predicted = label;
      }
      if (obj.contains("score") && !obj["score"].is_null()) {
        p.score = obj["score"].get<double>();
      }
      if (obj.contains("evidence")) p.evidence = obj["evidence"];
    } catch (const json::exception& e) {
      throw InputError(path.string() + " line " + std::to_string(line_no) +
                       ": bad prediction record: " + e.what());
    }
    predictions.push_back(std::move(p));
  });
  return predictions;
}

std::vector<Prediction> predict_llm(LlmClient& client,
                                    const std::vector<const UserRecord*>& users,
                                    const TargetSpec& target,
                                    const LlmPredictOptions& options) {
  std::vector<Prediction> out(users.size());
  run_parallel(options.workers, users.size(), [&](std::size_t i) {
    const UserRecord& user = *users[i];
    Prediction& p = out[i];
    p.user_id = user.user_id;
    p.target = target.target_id;
    p.method = "llm";
    const std::vector<Tweet> sample = sample_tweets(
        user, target.target_id, options.mode, options.n_tweets, options.sample_seed);
    const std::string prompt = render_prompt(sampled_texts(sample), target);
    try {
      const ChatReply reply =
          client.complete(ChatRequest{options.model, prompt});
      const ParsedVote vote = parse_reply(reply.content);
      p.predicted = vote.label;
      p.evidence = json{{"reply", reply.content}};
    } catch (const LlmError& e) {
      std::cerr << "warn: user " << user.user_id << ": " << e.what() << "\n";
      p.predicted = std::nullopt;
      p.evidence = json{{"error", e.what()}};
    }
  });
  return out;
}

std::vector<Prediction> predict_llm_pooled(LlmClient& client,
                                           const std::vector<const UserRecord*>& users,
                                           const TargetSpec& target,
                                           const LlmPredictOptions& options) {
  std::vector<Prediction> out(users.size());
  run_parallel(options.workers, users.size(), [&](std::size_t i) {
    const UserRecord& user = *users[i];
    Prediction& p = out[i];
    p.user_id = user.user_id;
    p.target = target.target_id;
    p.method = "llm-pooled";
    const std::vector<Tweet> sample = sample_tweets(
        user, target.target_id, options.mode, options.n_tweets, options.sample_seed);
    VoteTally tally;
    json votes = json::array();
    bool llm_failed = false;
    for (const Tweet& tweet : sample) {
      const std::string prompt = render_prompt({tweet.text}, target);
      try {
        const ChatReply reply = client.complete(ChatRequest{options.model, prompt});
        const ParsedVote vote = parse_reply(reply.content);
        if (!vote.label) {
          ++tally.n_ignored;
        } else if (*vote.label == StanceLabel::Support) {
          ++tally.n_support;
        } else {
          ++tally.n_against;
        }
        votes.push_back(json{{"tweet_id", tweet.id},
                             {"reply", reply.content},
                             {"vote", vote.label ? to_string(*vote.label) : "ignored"}});
      } catch (const LlmError& e) {
        std::cerr << "warn: user " << user.user_id << " tweet " << tweet.id << ": "
                  << e.what() << "\n";
        llm_failed = true;
        ++tally.n_ignored;
        votes.push_back(json{{"tweet_id", tweet.id}, {"error", e.what()}, {"vote", "ignored"}});
      }
    }
    p.evidence = json{{"votes", std::move(votes)}};
    const StanceScore score = vote_score(tally);
    p.score = score.value;
    if (tally.n_support == 0 && tally.n_against == 0) {
      p.predicted = std::nullopt;  // every reply ignored or failed
    } else {
      p.predicted = apply_threshold(score, options.vote_threshold);
    }
    (void)llm_failed;
  });
  return out;
}

std::vector<std::pair<StanceScore, StanceLabel>> collect_scores(
    const std::vector<Prediction>& predictions,
    const std::vector<const UserRecord*>& users, const std::string& target_id) {
  std::map<std::string, StanceLabel> truth;
  for (const UserRecord* user : users) {
    const auto it = user->stances.find(target_id);
    if (it == user->stances.end()) {
      throw InputError("user '" + user->user_id + "' has no stance label for target '" +
                       target_id + "'");
    }
    truth.emplace(user->user_id, it->second);
  }
  std::vector<std::pair<StanceScore, StanceLabel>> out;
  out.reserve(predictions.size());
  for (const Prediction& p : predictions) {
    if (!p.score) continue;  // whole-user LLM predictions carry no score
    const auto it = truth.find(p.user_id);
    if (it == truth.end()) {
      throw InputError("prediction for unknown user '" + p.user_id + "'");
    }
    out.emplace_back(StanceScore{*p.score, 0}, it->second);
  }
  return out;
}

std::string TrainedBundle::method_id() const {
  return features + "-" + model_kind;
}

ThresholdConfig TrainedBundle::thresholds() const {
  ThresholdConfig config;
  for (const auto& [target, model] : targets) config[target] = model.threshold;
  return config;
}

json TrainedBundle::to_json() const {
  json targets_json = json::object();
  for (const auto& [target, model] : targets) {
    json obj;
    obj["threshold"] = model.threshold;
    obj["cv_balanced_accuracy"] = model.cv_balanced_accuracy;
    if (model.linear) {
      obj["model"] = stance::to_json(*model.linear);
      obj["selected_lambda"] = model.selected_lambda;
    }
    if (model.forest) {
      obj["model"] = stance::to_json(*model.forest);
      obj["selected_depth"] = model.selected_depth;
    }
    if (features == "tfidf") obj["vocabulary"] = model.vocab.to_json();
    targets_json[target] = std::move(obj);
  }
  return json{{"schema_version", 1},
              {"features", features},
              {"model", model_kind},
              {"n_tweets", n_tweets},
              {"sample_seed", sample_seed},
              {"targets", std::move(targets_json)}};
}

TrainedBundle TrainedBundle::from_json(const json& obj) {
  TrainedBundle bundle;
  if (obj.value("schema_version", 0) != 1) {
    throw InputError("model file: unsupported schema_version");
  }
  bundle.features = obj.at("features").get<std::string>();
  bundle.model_kind = obj.at("model").get<std::string>();
  bundle.n_tweets = obj.at("n_tweets").get<std::size_t>();
  bundle.sample_seed = obj.at("sample_seed").get<std::uint64_t>();
  for (const auto& [target, tj] : obj.at("targets").items()) {
    TargetModel model;
    model.threshold = tj.at("threshold").get<double>();
    model.cv_balanced_accuracy = tj.value("cv_balanced_accuracy", 0.0);
    if (bundle.model_kind == "logreg") {
      model.linear = linear_model_from_json(tj.at("model"));
      model.selected_lambda = tj.value("selected_lambda", 0.0);
    } else if (bundle.model_kind == "ranfor") {
      model.forest = forest_model_from_json(tj.at("model"));
      model.selected_depth = tj.value("selected_depth", -1);
    } else {
      throw InputError("model file: unknown model kind '" + bundle.model_kind + "'");
    }
    if (bundle.features == "tfidf") {
      model.vocab = Vocabulary::from_json(tj.at("vocabulary"));
    }
    bundle.targets.emplace(target, std::move(model));
  }
  return bundle;
}

void TrainedBundle::save(const std::filesystem::path& path) const {
  write_file(path, to_json().dump() + "\n");
}

TrainedBundle TrainedBundle::load(const std::filesystem::path& path) {
  try {
    return from_json(json::parse(read_file(path)));
  } catch (const json::exception& e) {
    throw InputError("model file " + path.string() + ": " + e.what());
  }
}

namespace {

struct TweetRows {
  std::vector<Tweet> tweets;
  std::vector<StanceLabel> labels;  // tweets inherit the user's stance
  std::vector<std::string> row_user;
};

TweetRows collect_training_rows(const std::vector<const UserRecord*>& train_users,
                                const std::string& target_id,
                                const TrainOptions& options) {
  TweetRows rows;
  for (const UserRecord* user : train_users) {
    const StanceLabel label = user->stances.at(target_id);
    std::vector<Tweet> sample = sample_tweets(
        *user, target_id, SampleMode::Agnostic, options.n_tweets, options.sample_seed);
    for (Tweet& tweet : sample) {
      rows.tweets.push_back(std::move(tweet));
      rows.labels.push_back(label);
      rows.row_user.push_back(user->user_id);
    }
  }
  return rows;
}

SparseRowMatrix tfidf_matrix(const std::vector<Tweet>& tweets, const Vocabulary& vocab) {
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t i = 0; i < tweets.size(); ++i) {
    const SparseVec vec = tfidf_vector(tokenize(tweets[i].text), vocab);
    for (SparseVec::InnerIterator it(vec); it; ++it) {
      triplets.emplace_back(static_cast<Eigen::Index>(i), it.index(), it.value());
    }
  }
  SparseRowMatrix X(static_cast<Eigen::Index>(tweets.size()), vocab.size());
  X.setFromTriplets(triplets.begin(), triplets.end());
  return X;
}

Eigen::MatrixXd embedding_matrix(const std::vector<Tweet>& tweets,
                                 const EmbeddingTable& table) {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(tweets.size()), table.dim);
  for (std::size_t i = 0; i < tweets.size(); ++i) {
    X.row(static_cast<Eigen::Index>(i)) = table.at(tweets[i].id);
  }
  return X;
}

}  // namespace

TrainedBundle train_bundle(const std::vector<UserRecord>& users,
                           const std::set<std::string>& train_ids,
                           const std::vector<std::string>& target_ids,
                           const TrainOptions& options) {
  if (options.features != "tfidf" && options.features != "embed") {
    throw InputError("train: features must be tfidf or embed");
  }
  if (options.model_kind != "logreg" && options.model_kind != "ranfor") {
    throw InputError("train: model must be logreg or ranfor");
  }
  if (options.features == "tfidf" && options.model_kind == "ranfor") {
    throw InputError("train: tfidf-ranfor is not part of the method matrix");
  }
  if (options.features == "embed" && options.embeddings == nullptr) {
    throw InputError("train: embed features need an embeddings table");
  }
  if (target_ids.empty()) throw InputError("train: no targets given");

  std::vector<const UserRecord*> train_users;
  for (const UserRecord& user : users) {
    if (train_ids.count(user.user_id)) train_users.push_back(&user);
  }
  if (train_users.size() < static_cast<std::size_t>(options.k_folds)) {
    throw InputError("train: fewer training users than folds");
  }

  TrainedBundle bundle;
  bundle.features = options.features;
  bundle.model_kind = options.model_kind;
  bundle.n_tweets = options.n_tweets;
  bundle.sample_seed = options.sample_seed;

  for (const std::string& target_id : target_ids) {
    std::vector<std::pair<std::string, StanceLabel>> user_labels;
    std::size_t n_support = 0;
    for (const UserRecord* user : train_users) {
      const auto it = user->stances.find(target_id);
      if (it == user->stances.end()) {
        throw InputError("user '" + user->user_id + "' has no stance label for target '" +
                         target_id + "'");
      }
      user_labels.emplace_back(user->user_id, it->second);
      if (it->second == StanceLabel::Support) ++n_support;
    }
    if (n_support == 0 || n_support == user_labels.size()) {
      throw InputError("target '" + target_id +
                       "' has a single class in the training split");
    }

    const TweetRows rows = collect_training_rows(train_users, target_id, options);
    const CVPlan plan = make_cv_plan(user_labels, options.k_folds,
                                     derive_seed(options.cv_seed, {"cv", target_id}));

    TargetModel model;
    std::vector<double> train_probs(rows.tweets.size());
    if (options.features == "tfidf") {
      std::vector<std::vector<std::string>> docs;
      docs.reserve(rows.tweets.size());
      for (const Tweet& t : rows.tweets) docs.push_back(tokenize(t.text));
      model.vocab = fit_vocabulary(docs, options.min_df);
      const SparseRowMatrix X = tfidf_matrix(rows.tweets, model.vocab);
      const LambdaSelection sel =
          select_logreg_lambda(X, rows.labels, rows.row_user, plan, options.lambda_grid);
      model.selected_lambda = sel.lambda;
      for (const auto& [lambda, ba] : sel.scores) {
        if (lambda == sel.lambda) model.cv_balanced_accuracy = ba;
      }
      model.linear = train_logreg(X, rows.labels, sel.lambda);
      for (Eigen::Index i = 0; i < X.rows(); ++i) {
        train_probs[static_cast<std::size_t>(i)] =
            sigmoid(X.row(i).dot(model.linear->weights) + model.linear->bias);
      }
    } else {
      const Eigen::MatrixXd X = embedding_matrix(rows.tweets, *options.embeddings);
      if (options.model_kind == "logreg") {
        const LambdaSelection sel =
            select_logreg_lambda(X, rows.labels, rows.row_user, plan, options.lambda_grid);
        model.selected_lambda = sel.lambda;
        for (const auto& [lambda, ba] : sel.scores) {
          if (lambda == sel.lambda) model.cv_balanced_accuracy = ba;
        }
        model.linear = train_logreg(X, rows.labels, sel.lambda);
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
          train_probs[static_cast<std::size_t>(i)] =
              sigmoid(X.row(i).dot(model.linear->weights) + model.linear->bias);
        }
      } else {
        ForestOptions base;
        base.n_trees = options.n_trees;
        base.seed = derive_seed(options.cv_seed, {"forest", target_id});
        const DepthSelection sel =
            select_forest_depth(X, rows.labels, rows.row_user, plan, options.depth_grid, base);
        model.selected_depth = sel.max_depth;
        for (const auto& [depth, ba] : sel.scores) {
          if (depth == sel.max_depth) model.cv_balanced_accuracy = ba;
        }
        ForestOptions final_options = base;
        final_options.max_depth = sel.max_depth;
        model.forest = train_forest(X, rows.labels, final_options);
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
          train_probs[static_cast<std::size_t>(i)] =
              predict_proba(*model.forest, DenseVec(X.row(i)));
        }
      }
    }

    // Eq. 1 user scores on the training split drive the T_target scan.
    std::vector<std::pair<StanceScore, StanceLabel>> user_scores;
    std::size_t row = 0;
    for (const UserRecord* user : train_users) {
      std::vector<double> probs;
      while (row < rows.row_user.size() && rows.row_user[row] == user->user_id) {
        probs.push_back(train_probs[row]);
        ++row;
      }
      user_scores.emplace_back(prob_score(probs), user->stances.at(target_id));
    }
    model.threshold = tune_threshold(user_scores);
    bundle.targets.emplace(target_id, std::move(model));
  }
  return bundle;
}

std::vector<Prediction> predict_trained(const TrainedBundle& bundle,
                                        const std::vector<const UserRecord*>& users,
                                        const std::string& target_id,
                                        std::size_t n_tweets, std::uint64_t sample_seed,
                                        const EmbeddingTable* embeddings) {
  const auto it = bundle.targets.find(target_id);
  if (it == bundle.targets.end()) {
    throw InputError("model has no entry for target '" + target_id + "'");
  }
  const TargetModel& model = it->second;
  if (bundle.features == "embed" && embeddings == nullptr) {
    throw InputError("embed model needs an embeddings table");
  }

  std::vector<Prediction> out(users.size());
  for (std::size_t i = 0; i < users.size(); ++i) {
    const UserRecord& user = *users[i];
    Prediction& p = out[i];
    p.user_id = user.user_id;
    p.target = target_id;
    p.method = bundle.method_id();
    const std::vector<Tweet> sample =
        sample_tweets(user, target_id, SampleMode::Agnostic, n_tweets, sample_seed);
    std::vector<double> probs;
    json tweet_ids = json::array();
    probs.reserve(sample.size());
    for (const Tweet& tweet : sample) {
      double proba = 0.0;
      if (bundle.features == "tfidf") {
        proba = predict_proba(*model.linear, tfidf_vector(tokenize(tweet.text), model.vocab));
      } else {
        const DenseVec& x = embeddings->at(tweet.id);
        proba = model.linear ? predict_proba(*model.linear, x)
                             : predict_proba(*model.forest, x);
      }
      probs.push_back(proba);
      tweet_ids.push_back(tweet.id);
    }
    const StanceScore score = prob_score(probs);
    p.score = score.value;
    p.predicted = apply_threshold(score, model.threshold);
    p.evidence = json{{"tweet_ids", std::move(tweet_ids)}, {"probs", probs}};
  }
  return out;
}

std::vector<const UserRecord*> select_split(const std::vector<UserRecord>& users,
                                            const std::string& split,
                                            const CorpusSplit* corpus_split) {
  std::vector<const UserRecord*> out;
  if (split == "all") {
    for (const UserRecord& user : users) out.push_back(&user);
    return out;
  }
  if (split != "train" && split != "test") {
    throw InputError("split must be all, train, or test");
  }
  if (corpus_split == nullptr) {
    throw InputError("split '" + split + "' requested without a split seed");
  }
  const std::set<std::string>& ids =
      split == "train" ? corpus_split->train : corpus_split->test;
  for (const UserRecord& user : users) {
    if (ids.count(user.user_id)) out.push_back(&user);
  }
  return out;
}

}  // namespace stance
