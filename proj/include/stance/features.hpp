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

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace stance {

using SparseVec = Eigen::SparseVector<double>;
using DenseVec = Eigen::VectorXd;

// Lowercases, removes URLs (http/https) and @-mentions, splits on
// non-alphanumeric bytes, and drops tokens shorter than 2 characters.
// Idempotent on its own space-joined output.
std::vector<std::string> tokenize(std::string_view text);

struct Vocabulary {
  std::vector<std::string> terms;  // lexicographic order = column order
  std::unordered_map<std::string, int> index;
  std::vector<int> df;  // document frequency per term
  int n_docs = 0;

  int size() const { return static_cast<int>(terms.size()); }

  nlohmann::json to_json() const;
  static Vocabulary from_json(const nlohmann::json& obj);
};

// Terms with document frequency >= min_df, ordered lexicographically.
// Throws on an empty corpus or when filtering empties the vocabulary.
Vocabulary fit_vocabulary(const std::vector<std::vector<std::string>>& docs,
                          int min_df);

// weight(t) = count(t) * (ln((1 + N) / (1 + df(t))) + 1), L2-normalized.
// Out-of-vocabulary terms are ignored; a doc with no in-vocabulary terms
// yields the zero vector.
SparseVec tfidf_vector(const std::vector<std::string>& doc, const Vocabulary& vocab);

struct EmbeddingTable {
  std::unordered_map<std::string, DenseVec> vectors;
  Eigen::Index dim = 0;

  // Throws naming the tweet id when absent.
  const DenseVec& at(const std::string& tweet_id) const;
};

// JSONL of {"tweet_id": "...", "vector": [...]}; all rows must share one
// dimension and ids must be unique.
EmbeddingTable load_embeddings(const std::filesystem::path& path);

void save_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path);
Vocabulary load_vocabulary(const std::filesystem::path& path);

}  // namespace stance
