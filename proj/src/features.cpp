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

#include "stance/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include "stance/errors.hpp"
#include "stance/util.hpp"

namespace stance {

namespace {

bool is_token_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

bool is_url_word(std::string_view word) {
  const std::string lower = to_lower(word.substr(0, 8));
  return lower.rfind("http://", 0) == 0 || lower.rfind("https://", 0) == 0;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  const std::size_t n = text.size();
  auto is_ws = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
  };
  while (i < n) {
    while (i < n && is_ws(text[i])) ++i;
    std::size_t j = i;
    while (j < n && !is_ws(text[j])) ++j;
    if (j > i) {
      const std::string_view word = text.substr(i, j - i);
      // URLs and @-mentions are dropped whole, before splitting.
      if (!is_url_word(word) && word.front() != '@') {
        std::string current;
        for (char c : word) {
          if (is_token_char(c)) {
            current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
          } else if (!current.empty()) {
            if (current.size() >= 2) tokens.push_back(current);
            current.clear();
          }
        }
        if (current.size() >= 2) tokens.push_back(current);
      }
    }
    i = j;
  }
  return tokens;
}

Vocabulary fit_vocabulary(const std::vector<std::vector<std::string>>& docs,
                          int min_df) {
  if (docs.empty()) throw InputError("fit_vocabulary: empty corpus");
  if (min_df < 1) throw InputError("fit_vocabulary: min_df must be >= 1");
  std::map<std::string, int> doc_freq;  // ordered: columns come out sorted
  std::vector<std::string> seen;
  for (const auto& doc : docs) {
    seen.assign(doc.begin(), doc.end());
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    for (const auto& term : seen) ++doc_freq[term];
  }
  Vocabulary vocab;
  vocab.n_docs = static_cast<int>(docs.size());
  for (const auto& [term, df] : doc_freq) {
    if (df < min_df) continue;
    vocab.index.emplace(term, vocab.size());
    vocab.terms.push_back(term);
    vocab.df.push_back(df);
  }
  if (vocab.terms.empty()) {
    throw InputError("fit_vocabulary: no term meets min_df=" + std::to_string(min_df));
  }
  return vocab;
}

SparseVec tfidf_vector(const std::vector<std::string>& doc, const Vocabulary& vocab) {
  std::map<int, int> counts;  // column -> term frequency, ordered
  for (const auto& term : doc) {
    const auto it = vocab.index.find(term);
    if (it != vocab.index.end()) ++counts[it->second];
  }
  SparseVec vec(vocab.size());
  if (counts.empty()) return vec;  // all-OOV or empty doc: zero vector
  vec.reserve(static_cast<Eigen::Index>(counts.size()));
  double sq_norm = 0.0;
  for (const auto& [col, tf] : counts) {
    const double idf =
        std::log((1.0 + vocab.n_docs) / (1.0 + vocab.df[static_cast<std::size_t>(col)])) + 1.0;
    const double w = static_cast<double>(tf) * idf;
    vec.insertBack(col) = w;
    sq_norm += w * w;
  }
  vec /= std::sqrt(sq_norm);
  return vec;
}

const DenseVec& EmbeddingTable::at(const std::string& tweet_id) const {
  const auto it = vectors.find(tweet_id);
  if (it == vectors.end()) {
    throw InputError("missing embedding for tweet id '" + tweet_id + "'");
  }
  return it->second;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  EmbeddingTable table;
  for_each_line(path, [&](std::size_t line_no, const std::string& line) {
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw InputError(path.string() + " line " + std::to_string(line_no) +
                       ": invalid JSON: " + e.what());
    }
    if (!obj.contains("tweet_id") || !obj["tweet_id"].is_string() ||
        !obj.contains("vector") || !obj["vector"].is_array()) {
      throw InputError(path.string() + " line " + std::to_string(line_no) +
                       ": expected {\"tweet_id\": str, \"vector\": [...]} ");
    }
    const std::string id = obj["tweet_id"].get<std::string>();
    const auto& arr = obj["vector"];
    DenseVec v(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) {
      if (!arr[i].is_number()) {
        throw InputError(path.string() + " line " + std::to_string(line_no) +
                         ": vector entries must be numbers");
      }
      v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
    }
    if (table.dim == 0 && table.vectors.empty()) {
      table.dim = v.size();
    } else if (v.size() != table.dim) {
      throw InputError(path.string() + " line " + std::to_string(line_no) +
                       ": dimension mismatch (got " + std::to_string(v.size()) +
                       ", expected " + std::to_string(table.dim) + ")");
    }
    if (!table.vectors.emplace(id, std::move(v)).second) {
      throw InputError(path.string() + " line " + std::to_string(line_no) +
                       ": duplicate tweet id '" + id + "'");
    }
  });
  return table;
}

nlohmann::json Vocabulary::to_json() const {
  nlohmann::json obj;
  obj["terms"] = terms;
  obj["df"] = df;
  obj["n_docs"] = n_docs;
  return obj;
}

Vocabulary Vocabulary::from_json(const nlohmann::json& obj) {
  Vocabulary vocab;
  if (!obj.contains("terms") || !obj.contains("df") || !obj.contains("n_docs")) {
    throw InputError("vocabulary JSON: missing terms/df/n_docs");
  }
  vocab.terms = obj["terms"].get<std::vector<std::string>>();
  vocab.df = obj["df"].get<std::vector<int>>();
  vocab.n_docs = obj["n_docs"].get<int>();
  if (vocab.terms.size() != vocab.df.size()) {
    throw InputError("vocabulary JSON: terms/df length mismatch");
  }
  for (int i = 0; i < vocab.size(); ++i) vocab.index.emplace(vocab.terms[static_cast<std::size_t>(i)], i);
  return vocab;
}

void save_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path) {
  write_file(path, vocab.to_json().dump() + "\n");
}

Vocabulary load_vocabulary(const std::filesystem::path& path) {
  try {
    return Vocabulary::from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("vocabulary file " + path.string() + ": invalid JSON: " + e.what());
  }
}

}  // namespace stance
