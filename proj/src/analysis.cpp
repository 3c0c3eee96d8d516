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

#include "stance/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "stance/errors.hpp"
#include "stance/stats.hpp"
#include "stance/util.hpp"

namespace stance {

const std::array<std::string, kMoralDimensions>& moral_dimensions() {
  static const std::array<std::string, kMoralDimensions> dims = {
      "care.virtue",      "care.vice",      "fairness.virtue", "fairness.vice",
      "loyalty.virtue",   "loyalty.vice",   "authority.virtue", "authority.vice",
      "sanctity.virtue",  "sanctity.vice"};
  return dims;
}

int moral_dimension_index(std::string_view name) {
  const auto& dims = moral_dimensions();
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (dims[i] == name) return static_cast<int>(i);
  }
  return -1;
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  Lexicon lexicon;
  for_each_line(path, [&](std::size_t line_no, const std::string& line) {
    if (line_no == 1 && trim(line) == "word,dimension,weight") return;
    const std::vector<std::string> cols = split_on(line, ',');
    if (cols.size() != 3) {
      throw InputError(path.string() + " line " + std::to_string(line_no) +
                       ": expected word,dimension,weight");
    }
    const std::string word = trim(cols[0]);
    const std::string dim = trim(cols[1]);
    if (word.empty()) {
      throw InputError(path.string() + " line " + std::to_string(line_no) + ": empty word");
    }
    const int d = moral_dimension_index(dim);
    if (d < 0) {
      throw InputError(path.string() + " line " + std::to_string(line_no) +
                       ": unknown dimension '" + dim + "'");
    }
    double weight = 0.0;
    try {
      weight = std::stod(trim(cols[2]));
    } catch (const std::exception&) {
      throw InputError(path.string() + " line " + std::to_string(line_no) +
                       ": weight is not a number");
    }
    if (!std::isfinite(weight) || weight < 0.0 || weight > 1.0) {
      throw InputError(path.string() + " line " + std::to_string(line_no) +
                       ": weight must be in [0,1]");
    }
    lexicon.words[word][static_cast<std::size_t>(d)] = weight;
  });
  return lexicon;
}

std::pair<double, double> point_biserial(const Eigen::VectorXd& x,
                                         const Eigen::VectorXd& y01) {
  const Eigen::Index n = x.size();
  if (n != y01.size()) throw InputError("point_biserial: length mismatch");
  if (n < 3) throw InputError("point_biserial: need at least 3 observations");
  bool has_zero = false, has_one = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (y01[i] == 0.0) {
      has_zero = true;
    } else if (y01[i] == 1.0) {
      has_one = true;
    } else {
      throw InputError("point_biserial: y must be coded {0,1}");
    }
  }
  if (!has_zero || !has_one) throw InputError("point_biserial: single-class y");

  const Eigen::VectorXd xc = x.array() - x.mean();
  const Eigen::VectorXd yc = y01.array() - y01.mean();
  const double sxx = xc.squaredNorm();
  const double syy = yc.squaredNorm();
  if (sxx == 0.0) throw InputError("point_biserial: x is constant (undefined correlation)");
  double r = xc.dot(yc) / std::sqrt(sxx * syy);
  r = std::clamp(r, -1.0, 1.0);

  const double df = static_cast<double>(n - 2);
  double p = 0.0;
  const double one_minus_r2 = (1.0 - r) * (1.0 + r);
  if (one_minus_r2 <= 0.0) {
    p = 0.0;  // |r| = 1: t diverges
  } else {
    const double t = r * std::sqrt(df / one_minus_r2);
    p = student_t_two_sided_p(t, df);
  }
  return {r, p};
}

KeywordCorrelationResult keyword_correlations(const std::vector<UserDocs>& users,
                                              const std::string& target_id,
                                              const Vocabulary& vocab,
                                              std::size_t top_k) {
  if (users.size() < 3) throw InputError("keyword_correlations: need >= 3 users");
  const std::size_t n_users = users.size();
  const int n_terms = vocab.size();

  // Per-user mean TF-IDF weight per term. Accumulated sparse, correlated
  // dense per term (zeros are real observations).
  std::vector<std::unordered_map<int, double>> user_means(n_users);
  Eigen::VectorXd y(static_cast<Eigen::Index>(n_users));
  for (std::size_t u = 0; u < n_users; ++u) {
    y[static_cast<Eigen::Index>(u)] = users[u].stance == StanceLabel::Support ? 1.0 : 0.0;
    const auto& docs = users[u].tweet_tokens;
    if (docs.empty()) {
      throw InputError("keyword_correlations: user '" + users[u].user_id +
                       "' has no tweets");
    }
    auto& mean = user_means[u];
    for (const auto& doc : docs) {
      const SparseVec vec = tfidf_vector(doc, vocab);
      for (SparseVec::InnerIterator it(vec); it; ++it) mean[static_cast<int>(it.index())] += it.value();
    }
    for (auto& [term, sum] : mean) sum /= static_cast<double>(docs.size());
  }

  KeywordCorrelationResult result;
  Eigen::VectorXd x(static_cast<Eigen::Index>(n_users));
  for (int t = 0; t < n_terms; ++t) {
    for (std::size_t u = 0; u < n_users; ++u) {
      const auto it = user_means[u].find(t);
      x[static_cast<Eigen::Index>(u)] = it == user_means[u].end() ? 0.0 : it->second;
    }
    if ((x.array() == x[0]).all()) {
      ++result.skipped_constant;
      continue;
    }
    const auto [r, p] = point_biserial(x, y);
    CorrelationRow row;
    row.feature = vocab.terms[static_cast<std::size_t>(t)];
    row.target = target_id;
    row.r = r;
    row.n = n_users;
    row.p_value = p;
    row.significant = p < 0.01;
    result.rows.push_back(std::move(row));
  }

  std::sort(result.rows.begin(), result.rows.end(),
            [](const CorrelationRow& a, const CorrelationRow& b) {
              const double aa = std::fabs(a.r), bb = std::fabs(b.r);
              if (aa != bb) return aa > bb;
              return a.feature < b.feature;
            });
  if (result.rows.size() > top_k) result.rows.resize(top_k);
  return result;
}

LexiconScores lexicon_scores_from_tokens(
    const std::vector<std::vector<std::string>>& tweet_tokens, const Lexicon& lexicon) {
  LexiconScores out;
  std::array<double, kMoralDimensions> sums{};
  for (const auto& doc : tweet_tokens) {
    for (const auto& token : doc) {
      const auto it = lexicon.words.find(token);
      if (it == lexicon.words.end()) continue;
      ++out.matched_tokens;
      for (std::size_t d = 0; d < kMoralDimensions; ++d) sums[d] += it->second[d];
    }
  }
  if (out.matched_tokens > 0) {
    for (std::size_t d = 0; d < kMoralDimensions; ++d) {
      out.score[d] = sums[d] / static_cast<double>(out.matched_tokens);
    }
  }
  return out;
}

LexiconScores lexicon_scores(const UserRecord& user, const Lexicon& lexicon,
                             const std::string& target_id) {
  // Concatenation then tokenization equals tokenizing tweet by tweet: the
  // tokenizer never joins across whitespace, and scores are bag-of-tokens.
  std::vector<std::vector<std::string>> docs;
  docs.reserve(user.tweets.size());
  for (const Tweet& tweet : user.tweets) {
    if (!tweet.references(target_id)) docs.push_back(tokenize(tweet.text));
  }
  return lexicon_scores_from_tokens(docs, lexicon);
}

std::vector<CorrelationRow> lexicon_correlations(const std::vector<UserDocs>& users,
                                                 const std::string& target_id,
                                                 const Lexicon& lexicon) {
  if (users.size() < 3) throw InputError("lexicon_correlations: need >= 3 users");
  const std::size_t n_users = users.size();
  Eigen::MatrixXd scores(static_cast<Eigen::Index>(n_users), kMoralDimensions);
  Eigen::VectorXd y(static_cast<Eigen::Index>(n_users));
  for (std::size_t u = 0; u < n_users; ++u) {
    const LexiconScores s = lexicon_scores_from_tokens(users[u].tweet_tokens, lexicon);
    for (std::size_t d = 0; d < kMoralDimensions; ++d) {
      scores(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(d)) = s.score[d];
    }
    y[static_cast<Eigen::Index>(u)] = users[u].stance == StanceLabel::Support ? 1.0 : 0.0;
  }

  std::vector<CorrelationRow> rows;
  rows.reserve(kMoralDimensions);
  for (std::size_t d = 0; d < kMoralDimensions; ++d) {
    const Eigen::VectorXd x = scores.col(static_cast<Eigen::Index>(d));
    CorrelationRow row;
    row.feature = moral_dimensions()[d];
    row.target = target_id;
    row.n = n_users;
    if ((x.array() == x[0]).all()) {
      // Degenerate dimension: report zero correlation, keep the row so the
      // output always has one row per dimension.
      row.r = 0.0;
      row.p_value = 1.0;
      row.significant = false;
    } else {
      const auto [r, p] = point_biserial(x, y);
      row.r = r;
      row.p_value = p;
      row.significant = p < 0.01;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string correlation_csv(const std::vector<CorrelationRow>& rows) {
  std::string out = "feature,target,r,n,p_value,significant\n";
  for (const CorrelationRow& row : rows) {
    out += row.feature;
    out += ',';
    out += row.target;
    out += ',';
    out += format_fixed(row.r, 6);
    out += ',';
    out += std::to_string(row.n);
    out += ',';
    out += format_general(row.p_value, 6);
    out += ',';
    out += row.significant ? "true" : "false";
    out += '\n';
  }
  return out;
}

}  // namespace stance
