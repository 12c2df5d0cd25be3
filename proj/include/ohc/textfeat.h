// Copyright 2026 The OHC Support Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Sentence and word statistics, TF-IDF vectorization and question-response
// TF-IDF cosine similarity.

#ifndef OHC_TEXTFEAT_H_
#define OHC_TEXTFEAT_H_

#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ohc {

// Splits on '.', '!' and '?'. A run of terminators closes one sentence; a
// trailing unterminated fragment is a sentence of its own. Sentences are
// whitespace-trimmed and never empty.
std::vector<std::string> SplitSentences(std::string_view text);

struct SentenceKindCounts {
  int queries = 0;
  int statements = 0;
  bool operator==(const SentenceKindCounts&) const = default;
};

// A sentence is a query when its terminator run contains '?' or when it opens
// with an interrogative lead word followed by a space.
bool IsQuerySentence(std::string_view sentence);
SentenceKindCounts CountSentenceKinds(std::string_view text);

// Whitespace-delimited tokens holding at least one ASCII alphanumeric.
int WordCount(std::string_view text);

// Number of Unicode code points in a UTF-8 string.
size_t CharLength(std::string_view text);

struct TokenizerConfig {
  bool lowercase = true;
  // Tokens shorter than this are dropped.
  size_t min_token_length = 2;
  bool operator==(const TokenizerConfig&) const = default;
};

// Splits on anything that is not an ASCII letter or digit.
std::vector<std::string> Tokenize(std::string_view text,
                                  const TokenizerConfig& config = {});

struct SparseVector {
  std::vector<int> indices;  // strictly increasing
  std::vector<double> values;
  int dimension = 0;

  size_t nnz() const { return indices.size(); }
  double Norm() const;
  double Dot(const SparseVector& other) const;
  bool operator==(const SparseVector&) const = default;
};

class TfidfModel {
 public:
  TfidfModel() = default;

  // Vocabulary is every token with document frequency >= min_df, indexed in
  // lexicographic order. idf(t) = ln((1 + N) / (1 + df(t))) + 1.
  static TfidfModel Fit(const std::vector<std::string>& docs, int min_df,
                        const TokenizerConfig& tokenizer = {});

  // Reassembles a model from stored parts (checkpoint loading).
  static TfidfModel FromParts(std::vector<std::string> terms,
                              std::vector<double> idf, size_t doc_count,
                              const TokenizerConfig& tokenizer);

  // Term counts times idf, L2-normalized. Out-of-vocabulary tokens are
  // ignored; a text without vocabulary tokens maps to the zero vector.
  SparseVector Vectorize(std::string_view text) const;

  // Dot product of the two normalized vectors, clamped to [0, 1].
  double CosineSimilarity(std::string_view question,
                          std::string_view response) const;

  int size() const { return static_cast<int>(terms_.size()); }
  size_t doc_count() const { return doc_count_; }
  const std::vector<std::string>& terms() const { return terms_; }
  const std::vector<double>& idf() const { return idf_; }
  const TokenizerConfig& tokenizer() const { return tokenizer_; }
  // -1 when absent.
  int IndexOf(const std::string& term) const;

  // "term,index,idf" rows with a header.
  void WriteVocabularyCsv(std::ostream& out) const;

  bool operator==(const TfidfModel&) const = default;

 private:
  std::vector<std::string> terms_;
  std::vector<double> idf_;
  std::unordered_map<std::string, int> index_;
  size_t doc_count_ = 0;
  TokenizerConfig tokenizer_;
};

}  // namespace ohc

#endif  // OHC_TEXTFEAT_H_
