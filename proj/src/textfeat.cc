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

#include "ohc/textfeat.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>

#include "ohc/errors.h"

namespace ohc {
namespace {

bool IsTerminator(char c) { return c == '.' || c == '!' || c == '?'; }

bool IsSpace(char c) { return std::isspace(static_cast<unsigned char>(c)); }

bool IsAsciiAlnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9');
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && IsSpace(s.front())) s.remove_prefix(1);
  while (!s.empty() && IsSpace(s.back())) s.remove_suffix(1);
  return s;
}

constexpr std::array<std::string_view, 15> kLeadWords = {
    "who",    "what", "when", "where", "why", "how", "should", "can",
    "could",  "would", "do",  "does",  "did", "is",  "are"};

}  // namespace

std::vector<std::string> SplitSentences(std::string_view text) {
  std::vector<std::string> out;
  size_t start = 0;
  size_t i = 0;
  while (i < text.size()) {
    if (IsTerminator(text[i])) {
      size_t end = i;
      while (end < text.size() && IsTerminator(text[end])) ++end;
      std::string_view s = Trim(text.substr(start, end - start));
      if (!s.empty()) out.emplace_back(s);
      start = i = end;
    } else {
      ++i;
    }
  }
  std::string_view tail = Trim(text.substr(start));
  if (!tail.empty()) out.emplace_back(tail);
  return out;
}

bool IsQuerySentence(std::string_view sentence) {
  sentence = Trim(sentence);
  // Terminator run at the end of the sentence.
  for (size_t i = sentence.size(); i > 0 && IsTerminator(sentence[i - 1]);
       --i) {
    if (sentence[i - 1] == '?') return true;
  }
  for (std::string_view lead : kLeadWords) {
    if (sentence.size() <= lead.size()) continue;
    if (sentence[lead.size()] != ' ') continue;
    bool match = true;
    for (size_t k = 0; k < lead.size(); ++k) {
      if (std::tolower(static_cast<unsigned char>(sentence[k])) != lead[k]) {
        match = false;
        break;
      }
    }
    if (match) return true;
  }
  return false;
}

SentenceKindCounts CountSentenceKinds(std::string_view text) {
  SentenceKindCounts counts;
  for (const auto& s : SplitSentences(text)) {
    if (IsQuerySentence(s)) {
      ++counts.queries;
    } else {
      ++counts.statements;
    }
  }
  return counts;
}

int WordCount(std::string_view text) {
  int count = 0;
  bool in_token = false;
  bool has_alnum = false;
  for (char c : text) {
    if (IsSpace(c)) {
      if (in_token && has_alnum) ++count;
      in_token = has_alnum = false;
    } else {
      in_token = true;
      has_alnum = has_alnum || IsAsciiAlnum(c);
    }
  }
  if (in_token && has_alnum) ++count;
  return count;
}

size_t CharLength(std::string_view text) {
  size_t n = 0;
  for (unsigned char c : text) {
    if ((c & 0xC0) != 0x80) ++n;
  }
  return n;
}

std::vector<std::string> Tokenize(std::string_view text,
                                  const TokenizerConfig& config) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (current.size() >= config.min_token_length && !current.empty()) {
      tokens.push_back(current);
    }
    current.clear();
  };
  for (char c : text) {
    if (IsAsciiAlnum(c)) {
      current.push_back(config.lowercase
                            ? static_cast<char>(std::tolower(
                                  static_cast<unsigned char>(c)))
                            : c);
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

double SparseVector::Norm() const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return std::sqrt(s);
}

double SparseVector::Dot(const SparseVector& other) const {
  double s = 0.0;
  size_t a = 0, b = 0;
  while (a < indices.size() && b < other.indices.size()) {
    if (indices[a] == other.indices[b]) {
      s += values[a] * other.values[b];
      ++a;
      ++b;
    } else if (indices[a] < other.indices[b]) {
      ++a;
    } else {
      ++b;
    }
  }
  return s;
}

TfidfModel TfidfModel::Fit(const std::vector<std::string>& docs, int min_df,
                           const TokenizerConfig& tokenizer) {
  if (docs.empty()) throw InvalidArgument("fit_tfidf: no documents");
  std::map<std::string, size_t> df;
  bool any_token = false;
  for (const auto& doc : docs) {
    auto tokens = Tokenize(doc, tokenizer);
    any_token = any_token || !tokens.empty();
    std::set<std::string> unique(tokens.begin(), tokens.end());
    for (const auto& t : unique) ++df[t];
  }
  if (!any_token) throw InvalidArgument("fit_tfidf: all documents are empty");

  TfidfModel model;
  model.doc_count_ = docs.size();
  model.tokenizer_ = tokenizer;
  const double n = static_cast<double>(docs.size());
  for (const auto& [term, count] : df) {
    if (static_cast<int>(count) < min_df) continue;
    model.index_.emplace(term, static_cast<int>(model.terms_.size()));
    model.terms_.push_back(term);
    model.idf_.push_back(
        std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
  }
  return model;
}

TfidfModel TfidfModel::FromParts(std::vector<std::string> terms,
                                 std::vector<double> idf, size_t doc_count,
                                 const TokenizerConfig& tokenizer) {
  if (terms.size() != idf.size()) {
    throw InvalidArgument("tfidf: terms and idf differ in length");
  }
  TfidfModel model;
  model.terms_ = std::move(terms);
  model.idf_ = std::move(idf);
  model.doc_count_ = doc_count;
  model.tokenizer_ = tokenizer;
  for (size_t i = 0; i < model.terms_.size(); ++i) {
    if (!(model.idf_[i] > 0.0)) throw InvalidArgument("tfidf: idf must be > 0");
    if (!model.index_.emplace(model.terms_[i], static_cast<int>(i)).second) {
      throw InvalidArgument("tfidf: duplicate term '" + model.terms_[i] + "'");
    }
  }
  return model;
}

int TfidfModel::IndexOf(const std::string& term) const {
  auto it = index_.find(term);
  return it == index_.end() ? -1 : it->second;
}

SparseVector TfidfModel::Vectorize(std::string_view text) const {
  std::map<int, double> counts;
  for (const auto& t : Tokenize(text, tokenizer_)) {
    auto it = index_.find(t);
    if (it != index_.end()) counts[it->second] += 1.0;
  }
  SparseVector v;
  v.dimension = size();
  double norm2 = 0.0;
  for (const auto& [idx, count] : counts) {
    double w = count * idf_[static_cast<size_t>(idx)];
    v.indices.push_back(idx);
    v.values.push_back(w);
    norm2 += w * w;
  }
  if (norm2 > 0.0) {
    double inv = 1.0 / std::sqrt(norm2);
    for (double& w : v.values) w *= inv;
  }
  return v;
}

double TfidfModel::CosineSimilarity(std::string_view question,
                                    std::string_view response) const {
  SparseVector q = Vectorize(question);
  SparseVector r = Vectorize(response);
  if (q.nnz() == 0 || r.nnz() == 0) return 0.0;
  return std::clamp(q.Dot(r), 0.0, 1.0);
}

void TfidfModel::WriteVocabularyCsv(std::ostream& out) const {
  out << "term,index,idf\n";
  out << std::setprecision(17);
  for (size_t i = 0; i < terms_.size(); ++i) {
    out << terms_[i] << ',' << i << ',' << idf_[i] << '\n';
  }
}

}  // namespace ohc
