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

// Question-response corpus: data model, JSONL ingestion, sampling, splits.

#ifndef OHC_CORPUS_H_
#define OHC_CORPUS_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace ohc {

struct UserProfile {
  std::string user_id;
  // Seconds between the post and the start of the user's membership.
  int64_t tenure_seconds = 0;
  // Total responses the user posted platform-wide (PWRC).
  int64_t platform_response_count = 0;
  // Self-disclosed medical profession.
  bool med_expert = false;

  bool operator==(const UserProfile&) const = default;
};

struct QRPair {
  std::string pair_id;
  std::string condition;
  std::string question_text;
  std::string response_text;
  // Order in which the response was posted under its question (RID), >= 1.
  int64_t response_index = 1;
  // Questioner replies over all responses in the thread, in [0, 1].
  double questioner_reply_ratio = 0.0;
  UserProfile questioner;
  UserProfile responder;
  std::optional<bool> issq_label;
  // Only meaningful when issq_label is true.
  std::optional<bool> isr_label;
  std::optional<bool> helpful;

  bool operator==(const QRPair&) const = default;
};

enum class LabelField { kIssq, kIsr, kHelpful };

std::optional<bool> GetLabel(const QRPair& pair, LabelField field);
const char* LabelFieldName(LabelField field);
LabelField ParseLabelField(const std::string& name);

// Checks the per-pair invariants; throws InvalidArgument naming the field.
void ValidatePair(const QRPair& pair);

// Immutable, ordered collection of pairs with unique ids.
class Corpus {
 public:
  Corpus() = default;
  // Validates every pair and id uniqueness. When `declared_conditions` is
  // non-empty every pair's condition must belong to it.
  Corpus(std::vector<QRPair> pairs, std::string provenance,
         const std::set<std::string>& declared_conditions = {});

  const std::vector<QRPair>& pairs() const { return pairs_; }
  const std::string& provenance() const { return provenance_; }
  size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  const QRPair& operator[](size_t i) const { return pairs_[i]; }

  // Sorted distinct condition values.
  std::vector<std::string> Conditions() const;
  // Index of a pair id, or nullopt.
  std::optional<size_t> Find(const std::string& pair_id) const;

  bool operator==(const Corpus& other) const {
    return pairs_ == other.pairs_ && provenance_ == other.provenance_;
  }

 private:
  std::vector<QRPair> pairs_;
  std::string provenance_;
  std::map<std::string, size_t> index_;
};

struct ParseOptions {
  // Empty means any condition value is accepted.
  std::set<std::string> declared_conditions;
  std::string provenance = "jsonl";
};

// Parses newline-delimited JSON records. Blank lines are skipped. Throws
// ParseError naming the 1-based line and the offending field.
Corpus ParseCorpus(std::istream& in, const ParseOptions& options = {});
void WriteCorpus(std::ostream& out, const Corpus& corpus);

Corpus ReadCorpusFile(const std::string& path,
                      const ParseOptions& options = {});
void WriteCorpusFile(const std::string& path, const Corpus& corpus);

// Label counts for one condition (or the total row).
struct LabelCounts {
  // ISSQ counts are over distinct questions (condition + question text).
  size_t issq_positive = 0;
  size_t issq_total = 0;
  // ISR counts are over pairs carrying an ISR label.
  size_t isr_positive = 0;
  size_t isr_total = 0;
};

struct LabelSummary {
  std::map<std::string, LabelCounts> per_condition;
  LabelCounts total;
};

LabelSummary SummarizeLabels(const Corpus& corpus);
// "1621/1947 (83%)"; percent rounded to nearest integer. "0/0 (0%)" on empty.
std::string FormatRatio(size_t positive, size_t total);
// Aligned text table, one row per condition plus a Sum row.
std::string FormatLabelSummary(const LabelSummary& summary);

// Draws min(requested, available) pairs per condition uniformly without
// replacement. Selected pairs keep their original corpus order. Shortfalls
// are recorded as warnings in the output provenance. Conditions absent from
// `per_condition` are dropped.
Corpus StratifiedSample(const Corpus& corpus,
                        const std::map<std::string, size_t>& per_condition,
                        uint64_t seed);

// Proportional train/test split. With `stratify_on` set, each label class is
// allocated floor or ceil of its share (largest remainder) and every pair
// must carry the label. Without it, the whole corpus is one class.
std::pair<Corpus, Corpus> HoldoutSplit(const Corpus& corpus,
                                       double train_fraction, uint64_t seed,
                                       std::optional<LabelField> stratify_on);

}  // namespace ohc

#endif  // OHC_CORPUS_H_
