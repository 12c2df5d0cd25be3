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

// Task-specific tabular features and their numeric/categorical encoding.

#ifndef OHC_FEATURES_H_
#define OHC_FEATURES_H_

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ohc/corpus.h"
#include "ohc/emotion.h"
#include "ohc/textfeat.h"

namespace ohc {

enum class Task { kIssq, kIsr };
const char* TaskName(Task task);
Task ParseTask(const std::string& name);
// The label a task predicts.
LabelField TaskLabel(Task task);

// Groups used by the ablation harness. They partition the schema.
enum class FeatureGroup { kText, kEmotions, kNumericText, kPost, kUser };
const char* FeatureGroupName(FeatureGroup group);
FeatureGroup ParseFeatureGroup(const std::string& name);
std::set<FeatureGroup> AllFeatureGroups();

struct ColumnSpec {
  std::string name;
  FeatureGroup group;
  bool operator==(const ColumnSpec&) const = default;
};

// Fixed, ordered column layout. Text is a separate modality and carries no
// tabular columns.
struct FeatureSchema {
  Task task = Task::kIsr;
  bool has_text = true;
  std::vector<ColumnSpec> numeric;
  std::vector<ColumnSpec> categorical;

  // Numeric names followed by categorical names.
  std::vector<std::string> ColumnNames() const;
  size_t width() const { return numeric.size() + categorical.size(); }
  // Keeps only columns (and the text modality) whose group is in `groups`.
  FeatureSchema Select(const std::set<FeatureGroup>& groups) const;
  bool operator==(const FeatureSchema&) const = default;
};

// Question side (ISSQ task) and response side (ISR task) layouts.
FeatureSchema SchemaFor(Task task);

struct QuestionFeatures {
  EmotionScores q_emotions;
  int q_query = 0;
  int q_statement = 0;
  int q_len = 0;
  int64_t q_pwrc = 0;
  int64_t q_tenure = 0;
  bool q_med_expert = false;
  std::string condition;
  bool operator==(const QuestionFeatures&) const = default;
};

struct ResponseFeatures {
  EmotionScores r_emotions;
  int r_query = 0;
  int r_statement = 0;
  int r_len = 0;
  double tfidf_cs = 0.0;
  int64_t rid = 1;
  double q_reply_ratio = 0.0;
  int64_t r_pwrc = 0;
  int64_t r_tenure = 0;
  bool r_med_expert = false;
  std::string condition;
  bool operator==(const ResponseFeatures&) const = default;
};

// `counts` overrides the rule-based sentence classifier when present.
QuestionFeatures BuildQuestionFeatures(
    const QRPair& pair, const EmotionScores& scores,
    const std::optional<SentenceKindCounts>& counts = std::nullopt);
// `tfidf` must be fitted on training texts only.
ResponseFeatures BuildResponseFeatures(
    const QRPair& pair, const EmotionScores& scores, const TfidfModel& tfidf,
    const std::optional<SentenceKindCounts>& counts = std::nullopt);

// Raw feature values laid out by a schema.
struct FeatureRow {
  std::vector<double> numeric;
  std::vector<std::string> categorical;
  bool operator==(const FeatureRow&) const = default;
};

FeatureRow ToRow(const QuestionFeatures& f, const FeatureSchema& schema);
FeatureRow ToRow(const ResponseFeatures& f, const FeatureSchema& schema);

// Training-set statistics: z-scores for numeric columns, integer codes for
// categorical columns. Code `Cardinality(j) - 1` is reserved for categories
// unseen during fitting.
class Standardizer {
 public:
  void Fit(const std::vector<FeatureRow>& rows, const FeatureSchema& schema);
  bool fitted() const { return fitted_; }

  const std::vector<double>& means() const { return means_; }
  const std::vector<double>& stddevs() const { return stddevs_; }
  const std::vector<std::vector<std::string>>& categories() const {
    return categories_;
  }
  int Cardinality(size_t column) const {
    return static_cast<int>(categories_[column].size()) + 1;
  }
  std::vector<int> Cardinalities() const;

  double Standardize(size_t column, double value) const;
  int Encode(size_t column, const std::string& value) const;

  static Standardizer FromParts(std::vector<double> means,
                                std::vector<double> stddevs,
                                std::vector<std::vector<std::string>> cats);
  bool operator==(const Standardizer&) const = default;

 private:
  bool fitted_ = false;
  std::vector<double> means_;
  std::vector<double> stddevs_;  // 0 marks a constant column
  std::vector<std::vector<std::string>> categories_;  // sorted
};

struct FeatureMatrix {
  FeatureSchema schema;
  Eigen::MatrixXd numeric;      // rows x numeric columns
  Eigen::MatrixXi categorical;  // rows x categorical columns
  Eigen::Index rows() const { return numeric.rows(); }
};

// Encodes rows. With `fit_standardizer` the statistics are fitted on `rows`
// first; otherwise `standardizer` must already be fitted and is left as is.
FeatureMatrix ToMatrix(const std::vector<FeatureRow>& rows,
                       const FeatureSchema& schema, Standardizer& standardizer,
                       bool fit_standardizer);
FeatureMatrix ToMatrix(const std::vector<FeatureRow>& rows,
                       const FeatureSchema& schema,
                       const Standardizer& fitted);

// Header "pair_id,<schema columns>[,label]" followed by raw values.
void WriteFeatureCsv(std::ostream& out, const FeatureSchema& schema,
                     const std::vector<std::string>& pair_ids,
                     const std::vector<FeatureRow>& rows,
                     const std::vector<std::optional<bool>>& labels = {});

}  // namespace ohc

#endif  // OHC_FEATURES_H_
