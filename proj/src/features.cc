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

#include "ohc/features.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>

#include "ohc/errors.h"

namespace ohc {
namespace {

std::string BoolCode(bool b) { return b ? "1" : "0"; }

double EmotionByColumn(const EmotionScores& s, const std::string& prefix,
                       const std::string& name, bool* found) {
  for (size_t k = 0; k < kNumEmotions; ++k) {
    auto e = static_cast<Emotion>(k);
    if (name == prefix + EmotionColumnSuffix(e)) {
      *found = true;
      return s[e];
    }
  }
  *found = false;
  return 0.0;
}

[[noreturn]] void UnknownColumn(const std::string& name) {
  throw InvalidArgument("feature schema names unknown column '" + name + "'");
}

}  // namespace

const char* TaskName(Task task) {
  return task == Task::kIssq ? "issq" : "isr";
}

Task ParseTask(const std::string& name) {
  if (name == "issq") return Task::kIssq;
  if (name == "isr") return Task::kIsr;
  throw InvalidArgument("unknown task '" + name + "' (expected issq or isr)");
}

LabelField TaskLabel(Task task) {
  return task == Task::kIssq ? LabelField::kIssq : LabelField::kIsr;
}

const char* FeatureGroupName(FeatureGroup group) {
  switch (group) {
    case FeatureGroup::kText:
      return "text";
    case FeatureGroup::kEmotions:
      return "emotions";
    case FeatureGroup::kNumericText:
      return "numeric_text";
    case FeatureGroup::kPost:
      return "post";
    case FeatureGroup::kUser:
      return "user";
  }
  return "?";
}

FeatureGroup ParseFeatureGroup(const std::string& name) {
  for (auto g : AllFeatureGroups()) {
    if (name == FeatureGroupName(g)) return g;
  }
  throw InvalidArgument("unknown feature group '" + name + "'");
}

std::set<FeatureGroup> AllFeatureGroups() {
  return {FeatureGroup::kText, FeatureGroup::kEmotions,
          FeatureGroup::kNumericText, FeatureGroup::kPost,
          FeatureGroup::kUser};
}

std::vector<std::string> FeatureSchema::ColumnNames() const {
  std::vector<std::string> names;
  for (const auto& c : numeric) names.push_back(c.name);
  for (const auto& c : categorical) names.push_back(c.name);
  return names;
}

FeatureSchema FeatureSchema::Select(
    const std::set<FeatureGroup>& groups) const {
  FeatureSchema out;
  out.task = task;
  out.has_text = has_text && groups.count(FeatureGroup::kText);
  for (const auto& c : numeric) {
    if (groups.count(c.group)) out.numeric.push_back(c);
  }
  for (const auto& c : categorical) {
    if (groups.count(c.group)) out.categorical.push_back(c);
  }
  return out;
}

FeatureSchema SchemaFor(Task task) {
  FeatureSchema s;
  s.task = task;
  const std::string side = task == Task::kIssq ? "Q_" : "R_";
  for (size_t k = 0; k < kNumEmotions; ++k) {
    s.numeric.push_back({side + EmotionColumnSuffix(static_cast<Emotion>(k)),
                         FeatureGroup::kEmotions});
  }
  s.numeric.push_back({side + "QUERY", FeatureGroup::kNumericText});
  s.numeric.push_back({side + "STATEMENT", FeatureGroup::kNumericText});
  s.numeric.push_back({side + "LEN", FeatureGroup::kNumericText});
  if (task == Task::kIsr) {
    s.numeric.push_back({"TFIDF_CS", FeatureGroup::kNumericText});
    s.numeric.push_back({"RID", FeatureGroup::kPost});
    s.numeric.push_back({"Q_REPLY_RATIO", FeatureGroup::kPost});
  }
  s.numeric.push_back({side + "PWRC", FeatureGroup::kUser});
  s.numeric.push_back({side + "TENURE", FeatureGroup::kUser});
  s.categorical.push_back({"M_CONDITION", FeatureGroup::kPost});
  s.categorical.push_back({side + "MED_EXPERT", FeatureGroup::kUser});
  return s;
}

QuestionFeatures BuildQuestionFeatures(
    const QRPair& pair, const EmotionScores& scores,
    const std::optional<SentenceKindCounts>& counts) {
  QuestionFeatures f;
  f.q_emotions = scores;
  SentenceKindCounts kinds =
      counts ? *counts : CountSentenceKinds(pair.question_text);
  f.q_query = kinds.queries;
  f.q_statement = kinds.statements;
  f.q_len = WordCount(pair.question_text);
  f.q_pwrc = pair.questioner.platform_response_count;
  f.q_tenure = pair.questioner.tenure_seconds;
  f.q_med_expert = pair.questioner.med_expert;
  f.condition = pair.condition;
  return f;
}

ResponseFeatures BuildResponseFeatures(
    const QRPair& pair, const EmotionScores& scores, const TfidfModel& tfidf,
    const std::optional<SentenceKindCounts>& counts) {
  ResponseFeatures f;
  f.r_emotions = scores;
  SentenceKindCounts kinds =
      counts ? *counts : CountSentenceKinds(pair.response_text);
  f.r_query = kinds.queries;
  f.r_statement = kinds.statements;
  f.r_len = WordCount(pair.response_text);
  f.tfidf_cs = tfidf.CosineSimilarity(pair.question_text, pair.response_text);
  f.rid = pair.response_index;
  f.q_reply_ratio = pair.questioner_reply_ratio;
  f.r_pwrc = pair.responder.platform_response_count;
  f.r_tenure = pair.responder.tenure_seconds;
  f.r_med_expert = pair.responder.med_expert;
  f.condition = pair.condition;
  return f;
}

FeatureRow ToRow(const QuestionFeatures& f, const FeatureSchema& schema) {
  FeatureRow row;
  for (const auto& c : schema.numeric) {
    bool found = false;
    double v = EmotionByColumn(f.q_emotions, "Q_", c.name, &found);
    if (!found) {
      if (c.name == "Q_QUERY") {
        v = f.q_query;
      } else if (c.name == "Q_STATEMENT") {
        v = f.q_statement;
      } else if (c.name == "Q_LEN") {
        v = f.q_len;
      } else if (c.name == "Q_PWRC") {
        v = static_cast<double>(f.q_pwrc);
      } else if (c.name == "Q_TENURE") {
        v = static_cast<double>(f.q_tenure);
      } else {
        UnknownColumn(c.name);
      }
    }
    row.numeric.push_back(v);
  }
  for (const auto& c : schema.categorical) {
    if (c.name == "M_CONDITION") {
      row.categorical.push_back(f.condition);
    } else if (c.name == "Q_MED_EXPERT") {
      row.categorical.push_back(BoolCode(f.q_med_expert));
    } else {
      UnknownColumn(c.name);
    }
  }
  return row;
}

FeatureRow ToRow(const ResponseFeatures& f, const FeatureSchema& schema) {
  FeatureRow row;
  for (const auto& c : schema.numeric) {
    bool found = false;
    double v = EmotionByColumn(f.r_emotions, "R_", c.name, &found);
    if (!found) {
      if (c.name == "R_QUERY") {
        v = f.r_query;
      } else if (c.name == "R_STATEMENT") {
        v = f.r_statement;
      } else if (c.name == "R_LEN") {
        v = f.r_len;
      } else if (c.name == "TFIDF_CS") {
        v = f.tfidf_cs;
      } else if (c.name == "RID") {
        v = static_cast<double>(f.rid);
      } else if (c.name == "Q_REPLY_RATIO") {
        v = f.q_reply_ratio;
      } else if (c.name == "R_PWRC") {
        v = static_cast<double>(f.r_pwrc);
      } else if (c.name == "R_TENURE") {
        v = static_cast<double>(f.r_tenure);
      } else {
        UnknownColumn(c.name);
      }
    }
    row.numeric.push_back(v);
  }
  for (const auto& c : schema.categorical) {
    if (c.name == "M_CONDITION") {
      row.categorical.push_back(f.condition);
    } else if (c.name == "R_MED_EXPERT") {
      row.categorical.push_back(BoolCode(f.r_med_expert));
    } else {
      UnknownColumn(c.name);
    }
  }
  return row;
}

void Standardizer::Fit(const std::vector<FeatureRow>& rows,
                       const FeatureSchema& schema) {
  if (rows.empty()) throw InvalidArgument("standardizer: no rows to fit");
  const size_t nn = schema.numeric.size();
  const size_t nc = schema.categorical.size();
  means_.assign(nn, 0.0);
  stddevs_.assign(nn, 0.0);
  categories_.assign(nc, {});
  const double n = static_cast<double>(rows.size());
  for (const auto& r : rows) {
    if (r.numeric.size() != nn || r.categorical.size() != nc) {
      throw InvalidArgument("standardizer: row width does not match schema");
    }
    for (size_t j = 0; j < nn; ++j) means_[j] += r.numeric[j];
  }
  for (double& m : means_) m /= n;
  for (const auto& r : rows) {
    for (size_t j = 0; j < nn; ++j) {
      double d = r.numeric[j] - means_[j];
      stddevs_[j] += d * d;
    }
  }
  for (size_t j = 0; j < nn; ++j) {
    double sd = std::sqrt(stddevs_[j] / n);
    // Relative test so that large-magnitude constant columns stay constant.
    stddevs_[j] = sd > 1e-12 * std::max(1.0, std::abs(means_[j])) ? sd : 0.0;
  }
  for (size_t j = 0; j < nc; ++j) {
    std::set<std::string> values;
    for (const auto& r : rows) values.insert(r.categorical[j]);
    categories_[j].assign(values.begin(), values.end());
  }
  fitted_ = true;
}

std::vector<int> Standardizer::Cardinalities() const {
  std::vector<int> out;
  for (size_t j = 0; j < categories_.size(); ++j) out.push_back(Cardinality(j));
  return out;
}

double Standardizer::Standardize(size_t column, double value) const {
  if (stddevs_[column] == 0.0) return 0.0;
  return (value - means_[column]) / stddevs_[column];
}

int Standardizer::Encode(size_t column, const std::string& value) const {
  const auto& cats = categories_[column];
  auto it = std::lower_bound(cats.begin(), cats.end(), value);
  if (it != cats.end() && *it == value) {
    return static_cast<int>(it - cats.begin());
  }
  return static_cast<int>(cats.size());
}

Standardizer Standardizer::FromParts(
    std::vector<double> means, std::vector<double> stddevs,
    std::vector<std::vector<std::string>> cats) {
  if (means.size() != stddevs.size()) {
    throw InvalidArgument("standardizer: means and stddevs differ in length");
  }
  Standardizer s;
  s.means_ = std::move(means);
  s.stddevs_ = std::move(stddevs);
  s.categories_ = std::move(cats);
  for (auto& c : s.categories_) std::sort(c.begin(), c.end());
  s.fitted_ = true;
  return s;
}

FeatureMatrix ToMatrix(const std::vector<FeatureRow>& rows,
                       const FeatureSchema& schema, Standardizer& standardizer,
                       bool fit_standardizer) {
  if (fit_standardizer) standardizer.Fit(rows, schema);
  return ToMatrix(rows, schema, static_cast<const Standardizer&>(standardizer));
}

FeatureMatrix ToMatrix(const std::vector<FeatureRow>& rows,
                       const FeatureSchema& schema,
                       const Standardizer& fitted) {
  if (!fitted.fitted()) throw InvalidArgument("to_matrix: standardizer not fitted");
  const size_t nn = schema.numeric.size();
  const size_t nc = schema.categorical.size();
  if (fitted.means().size() != nn || fitted.categories().size() != nc) {
    throw InvalidArgument("to_matrix: standardizer was fitted on another schema");
  }
  FeatureMatrix m;
  m.schema = schema;
  m.numeric.resize(static_cast<Eigen::Index>(rows.size()),
                   static_cast<Eigen::Index>(nn));
  m.categorical.resize(static_cast<Eigen::Index>(rows.size()),
                       static_cast<Eigen::Index>(nc));
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.numeric.size() != nn || r.categorical.size() != nc) {
      throw InvalidArgument("to_matrix: row " + std::to_string(i) + " has " +
                            std::to_string(r.numeric.size() +
                                           r.categorical.size()) +
                            " columns, schema has " +
                            std::to_string(nn + nc));
    }
    const auto ii = static_cast<Eigen::Index>(i);
    for (size_t j = 0; j < nn; ++j) {
      m.numeric(ii, static_cast<Eigen::Index>(j)) =
          fitted.Standardize(j, r.numeric[j]);
    }
    for (size_t j = 0; j < nc; ++j) {
      m.categorical(ii, static_cast<Eigen::Index>(j)) =
          fitted.Encode(j, r.categorical[j]);
    }
  }
  return m;
}

void WriteFeatureCsv(std::ostream& out, const FeatureSchema& schema,
                     const std::vector<std::string>& pair_ids,
                     const std::vector<FeatureRow>& rows,
                     const std::vector<std::optional<bool>>& labels) {
  if (pair_ids.size() != rows.size() ||
      (!labels.empty() && labels.size() != rows.size())) {
    throw InvalidArgument("feature csv: column lengths differ");
  }
  out << "pair_id";
  for (const auto& name : schema.ColumnNames()) out << ',' << name;
  if (!labels.empty()) out << ",label";
  out << '\n' << std::setprecision(17);
  for (size_t i = 0; i < rows.size(); ++i) {
    out << pair_ids[i];
    for (double v : rows[i].numeric) out << ',' << v;
    for (const auto& c : rows[i].categorical) out << ',' << c;
    if (!labels.empty()) {
      out << ',';
      if (labels[i]) out << (*labels[i] ? 1 : 0);
    }
    out << '\n';
  }
}

}  // namespace ohc
