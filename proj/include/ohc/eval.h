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

// Classification metrics plus the ablation and transfer harnesses.

#ifndef OHC_EVAL_H_
#define OHC_EVAL_H_

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "ohc/corpus.h"
#include "ohc/embeddings.h"
#include "ohc/emotion.h"
#include "ohc/features.h"
#include "ohc/fusenet.h"
#include "ohc/pipeline.h"

namespace ohc {

struct Confusion {
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t tn = 0;
  int64_t fn = 0;
  int64_t total() const { return tp + fp + tn + fn; }
  bool operator==(const Confusion&) const = default;
};

struct MetricsReport {
  double accuracy = 0.0;
  double auc = 0.0;
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double threshold = 0.5;
  Confusion confusion;
  bool operator==(const MetricsReport&) const = default;
};

// A row is predicted positive when prob >= threshold. Precision (recall) is 0
// when nothing is predicted (labeled) positive. Throws when the labels hold a
// single class, since AUC is then undefined.
MetricsReport ComputeMetrics(const Eigen::VectorXd& probs,
                             const Eigen::VectorXd& labels,
                             double threshold = 0.5);

// Mann-Whitney form: the chance a random positive scores above a random
// negative, ties counting one half.
double RankAuc(const Eigen::VectorXd& probs, const Eigen::VectorXd& labels);

// "name,ACC,AUC,F1,Precision,Recall".
void WriteMetricsCsvHeader(std::ostream& out);
void WriteMetricsCsvRow(std::ostream& out, const std::string& name,
                        const MetricsReport& report);
std::string ConfusionJson(const MetricsReport& report);

struct AblationSpec {
  std::string name;
  std::set<FeatureGroup> groups;
};

// full, text_only, no_emotion, no_user, no_numeric, no_post.
std::vector<AblationSpec> StandardAblations();
AblationSpec ParseAblation(const std::string& name);

struct AblationResult {
  std::string name;
  MetricsReport metrics;
  TrainHistory history;
};

// One seeded training per spec row on identical splits and hyperparameters;
// metrics on `test`.
std::vector<AblationResult> RunAblation(
    const Corpus& train, const Corpus& val, const Corpus& test,
    const EmotionSource& emotions, const std::vector<AblationSpec>& specs,
    const FeaturizerOptions& base, const FusionConfig& fusion,
    const TrainConfig& train_cfg, const EmbeddingFile* embeddings = nullptr);

// Evaluates a frozen pipeline on labeled target pairs. Nothing fitted on the
// source is updated; unseen categories map to the reserved code.
MetricsReport TransferEvaluate(const TrainedPipeline& pipeline,
                               const Corpus& target,
                               const EmotionSource& emotions,
                               const EmbeddingFile* embeddings = nullptr);

}  // namespace ohc

#endif  // OHC_EVAL_H_
