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

// Glue between corpora and models: a featurizer fitted on training data
// turns a corpus into model inputs, and stays frozen afterwards.

#ifndef OHC_PIPELINE_H_
#define OHC_PIPELINE_H_

#include <Eigen/Dense>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "ohc/corpus.h"
#include "ohc/embeddings.h"
#include "ohc/emotion.h"
#include "ohc/features.h"
#include "ohc/fusenet.h"
#include "ohc/textfeat.h"

namespace ohc {

enum class TextMode { kTfidf, kEmbedding };
const char* TextModeName(TextMode mode);
TextMode ParseTextMode(const std::string& name);

struct FeaturizerOptions {
  Task task = Task::kIsr;
  TextMode text_mode = TextMode::kTfidf;
  int min_df = 2;
  TokenizerConfig tokenizer;
  std::set<FeatureGroup> groups = AllFeatureGroups();
  bool operator==(const FeaturizerOptions&) const = default;
};

// Pairs a task can use: those with the task label present and, for ISR,
// whose question is not labeled as non-seeking. With `require_labels` unset
// only the ISR gate applies.
Corpus TaskCorpus(const Corpus& corpus, Task task, bool require_labels = true);

struct Dataset {
  std::vector<std::string> pair_ids;
  std::vector<FeatureRow> rows;  // raw, unstandardized
  FusionBatch batch;             // standardized model inputs
  Eigen::VectorXd labels;        // empty when labels were not requested
};

class Featurizer {
 public:
  Featurizer() = default;

  // Fits the TF-IDF vocabulary on the question and response texts of
  // `train` and the standardizer on its feature rows. Embedding mode reads
  // the text width from `embeddings`.
  static Featurizer Fit(const Corpus& train, const EmotionSource& emotions,
                        const FeaturizerOptions& options,
                        const EmbeddingFile* embeddings = nullptr);
  static Featurizer FromParts(FeaturizerOptions options, TfidfModel tfidf,
                              Standardizer standardizer, int text_width);

  const FeaturizerOptions& options() const { return options_; }
  const FeatureSchema& schema() const { return schema_; }
  const TfidfModel& tfidf() const { return tfidf_; }
  const Standardizer& standardizer() const { return standardizer_; }
  InputSchema input_schema() const;

  FeatureRow Row(const QRPair& pair, const EmotionSource& emotions) const;

  // `embeddings` is required in embedding mode when the schema has text.
  Dataset Transform(const Corpus& corpus, const EmotionSource& emotions,
                    bool with_labels,
                    const EmbeddingFile* embeddings = nullptr) const;

  bool operator==(const Featurizer&) const = default;

 private:
  FeaturizerOptions options_;
  FeatureSchema schema_;
  TfidfModel tfidf_;
  Standardizer standardizer_;
  int text_width_ = 0;
};

struct TrainedPipeline {
  Featurizer featurizer;
  FusionModel model;
};

struct PipelineRun {
  TrainedPipeline pipeline;
  TrainHistory history;
};

// Fits a featurizer on `train`, then trains a fusion model from a seeded
// initialization, using `val` for early stopping.
PipelineRun TrainPipeline(const Corpus& train, const Corpus& val,
                          const EmotionSource& emotions,
                          const FeaturizerOptions& options,
                          const FusionConfig& fusion, const TrainConfig& train_cfg,
                          const EmbeddingFile* embeddings = nullptr);

Eigen::VectorXd PredictPipeline(const TrainedPipeline& pipeline,
                                const Corpus& corpus,
                                const EmotionSource& emotions,
                                const EmbeddingFile* embeddings = nullptr);

// Numeric columns followed by one-hot categoricals, optionally followed by
// the dense text vectors. Input to the classical baselines.
Eigen::MatrixXd DesignMatrix(const FusionBatch& batch, const InputSchema& schema,
                             bool include_text);

// Numeric columns then categorical codes, one row per batch row. The
// tabular view used for Shapley attribution.
Eigen::MatrixXd TabularMatrix(const FusionBatch& batch);

// A predictor over tabular rows (as laid out by TabularMatrix) that keeps the
// text input of `context` row `row` fixed. Categorical entries are rounded to
// the nearest code.
std::function<Eigen::VectorXd(const Eigen::MatrixXd&)> TabularPredictor(
    const FusionModel& model, const FusionBatch& context, Eigen::Index row);

}  // namespace ohc

#endif  // OHC_PIPELINE_H_
