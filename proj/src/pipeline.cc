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

#include "ohc/pipeline.h"

#include <algorithm>
#include <cmath>

#include "ohc/errors.h"

namespace ohc {

using Eigen::Index;

const char* TextModeName(TextMode mode) {
  return mode == TextMode::kTfidf ? "tfidf" : "embedding";
}

TextMode ParseTextMode(const std::string& name) {
  if (name == "tfidf") return TextMode::kTfidf;
  if (name == "embedding") return TextMode::kEmbedding;
  throw InvalidArgument("unknown text mode '" + name +
                        "' (expected tfidf or embedding)");
}

Corpus TaskCorpus(const Corpus& corpus, Task task, bool require_labels) {
  std::vector<QRPair> kept;
  for (const auto& p : corpus.pairs()) {
    if (task == Task::kIsr && p.issq_label == false) continue;
    if (require_labels && !GetLabel(p, TaskLabel(task))) continue;
    kept.push_back(p);
  }
  return Corpus(std::move(kept),
                corpus.provenance() + "|task=" + TaskName(task));
}

Featurizer Featurizer::Fit(const Corpus& train, const EmotionSource& emotions,
                           const FeaturizerOptions& options,
                           const EmbeddingFile* embeddings) {
  if (train.empty()) throw InvalidArgument("cannot fit a featurizer on no pairs");
  if (options.groups.empty()) {
    throw InvalidArgument("feature subset is empty");
  }
  Featurizer f;
  f.options_ = options;
  f.schema_ = SchemaFor(options.task).Select(options.groups);
  std::vector<std::string> docs;
  docs.reserve(2 * train.size());
  for (const auto& p : train.pairs()) {
    docs.push_back(p.question_text);
    docs.push_back(p.response_text);
  }
  f.tfidf_ = TfidfModel::Fit(docs, options.min_df, options.tokenizer);
  if (f.schema_.has_text) {
    if (options.text_mode == TextMode::kTfidf) {
      f.text_width_ = f.tfidf_.size();
      if (f.text_width_ == 0) {
        throw InvalidArgument("TF-IDF vocabulary is empty at min_df " +
                              std::to_string(options.min_df));
      }
    } else {
      if (embeddings == nullptr) {
        throw InvalidArgument("embedding text mode needs an embedding file");
      }
      f.text_width_ = static_cast<int>(embeddings->dimension);
    }
  }
  std::vector<FeatureRow> rows;
  rows.reserve(train.size());
  for (const auto& p : train.pairs()) rows.push_back(f.Row(p, emotions));
  f.standardizer_.Fit(rows, f.schema_);
  return f;
}

Featurizer Featurizer::FromParts(FeaturizerOptions options, TfidfModel tfidf,
                                 Standardizer standardizer, int text_width) {
  Featurizer f;
  f.schema_ = SchemaFor(options.task).Select(options.groups);
  f.options_ = std::move(options);
  f.tfidf_ = std::move(tfidf);
  f.standardizer_ = std::move(standardizer);
  f.text_width_ = text_width;
  if (f.standardizer_.means().size() != f.schema_.numeric.size() ||
      f.standardizer_.categories().size() != f.schema_.categorical.size()) {
    throw InvalidArgument("standardizer does not match the feature schema");
  }
  return f;
}

InputSchema Featurizer::input_schema() const {
  InputSchema s;
  if (!schema_.has_text) {
    s.text_kind = TextInputKind::kNone;
  } else {
    s.text_kind = options_.text_mode == TextMode::kTfidf ? TextInputKind::kSparse
                                                          : TextInputKind::kDense;
    s.text_width = text_width_;
  }
  s.numeric_width = static_cast<int>(schema_.numeric.size());
  s.categorical_cardinalities = standardizer_.Cardinalities();
  return s;
}

FeatureRow Featurizer::Row(const QRPair& pair,
                           const EmotionSource& emotions) const {
  PairEmotions pe = emotions.Get(pair);
  std::optional<SentenceKindCounts> counts;
  if (options_.task == Task::kIsr) {
    if (pe.sentence_counts) counts = pe.sentence_counts->response;
    return ToRow(BuildResponseFeatures(pair, pe.response, tfidf_, counts),
                 schema_);
  }
  if (pe.sentence_counts) counts = pe.sentence_counts->question;
  return ToRow(BuildQuestionFeatures(pair, pe.question, counts), schema_);
}

Dataset Featurizer::Transform(const Corpus& corpus,
                              const EmotionSource& emotions, bool with_labels,
                              const EmbeddingFile* embeddings) const {
  if (!standardizer_.fitted()) throw InvalidArgument("featurizer is not fitted");
  Dataset ds;
  const auto n = static_cast<Index>(corpus.size());
  ds.pair_ids.reserve(corpus.size());
  ds.rows.reserve(corpus.size());
  for (const auto& p : corpus.pairs()) {
    ds.pair_ids.push_back(p.pair_id);
    ds.rows.push_back(Row(p, emotions));
  }
  FeatureMatrix fm = ToMatrix(ds.rows, schema_, standardizer_);
  ds.batch.numeric = std::move(fm.numeric);
  ds.batch.categorical = std::move(fm.categorical);

  const bool use_response = options_.task == Task::kIsr;
  if (schema_.has_text) {
    if (options_.text_mode == TextMode::kTfidf) {
      ds.batch.text_sparse.reserve(corpus.size());
      for (const auto& p : corpus.pairs()) {
        ds.batch.text_sparse.push_back(
            tfidf_.Vectorize(use_response ? p.response_text : p.question_text));
      }
    } else {
      if (embeddings == nullptr) {
        throw InvalidArgument("embedding text mode needs an embedding file");
      }
      if (static_cast<int>(embeddings->dimension) != text_width_) {
        throw InvalidArgument("embedding dimension " +
                              std::to_string(embeddings->dimension) +
                              " differs from the fitted width " +
                              std::to_string(text_width_));
      }
      ds.batch.text_dense.resize(n, text_width_);
      for (Index i = 0; i < n; ++i) {
        const QRPair& p = corpus[static_cast<size_t>(i)];
        auto it = embeddings->records.find(p.pair_id);
        if (it == embeddings->records.end()) {
          throw InvalidArgument("no embedding for pair '" + p.pair_id + "'");
        }
        const auto& v = use_response ? it->second.response : it->second.question;
        for (Index k = 0; k < text_width_; ++k) {
          ds.batch.text_dense(i, k) = v[static_cast<size_t>(k)];
        }
      }
    }
  }

  if (with_labels) {
    ds.labels.resize(n);
    const LabelField field = TaskLabel(options_.task);
    for (Index i = 0; i < n; ++i) {
      const QRPair& p = corpus[static_cast<size_t>(i)];
      auto label = GetLabel(p, field);
      if (!label) {
        throw InvalidArgument("pair '" + p.pair_id + "' lacks a " +
                              LabelFieldName(field) + " label");
      }
      ds.labels(i) = *label ? 1.0 : 0.0;
    }
  }
  return ds;
}

PipelineRun TrainPipeline(const Corpus& train, const Corpus& val,
                          const EmotionSource& emotions,
                          const FeaturizerOptions& options,
                          const FusionConfig& fusion,
                          const TrainConfig& train_cfg,
                          const EmbeddingFile* embeddings) {
  Corpus train_task = TaskCorpus(train, options.task);
  Corpus val_task = TaskCorpus(val, options.task);
  if (train_task.empty() || val_task.empty()) {
    throw InvalidArgument("training and validation sets need labeled pairs");
  }
  PipelineRun run;
  run.pipeline.featurizer =
      Featurizer::Fit(train_task, emotions, options, embeddings);
  const Featurizer& f = run.pipeline.featurizer;
  Dataset tr = f.Transform(train_task, emotions, true, embeddings);
  Dataset va = f.Transform(val_task, emotions, true, embeddings);
  FusionModel init = InitModel(fusion, f.input_schema(), train_cfg.seed);
  TrainResult result =
      Train(init, tr.batch, tr.labels, va.batch, va.labels, train_cfg);
  run.pipeline.model = std::move(result.model);
  run.history = std::move(result.history);
  return run;
}

Eigen::VectorXd PredictPipeline(const TrainedPipeline& pipeline,
                                const Corpus& corpus,
                                const EmotionSource& emotions,
                                const EmbeddingFile* embeddings) {
  if (corpus.empty()) return Eigen::VectorXd();
  Dataset ds = pipeline.featurizer.Transform(corpus, emotions, false, embeddings);
  return Predict(pipeline.model, ds.batch);
}

Eigen::MatrixXd DesignMatrix(const FusionBatch& batch, const InputSchema& schema,
                             bool include_text) {
  const Index n = batch.rows();
  Index width = schema.numeric_width;
  for (int c : schema.categorical_cardinalities) width += c;
  const bool text = include_text && schema.text_kind != TextInputKind::kNone;
  if (text) width += schema.text_width;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, width);
  Index col = 0;
  if (schema.numeric_width > 0) {
    x.leftCols(schema.numeric_width) = batch.numeric;
    col = schema.numeric_width;
  }
  for (size_t j = 0; j < schema.categorical_cardinalities.size(); ++j) {
    for (Index i = 0; i < n; ++i) {
      x(i, col + batch.categorical(i, static_cast<Index>(j))) = 1.0;
    }
    col += schema.categorical_cardinalities[j];
  }
  if (text) {
    if (schema.text_kind == TextInputKind::kDense) {
      x.rightCols(schema.text_width) = batch.text_dense;
    } else {
      for (Index i = 0; i < n; ++i) {
        const SparseVector& v = batch.text_sparse[static_cast<size_t>(i)];
        for (size_t k = 0; k < v.nnz(); ++k) {
          x(i, col + v.indices[k]) = v.values[k];
        }
      }
    }
  }
  return x;
}

Eigen::MatrixXd TabularMatrix(const FusionBatch& batch) {
  const Index n = batch.rows();
  const Index p = batch.numeric.cols();
  const Index c = batch.categorical.cols();
  Eigen::MatrixXd x(n, p + c);
  if (p > 0) x.leftCols(p) = batch.numeric;
  if (c > 0) x.rightCols(c) = batch.categorical.cast<double>();
  return x;
}

std::function<Eigen::VectorXd(const Eigen::MatrixXd&)> TabularPredictor(
    const FusionModel& model, const FusionBatch& context, Index row) {
  FusionBatch one = context.Rows({row});
  const InputSchema& s = model.schema();
  return [&model, one = std::move(one), s](const Eigen::MatrixXd& x) {
    const Index n = x.rows();
    const Index p = s.numeric_width;
    const auto c = static_cast<Index>(s.categorical_cardinalities.size());
    if (x.cols() != p + c) {
      throw InvalidArgument("tabular predictor expects " +
                            std::to_string(p + c) + " columns");
    }
    FusionBatch b;
    if (one.text_dense.size() > 0) {
      b.text_dense = one.text_dense.replicate(n, 1);
    }
    if (!one.text_sparse.empty()) {
      b.text_sparse.assign(static_cast<size_t>(n), one.text_sparse[0]);
    }
    b.numeric = x.leftCols(p);
    b.categorical.resize(c > 0 ? n : 0, c);
    for (Index j = 0; j < c; ++j) {
      const int top = s.categorical_cardinalities[static_cast<size_t>(j)] - 1;
      for (Index i = 0; i < n; ++i) {
        b.categorical(i, j) = std::clamp(
            static_cast<int>(std::lround(x(i, p + j))), 0, top);
      }
    }
    return Predict(model, b);
  };
}

}  // namespace ohc
