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

#include <gtest/gtest.h>

#include <sstream>
#include <string>
#include <vector>

#include "ohc/checkpoint.h"
#include "ohc/errors.h"
#include "ohc/learners.h"
#include "ohc/synthetic.h"
#include "test_util.h"

namespace ohc {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using testing::MakePair;

Corpus SmallSynthetic(size_t pairs, uint64_t seed) {
  SyntheticIsrOptions o;
  o.pairs = pairs;
  o.seed = seed;
  return GenerateIsrCorpus(o).corpus;
}

FusionConfig TinyFusion() {
  FusionConfig c;
  c.d_text = c.d_token = 8;
  c.cat_embed_dim = 4;
  c.cat_bottleneck = 8;
  c.num_bottleneck = 8;
  c.fusion_hidden = 16;
  return c;
}

TrainConfig TinyTrain() {
  TrainConfig t;
  t.max_lr = 5e-3;
  t.batch_size = 32;
  t.max_epochs = 2;
  t.seed = 4;
  return t;
}

TEST(TaskCorpusTest, GatesOnSeekingQuestionAndLabels) {
  std::vector<QRPair> pairs;
  QRPair a = MakePair("a", "c", "q", "r");
  a.issq_label = true;
  a.isr_label = true;
  QRPair b = MakePair("b", "c", "q", "r");
  b.issq_label = false;
  QRPair c = MakePair("c", "c", "q", "r");  // unlabeled
  QRPair d = MakePair("d", "c", "q", "r");
  d.issq_label = true;
  const Corpus corpus({a, b, c, d}, "test");

  const Corpus isr = TaskCorpus(corpus, Task::kIsr);
  ASSERT_EQ(isr.size(), 1u);
  EXPECT_EQ(isr[0].pair_id, "a");
  EXPECT_EQ(TaskCorpus(corpus, Task::kIsr, false).size(), 3u);
  EXPECT_EQ(TaskCorpus(corpus, Task::kIssq).size(), 3u);
  EXPECT_EQ(TaskCorpus(corpus, Task::kIssq, false).size(), 4u);
}

TEST(FeaturizerTest, TfidfSchemaWidths) {
  const Corpus train = SmallSynthetic(60, 1);
  EmotionSource emotions;
  const Featurizer f = Featurizer::Fit(train, emotions, FeaturizerOptions{});
  const InputSchema s = f.input_schema();
  EXPECT_EQ(s.text_kind, TextInputKind::kSparse);
  EXPECT_EQ(s.text_width, f.tfidf().size());
  EXPECT_EQ(s.categorical_cardinalities.size(), 2u);
  const Dataset d = f.Transform(train, emotions, true);
  EXPECT_EQ(d.batch.rows(), 60);
  EXPECT_EQ(d.batch.numeric.cols(), s.numeric_width);
  EXPECT_EQ(d.labels.size(), 60);
  EXPECT_EQ(d.pair_ids.front(), train[0].pair_id);
  // Standardized numeric columns are centered on the training data.
  EXPECT_LT(d.batch.numeric.colwise().mean().cwiseAbs().maxCoeff(), 1e-9);
}

TEST(FeaturizerTest, GroupSelectionDropsTextModality) {
  const Corpus train = SmallSynthetic(40, 2);
  FeaturizerOptions o;
  o.groups = {FeatureGroup::kEmotions};
  const Featurizer f = Featurizer::Fit(train, EmotionSource{}, o);
  EXPECT_EQ(f.input_schema().text_kind, TextInputKind::kNone);
  EXPECT_TRUE(f.input_schema().categorical_cardinalities.empty());
  o.groups.clear();
  EXPECT_THROW(Featurizer::Fit(train, EmotionSource{}, o), InvalidArgument);
}

EmbeddingFile FakeEmbeddings(const Corpus& corpus, uint32_t dim) {
  EmbeddingFile e;
  e.model_name = "fake";
  e.dimension = dim;
  for (size_t i = 0; i < corpus.size(); ++i) {
    EmbeddingRecord r;
    for (uint32_t k = 0; k < dim; ++k) {
      r.question.push_back(static_cast<float>(i + k));
      r.response.push_back(static_cast<float>(i) - static_cast<float>(k));
    }
    e.records[corpus[i].pair_id] = r;
  }
  return e;
}

TEST(FeaturizerTest, EmbeddingModeReadsVectors) {
  const Corpus train = SmallSynthetic(30, 3);
  const EmbeddingFile emb = FakeEmbeddings(train, 4);
  FeaturizerOptions o;
  o.text_mode = TextMode::kEmbedding;
  const Featurizer f = Featurizer::Fit(train, EmotionSource{}, o, &emb);
  EXPECT_EQ(f.input_schema().text_kind, TextInputKind::kDense);
  const Dataset d = f.Transform(train, EmotionSource{}, false, &emb);
  EXPECT_EQ(d.labels.size(), 0);
  ASSERT_EQ(d.batch.text_dense.rows(), 30);
  EXPECT_GT(d.batch.text_dense.cols(), 0);
  EXPECT_THROW(f.Transform(train, EmotionSource{}, false, nullptr), Error);
  EmbeddingFile missing = emb;
  missing.records.erase(train[5].pair_id);
  EXPECT_THROW(f.Transform(train, EmotionSource{}, false, &missing), Error);
}

TEST(DesignMatrixTest, LaysOutNumericOneHotAndText) {
  FusionBatch b;
  b.numeric = (MatrixXd(2, 2) << 1, 2, 3, 4).finished();
  b.categorical = (Eigen::MatrixXi(2, 1) << 0, 2).finished();
  b.text_sparse = {SparseVector{{1}, {0.5}}, SparseVector{{0, 2}, {0.25, 1.0}}};
  InputSchema s;
  s.text_kind = TextInputKind::kSparse;
  s.text_width = 3;
  s.numeric_width = 2;
  s.categorical_cardinalities = {3};
  const MatrixXd without = DesignMatrix(b, s, false);
  const MatrixXd want_without =
      (MatrixXd(2, 5) << 1, 2, 1, 0, 0, 3, 4, 0, 0, 1).finished();
  EXPECT_EQ(without, want_without);
  const MatrixXd with = DesignMatrix(b, s, true);
  ASSERT_EQ(with.cols(), 8);
  EXPECT_EQ(with.rightCols(3),
            (MatrixXd(2, 3) << 0, 0.5, 0, 0.25, 0, 1.0).finished());
  const MatrixXd tab = TabularMatrix(b);
  EXPECT_EQ(tab, (MatrixXd(2, 3) << 1, 2, 0, 3, 4, 2).finished());
}

class CheckpointTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const Corpus c = SmallSynthetic(120, 7);
    auto [train, val] = HoldoutSplit(c, 0.8, 1, LabelField::kIsr);
    train_ = train;
    val_ = val;
    run_ = TrainPipeline(train_, val_, emotions_, FeaturizerOptions{},
                         TinyFusion(), TinyTrain());
  }

  static std::string Save(const TrainedPipeline& p) {
    std::ostringstream out;
    SavePipeline(out, p);
    return out.str();
  }

  Corpus train_, val_;
  EmotionSource emotions_;
  PipelineRun run_;
};

TEST_F(CheckpointTest, FusionRoundTripIsBitExact) {
  const std::string bytes = Save(run_.pipeline);
  EXPECT_EQ(Save(run_.pipeline), bytes);
  std::istringstream in(bytes);
  EXPECT_EQ(PeekCheckpointKind(in), CheckpointKind::kFusion);
  std::istringstream in2(bytes);
  const TrainedPipeline loaded = LoadPipeline(in2);
  EXPECT_EQ(loaded.featurizer, run_.pipeline.featurizer);
  EXPECT_EQ(loaded.model.config(), run_.pipeline.model.config());
  EXPECT_EQ(loaded.model.schema(), run_.pipeline.model.schema());
  EXPECT_EQ(loaded.model.params(), run_.pipeline.model.params());
  EXPECT_EQ(PredictPipeline(loaded, val_, emotions_),
            PredictPipeline(run_.pipeline, val_, emotions_));
  EXPECT_EQ(Save(loaded), bytes);
}

TEST_F(CheckpointTest, FileVariants) {
  testing::TempDir dir;
  const std::string path = dir.File("model.ohck");
  SavePipelineFile(path, run_.pipeline);
  EXPECT_EQ(PeekCheckpointKindFile(path), CheckpointKind::kFusion);
  EXPECT_EQ(LoadPipelineFile(path).model.params(), run_.pipeline.model.params());
  EXPECT_THROW(LoadPipelineFile(dir.File("absent")), IoError);
  EXPECT_THROW(LoadBaselineFile(path), Error);
}

TEST_F(CheckpointTest, CorruptInputIsRejected) {
  const std::string bytes = Save(run_.pipeline);
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  std::string bad_version = bytes;
  bad_version[4] = 9;
  const std::string truncated = bytes.substr(0, bytes.size() - 3);
  const std::string trailing = bytes + "x";
  for (const std::string& s :
       {bad_magic, bad_version, truncated, trailing}) {
    std::istringstream in(s);
    EXPECT_THROW(LoadPipeline(in), Error);
  }
  std::istringstream empty("");
  EXPECT_THROW(LoadPipeline(empty), Error);
}

TEST_F(CheckpointTest, BaselineRoundTripIsBitExact) {
  const Featurizer& f = run_.pipeline.featurizer;
  const Dataset d = f.Transform(train_, emotions_, true);
  const MatrixXd x = DesignMatrix(d.batch, f.input_schema(), false);
  const Dataset v = f.Transform(val_, emotions_, true);
  const MatrixXd xv = DesignMatrix(v.batch, f.input_schema(), false);
  for (BaselineKind kind :
       {BaselineKind::kLogistic, BaselineKind::kLinearSvm, BaselineKind::kKnn,
        BaselineKind::kRandomForest, BaselineKind::kGradientBoosting}) {
    BaselineParams params;
    params.kind = kind;
    params.trees = 10;
    params.rounds = 10;
    params.seed = 3;
    BaselineBundle bundle{f, TrainBaseline(params, x, d.labels), false};
    std::ostringstream out;
    SaveBaseline(out, bundle);
    std::istringstream peek(out.str());
    EXPECT_EQ(PeekCheckpointKind(peek), CheckpointKind::kBaseline);
    std::istringstream in(out.str());
    const BaselineBundle loaded = LoadBaseline(in);
    EXPECT_EQ(loaded.featurizer, f);
    EXPECT_EQ(loaded.model.params, params);
    EXPECT_EQ(loaded.include_text, false);
    EXPECT_EQ(PredictBaseline(loaded.model, xv),
              PredictBaseline(bundle.model, xv))
        << static_cast<int>(kind);
    std::ostringstream again;
    SaveBaseline(again, loaded);
    EXPECT_EQ(again.str(), out.str());
    std::istringstream wrong(out.str());
    EXPECT_THROW(LoadPipeline(wrong), Error);
  }
}

TEST_F(CheckpointTest, TabularPredictorMatchesModelOnContextRow) {
  const Dataset d = run_.pipeline.featurizer.Transform(val_, emotions_, false);
  const auto predict = TabularPredictor(run_.pipeline.model, d.batch, 2);
  const MatrixXd tab = TabularMatrix(d.batch);
  const VectorXd direct = Predict(run_.pipeline.model, d.batch.Rows({2}));
  const VectorXd via = predict(tab.row(2));
  EXPECT_NEAR(via(0), direct(0), 1e-12);
  // Categorical entries are rounded to the nearest code.
  MatrixXd nudged = tab.row(2);
  nudged(0, tab.cols() - 1) += 0.3;
  EXPECT_NEAR(predict(nudged)(0), direct(0), 1e-12);
}

TEST(PipelineTest, TrainingIsDeterministic) {
  const Corpus c = SmallSynthetic(100, 9);
  auto [train, val] = HoldoutSplit(c, 0.8, 1, LabelField::kIsr);
  const PipelineRun a = TrainPipeline(train, val, EmotionSource{},
                                      FeaturizerOptions{}, TinyFusion(), TinyTrain());
  const PipelineRun b = TrainPipeline(train, val, EmotionSource{},
                                      FeaturizerOptions{}, TinyFusion(), TinyTrain());
  EXPECT_EQ(a.pipeline.model.params(), b.pipeline.model.params());
  EXPECT_EQ(a.history, b.history);
}

}  // namespace
}  // namespace ohc
