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

#include "ohc/fusenet.h"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "ohc/errors.h"
#include "test_util.h"

namespace ohc {
namespace {

using Eigen::Index;
using Eigen::VectorXd;

FusionConfig Tiny(int d) {
  FusionConfig c;
  c.d_text = d;
  c.d_token = d;
  c.cat_embed_dim = 2;
  c.cat_bottleneck = 3;
  c.num_bottleneck = 3;
  c.fusion_hidden = 4;
  return c;
}

InputSchema FullSchema(TextInputKind kind, int text_width) {
  InputSchema s;
  s.text_kind = kind;
  s.text_width = text_width;
  s.numeric_width = 3;
  s.categorical_cardinalities = {3, 2};
  return s;
}

VectorXd RandomLabels(Index n, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  VectorXd y(n);
  for (Index i = 0; i < n; ++i) y(i) = coin(rng) ? 1.0 : 0.0;
  return y;
}

TEST(InitModelTest, SameSeedSameParameters) {
  const InputSchema s = FullSchema(TextInputKind::kSparse, 7);
  EXPECT_EQ(InitModel(Tiny(4), s, 9).params(), InitModel(Tiny(4), s, 9).params());
  EXPECT_NE(InitModel(Tiny(4), s, 9).params(), InitModel(Tiny(4), s, 10).params());
}

TEST(InitModelTest, LargeTensorStddevAndZeroBiases) {
  FusionConfig c;
  c.d_text = 128;
  c.d_token = 128;
  c.fusion_hidden = 400;  // head.w1 holds 400 x 256 = 102,400 values
  InputSchema s;
  s.text_kind = TextInputKind::kNone;
  s.numeric_width = 4;
  s.categorical_cardinalities = {3};
  FusionModel m = InitModel(c, s, 1);
  auto w = m.View("head.w1");
  ASSERT_GE(w.size(), 100000);
  const double mean = w.mean();
  const double sd =
      std::sqrt((w.array() - mean).square().sum() / static_cast<double>(w.size() - 1));
  EXPECT_NEAR(sd, 0.02, 0.002);
  for (const auto& b : m.blocks()) {
    const bool bias = b.name.ends_with(".b1") || b.name.ends_with(".b2") ||
                      b.name.ends_with(".ln_bias") || b.name == "text.bias";
    if (!bias) continue;
    EXPECT_TRUE(m.View(b.name).isZero(0.0)) << b.name;
  }
}

TEST(FusionModelTest, RepresentationWidth) {
  FusionConfig c = Tiny(5);
  FusionModel m(c, FullSchema(TextInputKind::kDense, 5));
  EXPECT_EQ(m.RepresentationWidth(), c.d_text + 2 * c.d_token);
  EXPECT_EQ(m.SegmentCount(), 3);
}

TEST(FusionModelTest, RejectsInconsistentShapes) {
  FusionConfig c = Tiny(4);
  c.d_token = 5;
  EXPECT_THROW(FusionModel(c, FullSchema(TextInputKind::kSparse, 9)),
               InvalidArgument);
  EXPECT_THROW(FusionModel(Tiny(4), FullSchema(TextInputKind::kDense, 6)),
               InvalidArgument);
  InputSchema zero_card = FullSchema(TextInputKind::kNone, 0);
  zero_card.categorical_cardinalities = {0};
  EXPECT_THROW(FusionModel(Tiny(4), zero_card), InvalidArgument);

  std::mt19937_64 rng(1);
  FusionModel m = InitModel(Tiny(4), FullSchema(TextInputKind::kDense, 4), 1);
  FusionBatch b = testing::RandomBatch(m.schema(), 3, rng);
  b.categorical(0, 0) = 7;
  EXPECT_THROW(Forward(m, b), InvalidArgument);
}

TEST(ForwardTest, ZeroHeadGivesOneHalf) {
  std::mt19937_64 rng(2);
  FusionModel m = InitModel(Tiny(4), FullSchema(TextInputKind::kSparse, 6), 3);
  m.View("head.w1").setZero();
  m.View("head.w2").setZero();
  VectorXd p = Forward(m, testing::RandomBatch(m.schema(), 5, rng));
  for (Index i = 0; i < p.size(); ++i) EXPECT_EQ(p(i), 0.5);
}

TEST(ForwardTest, InferenceIsDeterministicAndBounded) {
  std::mt19937_64 rng(4);
  FusionModel m = InitModel(Tiny(4), FullSchema(TextInputKind::kDense, 4), 5);
  FusionBatch b = testing::RandomBatch(m.schema(), 9, rng);
  VectorXd a = Predict(m, b);
  EXPECT_EQ(a, Predict(m, b));
  EXPECT_EQ(a, Forward(m, b, false, 123));
  EXPECT_TRUE((a.array() > 0.0).all() && (a.array() < 1.0).all());
  // Dropout only acts in training mode.
  EXPECT_NE(Forward(m, b, true, 1), a);
}

TEST(PredictTest, SingleRowAndPermutationEquivariance) {
  std::mt19937_64 rng(6);
  FusionModel m = InitModel(Tiny(4), FullSchema(TextInputKind::kSparse, 5), 7);
  FusionBatch b = testing::RandomBatch(m.schema(), 8, rng);
  VectorXd all = Predict(m, b);
  for (Index i = 0; i < 8; ++i) {
    EXPECT_DOUBLE_EQ(Predict(m, b.Rows({i}))(0), all(i));
  }
  std::vector<Index> perm(8);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  VectorXd permuted = Predict(m, b.Rows(perm));
  for (Index i = 0; i < 8; ++i) {
    EXPECT_DOUBLE_EQ(permuted(i), all(perm[static_cast<size_t>(i)]));
  }
}

void ExpectGradientMatches(const FusionModel& m, const FusionBatch& b,
                           const VectorXd& y, bool training) {
  ASSERT_GT(NonSmoothMargin(m, b), 1e-3);
  LossAndGradient lg = ComputeLossAndGradient(m, b, y, training, 77);
  std::vector<double> fd =
      testing::FiniteDifferenceGradient(m, b, y, training, 77, 1e-5);
  EXPECT_LT(testing::MaxRelativeError(lg.grad, fd), 1e-4);
}

TEST(GradientTest, MatchesFiniteDifferencesPerTextKind) {
  for (TextInputKind kind :
       {TextInputKind::kNone, TextInputKind::kDense, TextInputKind::kSparse}) {
    std::mt19937_64 rng(static_cast<uint64_t>(kind) + 11);
    const int width = kind == TextInputKind::kSparse ? 6 : 3;
    FusionModel m = InitModel(Tiny(3), FullSchema(kind, width), 21);
    // Larger weights keep activations away from the leaky kinks.
    for (double& w : m.params()) w *= 20.0;
    FusionBatch b = testing::RandomBatch(m.schema(), 4, rng);
    VectorXd y = RandomLabels(4, rng);
    SCOPED_TRACE(static_cast<int>(kind));
    ExpectGradientMatches(m, b, y, false);
    ExpectGradientMatches(m, b, y, true);
  }
}

TEST(GradientTest, TwentyParameterModel) {
  // Numeric-only: w1 3x2, b1 3, gain/bias 3+3, w2 1x3, b2 1 is 19 values;
  // head.w1 1x2 plus b1, w2, b2 brings the total to 24.
  FusionConfig c = Tiny(1);
  c.num_bottleneck = 3;
  c.fusion_hidden = 1;
  InputSchema s;
  s.text_kind = TextInputKind::kNone;
  s.numeric_width = 2;
  FusionModel m = InitModel(c, s, 8);
  for (double& w : m.params()) w *= 30.0;
  EXPECT_LE(m.params().size(), 25u);
  std::mt19937_64 rng(8);
  FusionBatch b = testing::RandomBatch(s, 5, rng);
  ExpectGradientMatches(m, b, RandomLabels(5, rng), false);
}

TEST(ScheduleTest, WarmupThenLinearDecay) {
  TrainConfig c;
  c.max_lr = 1.0;
  c.warmup_fraction = 0.1;
  EXPECT_DOUBLE_EQ(ScheduledLearningRate(c, 0, 100), 0.0);
  EXPECT_DOUBLE_EQ(ScheduledLearningRate(c, 5, 100), 0.5);
  EXPECT_DOUBLE_EQ(ScheduledLearningRate(c, 10, 100), 1.0);
  EXPECT_DOUBLE_EQ(ScheduledLearningRate(c, 55, 100), 0.5);
  EXPECT_DOUBLE_EQ(ScheduledLearningRate(c, 100, 100), 0.0);
}

struct Separable {
  FusionBatch train, val;
  VectorXd train_y, val_y;
};

// Two numeric columns, label 1{x0 + x1 > 0}, points within 0.2 of the
// boundary removed.
Separable MakeSeparable(Index rows, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw = [&](Index n, FusionBatch* b, VectorXd* y) {
    b->numeric.resize(n, 2);
    y->resize(n);
    for (Index i = 0; i < n;) {
      const double x0 = normal(rng);
      const double x1 = normal(rng);
      if (std::abs(x0 + x1) < 0.2) continue;
      b->numeric(i, 0) = x0;
      b->numeric(i, 1) = x1;
      (*y)(i) = x0 + x1 > 0 ? 1.0 : 0.0;
      ++i;
    }
  };
  Separable s;
  draw(rows, &s.train, &s.train_y);
  draw(rows / 2, &s.val, &s.val_y);
  return s;
}

InputSchema NumericSchema() {
  InputSchema s;
  s.text_kind = TextInputKind::kNone;
  s.numeric_width = 2;
  return s;
}

TEST(TrainTest, SeparableSetReachesHighAccuracy) {
  Separable d = MakeSeparable(200, 3);
  TrainConfig tc;
  tc.max_lr = 1e-2;
  tc.batch_size = 32;
  tc.max_epochs = 40;
  tc.patience = 40;
  tc.seed = 1;
  TrainResult r = Train(InitModel(Tiny(8), NumericSchema(), 1), d.train,
                        d.train_y, d.val, d.val_y, tc);
  VectorXd p = Predict(r.model, d.val);
  double correct = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    correct += ((p(i) >= 0.5) == (d.val_y(i) == 1.0)) ? 1.0 : 0.0;
  }
  EXPECT_GE(correct / static_cast<double>(p.size()), 0.95);
  EXPECT_LE(r.history.epochs.size(), 40u);
}

TEST(TrainTest, PatienceZeroStopsOneEpochAfterFirstNonImprovement) {
  // Random labels make validation loss stall early.
  std::mt19937_64 rng(5);
  FusionBatch train = testing::RandomBatch(NumericSchema(), 60, rng);
  FusionBatch val = testing::RandomBatch(NumericSchema(), 30, rng);
  VectorXd ty = RandomLabels(60, rng);
  VectorXd vy = RandomLabels(30, rng);
  TrainConfig tc;
  tc.max_lr = 5e-2;
  tc.batch_size = 8;
  tc.max_epochs = 60;
  tc.patience = 0;
  TrainResult r = Train(InitModel(Tiny(8), NumericSchema(), 2), train, ty, val,
                        vy, tc);
  const auto& e = r.history.epochs;
  ASSERT_LT(e.size(), 60u);
  double best = e[0].val_loss;
  size_t first_stall = 0;
  for (size_t k = 1; k < e.size() && first_stall == 0; ++k) {
    if (e[k].val_loss < best) {
      best = e[k].val_loss;
    } else {
      first_stall = k;
    }
  }
  ASSERT_GT(first_stall, 0u);
  EXPECT_EQ(e.size(), first_stall + 1);
  EXPECT_EQ(r.history.best_epoch, static_cast<int>(first_stall));
}

TEST(TrainTest, SameSeedSameHistory) {
  Separable d = MakeSeparable(80, 4);
  TrainConfig tc;
  tc.max_lr = 1e-2;
  tc.batch_size = 16;
  tc.max_epochs = 6;
  tc.seed = 12;
  FusionModel init = InitModel(Tiny(4), NumericSchema(), 3);
  TrainResult a = Train(init, d.train, d.train_y, d.val, d.val_y, tc);
  TrainResult b = Train(init, d.train, d.train_y, d.val, d.val_y, tc);
  EXPECT_EQ(a.history, b.history);
  EXPECT_EQ(a.model.params(), b.model.params());
}

TEST(TrainTest, LossDecreasesOverFirstStepsOnFixedBatch) {
  std::mt19937_64 rng(9);
  FusionModel m = InitModel(Tiny(4), FullSchema(TextInputKind::kSparse, 6), 4);
  FusionBatch b = testing::RandomBatch(m.schema(), 16, rng);
  VectorXd y = RandomLabels(16, rng);
  double previous = ComputeLossAndGradient(m, b, y).loss;
  for (int step = 0; step < 3; ++step) {
    LossAndGradient lg = ComputeLossAndGradient(m, b, y);
    for (size_t k = 0; k < lg.grad.size(); ++k) m.params()[k] -= 0.05 * lg.grad[k];
    const double now = ComputeLossAndGradient(m, b, y).loss;
    EXPECT_LT(now, previous) << "step " << step;
    previous = now;
  }
}

TEST(TrainTest, RejectsSingleClassLabels) {
  Separable d = MakeSeparable(20, 1);
  VectorXd ones = VectorXd::Ones(d.train_y.size());
  EXPECT_THROW(Train(InitModel(Tiny(4), NumericSchema(), 1), d.train, ones,
                     d.val, d.val_y, TrainConfig{}),
               InvalidArgument);
}

}  // namespace
}  // namespace ohc
