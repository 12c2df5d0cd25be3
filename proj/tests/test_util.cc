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

#include "test_util.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unistd.h>

#include "ohc/errors.h"

namespace ohc::testing {

namespace fs = std::filesystem;
using Eigen::Index;
using Eigen::VectorXd;

QRPair MakePair(const std::string& id, const std::string& condition,
                const std::string& question, const std::string& response) {
  QRPair p;
  p.pair_id = id;
  p.condition = condition;
  p.question_text = question;
  p.response_text = response;
  p.questioner.user_id = id + "-q";
  p.responder.user_id = id + "-r";
  return p;
}

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("ohc_test_" + std::to_string(::getpid()) + "_" +
           std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string TempDir::File(const std::string& name) const {
  return (path_ / name).string();
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

double PairwiseAuc(const VectorXd& probs, const VectorXd& labels) {
  double wins = 0.0;
  double pairs = 0.0;
  for (Index i = 0; i < probs.size(); ++i) {
    if (labels(i) != 1.0) continue;
    for (Index j = 0; j < probs.size(); ++j) {
      if (labels(j) != 0.0) continue;
      pairs += 1.0;
      if (probs(i) > probs(j)) {
        wins += 1.0;
      } else if (probs(i) == probs(j)) {
        wins += 0.5;
      }
    }
  }
  return wins / pairs;
}

double TrapezoidAuc(const VectorXd& probs, const VectorXd& labels) {
  std::map<double, std::pair<double, double>, std::greater<>> by_score;
  double pos = 0.0;
  double neg = 0.0;
  for (Index i = 0; i < probs.size(); ++i) {
    auto& cell = by_score[probs(i)];
    if (labels(i) == 1.0) {
      cell.first += 1.0;
      pos += 1.0;
    } else {
      cell.second += 1.0;
      neg += 1.0;
    }
  }
  double area = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
  for (const auto& [score, counts] : by_score) {
    const double next_tpr = tpr + counts.first / pos;
    const double next_fpr = fpr + counts.second / neg;
    area += (next_fpr - fpr) * (tpr + next_tpr) / 2.0;
    tpr = next_tpr;
    fpr = next_fpr;
  }
  return area;
}

std::vector<double> FiniteDifferenceGradient(const FusionModel& model,
                                             const FusionBatch& batch,
                                             const VectorXd& labels,
                                             bool training,
                                             uint64_t dropout_seed,
                                             double eps) {
  FusionModel probe = model;
  std::vector<double> grad(model.params().size());
  for (size_t k = 0; k < grad.size(); ++k) {
    const double saved = probe.params()[k];
    probe.params()[k] = saved + eps;
    const double up =
        ComputeLossAndGradient(probe, batch, labels, training, dropout_seed).loss;
    probe.params()[k] = saved - eps;
    const double down =
        ComputeLossAndGradient(probe, batch, labels, training, dropout_seed).loss;
    probe.params()[k] = saved;
    grad[k] = (up - down) / (2.0 * eps);
  }
  return grad;
}

double MaxRelativeError(const std::vector<double>& a,
                        const std::vector<double>& b) {
  double worst = 0.0;
  for (size_t k = 0; k < a.size(); ++k) {
    const double scale = std::max({std::abs(a[k]), std::abs(b[k]), 1e-6});
    worst = std::max(worst, std::abs(a[k] - b[k]) / scale);
  }
  return worst;
}

FusionBatch RandomBatch(const InputSchema& schema, Index rows,
                        std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.1, 1.0);
  FusionBatch b;
  if (schema.text_kind == TextInputKind::kDense) {
    b.text_dense.resize(rows, schema.text_width);
    for (Index i = 0; i < b.text_dense.size(); ++i) {
      b.text_dense.data()[i] = normal(rng);
    }
  } else if (schema.text_kind == TextInputKind::kSparse) {
    std::bernoulli_distribution keep(0.5);
    for (Index i = 0; i < rows; ++i) {
      SparseVector v;
      v.dimension = schema.text_width;
      for (int j = 0; j < schema.text_width; ++j) {
        if (keep(rng)) {
          v.indices.push_back(j);
          v.values.push_back(unit(rng));
        }
      }
      b.text_sparse.push_back(std::move(v));
    }
  }
  b.numeric.resize(rows, schema.numeric_width);
  for (Index i = 0; i < b.numeric.size(); ++i) b.numeric.data()[i] = normal(rng);
  const auto cats = static_cast<Index>(schema.categorical_cardinalities.size());
  b.categorical.resize(cats > 0 ? rows : 0, cats);
  for (Index j = 0; j < cats; ++j) {
    std::uniform_int_distribution<int> code(
        0, schema.categorical_cardinalities[static_cast<size_t>(j)] - 1);
    for (Index i = 0; i < rows; ++i) b.categorical(i, j) = code(rng);
  }
  return b;
}

FusionConfig ScaledFusionConfig() {
  FusionConfig c;
  c.d_text = 32;
  c.d_token = 32;
  c.cat_embed_dim = 8;
  c.cat_bottleneck = 16;
  c.num_bottleneck = 32;
  c.fusion_hidden = 64;
  return c;
}

TrainConfig ScaledTrainConfig(uint64_t seed) {
  TrainConfig c;
  c.max_lr = 3e-3;
  c.batch_size = 64;
  c.max_epochs = 40;
  c.patience = 5;
  c.seed = seed;
  return c;
}

SyntheticSplits MakeSyntheticSplits(uint64_t seed) {
  SyntheticSplits s;
  s.options.seed = seed;
  SyntheticIsrCorpus syn = GenerateIsrCorpus(s.options);
  s.threshold = syn.threshold;
  auto [train_val, test] =
      HoldoutSplit(syn.corpus, 0.8, seed + 1, LabelField::kIsr);
  auto [train, val] = HoldoutSplit(train_val, 0.9, seed + 2, LabelField::kIsr);
  s.train = std::move(train);
  s.val = std::move(val);
  s.test = std::move(test);
  return s;
}

}  // namespace ohc::testing
