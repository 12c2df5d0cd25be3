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

// Classical baseline classifiers and greedy ensemble selection.

#ifndef OHC_LEARNERS_H_
#define OHC_LEARNERS_H_

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace ohc {

enum class BaselineKind {
  kLogistic,
  kLinearSvm,
  kKnn,
  kRandomForest,
  kGradientBoosting,
};
const char* BaselineKindName(BaselineKind kind);
BaselineKind ParseBaselineKind(const std::string& name);

struct BaselineParams {
  BaselineKind kind = BaselineKind::kLogistic;
  double l2 = 1.0;          // logistic and linear SVM penalty
  int svm_epochs = 50;
  int k = 15;               // knn
  int trees = 300;          // random forest
  int forest_depth = 8;
  int rounds = 200;         // gradient boosting
  double shrinkage = 0.1;
  int boost_depth = 3;
  uint64_t seed = 0;

  void Validate() const;
  bool operator==(const BaselineParams&) const = default;
};

// Binary regression tree stored as a flat node array; node 0 is the root.
struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;     // taken when x[feature] <= threshold
  int right = -1;
  double value = 0.0;
  bool operator==(const TreeNode&) const = default;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;
  double Predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  bool operator==(const RegressionTree&) const = default;
};

// Least-squares tree on `target` over the rows in `rows` (duplicates allowed,
// as produced by bootstrapping). Each split considers `mtry` features drawn
// from `rng_seed`; mtry >= columns considers all.
RegressionTree FitRegressionTree(const Eigen::MatrixXd& x,
                                 const Eigen::VectorXd& target,
                                 const std::vector<Eigen::Index>& rows,
                                 int max_depth, int mtry, uint64_t rng_seed);

struct BaselineModel {
  BaselineParams params;
  int n_features = 0;
  // Logistic and SVM.
  Eigen::VectorXd weights;
  double bias = 0.0;
  double platt_a = 1.0;
  double platt_b = 0.0;
  // KNN.
  Eigen::MatrixXd train_x;
  Eigen::VectorXd train_y;
  // Forest and boosting.
  std::vector<RegressionTree> trees;
  double base_score = 0.0;
  // Per-round training log-loss (boosting only), starting with the base.
  std::vector<double> train_loss;
};

// Throws InvalidArgument when y holds a single class.
BaselineModel TrainBaseline(const BaselineParams& params,
                            const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

Eigen::VectorXd PredictBaseline(const BaselineModel& model,
                                const Eigen::MatrixXd& x);

// Mean binary cross-entropy with probabilities clamped to [1e-15, 1 - 1e-15].
double LogLoss(const Eigen::VectorXd& probs, const Eigen::VectorXd& labels);

struct EnsembleWeights {
  std::vector<double> weights;   // one per candidate, summing to 1
  std::vector<int> selections;   // selection order, with repeats
  double val_log_loss = 0.0;
};

// Greedy forward selection with replacement. Starts from the single best
// candidate; each round adds the candidate whose inclusion minimizes the
// log-loss of the running uniform average. Stops after `max_rounds`
// selections or `patience` rounds without improving the best loss, and keeps
// the best selection prefix.
EnsembleWeights GreedyEnsemble(const std::vector<Eigen::VectorXd>& val_probs,
                               const Eigen::VectorXd& labels,
                               int max_rounds = 100, int patience = 10);

Eigen::VectorXd BlendPredictions(const std::vector<Eigen::VectorXd>& probs,
                                 const std::vector<double>& weights);

}  // namespace ohc

#endif  // OHC_LEARNERS_H_
