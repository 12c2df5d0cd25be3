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

// Fuse-late multimodal classifier.
//
//   text x ------------------------------------------+
//   categorical c -> embeddings -> MLP(bottleneck) --+--> m = x | c' | n'
//   numeric n -----------------> MLP(bottleneck) ----+
//
// Each MLP is Linear -> LeakyReLU -> LayerNorm -> Linear and emits d_token
// values. The segments of m are pooled elementwise (mean and max), the two
// pooled vectors are concatenated and passed through Dense -> GELU ->
// Dropout -> Dense -> sigmoid.
//
// All parameters live in one flat vector; ParamBlock records the layout.

#ifndef OHC_FUSENET_H_
#define OHC_FUSENET_H_

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ohc/textfeat.h"

namespace ohc {

struct FusionConfig {
  int d_text = 768;
  int d_token = 768;
  int cat_embed_dim = 32;
  int cat_bottleneck = 64;
  int num_bottleneck = 128;
  int fusion_hidden = 768;
  double dropout = 0.2;
  double leaky_slope = 0.1;
  double init_stddev = 0.02;

  void Validate() const;
  bool operator==(const FusionConfig&) const = default;
};

enum class TextInputKind {
  kNone,    // no text modality
  kDense,   // precomputed embedding of width d_text
  kSparse,  // TF-IDF vector, projected to d_text by a learned linear map
};

struct InputSchema {
  TextInputKind text_kind = TextInputKind::kSparse;
  // Embedding width for kDense, vocabulary size for kSparse.
  int text_width = 0;
  int numeric_width = 0;
  // One entry per categorical feature, reserved code included.
  std::vector<int> categorical_cardinalities;
  bool operator==(const InputSchema&) const = default;
};

struct FusionBatch {
  Eigen::MatrixXd text_dense;             // rows x text_width
  std::vector<SparseVector> text_sparse;  // one per row
  Eigen::MatrixXi categorical;            // rows x categorical features
  Eigen::MatrixXd numeric;                // rows x numeric_width

  Eigen::Index rows() const;
  FusionBatch Rows(const std::vector<Eigen::Index>& index) const;
};

struct ParamBlock {
  std::string name;
  size_t offset = 0;
  size_t rows = 0;
  size_t cols = 0;
  // Receives decoupled weight decay.
  bool decay = false;
  size_t size() const { return rows * cols; }
};

using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class FusionModel {
 public:
  FusionModel() = default;
  // Lays out blocks for (config, schema); parameters are zero-filled.
  FusionModel(const FusionConfig& config, const InputSchema& schema);

  const FusionConfig& config() const { return config_; }
  const InputSchema& schema() const { return schema_; }
  const std::vector<ParamBlock>& blocks() const { return blocks_; }
  const ParamBlock& block(std::string_view name) const;
  bool has_block(std::string_view name) const;

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  Eigen::Map<RowMajorMatrix> View(std::string_view name);
  Eigen::Map<const RowMajorMatrix> View(std::string_view name) const;

  // Number of modality segments entering the pooling step.
  int SegmentCount() const;
  // Width of m = x | c' | n' (absent modalities contribute nothing).
  int RepresentationWidth() const;

 private:
  FusionConfig config_;
  InputSchema schema_;
  std::vector<ParamBlock> blocks_;
  std::vector<double> params_;
};

// Weights and embeddings ~ truncated normal (cut at two deviations, rescaled
// to `init_stddev`); biases 0; layer-norm gains 1. Deterministic in `seed`.
FusionModel InitModel(const FusionConfig& config, const InputSchema& schema,
                      uint64_t seed);

// Validates batch shapes and finiteness against the model schema.
void CheckBatch(const FusionModel& model, const FusionBatch& batch);

// Probabilities in (0, 1). With `training` set, dropout masks are drawn from
// `dropout_seed`.
Eigen::VectorXd Forward(const FusionModel& model, const FusionBatch& batch,
                        bool training = false, uint64_t dropout_seed = 0);
// Inference-mode forward pass.
Eigen::VectorXd Predict(const FusionModel& model, const FusionBatch& batch);

struct LossAndGradient {
  double loss = 0.0;          // mean binary cross-entropy
  std::vector<double> grad;   // same layout as FusionModel::params()
};

LossAndGradient ComputeLossAndGradient(const FusionModel& model,
                                       const FusionBatch& batch,
                                       const Eigen::VectorXd& labels,
                                       bool training = false,
                                       uint64_t dropout_seed = 0);

// Smallest distance of any leaky-ReLU pre-activation from 0 and of any
// max-pooling winner from the runner-up. Finite differences are only
// meaningful when this exceeds the step size.
double NonSmoothMargin(const FusionModel& model, const FusionBatch& batch);

struct TrainConfig {
  double max_lr = 5e-5;
  double warmup_fraction = 0.1;
  int batch_size = 128;
  double weight_decay = 1e-4;
  int max_epochs = 40;
  int patience = 5;
  uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void Validate() const;
};

// Linear warmup from 0 to max_lr over the first warmup steps, then linear
// decay to 0 at `total_steps`. `step` is 1-based.
double ScheduledLearningRate(const TrainConfig& config, int64_t step,
                             int64_t total_steps);

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  double learning_rate = 0.0;  // at the epoch's last step
  bool operator==(const EpochRecord&) const = default;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  bool operator==(const TrainHistory&) const = default;
};

struct TrainResult {
  FusionModel model;  // parameters from the best validation epoch
  TrainHistory history;
};

// Mini-batch AdamW on binary cross-entropy with early stopping on validation
// loss: training ends once `max(patience, 1)` consecutive epochs fail to
// improve it.
TrainResult Train(const FusionModel& initial, const FusionBatch& train,
                  const Eigen::VectorXd& train_labels, const FusionBatch& val,
                  const Eigen::VectorXd& val_labels, const TrainConfig& config);

}  // namespace ohc

#endif  // OHC_FUSENET_H_
