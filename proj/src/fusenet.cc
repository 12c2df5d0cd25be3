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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <span>

#include "ohc/errors.h"

namespace ohc {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kLayerNormEps = 1e-5;
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
// Standard deviation of a unit normal truncated to [-2, 2].
constexpr double kTruncatedStddev = 0.87962566103423978;

double Gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }

double GeluGrad(double x) {
  double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
  double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
  return cdf + x * pdf;
}

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

// Binary cross-entropy from a logit.
double BceWithLogit(double z, double y) {
  return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

std::string CatEmbeddingName(size_t j) { return "cat.emb." + std::to_string(j); }

Eigen::Map<RowMajorMatrix> GradView(const FusionModel& model,
                                    std::vector<double>& grad,
                                    std::string_view name) {
  const ParamBlock& b = model.block(name);
  return {grad.data() + b.offset, static_cast<Index>(b.rows),
          static_cast<Index>(b.cols)};
}

struct MlpCache {
  MatrixXd input;  // B x in
  MatrixXd pre;    // B x hidden, before the leaky ReLU
  MatrixXd xhat;   // normalized activations
  VectorXd inv_std;
  MatrixXd normed;  // xhat * gain + bias
  MatrixXd out;     // B x d_token
};

struct Cache {
  MatrixXd text;
  MlpCache cat;
  MlpCache num;
  std::vector<const MatrixXd*> segments;
  MatrixXd pooled;             // B x 2d
  Eigen::MatrixXi argmax;      // B x d, winning segment per element
  MatrixXd z1;                 // B x H
  MatrixXd mask;               // B x H, scaled keep mask (empty at inference)
  MatrixXd hidden;             // post-GELU, post-dropout
  VectorXd logit;
};

void MlpForward(const FusionModel& m, const std::string& prefix,
                MatrixXd input, double slope, MlpCache* c) {
  auto w1 = m.View(prefix + ".w1");
  auto b1 = m.View(prefix + ".b1");
  auto gain = m.View(prefix + ".ln_gain");
  auto bias = m.View(prefix + ".ln_bias");
  auto w2 = m.View(prefix + ".w2");
  auto b2 = m.View(prefix + ".b2");
  c->input = std::move(input);
  c->pre = c->input * w1.transpose();
  c->pre.rowwise() += b1.row(0);
  MatrixXd act = c->pre.unaryExpr(
      [slope](double v) { return v > 0 ? v : slope * v; });
  const Index h = act.cols();
  VectorXd mean = act.rowwise().mean();
  MatrixXd centered = act.colwise() - mean;
  VectorXd var = centered.array().square().rowwise().sum() / static_cast<double>(h);
  c->inv_std = (var.array() + kLayerNormEps).rsqrt();
  c->xhat = centered.array().colwise() * c->inv_std.array();
  c->normed = (c->xhat.array().rowwise() * gain.row(0).array()).rowwise() +
              bias.row(0).array();
  c->out = c->normed * w2.transpose();
  c->out.rowwise() += b2.row(0);
}

// Accumulates parameter gradients; returns d(input).
MatrixXd MlpBackward(const FusionModel& m, const std::string& prefix,
                     const MlpCache& c, const MatrixXd& d_out, double slope,
                     std::vector<double>& grad) {
  auto w1 = m.View(prefix + ".w1");
  auto gain = m.View(prefix + ".ln_gain");
  auto w2 = m.View(prefix + ".w2");
  GradView(m, grad, prefix + ".w2") += d_out.transpose() * c.normed;
  GradView(m, grad, prefix + ".b2") += d_out.colwise().sum();
  MatrixXd d_normed = d_out * w2;
  GradView(m, grad, prefix + ".ln_gain") +=
      (d_normed.array() * c.xhat.array()).colwise().sum().matrix();
  GradView(m, grad, prefix + ".ln_bias") += d_normed.colwise().sum();
  MatrixXd d_xhat = d_normed.array().rowwise() * gain.row(0).array();
  const double h = static_cast<double>(d_xhat.cols());
  VectorXd mean_d = d_xhat.rowwise().sum() / h;
  VectorXd mean_dx = (d_xhat.array() * c.xhat.array()).rowwise().sum() / h;
  MatrixXd d_act = d_xhat.colwise() - mean_d;
  d_act -= (c.xhat.array().colwise() * mean_dx.array()).matrix();
  d_act = d_act.array().colwise() * c.inv_std.array();
  MatrixXd d_pre = d_act.binaryExpr(
      c.pre, [slope](double d, double v) { return v > 0 ? d : slope * d; });
  GradView(m, grad, prefix + ".w1") += d_pre.transpose() * c.input;
  GradView(m, grad, prefix + ".b1") += d_pre.colwise().sum();
  return d_pre * w1;
}

void RunForward(const FusionModel& model, const FusionBatch& batch,
                bool training, uint64_t dropout_seed, Cache* c) {
  const FusionConfig& cfg = model.config();
  const InputSchema& schema = model.schema();
  const Index rows = batch.rows();
  const Index d = cfg.d_token;
  c->segments.clear();

  if (schema.text_kind == TextInputKind::kDense) {
    c->text = batch.text_dense;
    c->segments.push_back(&c->text);
  } else if (schema.text_kind == TextInputKind::kSparse) {
    auto proj = model.View("text.proj");
    auto bias = model.View("text.bias");
    c->text.resize(rows, cfg.d_text);
    for (Index i = 0; i < rows; ++i) {
      c->text.row(i) = bias.row(0);
      const SparseVector& v = batch.text_sparse[static_cast<size_t>(i)];
      for (size_t k = 0; k < v.nnz(); ++k) {
        c->text.row(i) += v.values[k] * proj.row(v.indices[k]);
      }
    }
    c->segments.push_back(&c->text);
  }

  const auto& cards = schema.categorical_cardinalities;
  if (!cards.empty()) {
    const Index e = cfg.cat_embed_dim;
    MatrixXd emb(rows, e * static_cast<Index>(cards.size()));
    for (size_t j = 0; j < cards.size(); ++j) {
      auto table = model.View(CatEmbeddingName(j));
      for (Index i = 0; i < rows; ++i) {
        emb.block(i, static_cast<Index>(j) * e, 1, e) =
            table.row(batch.categorical(i, static_cast<Index>(j)));
      }
    }
    MlpForward(model, "cat", std::move(emb), cfg.leaky_slope, &c->cat);
    c->segments.push_back(&c->cat.out);
  }
  if (schema.numeric_width > 0) {
    MlpForward(model, "num", batch.numeric, cfg.leaky_slope, &c->num);
    c->segments.push_back(&c->num.out);
  }

  const auto segs = static_cast<Index>(c->segments.size());
  c->pooled.resize(rows, 2 * d);
  c->argmax.resize(rows, d);
  MatrixXd sum = MatrixXd::Zero(rows, d);
  MatrixXd best = *c->segments[0];
  c->argmax.setZero();
  for (Index s = 0; s < segs; ++s) {
    const MatrixXd& seg = *c->segments[static_cast<size_t>(s)];
    sum += seg;
    if (s == 0) continue;
    for (Index i = 0; i < rows; ++i) {
      for (Index k = 0; k < d; ++k) {
        if (seg(i, k) > best(i, k)) {
          best(i, k) = seg(i, k);
          c->argmax(i, k) = static_cast<int>(s);
        }
      }
    }
  }
  c->pooled.leftCols(d) = sum / static_cast<double>(segs);
  c->pooled.rightCols(d) = best;

  auto w1 = model.View("head.w1");
  auto b1 = model.View("head.b1");
  auto w2 = model.View("head.w2");
  auto b2 = model.View("head.b2");
  c->z1 = c->pooled * w1.transpose();
  c->z1.rowwise() += b1.row(0);
  c->hidden = c->z1.unaryExpr([](double v) { return Gelu(v); });
  if (training && cfg.dropout > 0.0) {
    std::mt19937_64 rng(dropout_seed);
    std::bernoulli_distribution keep(1.0 - cfg.dropout);
    const double scale = 1.0 / (1.0 - cfg.dropout);
    c->mask.resize(rows, c->hidden.cols());
    for (Index i = 0; i < rows; ++i) {
      for (Index k = 0; k < c->mask.cols(); ++k) {
        c->mask(i, k) = keep(rng) ? scale : 0.0;
      }
    }
    c->hidden.array() *= c->mask.array();
  } else {
    c->mask.resize(0, 0);
  }
  c->logit = c->hidden * w2.row(0).transpose();
  c->logit.array() += b2(0, 0);
}

void AddTruncatedNormal(std::span<double> out, double stddev,
                        std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = stddev / kTruncatedStddev;
  for (double& w : out) {
    double z;
    do {
      z = normal(rng);
    } while (std::abs(z) > 2.0);
    w = z * scale;
  }
}

}  // namespace

void FusionConfig::Validate() const {
  if (d_text < 1 || d_token < 1 || cat_embed_dim < 1 || cat_bottleneck < 1 ||
      num_bottleneck < 1 || fusion_hidden < 1) {
    throw InvalidArgument("fusion config: all widths must be >= 1");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw InvalidArgument("fusion config: dropout must lie in [0, 1)");
  }
  if (!(leaky_slope > 0.0)) {
    throw InvalidArgument("fusion config: leaky_slope must be > 0");
  }
  if (!(init_stddev > 0.0)) {
    throw InvalidArgument("fusion config: init_stddev must be > 0");
  }
}

Index FusionBatch::rows() const {
  return std::max({text_dense.rows(), static_cast<Index>(text_sparse.size()),
                   categorical.rows(), numeric.rows()});
}

FusionBatch FusionBatch::Rows(const std::vector<Index>& index) const {
  FusionBatch out;
  const auto n = static_cast<Index>(index.size());
  if (text_dense.size() > 0) out.text_dense.resize(n, text_dense.cols());
  out.categorical.resize(categorical.rows() > 0 ? n : 0, categorical.cols());
  out.numeric.resize(numeric.rows() > 0 ? n : 0, numeric.cols());
  for (Index r = 0; r < n; ++r) {
    Index i = index[static_cast<size_t>(r)];
    if (text_dense.size() > 0) out.text_dense.row(r) = text_dense.row(i);
    if (!text_sparse.empty()) {
      out.text_sparse.push_back(text_sparse[static_cast<size_t>(i)]);
    }
    if (categorical.rows() > 0) out.categorical.row(r) = categorical.row(i);
    if (numeric.rows() > 0) out.numeric.row(r) = numeric.row(i);
  }
  return out;
}

FusionModel::FusionModel(const FusionConfig& config, const InputSchema& schema)
    : config_(config), schema_(schema) {
  config_.Validate();
  size_t offset = 0;
  auto add = [&](std::string name, size_t rows, size_t cols, bool decay) {
    blocks_.push_back({std::move(name), offset, rows, cols, decay});
    offset += rows * cols;
  };
  const auto d = static_cast<size_t>(config_.d_token);
  if (schema_.text_kind != TextInputKind::kNone) {
    if (config_.d_text != config_.d_token) {
      throw InvalidArgument(
          "fusion config: d_text must equal d_token for segment pooling");
    }
    if (schema_.text_width < 1) {
      throw InvalidArgument("input schema: text_width must be >= 1");
    }
    if (schema_.text_kind == TextInputKind::kDense &&
        schema_.text_width != config_.d_text) {
      throw InvalidArgument("input schema: dense text width " +
                            std::to_string(schema_.text_width) +
                            " differs from d_text " +
                            std::to_string(config_.d_text));
    }
    if (schema_.text_kind == TextInputKind::kSparse) {
      add("text.proj", static_cast<size_t>(schema_.text_width),
          static_cast<size_t>(config_.d_text), true);
      add("text.bias", 1, static_cast<size_t>(config_.d_text), false);
    }
  }
  auto add_mlp = [&](const std::string& prefix, size_t in, size_t hidden) {
    add(prefix + ".w1", hidden, in, true);
    add(prefix + ".b1", 1, hidden, false);
    add(prefix + ".ln_gain", 1, hidden, false);
    add(prefix + ".ln_bias", 1, hidden, false);
    add(prefix + ".w2", d, hidden, true);
    add(prefix + ".b2", 1, d, false);
  };
  const auto& cards = schema_.categorical_cardinalities;
  for (size_t j = 0; j < cards.size(); ++j) {
    if (cards[j] < 1) {
      throw InvalidArgument("input schema: categorical feature " +
                            std::to_string(j) + " has zero cardinality");
    }
    add(CatEmbeddingName(j), static_cast<size_t>(cards[j]),
        static_cast<size_t>(config_.cat_embed_dim), true);
  }
  if (!cards.empty()) {
    add_mlp("cat", cards.size() * static_cast<size_t>(config_.cat_embed_dim),
            static_cast<size_t>(config_.cat_bottleneck));
  }
  if (schema_.numeric_width < 0) {
    throw InvalidArgument("input schema: numeric_width must be >= 0");
  }
  if (schema_.numeric_width > 0) {
    add_mlp("num", static_cast<size_t>(schema_.numeric_width),
            static_cast<size_t>(config_.num_bottleneck));
  }
  if (SegmentCount() == 0) {
    throw InvalidArgument("input schema: no modality present");
  }
  const auto hidden = static_cast<size_t>(config_.fusion_hidden);
  add("head.w1", hidden, 2 * d, true);
  add("head.b1", 1, hidden, false);
  add("head.w2", 1, hidden, true);
  add("head.b2", 1, 1, false);
  params_.assign(offset, 0.0);
}

const ParamBlock& FusionModel::block(std::string_view name) const {
  for (const auto& b : blocks_) {
    if (b.name == name) return b;
  }
  throw InvalidArgument("fusion model has no parameter block '" +
                        std::string(name) + "'");
}

bool FusionModel::has_block(std::string_view name) const {
  return std::any_of(blocks_.begin(), blocks_.end(),
                     [&](const ParamBlock& b) { return b.name == name; });
}

Eigen::Map<RowMajorMatrix> FusionModel::View(std::string_view name) {
  const ParamBlock& b = block(name);
  return {params_.data() + b.offset, static_cast<Index>(b.rows),
          static_cast<Index>(b.cols)};
}

Eigen::Map<const RowMajorMatrix> FusionModel::View(
    std::string_view name) const {
  const ParamBlock& b = block(name);
  return {params_.data() + b.offset, static_cast<Index>(b.rows),
          static_cast<Index>(b.cols)};
}

int FusionModel::SegmentCount() const {
  return (schema_.text_kind != TextInputKind::kNone ? 1 : 0) +
         (schema_.categorical_cardinalities.empty() ? 0 : 1) +
         (schema_.numeric_width > 0 ? 1 : 0);
}

int FusionModel::RepresentationWidth() const {
  int width = schema_.text_kind != TextInputKind::kNone ? config_.d_text : 0;
  if (!schema_.categorical_cardinalities.empty()) width += config_.d_token;
  if (schema_.numeric_width > 0) width += config_.d_token;
  return width;
}

FusionModel InitModel(const FusionConfig& config, const InputSchema& schema,
                      uint64_t seed) {
  FusionModel model(config, schema);
  std::mt19937_64 rng(seed);
  for (const auto& b : model.blocks()) {
    std::span<double> span(model.params().data() + b.offset, b.size());
    if (b.decay) {
      AddTruncatedNormal(span, config.init_stddev, rng);
    } else if (b.name.ends_with(".ln_gain")) {
      std::fill(span.begin(), span.end(), 1.0);
    }
  }
  return model;
}

void CheckBatch(const FusionModel& model, const FusionBatch& batch) {
  const InputSchema& s = model.schema();
  const Index rows = batch.rows();
  if (rows == 0) throw InvalidArgument("fusion batch is empty");
  auto mismatch = [](const std::string& what) {
    throw InvalidArgument("fusion batch: " + what);
  };
  if (s.text_kind == TextInputKind::kDense) {
    if (batch.text_dense.rows() != rows ||
        batch.text_dense.cols() != s.text_width) {
      mismatch("dense text must be rows x " + std::to_string(s.text_width));
    }
    if (!batch.text_dense.allFinite()) mismatch("non-finite text input");
  } else if (s.text_kind == TextInputKind::kSparse) {
    if (static_cast<Index>(batch.text_sparse.size()) != rows) {
      mismatch("one sparse text vector per row required");
    }
    for (const auto& v : batch.text_sparse) {
      if (v.dimension != s.text_width) mismatch("sparse text dimension");
      for (size_t k = 0; k < v.nnz(); ++k) {
        if (v.indices[k] < 0 || v.indices[k] >= s.text_width) {
          mismatch("sparse text index out of range");
        }
        if (!std::isfinite(v.values[k])) mismatch("non-finite text input");
      }
    }
  }
  const auto& cards = s.categorical_cardinalities;
  if (!cards.empty()) {
    if (batch.categorical.rows() != rows ||
        batch.categorical.cols() != static_cast<Index>(cards.size())) {
      mismatch("categorical must be rows x " + std::to_string(cards.size()));
    }
    for (Index j = 0; j < batch.categorical.cols(); ++j) {
      for (Index i = 0; i < rows; ++i) {
        int code = batch.categorical(i, j);
        if (code < 0 || code >= cards[static_cast<size_t>(j)]) {
          mismatch("categorical code out of range in column " +
                   std::to_string(j));
        }
      }
    }
  }
  if (s.numeric_width > 0) {
    if (batch.numeric.rows() != rows ||
        batch.numeric.cols() != s.numeric_width) {
      mismatch("numeric must be rows x " + std::to_string(s.numeric_width));
    }
    if (!batch.numeric.allFinite()) mismatch("non-finite numeric input");
  }
}

Eigen::VectorXd Forward(const FusionModel& model, const FusionBatch& batch,
                        bool training, uint64_t dropout_seed) {
  CheckBatch(model, batch);
  Cache c;
  RunForward(model, batch, training, dropout_seed, &c);
  return c.logit.unaryExpr([](double z) { return Sigmoid(z); });
}

Eigen::VectorXd Predict(const FusionModel& model, const FusionBatch& batch) {
  return Forward(model, batch, false, 0);
}

LossAndGradient ComputeLossAndGradient(const FusionModel& model,
                                       const FusionBatch& batch,
                                       const Eigen::VectorXd& labels,
                                       bool training, uint64_t dropout_seed) {
  CheckBatch(model, batch);
  const Index rows = batch.rows();
  if (labels.size() != rows) {
    throw InvalidArgument("labels length does not match batch rows");
  }
  Cache c;
  RunForward(model, batch, training, dropout_seed, &c);
  const FusionConfig& cfg = model.config();
  const InputSchema& schema = model.schema();
  const Index d = cfg.d_token;
  const double inv_n = 1.0 / static_cast<double>(rows);

  LossAndGradient out;
  out.grad.assign(model.params().size(), 0.0);
  auto& grad = out.grad;

  VectorXd d_logit(rows);
  for (Index i = 0; i < rows; ++i) {
    out.loss += BceWithLogit(c.logit(i), labels(i));
    d_logit(i) = (Sigmoid(c.logit(i)) - labels(i)) * inv_n;
  }
  out.loss *= inv_n;

  auto w1 = model.View("head.w1");
  auto w2 = model.View("head.w2");
  GradView(model, grad, "head.w2") += d_logit.transpose() * c.hidden;
  GradView(model, grad, "head.b2")(0, 0) += d_logit.sum();
  MatrixXd d_hidden = d_logit * w2.row(0);
  if (c.mask.size() > 0) d_hidden.array() *= c.mask.array();
  MatrixXd d_z1 = d_hidden.binaryExpr(
      c.z1, [](double g, double z) { return g * GeluGrad(z); });
  GradView(model, grad, "head.w1") += d_z1.transpose() * c.pooled;
  GradView(model, grad, "head.b1") += d_z1.colwise().sum();
  MatrixXd d_pooled = d_z1 * w1;

  const auto segs = static_cast<Index>(c.segments.size());
  std::vector<MatrixXd> d_seg(static_cast<size_t>(segs),
                              d_pooled.leftCols(d) / static_cast<double>(segs));
  for (Index i = 0; i < rows; ++i) {
    for (Index k = 0; k < d; ++k) {
      d_seg[static_cast<size_t>(c.argmax(i, k))](i, k) += d_pooled(i, d + k);
    }
  }

  size_t s = 0;
  if (schema.text_kind != TextInputKind::kNone) {
    const MatrixXd& d_text = d_seg[s++];
    if (schema.text_kind == TextInputKind::kSparse) {
      auto g_proj = GradView(model, grad, "text.proj");
      GradView(model, grad, "text.bias") += d_text.colwise().sum();
      for (Index i = 0; i < rows; ++i) {
        const SparseVector& v = batch.text_sparse[static_cast<size_t>(i)];
        for (size_t k = 0; k < v.nnz(); ++k) {
          g_proj.row(v.indices[k]) += v.values[k] * d_text.row(i);
        }
      }
    }
  }
  const auto& cards = schema.categorical_cardinalities;
  if (!cards.empty()) {
    MatrixXd d_emb =
        MlpBackward(model, "cat", c.cat, d_seg[s++], cfg.leaky_slope, grad);
    const Index e = cfg.cat_embed_dim;
    for (size_t j = 0; j < cards.size(); ++j) {
      auto g_table = GradView(model, grad, CatEmbeddingName(j));
      for (Index i = 0; i < rows; ++i) {
        g_table.row(batch.categorical(i, static_cast<Index>(j))) +=
            d_emb.block(i, static_cast<Index>(j) * e, 1, e);
      }
    }
  }
  if (schema.numeric_width > 0) {
    MlpBackward(model, "num", c.num, d_seg[s++], cfg.leaky_slope, grad);
  }
  return out;
}

double NonSmoothMargin(const FusionModel& model, const FusionBatch& batch) {
  CheckBatch(model, batch);
  Cache c;
  RunForward(model, batch, false, 0, &c);
  double margin = std::numeric_limits<double>::infinity();
  if (c.cat.pre.size() > 0) margin = std::min(margin, c.cat.pre.cwiseAbs().minCoeff());
  if (c.num.pre.size() > 0) margin = std::min(margin, c.num.pre.cwiseAbs().minCoeff());
  const Index rows = batch.rows();
  const Index d = model.config().d_token;
  if (c.segments.size() > 1) {
    for (Index i = 0; i < rows; ++i) {
      for (Index k = 0; k < d; ++k) {
        double top = -std::numeric_limits<double>::infinity();
        double second = top;
        for (const MatrixXd* seg : c.segments) {
          double v = (*seg)(i, k);
          if (v > top) {
            second = top;
            top = v;
          } else if (v > second) {
            second = v;
          }
        }
        margin = std::min(margin, top - second);
      }
    }
  }
  return margin;
}

void TrainConfig::Validate() const {
  if (!(max_lr > 0.0)) throw InvalidArgument("train config: max_lr must be > 0");
  if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0)) {
    throw InvalidArgument("train config: warmup_fraction must lie in [0, 1)");
  }
  if (batch_size < 1) throw InvalidArgument("train config: batch_size must be >= 1");
  if (max_epochs < 1) throw InvalidArgument("train config: max_epochs must be >= 1");
  if (patience < 0) throw InvalidArgument("train config: patience must be >= 0");
  if (weight_decay < 0.0) {
    throw InvalidArgument("train config: weight_decay must be >= 0");
  }
}

double ScheduledLearningRate(const TrainConfig& config, int64_t step,
                             int64_t total_steps) {
  const auto warmup = static_cast<int64_t>(
      std::floor(config.warmup_fraction * static_cast<double>(total_steps)));
  if (step <= warmup) {
    return config.max_lr * static_cast<double>(step) /
           static_cast<double>(warmup);
  }
  if (total_steps <= warmup) return 0.0;
  return config.max_lr * static_cast<double>(total_steps - step) /
         static_cast<double>(total_steps - warmup);
}

TrainResult Train(const FusionModel& initial, const FusionBatch& train,
                  const Eigen::VectorXd& train_labels, const FusionBatch& val,
                  const Eigen::VectorXd& val_labels,
                  const TrainConfig& config) {
  config.Validate();
  CheckBatch(initial, train);
  CheckBatch(initial, val);
  const Index n = train.rows();
  if (train_labels.size() != n || val_labels.size() != val.rows()) {
    throw InvalidArgument("train: label vectors do not match batches");
  }
  const double positives = train_labels.sum();
  if (positives <= 0.0 || positives >= static_cast<double>(n)) {
    throw InvalidArgument("train: training labels contain a single class");
  }

  TrainResult result{initial, {}};
  FusionModel& model = result.model;
  std::vector<double> best_params = model.params();
  double best_val = std::numeric_limits<double>::infinity();
  int since_best = 0;

  const auto batch = static_cast<Index>(config.batch_size);
  const int64_t steps_per_epoch = (n + batch - 1) / batch;
  const int64_t total_steps = steps_per_epoch * config.max_epochs;
  std::vector<double> m1(model.params().size(), 0.0);
  std::vector<double> m2(model.params().size(), 0.0);
  std::vector<char> decays(model.params().size(), 0);
  for (const auto& b : model.blocks()) {
    std::fill_n(decays.begin() + static_cast<std::ptrdiff_t>(b.offset),
                b.size(), b.decay ? 1 : 0);
  }

  std::mt19937_64 rng(config.seed);
  std::vector<Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  int64_t step = 0;
  double b1_pow = 1.0, b2_pow = 1.0;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    double lr = 0.0;
    for (Index start = 0; start < n; start += batch) {
      const Index end = std::min(n, start + batch);
      std::vector<Index> idx(order.begin() + start, order.begin() + end);
      FusionBatch sub = train.Rows(idx);
      VectorXd y(end - start);
      for (Index r = 0; r < y.size(); ++r) {
        y(r) = train_labels(idx[static_cast<size_t>(r)]);
      }
      ++step;
      lr = ScheduledLearningRate(config, step, total_steps);
      LossAndGradient lg =
          ComputeLossAndGradient(model, sub, y, true, rng());
      loss_sum += lg.loss * static_cast<double>(y.size());

      b1_pow *= config.beta1;
      b2_pow *= config.beta2;
      auto& p = model.params();
      for (size_t k = 0; k < p.size(); ++k) {
        const double g = lg.grad[k];
        m1[k] = config.beta1 * m1[k] + (1.0 - config.beta1) * g;
        m2[k] = config.beta2 * m2[k] + (1.0 - config.beta2) * g * g;
        if (decays[k]) p[k] -= lr * config.weight_decay * p[k];
        const double mhat = m1[k] / (1.0 - b1_pow);
        const double vhat = m2[k] / (1.0 - b2_pow);
        p[k] -= lr * mhat / (std::sqrt(vhat) + config.epsilon);
      }
    }

    VectorXd probs = Predict(model, val);
    double val_loss = 0.0;
    int correct = 0;
    for (Index i = 0; i < probs.size(); ++i) {
      const double pi = std::clamp(probs(i), 1e-15, 1.0 - 1e-15);
      val_loss -= val_labels(i) * std::log(pi) +
                  (1.0 - val_labels(i)) * std::log(1.0 - pi);
      correct += ((probs(i) >= 0.5) == (val_labels(i) > 0.5)) ? 1 : 0;
    }
    val_loss /= static_cast<double>(probs.size());
    result.history.epochs.push_back(
        {epoch, loss_sum / static_cast<double>(n), val_loss,
         static_cast<double>(correct) / static_cast<double>(probs.size()), lr});

    if (val_loss < best_val) {
      best_val = val_loss;
      best_params = model.params();
      result.history.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= std::max(config.patience, 1)) {
      break;
    }
  }
  model.params() = std::move(best_params);
  return result;
}

}  // namespace ohc
