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

#include "ohc/learners.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <utility>

#include "ohc/errors.h"

namespace ohc {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double Softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

void CheckLabels(const VectorXd& y) {
  bool pos = false, neg = false;
  for (Index i = 0; i < y.size(); ++i) {
    if (y(i) != 0.0 && y(i) != 1.0) {
      throw InvalidArgument("labels must be 0 or 1");
    }
    (y(i) > 0.5 ? pos : neg) = true;
  }
  if (!pos || !neg) {
    throw InvalidArgument("training labels contain a single class");
  }
}

class TreeBuilder {
 public:
  TreeBuilder(const MatrixXd& x, const VectorXd& target, int max_depth,
              int mtry, uint64_t seed)
      : x_(x), t_(target), max_depth_(max_depth), mtry_(mtry), rng_(seed) {}

  int Build(std::vector<Index> rows, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    const auto n = static_cast<double>(rows.size());
    double sum = 0.0, sq = 0.0;
    for (Index r : rows) {
      sum += t_(r);
      sq += t_(r) * t_(r);
    }
    nodes_[static_cast<size_t>(id)].value = sum / n;
    const double sse = sq - sum * sum / n;
    if (depth >= max_depth_ || rows.size() < 2 ||
        sse <= 1e-12 * std::max(1.0, sq)) {
      return id;
    }

    const auto p = static_cast<int>(x_.cols());
    std::vector<int> feats(static_cast<size_t>(p));
    std::iota(feats.begin(), feats.end(), 0);
    int use = p;
    if (mtry_ < p) {
      for (int k = 0; k < mtry_; ++k) {
        std::uniform_int_distribution<int> pick(k, p - 1);
        std::swap(feats[static_cast<size_t>(k)],
                  feats[static_cast<size_t>(pick(rng_))]);
      }
      use = mtry_;
      std::sort(feats.begin(), feats.begin() + use);
    }

    const double base = sum * sum / n;
    double best_gain = 0.0;
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<std::pair<double, Index>> order(rows.size());
    for (int fi = 0; fi < use; ++fi) {
      const int f = feats[static_cast<size_t>(fi)];
      for (size_t i = 0; i < rows.size(); ++i) {
        order[i] = {x_(rows[i], f), rows[i]};
      }
      std::sort(order.begin(), order.end());
      double left = 0.0;
      for (size_t i = 0; i + 1 < order.size(); ++i) {
        left += t_(order[i].second);
        if (order[i].first == order[i + 1].first) continue;
        const double nl = static_cast<double>(i + 1);
        const double nr = n - nl;
        const double right = sum - left;
        const double gain = left * left / nl + right * right / nr - base;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = f;
          double mid = 0.5 * (order[i].first + order[i + 1].first);
          if (!(mid < order[i + 1].first)) mid = order[i].first;
          best_threshold = mid;
        }
      }
    }
    if (best_feature < 0 || best_gain <= 1e-12 * std::max(1.0, sse)) return id;

    std::vector<Index> lrows, rrows;
    for (Index r : rows) {
      (x_(r, best_feature) <= best_threshold ? lrows : rrows).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    const int l = Build(std::move(lrows), depth + 1);
    const int r = Build(std::move(rrows), depth + 1);
    TreeNode& node = nodes_[static_cast<size_t>(id)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  std::vector<TreeNode> Release() { return std::move(nodes_); }

 private:
  const MatrixXd& x_;
  const VectorXd& t_;
  int max_depth_;
  int mtry_;
  std::mt19937_64 rng_;
  std::vector<TreeNode> nodes_;
};

int LeafIndex(const RegressionTree& tree,
              const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  int node = 0;
  while (tree.nodes[static_cast<size_t>(node)].feature >= 0) {
    const TreeNode& n = tree.nodes[static_cast<size_t>(node)];
    node = x(n.feature) <= n.threshold ? n.left : n.right;
  }
  return node;
}

double MeanLogisticLoss(const VectorXd& f, const VectorXd& y) {
  double s = 0.0;
  for (Index i = 0; i < f.size(); ++i) s += Softplus(f(i)) - y(i) * f(i);
  return s / static_cast<double>(f.size());
}

// Penalized logistic regression by Newton's method with step halving.
// `penalty` holds one ridge weight per column of `x`.
VectorXd FitLogisticNewton(const MatrixXd& x, const VectorXd& y,
                           const VectorXd& penalty) {
  const Index p = x.cols();
  VectorXd beta = VectorXd::Zero(p);
  auto objective = [&](const VectorXd& b) {
    VectorXd eta = x * b;
    double s = 0.0;
    for (Index i = 0; i < eta.size(); ++i) s += Softplus(eta(i)) - y(i) * eta(i);
    return s + 0.5 * (penalty.array() * b.array().square()).sum();
  };
  double obj = objective(beta);
  for (int it = 0; it < 200; ++it) {
    VectorXd eta = x * beta;
    VectorXd mu = eta.unaryExpr([](double z) { return Sigmoid(z); });
    VectorXd w = mu.array() * (1.0 - mu.array());
    VectorXd grad = x.transpose() * (y - mu) - penalty.cwiseProduct(beta);
    MatrixXd h = x.transpose() * w.asDiagonal() * x;
    h.diagonal() += penalty;
    h.diagonal().array() += 1e-10;
    VectorXd step = h.ldlt().solve(grad);
    double scale = 1.0;
    VectorXd next = beta + step;
    double next_obj = objective(next);
    while (next_obj > obj && scale > 1e-10) {
      scale *= 0.5;
      next = beta + scale * step;
      next_obj = objective(next);
    }
    if (next_obj > obj) break;
    beta = next;
    obj = next_obj;
    if ((scale * step).cwiseAbs().maxCoeff() < 1e-10) break;
  }
  return beta;
}

void TrainLogistic(const MatrixXd& x, const VectorXd& y, BaselineModel* m) {
  const Index n = x.rows(), p = x.cols();
  MatrixXd xa(n, p + 1);
  xa.leftCols(p) = x;
  xa.col(p).setOnes();
  VectorXd pen = VectorXd::Constant(p + 1, m->params.l2);
  pen(p) = 0.0;
  VectorXd beta = FitLogisticNewton(xa, y, pen);
  m->weights = beta.head(p);
  m->bias = beta(p);
}

void TrainSvm(const MatrixXd& x, const VectorXd& y, BaselineModel* m) {
  const Index n = x.rows(), p = x.cols();
  const double lambda = m->params.l2 / static_cast<double>(n);
  VectorXd w = VectorXd::Zero(p), w_avg = VectorXd::Zero(p);
  double b = 0.0, b_avg = 0.0;
  int64_t averaged = 0;
  std::mt19937_64 rng(m->params.seed);
  std::vector<Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  int64_t t = 0;
  for (int epoch = 0; epoch < m->params.svm_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (Index i : order) {
      ++t;
      const double eta = 0.1 / std::sqrt(static_cast<double>(t));
      const double s = y(i) > 0.5 ? 1.0 : -1.0;
      const double margin = s * (x.row(i).dot(w) + b);
      w *= (1.0 - eta * lambda);
      if (margin < 1.0) {
        w += eta * s * x.row(i).transpose();
        b += eta * s;
      }
      if (epoch >= m->params.svm_epochs / 2) {
        ++averaged;
        const double k = 1.0 / static_cast<double>(averaged);
        w_avg += k * (w - w_avg);
        b_avg += k * (b - b_avg);
      }
    }
  }
  m->weights = w_avg;
  m->bias = b_avg;

  // Platt scaling with smoothed targets.
  VectorXd margin = x * m->weights;
  margin.array() += m->bias;
  const double pos = y.sum();
  const double neg = static_cast<double>(n) - pos;
  const double hi = (pos + 1.0) / (pos + 2.0);
  const double lo = 1.0 / (neg + 2.0);
  VectorXd target = y.unaryExpr([&](double v) { return v > 0.5 ? hi : lo; });
  MatrixXd design(n, 2);
  design.col(0) = margin;
  design.col(1).setOnes();
  VectorXd ab = FitLogisticNewton(design, target, VectorXd::Constant(2, 1e-8));
  m->platt_a = ab(0);
  m->platt_b = ab(1);
}

void TrainForest(const MatrixXd& x, const VectorXd& y, BaselineModel* m) {
  const Index n = x.rows();
  const auto p = static_cast<int>(x.cols());
  const int mtry = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(p))));
  std::mt19937_64 rng(m->params.seed);
  std::uniform_int_distribution<Index> draw(0, n - 1);
  m->trees.reserve(static_cast<size_t>(m->params.trees));
  for (int t = 0; t < m->params.trees; ++t) {
    std::vector<Index> rows(static_cast<size_t>(n));
    for (auto& r : rows) r = draw(rng);
    m->trees.push_back(
        FitRegressionTree(x, y, rows, m->params.forest_depth, mtry, rng()));
  }
}

void TrainBoosting(const MatrixXd& x, const VectorXd& y, BaselineModel* m) {
  const Index n = x.rows();
  const double mean = y.mean();
  m->base_score = std::log(mean / (1.0 - mean));
  VectorXd f = VectorXd::Constant(n, m->base_score);
  double loss = MeanLogisticLoss(f, y);
  m->train_loss.push_back(loss);
  std::vector<Index> all(static_cast<size_t>(n));
  std::iota(all.begin(), all.end(), Index{0});
  std::mt19937_64 rng(m->params.seed);
  for (int round = 0; round < m->params.rounds; ++round) {
    VectorXd prob = f.unaryExpr([](double z) { return Sigmoid(z); });
    VectorXd resid = y - prob;
    RegressionTree tree = FitRegressionTree(x, resid, all, m->params.boost_depth,
                                            static_cast<int>(x.cols()), rng());
    std::vector<int> leaf(static_cast<size_t>(n));
    std::vector<double> num(tree.nodes.size(), 0.0), den(tree.nodes.size(), 0.0);
    for (Index i = 0; i < n; ++i) {
      const int l = LeafIndex(tree, x.row(i));
      leaf[static_cast<size_t>(i)] = l;
      num[static_cast<size_t>(l)] += resid(i);
      den[static_cast<size_t>(l)] += prob(i) * (1.0 - prob(i));
    }
    for (size_t k = 0; k < tree.nodes.size(); ++k) {
      if (tree.nodes[k].feature < 0) {
        tree.nodes[k].value =
            m->params.shrinkage * num[k] / std::max(den[k], 1e-12);
      }
    }
    VectorXd next(n);
    double next_loss = 0.0;
    for (int halving = 0; halving <= 40; ++halving) {
      for (Index i = 0; i < n; ++i) {
        next(i) = f(i) + tree.nodes[static_cast<size_t>(leaf[static_cast<size_t>(i)])].value;
      }
      next_loss = MeanLogisticLoss(next, y);
      if (next_loss <= loss) break;
      for (auto& node : tree.nodes) node.value *= halving < 40 ? 0.5 : 0.0;
    }
    if (next_loss > loss) {
      for (auto& node : tree.nodes) node.value = 0.0;
      next = f;
      next_loss = loss;
    }
    f = next;
    loss = next_loss;
    m->train_loss.push_back(loss);
    m->trees.push_back(std::move(tree));
  }
}

}  // namespace

const char* BaselineKindName(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kLogistic:
      return "logistic";
    case BaselineKind::kLinearSvm:
      return "linear_svm";
    case BaselineKind::kKnn:
      return "knn";
    case BaselineKind::kRandomForest:
      return "random_forest";
    case BaselineKind::kGradientBoosting:
      return "gradient_boosting";
  }
  return "?";
}

BaselineKind ParseBaselineKind(const std::string& name) {
  for (auto kind : {BaselineKind::kLogistic, BaselineKind::kLinearSvm,
                    BaselineKind::kKnn, BaselineKind::kRandomForest,
                    BaselineKind::kGradientBoosting}) {
    if (name == BaselineKindName(kind)) return kind;
  }
  throw InvalidArgument("unknown baseline '" + name + "'");
}

void BaselineParams::Validate() const {
  if (!(l2 > 0.0)) throw InvalidArgument("baseline: l2 must be > 0");
  if (svm_epochs < 1) throw InvalidArgument("baseline: svm_epochs must be >= 1");
  if (k < 1) throw InvalidArgument("baseline: k must be >= 1");
  if (trees < 1) throw InvalidArgument("baseline: trees must be >= 1");
  if (forest_depth < 1) throw InvalidArgument("baseline: forest_depth must be >= 1");
  if (rounds < 1) throw InvalidArgument("baseline: rounds must be >= 1");
  if (!(shrinkage > 0.0)) throw InvalidArgument("baseline: shrinkage must be > 0");
  if (boost_depth < 1) throw InvalidArgument("baseline: boost_depth must be >= 1");
}

double RegressionTree::Predict(
    const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  return nodes[static_cast<size_t>(LeafIndex(*this, x))].value;
}

RegressionTree FitRegressionTree(const MatrixXd& x, const VectorXd& target,
                                 const std::vector<Index>& rows, int max_depth,
                                 int mtry, uint64_t rng_seed) {
  if (rows.empty()) throw InvalidArgument("regression tree needs rows");
  TreeBuilder builder(x, target, max_depth, std::max(1, mtry), rng_seed);
  builder.Build(rows, 0);
  return RegressionTree{builder.Release()};
}

BaselineModel TrainBaseline(const BaselineParams& params, const MatrixXd& x,
                            const VectorXd& y) {
  params.Validate();
  if (x.rows() != y.size() || x.rows() == 0) {
    throw InvalidArgument("baseline: design and labels differ in length");
  }
  if (!x.allFinite()) throw InvalidArgument("baseline: non-finite design");
  CheckLabels(y);
  BaselineModel m;
  m.params = params;
  m.n_features = static_cast<int>(x.cols());
  switch (params.kind) {
    case BaselineKind::kLogistic:
      TrainLogistic(x, y, &m);
      break;
    case BaselineKind::kLinearSvm:
      TrainSvm(x, y, &m);
      break;
    case BaselineKind::kKnn:
      m.train_x = x;
      m.train_y = y;
      break;
    case BaselineKind::kRandomForest:
      TrainForest(x, y, &m);
      break;
    case BaselineKind::kGradientBoosting:
      TrainBoosting(x, y, &m);
      break;
  }
  return m;
}

VectorXd PredictBaseline(const BaselineModel& model, const MatrixXd& x) {
  if (x.cols() != model.n_features) {
    throw InvalidArgument("baseline expects " +
                          std::to_string(model.n_features) + " columns, got " +
                          std::to_string(x.cols()));
  }
  const Index n = x.rows();
  VectorXd out(n);
  switch (model.params.kind) {
    case BaselineKind::kLogistic: {
      VectorXd eta = x * model.weights;
      for (Index i = 0; i < n; ++i) out(i) = Sigmoid(eta(i) + model.bias);
      break;
    }
    case BaselineKind::kLinearSvm: {
      VectorXd margin = x * model.weights;
      for (Index i = 0; i < n; ++i) {
        out(i) = Sigmoid(model.platt_a * (margin(i) + model.bias) +
                         model.platt_b);
      }
      break;
    }
    case BaselineKind::kKnn: {
      const Index m = model.train_x.rows();
      const Index k = std::min<Index>(model.params.k, m);
      std::vector<std::pair<double, Index>> dist(static_cast<size_t>(m));
      for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < m; ++j) {
          dist[static_cast<size_t>(j)] = {
              (model.train_x.row(j) - x.row(i)).squaredNorm(), j};
        }
        std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
        double pos = 0.0;
        for (Index j = 0; j < k; ++j) {
          pos += model.train_y(dist[static_cast<size_t>(j)].second);
        }
        out(i) = pos / static_cast<double>(k);
      }
      break;
    }
    case BaselineKind::kRandomForest: {
      for (Index i = 0; i < n; ++i) {
        double votes = 0.0;
        for (const auto& t : model.trees) {
          const double v = t.Predict(x.row(i));
          votes += v > 0.5 ? 1.0 : (v == 0.5 ? 0.5 : 0.0);
        }
        out(i) = votes / static_cast<double>(model.trees.size());
      }
      break;
    }
    case BaselineKind::kGradientBoosting: {
      for (Index i = 0; i < n; ++i) {
        double f = model.base_score;
        for (const auto& t : model.trees) f += t.Predict(x.row(i));
        out(i) = Sigmoid(f);
      }
      break;
    }
  }
  return out;
}

double LogLoss(const VectorXd& probs, const VectorXd& labels) {
  if (probs.size() != labels.size() || probs.size() == 0) {
    throw InvalidArgument("log-loss: probabilities and labels differ in length");
  }
  double s = 0.0;
  for (Index i = 0; i < probs.size(); ++i) {
    const double p = std::clamp(probs(i), 1e-15, 1.0 - 1e-15);
    s -= labels(i) * std::log(p) + (1.0 - labels(i)) * std::log(1.0 - p);
  }
  return s / static_cast<double>(probs.size());
}

EnsembleWeights GreedyEnsemble(const std::vector<VectorXd>& val_probs,
                               const VectorXd& labels, int max_rounds,
                               int patience) {
  if (val_probs.empty()) throw InvalidArgument("ensemble needs candidates");
  if (max_rounds < 1) throw InvalidArgument("ensemble: max_rounds must be >= 1");
  for (const auto& p : val_probs) {
    if (p.size() != labels.size()) {
      throw InvalidArgument("ensemble: candidate length differs from labels");
    }
  }
  const size_t m = val_probs.size();
  size_t first = 0;
  double first_loss = std::numeric_limits<double>::infinity();
  for (size_t c = 0; c < m; ++c) {
    const double l = LogLoss(val_probs[c], labels);
    if (l < first_loss) {
      first_loss = l;
      first = c;
    }
  }
  std::vector<int> counts(m, 0);
  counts[first] = 1;
  std::vector<int> selections{static_cast<int>(first)};
  VectorXd sum = val_probs[first];
  double best_loss = first_loss;
  size_t best_prefix = 1;
  int stale = 0;
  for (int round = 1; round < max_rounds; ++round) {
    const double k = static_cast<double>(selections.size() + 1);
    size_t pick = 0;
    double pick_loss = std::numeric_limits<double>::infinity();
    for (size_t c = 0; c < m; ++c) {
      const double l = LogLoss((sum + val_probs[c]) / k, labels);
      if (l < pick_loss) {
        pick_loss = l;
        pick = c;
      }
    }
    sum += val_probs[pick];
    selections.push_back(static_cast<int>(pick));
    if (pick_loss < best_loss) {
      best_loss = pick_loss;
      best_prefix = selections.size();
      stale = 0;
    } else if (++stale >= patience) {
      break;
    }
  }
  selections.resize(best_prefix);
  EnsembleWeights out;
  out.weights.assign(m, 0.0);
  for (int s : selections) out.weights[static_cast<size_t>(s)] += 1.0;
  for (double& w : out.weights) w /= static_cast<double>(best_prefix);
  out.selections = std::move(selections);
  out.val_log_loss = best_loss;
  return out;
}

VectorXd BlendPredictions(const std::vector<VectorXd>& probs,
                          const std::vector<double>& weights) {
  if (probs.empty() || probs.size() != weights.size()) {
    throw InvalidArgument("blend: one weight per candidate required");
  }
  VectorXd out = VectorXd::Zero(probs[0].size());
  for (size_t c = 0; c < probs.size(); ++c) {
    if (probs[c].size() != out.size()) {
      throw InvalidArgument("blend: candidates differ in length");
    }
    out += weights[c] * probs[c];
  }
  return out;
}

}  // namespace ohc
