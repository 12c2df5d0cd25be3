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

#include "ohc/eval.h"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "ohc/errors.h"

namespace ohc {

using Eigen::Index;

double RankAuc(const Eigen::VectorXd& probs, const Eigen::VectorXd& labels) {
  if (probs.size() != labels.size()) {
    throw InvalidArgument("AUC: probabilities and labels differ in length");
  }
  const Index n = probs.size();
  std::vector<Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(),
            [&](Index a, Index b) { return probs(a) < probs(b); });
  double pos_rank_sum = 0.0;
  double n_pos = 0.0;
  for (Index i = 0; i < n;) {
    Index j = i;
    while (j < n && probs(order[static_cast<size_t>(j)]) ==
                        probs(order[static_cast<size_t>(i)])) {
      ++j;
    }
    // Ranks i+1 .. j share their average.
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (Index k = i; k < j; ++k) {
      if (labels(order[static_cast<size_t>(k)]) > 0.5) {
        pos_rank_sum += rank;
        n_pos += 1.0;
      }
    }
    i = j;
  }
  const double n_neg = static_cast<double>(n) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0) {
    throw InvalidArgument("AUC is undefined for single-class labels");
  }
  return (pos_rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

MetricsReport ComputeMetrics(const Eigen::VectorXd& probs,
                             const Eigen::VectorXd& labels, double threshold) {
  if (probs.size() != labels.size() || probs.size() == 0) {
    throw InvalidArgument("metrics: probabilities and labels differ in length");
  }
  MetricsReport r;
  r.threshold = threshold;
  for (Index i = 0; i < probs.size(); ++i) {
    if (labels(i) != 0.0 && labels(i) != 1.0) {
      throw InvalidArgument("metrics: labels must be 0 or 1");
    }
    const bool pred = probs(i) >= threshold;
    const bool truth = labels(i) > 0.5;
    if (pred && truth) ++r.confusion.tp;
    if (pred && !truth) ++r.confusion.fp;
    if (!pred && !truth) ++r.confusion.tn;
    if (!pred && truth) ++r.confusion.fn;
  }
  r.auc = RankAuc(probs, labels);
  const auto& c = r.confusion;
  r.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  r.precision = c.tp + c.fp > 0
                    ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp)
                    : 0.0;
  r.recall = c.tp + c.fn > 0
                 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn)
                 : 0.0;
  r.f1 = r.precision + r.recall > 0.0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  return r;
}

void WriteMetricsCsvHeader(std::ostream& out) {
  out << "name,ACC,AUC,F1,Precision,Recall\n";
}

void WriteMetricsCsvRow(std::ostream& out, const std::string& name,
                        const MetricsReport& r) {
  std::ostringstream row;
  row.precision(6);
  row << std::fixed << name << ',' << r.accuracy << ',' << r.auc << ',' << r.f1
      << ',' << r.precision << ',' << r.recall << '\n';
  out << row.str();
}

std::string ConfusionJson(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["threshold"] = r.threshold;
  j["tp"] = r.confusion.tp;
  j["fp"] = r.confusion.fp;
  j["tn"] = r.confusion.tn;
  j["fn"] = r.confusion.fn;
  return j.dump(2);
}

std::vector<AblationSpec> StandardAblations() {
  std::vector<AblationSpec> out;
  for (const char* name : {"full", "text_only", "no_emotion", "no_user",
                           "no_numeric", "no_post"}) {
    out.push_back(ParseAblation(name));
  }
  return out;
}

AblationSpec ParseAblation(const std::string& name) {
  std::set<FeatureGroup> all = AllFeatureGroups();
  auto without = [&](FeatureGroup g) {
    std::set<FeatureGroup> s = all;
    s.erase(g);
    return s;
  };
  if (name == "full") return {name, all};
  if (name == "text_only") return {name, {FeatureGroup::kText}};
  if (name == "no_emotion") return {name, without(FeatureGroup::kEmotions)};
  if (name == "no_user") return {name, without(FeatureGroup::kUser)};
  if (name == "no_numeric") return {name, without(FeatureGroup::kNumericText)};
  if (name == "no_post") return {name, without(FeatureGroup::kPost)};
  throw InvalidArgument("unknown ablation row '" + name + "'");
}

std::vector<AblationResult> RunAblation(
    const Corpus& train, const Corpus& val, const Corpus& test,
    const EmotionSource& emotions, const std::vector<AblationSpec>& specs,
    const FeaturizerOptions& base, const FusionConfig& fusion,
    const TrainConfig& train_cfg, const EmbeddingFile* embeddings) {
  std::vector<AblationResult> out;
  for (const auto& spec : specs) {
    if (spec.groups.empty()) {
      throw InvalidArgument("ablation row '" + spec.name + "' has no groups");
    }
    FeaturizerOptions opts = base;
    opts.groups = spec.groups;
    PipelineRun run = TrainPipeline(train, val, emotions, opts, fusion,
                                    train_cfg, embeddings);
    out.push_back({spec.name,
                   TransferEvaluate(run.pipeline, test, emotions, embeddings),
                   std::move(run.history)});
  }
  return out;
}

MetricsReport TransferEvaluate(const TrainedPipeline& pipeline,
                               const Corpus& target,
                               const EmotionSource& emotions,
                               const EmbeddingFile* embeddings) {
  Corpus labeled = TaskCorpus(target, pipeline.featurizer.options().task);
  if (labeled.empty()) throw InvalidArgument("target has no labeled pairs");
  Dataset ds = pipeline.featurizer.Transform(labeled, emotions, true, embeddings);
  return ComputeMetrics(Predict(pipeline.model, ds.batch), ds.labels);
}

}  // namespace ohc
