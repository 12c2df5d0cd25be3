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

// Model-agnostic Shapley attributions over tabular features and
// leave-one-out token scores for text.
//
// The value of a coalition S for instance x is the mean model output over the
// background rows with the features in S overwritten by x's values.

#ifndef OHC_EXPLAIN_H_
#define OHC_EXPLAIN_H_

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace ohc {

// Maps rows of features to one model output per row.
using BatchPredictFn = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;

struct Attribution {
  double base_value = 0.0;  // mean output over the background
  Eigen::VectorXd phi;
  Eigen::VectorXd phi_stderr;  // sampled mode only
  double prediction = 0.0;
  Eigen::VectorXd feature_values;
};

inline constexpr int kMaxExactFeatures = 15;

// Enumerates all 2^F coalitions. Throws for F > kMaxExactFeatures (use
// ShapSampled) or an empty background.
Attribution ShapExact(const BatchPredictFn& predict,
                      const Eigen::MatrixXd& background,
                      const Eigen::VectorXd& x);

// Permutation sampling: each sample draws a feature order and a background
// row and credits every feature with its marginal change along the path from
// the background row to x. Requires n_samples >= F.
Attribution ShapSampled(const BatchPredictFn& predict,
                        const Eigen::MatrixXd& background,
                        const Eigen::VectorXd& x, int n_samples, uint64_t seed);

struct GlobalSummary {
  std::vector<std::string> features;
  Eigen::VectorXd mean_abs_phi;
  // Pearson correlation of feature value with phi; 0 when either is constant.
  Eigen::VectorXd direction;
  // Feature indices by descending mean |phi|; ties keep column order.
  std::vector<int> ranking;
};

GlobalSummary Summarize(const std::vector<Attribution>& attributions,
                        const std::vector<std::string>& features);

// "feature,instance,value,phi" with one row per (instance, feature).
void WriteBeeswarmCsv(std::ostream& out,
                      const std::vector<Attribution>& attributions,
                      const std::vector<std::string>& features,
                      const std::vector<std::string>& instance_ids);

// "rank,feature,mean_abs_phi,direction".
void WriteImportanceCsv(std::ostream& out, const GlobalSummary& summary);

struct TokenScore {
  std::string token;
  double score = 0.0;
  bool operator==(const TokenScore&) const = default;
};

// Scores a batch of texts with all other model inputs held fixed.
using TextPredictFn =
    std::function<Eigen::VectorXd(const std::vector<std::string>& texts)>;

// Whitespace tokens; score = output(full text) - output(text without the
// token), the remainder rejoined with single spaces.
std::vector<TokenScore> LeaveOneOutTokens(const TextPredictFn& predict,
                                          const std::string& text);

// Positive scores shaded red, negative blue, opacity by |score|.
std::string RenderTokenHtml(const std::vector<TokenScore>& tokens);

// {"base_value", "prediction", "features": [...], "tokens": [...]}.
std::string LocalExplanationJson(const Attribution& attribution,
                                 const std::vector<std::string>& features,
                                 const std::vector<TokenScore>& tokens);

}  // namespace ohc

#endif  // OHC_EXPLAIN_H_
