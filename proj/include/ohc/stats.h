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

// Binary GLMs, collinearity diagnostics and the matched helpfulness analysis.

#ifndef OHC_STATS_H_
#define OHC_STATS_H_

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "ohc/corpus.h"
#include "ohc/features.h"

namespace ohc {

enum class Link { kLogit, kProbit };
const char* LinkName(Link link);
Link ParseLink(const std::string& name);

struct RegressionResult {
  Link link = Link::kLogit;
  bool robust = false;
  std::vector<std::string> names;
  Eigen::VectorXd coef;
  Eigen::VectorXd se_classical;
  Eigen::VectorXd se_robust;
  Eigen::VectorXd z;        // from the reported errors
  Eigen::VectorXd p_value;  // two-sided, normal reference
  Eigen::VectorXd odds_ratio;  // exp(coef); logit only
  double log_likelihood = 0.0;
  double null_log_likelihood = 0.0;
  double pseudo_r2 = 0.0;  // McFadden
  double lr_chi2 = 0.0;
  int lr_df = 0;
  int64_t n = 0;
  int iterations = 0;

  // The errors used for z and p: robust when requested, else classical.
  const Eigen::VectorXd& se() const { return robust ? se_robust : se_classical; }
};

// Maximum likelihood by Newton-Raphson with the exact Hessian. `x` carries
// its own intercept column. Robust errors use the Huber-White sandwich with
// an n/(n-1) small-sample factor.
//
// Throws RankDeficientError naming the first column that is a linear
// combination of earlier ones (constant columns are checked first, the
// last one ahead of the rest), and SeparationError when fitted probabilities
// reach 0 or 1 numerically.
RegressionResult FitGlmBinary(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                              const std::vector<std::string>& names, Link link,
                              bool robust);

// Table with Coef. (with significance stars), SE, z, P>|z| and, for logit,
// Odds Ratio, followed by a footer of fit statistics.
std::string FormatRegressionTable(const RegressionResult& result);
std::string RegressionJson(const RegressionResult& result);
// "***" for p < 0.001, "**" for p < 0.01, "*" for p < 0.05.
std::string SignificanceStars(double p);

// VIF_j = 1 / (1 - R^2_j), R^2_j from OLS of column j on the other columns
// plus an intercept. Needs >= 2 non-constant columns; an exactly collinear
// column throws RankDeficientError naming it.
Eigen::VectorXd Vif(const Eigen::MatrixXd& x,
                    const std::vector<std::string>& names);
std::string FormatVifTable(const Eigen::VectorXd& vif,
                           const std::vector<std::string>& names);

// Regressor sets for the ISSQ and ISR determinant models.
std::vector<std::string> DeterminantRegressors(Task task);

struct MatchRecord {
  std::string condition;
  size_t char_length = 0;
  bool helpful = false;
};

// Interior cut points at the k/bins quantiles (nearest rank) of `lengths`.
std::vector<double> QuantileEdges(std::vector<size_t> lengths, int bins);
// Number of edges strictly below `length`.
int LengthBin(size_t length, const std::vector<double>& edges);

struct MatchResult {
  std::vector<size_t> kept;  // indices into the input, ascending
  std::vector<std::string> warnings;
};

// Within each (condition, length bin) cell keeps every helpful row and an
// equally sized seeded sample of the non-helpful rows (all of them when there
// are fewer). Short cells produce warnings, not errors.
MatchResult MatchedUndersample(const std::vector<MatchRecord>& records,
                               const std::vector<double>& edges, uint64_t seed);

struct HelpfulnessOptions {
  int bins = 10;
  bool one_hot_condition = false;
  Link link = Link::kLogit;
  bool robust = true;
  uint64_t seed = 0;
};

struct HelpfulnessReport {
  RegressionResult regression;
  MatchResult match;
  std::vector<double> edges;
  size_t candidates = 0;  // pairs with a helpful flag
};

// HELPFUL ~ ISR + R_LEN (characters) + M_CONDITION + R_PWRC + Q_MED_EXPERT
// on the matched sample. `isr` holds one 0/1 indicator per corpus pair.
HelpfulnessReport HelpfulnessAnalysis(const Corpus& corpus,
                                      const std::vector<int>& isr,
                                      const HelpfulnessOptions& options);

}  // namespace ohc

#endif  // OHC_STATS_H_
