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

#include "ohc/stats.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ohc/errors.h"
#include "ohc/synthetic.h"

namespace ohc {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Expands a 2x2 table into rows of (x, 1) with 0/1 responses.
void TableDesign(int x1_y1, int x1_y0, int x0_y1, int x0_y0, MatrixXd* x,
                 VectorXd* y) {
  const int n = x1_y1 + x1_y0 + x0_y1 + x0_y0;
  x->resize(n, 2);
  y->resize(n);
  int r = 0;
  auto add = [&](int count, double xv, double yv) {
    for (int i = 0; i < count; ++i, ++r) {
      (*x)(r, 0) = xv;
      (*x)(r, 1) = 1.0;
      (*y)(r) = yv;
    }
  };
  add(x1_y1, 1, 1);
  add(x1_y0, 1, 0);
  add(x0_y1, 0, 1);
  add(x0_y0, 0, 0);
}

// Inverse standard normal CDF by bisection on erfc.
double NormalQuantile(double p) {
  double lo = -10, hi = 10;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (0.5 * std::erfc(-mid / std::sqrt(2.0)) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

TEST(GlmTest, TwoByTwoTableMatchesClosedForm) {
  MatrixXd x;
  VectorXd y;
  TableDesign(1246, 1032, 353, 436, &x, &y);
  const RegressionResult r =
      FitGlmBinary(x, y, {"ISR", "Intercept"}, Link::kLogit, false);
  // Rows ISR, columns HELPFUL: (1,1) 1246, (1,0) 1032, (0,1) 353, (0,0) 436.
  const double log_or = std::log((1246.0 * 436.0) / (1032.0 * 353.0));
  EXPECT_NEAR(r.coef(0), log_or, 1e-8);
  EXPECT_NEAR(r.coef(0), 0.3996, 1e-3);
  EXPECT_NEAR(r.coef(1), std::log(353.0 / 436.0), 1e-8);
  // Woolf standard error of a log odds ratio.
  EXPECT_NEAR(r.se_classical(0),
              std::sqrt(1 / 436.0 + 1 / 353.0 + 1 / 1032.0 + 1 / 1246.0), 1e-8);
  EXPECT_NEAR(r.odds_ratio(0), std::exp(r.coef(0)), 1e-12);
  EXPECT_EQ(r.n, 3067);
  EXPECT_EQ(r.lr_df, 1);
}

TEST(GlmTest, ProbitOnSaturatedTableMatchesQuantiles) {
  MatrixXd x;
  VectorXd y;
  TableDesign(1246, 1032, 353, 436, &x, &y);
  const RegressionResult r =
      FitGlmBinary(x, y, {"ISR", "Intercept"}, Link::kProbit, false);
  const double q1 = NormalQuantile(1246.0 / 2278.0);
  const double q0 = NormalQuantile(353.0 / 789.0);
  EXPECT_NEAR(r.coef(1), q0, 1e-7);
  EXPECT_NEAR(r.coef(0), q1 - q0, 1e-7);
  EXPECT_EQ(r.odds_ratio.size(), 0);
}

TEST(GlmTest, BalancedInterceptOnlyFitIsZero) {
  MatrixXd x = MatrixXd::Ones(10, 1);
  VectorXd y(10);
  y << 1, 0, 1, 0, 1, 0, 1, 0, 1, 0;
  const RegressionResult r =
      FitGlmBinary(x, y, {"Intercept"}, Link::kLogit, true);
  EXPECT_NEAR(r.coef(0), 0.0, 1e-12);
  EXPECT_NEAR(r.log_likelihood, 10 * std::log(0.5), 1e-12);
  EXPECT_NEAR(r.lr_chi2, 0.0, 1e-12);
  EXPECT_EQ(r.lr_df, 0);
}

// Draws n rows from a logit model with two normal regressors.
void Simulate(int n, const VectorXd& beta, Link link, uint64_t seed, MatrixXd* x,
              VectorXd* y) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u;
  x->resize(n, 3);
  y->resize(n);
  for (int i = 0; i < n; ++i) {
    (*x)(i, 0) = g(rng);
    (*x)(i, 1) = g(rng);
    (*x)(i, 2) = 1.0;
    const double eta = x->row(i).dot(beta);
    const double p = link == Link::kLogit
                         ? 1.0 / (1.0 + std::exp(-eta))
                         : 0.5 * std::erfc(-eta / std::sqrt(2.0));
    (*y)(i) = u(rng) < p ? 1.0 : 0.0;
  }
}

TEST(GlmTest, RobustErrorsApproachClassicalUnderCorrectModel) {
  MatrixXd x;
  VectorXd y;
  const VectorXd beta = (VectorXd(3) << 0.8, -0.5, 0.2).finished();
  Simulate(5000, beta, Link::kLogit, 3, &x, &y);
  const RegressionResult r =
      FitGlmBinary(x, y, {"a", "b", "Intercept"}, Link::kLogit, true);
  for (int j = 0; j < 3; ++j) {
    EXPECT_NEAR(r.se_robust(j) / r.se_classical(j), 1.0, 0.1) << j;
    EXPECT_NEAR(r.coef(j), beta(j), 4 * r.se_robust(j)) << j;
  }
  EXPECT_EQ(r.se().data(), r.se_robust.data());
  EXPECT_NEAR(r.z(0), r.coef(0) / r.se_robust(0), 1e-12);
}

TEST(GlmTest, ProbitAndLogitAgreeInSign) {
  MatrixXd x;
  VectorXd y;
  const VectorXd beta = (VectorXd(3) << 0.6, -0.4, 0.1).finished();
  Simulate(2000, beta, Link::kLogit, 5, &x, &y);
  const auto logit = FitGlmBinary(x, y, {"a", "b", "c"}, Link::kLogit, true);
  const auto probit = FitGlmBinary(x, y, {"a", "b", "c"}, Link::kProbit, true);
  EXPECT_GT(logit.coef(0) * probit.coef(0), 0.0);
  EXPECT_GT(logit.coef(1) * probit.coef(1), 0.0);
  // The usual scale factor between the two links sits near 1.6-1.8.
  EXPECT_NEAR(logit.coef(0) / probit.coef(0), 1.7, 0.2);
}

TEST(GlmTest, RankDeficiencyNamesColumn) {
  MatrixXd x(6, 3);
  x << 1, 2, 1,  //
      2, 4, 1,   //
      3, 6, 1,   //
      4, 8, 1,   //
      5, 10, 1,  //
      6, 12, 1;
  const VectorXd y = (VectorXd(6) << 0, 1, 0, 1, 1, 0).finished();
  try {
    FitGlmBinary(x, y, {"a", "twice_a", "Intercept"}, Link::kLogit, false);
    FAIL() << "expected RankDeficientError";
  } catch (const RankDeficientError& e) {
    EXPECT_EQ(e.column(), "twice_a");
  }
  x.col(0).setConstant(1.0);
  try {
    FitGlmBinary(x, y, {"flag", "twice_a", "Intercept"}, Link::kLogit, false);
    FAIL() << "expected RankDeficientError";
  } catch (const RankDeficientError& e) {
    EXPECT_EQ(e.column(), "flag");
  }
}

TEST(GlmTest, SeparationIsReported) {
  MatrixXd x(8, 2);
  VectorXd y(8);
  for (int i = 0; i < 8; ++i) {
    x(i, 0) = i;
    x(i, 1) = 1.0;
    y(i) = i >= 4 ? 1.0 : 0.0;
  }
  EXPECT_THROW(FitGlmBinary(x, y, {"a", "c"}, Link::kLogit, false),
               SeparationError);
  EXPECT_THROW(FitGlmBinary(x, y, {"a", "c"}, Link::kProbit, false),
               SeparationError);
  EXPECT_THROW(
      FitGlmBinary(x, VectorXd::Ones(8), {"a", "c"}, Link::kLogit, false),
      SeparationError);
}

TEST(GlmTest, RejectsBadInput) {
  const MatrixXd x = MatrixXd::Ones(4, 1);
  EXPECT_THROW(FitGlmBinary(x, VectorXd::Zero(3), {"c"}, Link::kLogit, false),
               InvalidArgument);
  EXPECT_THROW(FitGlmBinary(x, VectorXd::Constant(4, 2.0), {"c"}, Link::kLogit,
                            false),
               InvalidArgument);
  EXPECT_THROW(FitGlmBinary(x, VectorXd::Zero(4), {}, Link::kLogit, false),
               InvalidArgument);
  EXPECT_THROW(ParseLink("cloglog"), InvalidArgument);
  EXPECT_EQ(ParseLink("probit"), Link::kProbit);
}

TEST(RegressionTableTest, ContainsColumnsAndFooter) {
  MatrixXd x;
  VectorXd y;
  TableDesign(1246, 1032, 353, 436, &x, &y);
  const auto logit =
      FitGlmBinary(x, y, {"ISR", "Intercept"}, Link::kLogit, true);
  const std::string table = FormatRegressionTable(logit);
  for (const char* field : {"Coef.", "Odds Ratio", "P>|z|", "Number of Obs.",
                            "Log Likelihood", "Chi2(1)", "Pseudo R2", "ISR"}) {
    EXPECT_NE(table.find(field), std::string::npos) << field;
  }
  EXPECT_NE(table.find("0.3996***"), std::string::npos);
  const auto probit =
      FitGlmBinary(x, y, {"ISR", "Intercept"}, Link::kProbit, true);
  EXPECT_EQ(FormatRegressionTable(probit).find("Odds Ratio"), std::string::npos);
  EXPECT_NE(RegressionJson(logit).find("\"ISR\""), std::string::npos);
}

TEST(SignificanceStarsTest, Thresholds) {
  EXPECT_EQ(SignificanceStars(0.0005), "***");
  EXPECT_EQ(SignificanceStars(0.005), "**");
  EXPECT_EQ(SignificanceStars(0.04), "*");
  EXPECT_EQ(SignificanceStars(0.05), "");
}

TEST(VifTest, OrthogonalDesignIsOne) {
  // Full 2^3 factorial: centered, mutually orthogonal columns.
  MatrixXd x(8, 3);
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 3; ++j) x(i, j) = (i >> j) & 1 ? 1.0 : -1.0;
  }
  const VectorXd vif = Vif(x, {"a", "b", "c"});
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(vif(j), 1.0, 1e-9);
}

TEST(VifTest, HalfExplainedColumnIsTwo) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  const int n = 500;
  MatrixXd raw(n, 2);
  for (int i = 0; i < n; ++i) raw.row(i) << g(rng), g(rng);
  // Center, orthogonalize and equalize norms so that x2 = x1 + z has sample
  // R^2 exactly one half on x1.
  raw.rowwise() -= raw.colwise().mean();
  VectorXd x1 = raw.col(0);
  VectorXd z = raw.col(1) - (raw.col(1).dot(x1) / x1.squaredNorm()) * x1;
  z *= x1.norm() / z.norm();
  MatrixXd x(n, 2);
  x.col(0) = x1;
  x.col(1) = x1 + z;
  const VectorXd vif = Vif(x, {"x1", "x2"});
  EXPECT_NEAR(vif(0), 2.0, 1e-9);
  EXPECT_NEAR(vif(1), 2.0, 1e-9);
  EXPECT_NE(FormatVifTable(vif, {"x1", "x2"}).find("x2"), std::string::npos);
}

TEST(VifTest, ErrorCases) {
  MatrixXd x(5, 2);
  x << 1, 2, 2, 4, 3, 6, 4, 8, 5, 10;
  EXPECT_THROW(Vif(x, {"a", "b"}), RankDeficientError);
  x.col(1).setConstant(3.0);
  EXPECT_THROW(Vif(x, {"a", "b"}), InvalidArgument);
  EXPECT_THROW(Vif(x.leftCols(1), {"a"}), InvalidArgument);
}

TEST(DeterminantRegressorsTest, Sizes) {
  EXPECT_EQ(DeterminantRegressors(Task::kIssq).size(), 9u);
  const auto isr = DeterminantRegressors(Task::kIsr);
  EXPECT_EQ(isr.size(), 13u);
  EXPECT_EQ(std::set<std::string>(isr.begin(), isr.end()).size(), isr.size());
}

TEST(QuantileEdgesTest, NearestRank) {
  const std::vector<size_t> lengths{10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  EXPECT_EQ(QuantileEdges(lengths, 4), (std::vector<double>{30, 50, 80}));
  EXPECT_TRUE(QuantileEdges(lengths, 1).empty());
  EXPECT_THROW(QuantileEdges(lengths, 0), InvalidArgument);
  EXPECT_THROW(QuantileEdges({}, 3), InvalidArgument);
  const std::vector<double> edges{30, 50, 80};
  EXPECT_EQ(LengthBin(30, edges), 0);
  EXPECT_EQ(LengthBin(31, edges), 1);
  EXPECT_EQ(LengthBin(1000, edges), 3);
}

TEST(MatchedUndersampleTest, BalancedCellUnchanged) {
  std::vector<MatchRecord> records;
  for (int i = 0; i < 6; ++i) records.push_back({"c", 10, i % 2 == 0});
  const MatchResult m = MatchedUndersample(records, {}, 1);
  EXPECT_EQ(m.kept.size(), 6u);
  EXPECT_TRUE(m.warnings.empty());
}

TEST(MatchedUndersampleTest, KeepsEqualCountsPerCell) {
  std::vector<MatchRecord> records;
  for (int i = 0; i < 5; ++i) records.push_back({"a", 10, true});
  for (int i = 0; i < 20; ++i) records.push_back({"a", 10, false});
  for (int i = 0; i < 3; ++i) records.push_back({"a", 100, true});
  for (int i = 0; i < 4; ++i) records.push_back({"a", 100, false});
  for (int i = 0; i < 2; ++i) records.push_back({"b", 10, false});
  const std::vector<double> edges{50};
  const MatchResult m = MatchedUndersample(records, edges, 2);
  int helpful_short = 0, other_short = 0, helpful_long = 0, other_long = 0;
  for (size_t k : m.kept) {
    const auto& r = records[k];
    ASSERT_EQ(r.condition, "a");
    if (r.char_length == 10) (r.helpful ? helpful_short : other_short)++;
    if (r.char_length == 100) (r.helpful ? helpful_long : other_long)++;
  }
  EXPECT_EQ(helpful_short, 5);
  EXPECT_EQ(other_short, 5);
  EXPECT_EQ(helpful_long, 3);
  EXPECT_EQ(other_long, 3);
  ASSERT_EQ(m.warnings.size(), 1u);  // the helpful-free "b" cell
  EXPECT_NE(m.warnings[0].find("(b, bin 0)"), std::string::npos);
  EXPECT_TRUE(std::is_sorted(m.kept.begin(), m.kept.end()));
  EXPECT_EQ(MatchedUndersample(records, edges, 2).kept, m.kept);
}

TEST(MatchedUndersampleTest, ShortCellKeepsEverythingWithWarning) {
  std::vector<MatchRecord> records{
      {"a", 1, true}, {"a", 1, true}, {"a", 1, true}, {"a", 1, false}};
  const MatchResult m = MatchedUndersample(records, {}, 0);
  EXPECT_EQ(m.kept.size(), 4u);
  ASSERT_EQ(m.warnings.size(), 1u);
}

TEST(MatchedUndersampleTest, PreservesLengthDistribution) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<size_t> len(50, 2000);
  std::vector<MatchRecord> records;
  std::vector<size_t> lengths;
  for (int i = 0; i < 4000; ++i) {
    const size_t l = len(rng);
    records.push_back({"c", l, i % 5 == 0});
    lengths.push_back(l);
  }
  const auto edges = QuantileEdges(lengths, 10);
  const MatchResult m = MatchedUndersample(records, edges, 9);
  std::vector<int> helpful(10, 0), other(10, 0);
  for (size_t k : m.kept) {
    const int bin = LengthBin(records[k].char_length, edges);
    (records[k].helpful ? helpful : other)[static_cast<size_t>(bin)]++;
  }
  for (int b = 0; b < 10; ++b) EXPECT_EQ(helpful[b], other[b]) << "bin " << b;
}

TEST(HelpfulnessAnalysisTest, ReportsRegressorsAndRecoversOddsRatio) {
  SyntheticHelpfulnessOptions options;
  options.seed = 1;
  const SyntheticHelpfulness data = GenerateHelpfulnessCorpus(options);
  const HelpfulnessReport report =
      HelpfulnessAnalysis(data.corpus, data.isr, HelpfulnessOptions{});
  const auto& names = report.regression.names;
  EXPECT_EQ(names, (std::vector<std::string>{"ISR", "R_LEN", "M_CONDITION",
                                             "R_PWRC", "Q_MED_EXPERT",
                                             "Intercept"}));
  EXPECT_EQ(report.candidates, data.corpus.size());
  EXPECT_EQ(report.edges.size(), 9u);
  EXPECT_GT(report.regression.odds_ratio(0), 1.1);
  EXPECT_LT(report.regression.odds_ratio(0), 1.6);
  EXPECT_LT(report.regression.p_value(0), 0.05);
  EXPECT_TRUE(report.regression.robust);
}

TEST(HelpfulnessAnalysisTest, OneHotConditionAndErrors) {
  SyntheticHelpfulnessOptions options;
  options.responses = 3000;
  options.seed = 2;
  SyntheticHelpfulness data = GenerateHelpfulnessCorpus(options);
  HelpfulnessOptions ho;
  ho.one_hot_condition = true;
  const auto report = HelpfulnessAnalysis(data.corpus, data.isr, ho);
  int levels = 0;
  for (const auto& n : report.regression.names) {
    if (n.rfind("M_CONDITION=", 0) == 0) ++levels;
  }
  EXPECT_EQ(levels, 3);

  std::vector<int> constant(data.isr.size(), 1);
  try {
    HelpfulnessAnalysis(data.corpus, constant, HelpfulnessOptions{});
    FAIL() << "expected RankDeficientError";
  } catch (const RankDeficientError& e) {
    EXPECT_EQ(e.column(), "ISR");
  }
  EXPECT_THROW(HelpfulnessAnalysis(data.corpus, {1, 0}, HelpfulnessOptions{}),
               InvalidArgument);
}

}  // namespace
}  // namespace ohc
