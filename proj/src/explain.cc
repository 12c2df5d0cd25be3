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

#include "ohc/explain.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "ohc/errors.h"

namespace ohc {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Rows evaluated per call to the predictor.
constexpr Index kChunkRows = 1 << 16;

void CheckInputs(const MatrixXd& background, const VectorXd& x) {
  if (background.rows() == 0) throw InvalidArgument("background set is empty");
  if (background.cols() != x.size()) {
    throw InvalidArgument("background and instance differ in feature count");
  }
}

VectorXd CallChecked(const BatchPredictFn& predict, const MatrixXd& rows) {
  VectorXd out = predict(rows);
  if (out.size() != rows.rows()) {
    throw InvalidArgument("predictor returned the wrong number of outputs");
  }
  return out;
}

std::string HtmlEscape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::vector<std::string> SplitWhitespace(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

}  // namespace

Attribution ShapExact(const BatchPredictFn& predict, const MatrixXd& background,
                      const VectorXd& x) {
  CheckInputs(background, x);
  const auto f = static_cast<int>(x.size());
  if (f > kMaxExactFeatures) {
    throw InvalidArgument("exact Shapley enumeration supports at most " +
                          std::to_string(kMaxExactFeatures) + " features, got " +
                          std::to_string(f) + "; use ShapSampled");
  }
  const Index b = background.rows();
  const Index masks = Index{1} << f;
  VectorXd value(masks);
  const Index per_chunk = std::max<Index>(1, kChunkRows / b);
  for (Index start = 0; start < masks; start += per_chunk) {
    const Index end = std::min(masks, start + per_chunk);
    MatrixXd rows((end - start) * b, f);
    for (Index m = start; m < end; ++m) {
      auto block = rows.middleRows((m - start) * b, b);
      block = background;
      for (int j = 0; j < f; ++j) {
        if (m & (Index{1} << j)) block.col(j).setConstant(x(j));
      }
    }
    VectorXd out = CallChecked(predict, rows);
    for (Index m = start; m < end; ++m) {
      value(m) = out.segment((m - start) * b, b).mean();
    }
  }

  // weight[s] = s! (F - s - 1)! / F!
  std::vector<double> weight(static_cast<size_t>(std::max(f, 1)));
  for (int s = 0; s < f; ++s) {
    weight[static_cast<size_t>(s)] =
        std::exp(std::lgamma(s + 1.0) + std::lgamma(f - s + 0.0) -
                 std::lgamma(f + 1.0));
  }
  Attribution a;
  a.phi = VectorXd::Zero(f);
  for (Index m = 0; m < masks; ++m) {
    const int size = __builtin_popcountll(static_cast<unsigned long long>(m));
    for (int i = 0; i < f; ++i) {
      if (m & (Index{1} << i)) continue;
      a.phi(i) += weight[static_cast<size_t>(size)] *
                  (value(m | (Index{1} << i)) - value(m));
    }
  }
  a.base_value = value(0);
  a.prediction = value(masks - 1);
  a.feature_values = x;
  return a;
}

Attribution ShapSampled(const BatchPredictFn& predict,
                        const MatrixXd& background, const VectorXd& x,
                        int n_samples, uint64_t seed) {
  CheckInputs(background, x);
  const auto f = static_cast<int>(x.size());
  if (n_samples < f) {
    throw InvalidArgument("n_samples must be at least the feature count");
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Index> pick_row(0, background.rows() - 1);
  std::vector<int> perm(static_cast<size_t>(f));
  std::iota(perm.begin(), perm.end(), 0);

  VectorXd sum = VectorXd::Zero(f);
  VectorXd sum_sq = VectorXd::Zero(f);
  const int per_chunk = static_cast<int>(std::max<Index>(1, kChunkRows / (f + 1)));
  for (int start = 0; start < n_samples; start += per_chunk) {
    const int count = std::min(per_chunk, n_samples - start);
    MatrixXd rows(static_cast<Index>(count) * (f + 1), f);
    std::vector<std::vector<int>> perms(static_cast<size_t>(count));
    for (int s = 0; s < count; ++s) {
      std::shuffle(perm.begin(), perm.end(), rng);
      perms[static_cast<size_t>(s)] = perm;
      Eigen::RowVectorXd z = background.row(pick_row(rng));
      const Index base = static_cast<Index>(s) * (f + 1);
      rows.row(base) = z;
      for (int k = 0; k < f; ++k) {
        const int j = perm[static_cast<size_t>(k)];
        z(j) = x(j);
        rows.row(base + k + 1) = z;
      }
    }
    VectorXd out = CallChecked(predict, rows);
    for (int s = 0; s < count; ++s) {
      const Index base = static_cast<Index>(s) * (f + 1);
      for (int k = 0; k < f; ++k) {
        const int j = perms[static_cast<size_t>(s)][static_cast<size_t>(k)];
        const double d = out(base + k + 1) - out(base + k);
        sum(j) += d;
        sum_sq(j) += d * d;
      }
    }
  }
  const double n = n_samples;
  Attribution a;
  a.phi = sum / n;
  a.phi_stderr.resize(f);
  for (int j = 0; j < f; ++j) {
    const double var =
        n > 1 ? std::max(0.0, (sum_sq(j) - n * a.phi(j) * a.phi(j)) / (n - 1))
              : 0.0;
    a.phi_stderr(j) = std::sqrt(var / n);
  }
  a.base_value = CallChecked(predict, background).mean();
  a.prediction = CallChecked(predict, x.transpose())(0);
  a.feature_values = x;
  return a;
}

GlobalSummary Summarize(const std::vector<Attribution>& attributions,
                        const std::vector<std::string>& features) {
  if (attributions.empty()) throw InvalidArgument("no attributions to summarize");
  const auto f = static_cast<Index>(features.size());
  for (const auto& a : attributions) {
    if (a.phi.size() != f || a.feature_values.size() != f) {
      throw InvalidArgument("attributions do not match the feature list");
    }
  }
  const auto n = static_cast<double>(attributions.size());
  GlobalSummary s;
  s.features = features;
  s.mean_abs_phi = VectorXd::Zero(f);
  s.direction = VectorXd::Zero(f);
  for (Index j = 0; j < f; ++j) {
    double mv = 0.0, mp = 0.0;
    for (const auto& a : attributions) {
      s.mean_abs_phi(j) += std::abs(a.phi(j));
      mv += a.feature_values(j);
      mp += a.phi(j);
    }
    s.mean_abs_phi(j) /= n;
    mv /= n;
    mp /= n;
    double cov = 0.0, vv = 0.0, vp = 0.0;
    for (const auto& a : attributions) {
      const double dv = a.feature_values(j) - mv;
      const double dp = a.phi(j) - mp;
      cov += dv * dp;
      vv += dv * dv;
      vp += dp * dp;
    }
    if (vv > 0.0 && vp > 0.0) s.direction(j) = cov / std::sqrt(vv * vp);
  }
  s.ranking.resize(static_cast<size_t>(f));
  std::iota(s.ranking.begin(), s.ranking.end(), 0);
  std::stable_sort(s.ranking.begin(), s.ranking.end(), [&](int a, int b) {
    return s.mean_abs_phi(a) > s.mean_abs_phi(b);
  });
  return s;
}

void WriteBeeswarmCsv(std::ostream& out,
                      const std::vector<Attribution>& attributions,
                      const std::vector<std::string>& features,
                      const std::vector<std::string>& instance_ids) {
  if (instance_ids.size() != attributions.size()) {
    throw InvalidArgument("one instance id per attribution required");
  }
  std::ostringstream s;
  s.precision(10);
  s << "feature,instance,value,phi\n";
  for (size_t i = 0; i < attributions.size(); ++i) {
    const auto& a = attributions[i];
    for (size_t j = 0; j < features.size(); ++j) {
      const auto jj = static_cast<Index>(j);
      s << features[j] << ',' << instance_ids[i] << ',' << a.feature_values(jj)
        << ',' << a.phi(jj) << '\n';
    }
  }
  out << s.str();
}

void WriteImportanceCsv(std::ostream& out, const GlobalSummary& summary) {
  std::ostringstream s;
  s.precision(10);
  s << "rank,feature,mean_abs_phi,direction\n";
  for (size_t r = 0; r < summary.ranking.size(); ++r) {
    const int j = summary.ranking[r];
    s << r + 1 << ',' << summary.features[static_cast<size_t>(j)] << ','
      << summary.mean_abs_phi(j) << ',' << summary.direction(j) << '\n';
  }
  out << s.str();
}

std::vector<TokenScore> LeaveOneOutTokens(const TextPredictFn& predict,
                                          const std::string& text) {
  std::vector<std::string> tokens = SplitWhitespace(text);
  if (tokens.empty()) return {};
  std::vector<std::string> texts{text};
  for (size_t k = 0; k < tokens.size(); ++k) {
    std::string rest;
    for (size_t j = 0; j < tokens.size(); ++j) {
      if (j == k) continue;
      if (!rest.empty()) rest += ' ';
      rest += tokens[j];
    }
    texts.push_back(std::move(rest));
  }
  VectorXd out = predict(texts);
  if (out.size() != static_cast<Index>(texts.size())) {
    throw InvalidArgument("text predictor returned the wrong number of outputs");
  }
  std::vector<TokenScore> scores;
  for (size_t k = 0; k < tokens.size(); ++k) {
    scores.push_back({tokens[k], out(0) - out(static_cast<Index>(k + 1))});
  }
  return scores;
}

std::string RenderTokenHtml(const std::vector<TokenScore>& tokens) {
  double scale = 0.0;
  for (const auto& t : tokens) scale = std::max(scale, std::abs(t.score));
  std::ostringstream s;
  s << "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"></head><body>\n"
    << "<p style=\"font-family: sans-serif; line-height: 1.8\">\n";
  for (const auto& t : tokens) {
    const double alpha = scale > 0.0 ? std::abs(t.score) / scale : 0.0;
    const char* rgb = t.score >= 0.0 ? "220,40,40" : "40,90,220";
    char style[64];
    std::snprintf(style, sizeof(style), "rgba(%s,%.3f)", rgb, alpha);
    char title[32];
    std::snprintf(title, sizeof(title), "%.6f", t.score);
    s << "<span style=\"background-color: " << style << "\" title=\"" << title
      << "\">" << HtmlEscape(t.token) << "</span>\n";
  }
  s << "</p>\n</body></html>\n";
  return s.str();
}

std::string LocalExplanationJson(const Attribution& a,
                                 const std::vector<std::string>& features,
                                 const std::vector<TokenScore>& tokens) {
  if (static_cast<Index>(features.size()) != a.phi.size()) {
    throw InvalidArgument("feature names do not match the attribution");
  }
  nlohmann::ordered_json j;
  j["base_value"] = a.base_value;
  j["prediction"] = a.prediction;
  j["features"] = nlohmann::ordered_json::array();
  for (size_t k = 0; k < features.size(); ++k) {
    const auto kk = static_cast<Index>(k);
    nlohmann::ordered_json f;
    f["name"] = features[k];
    f["value"] = a.feature_values(kk);
    f["phi"] = a.phi(kk);
    if (a.phi_stderr.size() == a.phi.size()) f["stderr"] = a.phi_stderr(kk);
    j["features"].push_back(f);
  }
  j["tokens"] = nlohmann::ordered_json::array();
  for (const auto& t : tokens) {
    j["tokens"].push_back({{"token", t.token}, {"score", t.score}});
  }
  return j.dump(2);
}

}  // namespace ohc
