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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>

#include "json.hpp"
#include "ohc/errors.h"
#include "ohc/textfeat.h"

namespace ohc {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double Softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

double NormalCdf(double t) { return 0.5 * std::erfc(-t * kInvSqrt2); }

double LogNormalCdf(double t) {
  if (t > -30.0) return std::log(NormalCdf(t));
  // Asymptotic expansion in the far left tail.
  return -0.5 * t * t - kLogSqrt2Pi - std::log(-t) +
         std::log1p(-1.0 / (t * t));
}

// phi(t) / Phi(t).
double InverseMills(double t) {
  if (t > -30.0) {
    return std::exp(-0.5 * t * t - kLogSqrt2Pi) / NormalCdf(t);
  }
  return -t / (1.0 - 1.0 / (t * t));
}

struct Terms {
  double ll = 0.0;
  VectorXd g;  // d ll_i / d eta_i
  VectorXd h;  // d^2 ll_i / d eta_i^2 (negative)
};

Terms Evaluate(const VectorXd& eta, const VectorXd& y, Link link) {
  const Index n = eta.size();
  Terms t;
  t.g.resize(n);
  t.h.resize(n);
  for (Index i = 0; i < n; ++i) {
    const double e = eta(i);
    if (link == Link::kLogit) {
      const double mu = 1.0 / (1.0 + std::exp(-e));
      t.ll += y(i) * e - Softplus(e);
      t.g(i) = y(i) - mu;
      t.h(i) = -mu * (1.0 - mu);
    } else {
      const double q = y(i) > 0.5 ? 1.0 : -1.0;
      t.ll += LogNormalCdf(q * e);
      const double g = q * InverseMills(q * e);
      t.g(i) = g;
      t.h(i) = -g * (g + e);
    }
  }
  return t;
}

void CheckRank(const MatrixXd& x, const std::vector<std::string>& names) {
  // Constant columns come first, the last of them (the intercept by
  // convention) ahead of the others so a constant regressor is the one named.
  std::vector<Index> order;
  for (Index j = x.cols() - 1; j >= 0; --j) {
    if (x.col(j).maxCoeff() == x.col(j).minCoeff()) order.push_back(j);
  }
  for (Index j = 0; j < x.cols(); ++j) {
    if (x.col(j).maxCoeff() != x.col(j).minCoeff()) order.push_back(j);
  }
  MatrixXd kept(x.rows(), 0);
  for (Index j : order) {
    const VectorXd col = x.col(j);
    const double norm = col.norm();
    double resid = norm;
    if (kept.cols() > 0 && norm > 0.0) {
      VectorXd coef = kept.colPivHouseholderQr().solve(col);
      resid = (col - kept * coef).norm();
    }
    if (norm == 0.0 || resid <= 1e-9 * norm) {
      throw RankDeficientError(names[static_cast<size_t>(j)]);
    }
    kept.conservativeResize(Eigen::NoChange, kept.cols() + 1);
    kept.col(kept.cols() - 1) = col;
  }
}

std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

uint64_t Fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

const char* LinkName(Link link) {
  return link == Link::kLogit ? "logit" : "probit";
}

Link ParseLink(const std::string& name) {
  if (name == "logit") return Link::kLogit;
  if (name == "probit") return Link::kProbit;
  throw InvalidArgument("unknown link '" + name + "' (expected logit or probit)");
}

RegressionResult FitGlmBinary(const MatrixXd& x, const VectorXd& y,
                              const std::vector<std::string>& names, Link link,
                              bool robust) {
  const Index n = x.rows(), p = x.cols();
  if (y.size() != n) throw InvalidArgument("GLM: design and response differ");
  if (static_cast<Index>(names.size()) != p) {
    throw InvalidArgument("GLM: one name per design column required");
  }
  if (n <= p) throw InvalidArgument("GLM: need more rows than columns");
  if (!x.allFinite()) throw InvalidArgument("GLM: non-finite design");
  double pos = 0.0;
  for (Index i = 0; i < n; ++i) {
    if (y(i) != 0.0 && y(i) != 1.0) throw InvalidArgument("GLM: y must be 0/1");
    pos += y(i);
  }
  if (pos == 0.0 || pos == static_cast<double>(n)) {
    throw SeparationError("GLM: response holds a single class");
  }
  CheckRank(x, names);

  const double eta_bound = link == Link::kLogit ? 30.0 : 8.5;
  VectorXd beta = VectorXd::Zero(p);
  Terms t = Evaluate(x * beta, y, link);
  bool converged = false;
  int it = 0;
  for (; it < 200; ++it) {
    VectorXd score = x.transpose() * t.g;
    if (score.cwiseAbs().maxCoeff() < 1e-8) {
      converged = true;
      break;
    }
    MatrixXd info = x.transpose() * (-t.h).asDiagonal() * x;
    VectorXd step = info.ldlt().solve(score);
    double scale = 1.0;
    VectorXd next = beta + step;
    Terms tn = Evaluate(x * next, y, link);
    // Tolerate rounding in the log-likelihood near the optimum.
    const double slack = 1e-12 * (1.0 + std::abs(t.ll));
    while (tn.ll < t.ll - slack && scale > 1e-12) {
      scale *= 0.5;
      next = beta + scale * step;
      tn = Evaluate(x * next, y, link);
    }
    const double moved = (scale * step).cwiseAbs().maxCoeff();
    beta = next;
    t = std::move(tn);
    if ((x * beta).cwiseAbs().maxCoeff() > eta_bound) break;
    if (moved < 1e-10) {
      converged = true;
      ++it;
      break;
    }
  }
  if ((x * beta).cwiseAbs().maxCoeff() > eta_bound) {
    throw SeparationError(
        std::string("GLM: fitted probabilities reach 0 or 1 (") + LinkName(link) +
        "); the data are separated");
  }
  if (!converged) throw Error("GLM: Newton iterations did not converge");

  RegressionResult r;
  r.link = link;
  r.robust = robust;
  r.names = names;
  r.coef = beta;
  r.n = n;
  r.iterations = it;
  MatrixXd info = x.transpose() * (-t.h).asDiagonal() * x;
  MatrixXd cov = info.ldlt().solve(MatrixXd::Identity(p, p));
  r.se_classical = cov.diagonal().cwiseSqrt();
  MatrixXd scores = x.array().colwise() * t.g.array();
  MatrixXd meat = scores.transpose() * scores;
  MatrixXd sandwich = cov * meat * cov *
                      (static_cast<double>(n) / static_cast<double>(n - 1));
  r.se_robust = sandwich.diagonal().cwiseSqrt();
  const VectorXd& se = r.se();
  r.z = beta.cwiseQuotient(se);
  r.p_value = r.z.unaryExpr(
      [](double z) { return std::erfc(std::abs(z) * kInvSqrt2); });
  if (link == Link::kLogit) {
    r.odds_ratio = beta.unaryExpr([](double b) { return std::exp(b); });
  }
  r.log_likelihood = t.ll;
  const double ybar = pos / static_cast<double>(n);
  r.null_log_likelihood = static_cast<double>(n) *
                          (ybar * std::log(ybar) + (1 - ybar) * std::log1p(-ybar));
  r.pseudo_r2 = 1.0 - r.log_likelihood / r.null_log_likelihood;
  r.lr_chi2 = 2.0 * (r.log_likelihood - r.null_log_likelihood);
  bool has_constant = false;
  for (Index j = 0; j < p; ++j) {
    if (x.col(j).maxCoeff() == x.col(j).minCoeff()) has_constant = true;
  }
  r.lr_df = static_cast<int>(p) - (has_constant ? 1 : 0);
  return r;
}

std::string SignificanceStars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "";
}

std::string FormatRegressionTable(const RegressionResult& r) {
  const bool logit = r.link == Link::kLogit;
  size_t width = 16;  // fits "Number of Obs." plus a gap
  for (const auto& n : r.names) width = std::max(width, n.size() + 2);
  auto pad = [](std::string s, size_t w) {
    if (s.size() < w) s.append(w - s.size(), ' ');
    return s;
  };
  auto lpad = [](std::string s, size_t w) {
    if (s.size() < w) s.insert(0, w - s.size(), ' ');
    return s;
  };
  std::ostringstream out;
  out << pad("Variable", width) << lpad("Coef.", 13)
      << lpad(r.robust ? "Robust SE" : "SE", 12) << lpad("z", 9)
      << lpad("P>|z|", 9);
  if (logit) out << lpad("Odds Ratio", 12);
  out << '\n';
  for (size_t j = 0; j < r.names.size(); ++j) {
    const auto jj = static_cast<Index>(j);
    out << pad(r.names[j], width)
        << lpad(Fixed(r.coef(jj), 4) + pad(SignificanceStars(r.p_value(jj)), 3),
                13)
        << lpad(Fixed(r.se()(jj), 4), 12) << lpad(Fixed(r.z(jj), 2), 9)
        << lpad(Fixed(r.p_value(jj), 4), 9);
    if (logit) out << lpad(Fixed(r.odds_ratio(jj), 4), 12);
    out << '\n';
  }
  out << '\n'
      << pad("Number of Obs.", width) << r.n << '\n'
      << pad("Log Likelihood", width) << Fixed(r.log_likelihood, 2) << '\n'
      << pad("Chi2(" + std::to_string(r.lr_df) + ")", width)
      << Fixed(r.lr_chi2, 2) << '\n'
      << pad("Pseudo R2", width) << Fixed(r.pseudo_r2, 4) << '\n'
      << "***p < 0.001; **p < 0.01; *p < 0.05\n";
  return out.str();
}

std::string RegressionJson(const RegressionResult& r) {
  nlohmann::ordered_json j;
  j["link"] = LinkName(r.link);
  j["robust"] = r.robust;
  j["n"] = r.n;
  j["log_likelihood"] = r.log_likelihood;
  j["null_log_likelihood"] = r.null_log_likelihood;
  j["pseudo_r2"] = r.pseudo_r2;
  j["lr_chi2"] = r.lr_chi2;
  j["lr_df"] = r.lr_df;
  j["coefficients"] = nlohmann::ordered_json::array();
  for (size_t k = 0; k < r.names.size(); ++k) {
    const auto kk = static_cast<Index>(k);
    nlohmann::ordered_json c;
    c["name"] = r.names[k];
    c["coef"] = r.coef(kk);
    c["se_classical"] = r.se_classical(kk);
    c["se_robust"] = r.se_robust(kk);
    c["z"] = r.z(kk);
    c["p_value"] = r.p_value(kk);
    if (r.odds_ratio.size() > 0) c["odds_ratio"] = r.odds_ratio(kk);
    j["coefficients"].push_back(c);
  }
  return j.dump(2);
}

Eigen::VectorXd Vif(const MatrixXd& x, const std::vector<std::string>& names) {
  const Index n = x.rows(), p = x.cols();
  if (p < 2) throw InvalidArgument("VIF needs at least two columns");
  if (static_cast<Index>(names.size()) != p) {
    throw InvalidArgument("VIF: one name per column required");
  }
  if (n <= p) throw InvalidArgument("VIF: need more rows than columns");
  for (Index j = 0; j < p; ++j) {
    if (x.col(j).maxCoeff() == x.col(j).minCoeff()) {
      throw InvalidArgument("VIF: column '" + names[static_cast<size_t>(j)] +
                            "' is constant");
    }
  }
  VectorXd vif(p);
  for (Index j = 0; j < p; ++j) {
    MatrixXd others(n, p);
    others.col(0).setOnes();
    Index c = 1;
    for (Index k = 0; k < p; ++k) {
      if (k != j) others.col(c++) = x.col(k);
    }
    const VectorXd target = x.col(j);
    VectorXd coef = others.colPivHouseholderQr().solve(target);
    const double ssr = (target - others * coef).squaredNorm();
    const double sst = (target.array() - target.mean()).square().sum();
    const double one_minus_r2 = ssr / sst;
    if (one_minus_r2 <= 1e-10) {
      throw RankDeficientError(names[static_cast<size_t>(j)]);
    }
    vif(j) = 1.0 / one_minus_r2;
  }
  return vif;
}

std::string FormatVifTable(const VectorXd& vif,
                           const std::vector<std::string>& names) {
  std::ostringstream out;
  size_t width = 14;
  for (const auto& n : names) width = std::max(width, n.size() + 2);
  out << "Variable" << std::string(width - 8, ' ') << "VIF\n";
  for (size_t j = 0; j < names.size(); ++j) {
    out << names[j] << std::string(width - names[j].size(), ' ')
        << Fixed(vif(static_cast<Index>(j)), 3) << '\n';
  }
  out << "Mean VIF" << std::string(width - 8, ' ') << Fixed(vif.mean(), 3)
      << '\n';
  return out.str();
}

std::vector<std::string> DeterminantRegressors(Task task) {
  if (task == Task::kIssq) {
    return {"Q_ANGER", "Q_FEAR",      "Q_JOY",    "Q_SADNESS",    "Q_QUERY",
            "Q_STATEMENT", "Q_PWRC", "Q_TENURE", "Q_MED_EXPERT"};
  }
  return {"R_ANGER",  "R_JOY",       "R_NEUTRAL",   "R_SADNESS", "R_SURPRISE",
          "R_QUERY",  "R_STATEMENT", "TFIDF_CS",    "RID",       "R_PWRC",
          "R_TENURE", "R_MED_EXPERT", "Q_REPLY_RATIO"};
}

std::vector<double> QuantileEdges(std::vector<size_t> lengths, int bins) {
  if (bins < 1) throw InvalidArgument("bin count must be >= 1");
  if (lengths.empty()) throw InvalidArgument("no lengths to bin");
  std::sort(lengths.begin(), lengths.end());
  std::vector<double> edges;
  const auto n = static_cast<double>(lengths.size());
  for (int k = 1; k < bins; ++k) {
    auto rank = static_cast<size_t>(std::ceil(n * k / bins));
    rank = std::clamp<size_t>(rank, 1, lengths.size());
    edges.push_back(static_cast<double>(lengths[rank - 1]));
  }
  return edges;
}

int LengthBin(size_t length, const std::vector<double>& edges) {
  return static_cast<int>(std::lower_bound(edges.begin(), edges.end(),
                                           static_cast<double>(length)) -
                          edges.begin());
}

MatchResult MatchedUndersample(const std::vector<MatchRecord>& records,
                               const std::vector<double>& edges,
                               uint64_t seed) {
  std::map<std::pair<std::string, int>,
           std::pair<std::vector<size_t>, std::vector<size_t>>>
      cells;
  for (size_t i = 0; i < records.size(); ++i) {
    auto& cell = cells[{records[i].condition,
                        LengthBin(records[i].char_length, edges)}];
    (records[i].helpful ? cell.first : cell.second).push_back(i);
  }
  MatchResult out;
  for (auto& [key, cell] : cells) {
    auto& [helpful, other] = cell;
    const std::string label =
        "(" + key.first + ", bin " + std::to_string(key.second) + ")";
    if (helpful.empty()) {
      out.warnings.push_back("cell " + label + " has no helpful rows; " +
                             std::to_string(other.size()) +
                             " non-helpful rows dropped");
      continue;
    }
    out.kept.insert(out.kept.end(), helpful.begin(), helpful.end());
    if (other.size() < helpful.size()) {
      out.warnings.push_back("cell " + label + " has " +
                             std::to_string(other.size()) +
                             " non-helpful rows for " +
                             std::to_string(helpful.size()) + " helpful");
      out.kept.insert(out.kept.end(), other.begin(), other.end());
      continue;
    }
    std::seed_seq seq{seed, Fnv1a(key.first),
                      static_cast<uint64_t>(key.second)};
    std::mt19937_64 rng(seq);
    std::shuffle(other.begin(), other.end(), rng);
    out.kept.insert(out.kept.end(), other.begin(),
                    other.begin() + static_cast<std::ptrdiff_t>(helpful.size()));
  }
  std::sort(out.kept.begin(), out.kept.end());
  return out;
}

HelpfulnessReport HelpfulnessAnalysis(const Corpus& corpus,
                                      const std::vector<int>& isr,
                                      const HelpfulnessOptions& options) {
  if (isr.size() != corpus.size()) {
    throw InvalidArgument("one ISR indicator per corpus pair required");
  }
  std::vector<size_t> rows;
  std::vector<MatchRecord> records;
  std::vector<size_t> lengths;
  for (size_t i = 0; i < corpus.size(); ++i) {
    const QRPair& p = corpus[i];
    if (!p.helpful) continue;
    if (isr[i] != 0 && isr[i] != 1) {
      throw InvalidArgument("ISR indicators must be 0 or 1");
    }
    rows.push_back(i);
    records.push_back({p.condition, CharLength(p.response_text), *p.helpful});
    lengths.push_back(records.back().char_length);
  }
  if (rows.empty()) throw InvalidArgument("no pairs carry a helpful flag");

  HelpfulnessReport report;
  report.candidates = rows.size();
  report.edges = QuantileEdges(lengths, options.bins);
  report.match = MatchedUndersample(records, report.edges, options.seed);

  std::vector<std::string> conditions;
  for (size_t k : report.match.kept) conditions.push_back(records[k].condition);
  std::sort(conditions.begin(), conditions.end());
  conditions.erase(std::unique(conditions.begin(), conditions.end()),
                   conditions.end());
  auto code = [&](const std::string& c) {
    return static_cast<double>(
        std::lower_bound(conditions.begin(), conditions.end(), c) -
        conditions.begin());
  };

  std::vector<std::string> names{"ISR", "R_LEN"};
  // A single observed condition carries no information beyond the intercept.
  const bool use_condition = conditions.size() > 1;
  if (use_condition && options.one_hot_condition) {
    for (size_t c = 1; c < conditions.size(); ++c) {
      names.push_back("M_CONDITION=" + conditions[c]);
    }
  } else if (use_condition) {
    names.push_back("M_CONDITION");
  }
  names.push_back("R_PWRC");
  names.push_back("Q_MED_EXPERT");
  names.push_back("Intercept");

  const auto n = static_cast<Index>(report.match.kept.size());
  MatrixXd x = MatrixXd::Zero(n, static_cast<Index>(names.size()));
  VectorXd y(n);
  for (Index r = 0; r < n; ++r) {
    const size_t k = report.match.kept[static_cast<size_t>(r)];
    const QRPair& p = corpus[rows[k]];
    Index c = 0;
    x(r, c++) = isr[rows[k]];
    x(r, c++) = static_cast<double>(records[k].char_length);
    if (use_condition && options.one_hot_condition) {
      const auto level = static_cast<Index>(code(p.condition));
      if (level > 0) x(r, c + level - 1) = 1.0;
      c += static_cast<Index>(conditions.size()) - 1;
    } else if (use_condition) {
      x(r, c++) = code(p.condition);
    }
    x(r, c++) = static_cast<double>(p.responder.platform_response_count);
    x(r, c++) = p.questioner.med_expert ? 1.0 : 0.0;
    x(r, c++) = 1.0;
    y(r) = *p.helpful ? 1.0 : 0.0;
  }
  report.regression =
      FitGlmBinary(x, y, names, options.link, options.robust);
  return report;
}

}  // namespace ohc
