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

#include "ohc/corpus.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "ohc/errors.h"

namespace ohc {
namespace {

using nlohmann::json;

std::string FieldName(const std::string& prefix, const std::string& field) {
  return "'" + prefix + field + "'";
}

const json& RequireField(const json& obj, const std::string& field,
                         size_t line, const std::string& prefix) {
  auto it = obj.find(field);
  if (it == obj.end()) {
    throw ParseError("missing field " + FieldName(prefix, field), line);
  }
  return *it;
}

std::string RequireString(const json& obj, const std::string& field,
                          size_t line, const std::string& prefix = "") {
  const json& v = RequireField(obj, field, line, prefix);
  if (!v.is_string()) {
    throw ParseError("field " + FieldName(prefix, field) + " must be a string",
                     line);
  }
  return v.get<std::string>();
}

int64_t RequireInt(const json& obj, const std::string& field, size_t line,
                   const std::string& prefix = "") {
  const json& v = RequireField(obj, field, line, prefix);
  if (!v.is_number_integer()) {
    throw ParseError(
        "field " + FieldName(prefix, field) + " must be an integer", line);
  }
  return v.get<int64_t>();
}

double RequireNumber(const json& obj, const std::string& field, size_t line,
                     const std::string& prefix = "") {
  const json& v = RequireField(obj, field, line, prefix);
  if (!v.is_number()) {
    throw ParseError("field " + FieldName(prefix, field) + " must be a number",
                     line);
  }
  return v.get<double>();
}

bool RequireBool(const json& obj, const std::string& field, size_t line,
                 const std::string& prefix = "") {
  const json& v = RequireField(obj, field, line, prefix);
  if (!v.is_boolean()) {
    throw ParseError(
        "field " + FieldName(prefix, field) + " must be a boolean", line);
  }
  return v.get<bool>();
}

std::optional<bool> OptionalBool(const json& obj, const std::string& field,
                                 size_t line) {
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_boolean()) {
    throw ParseError("field '" + field + "' must be a boolean or null", line);
  }
  return it->get<bool>();
}

UserProfile ParseUser(const json& obj, const std::string& field, size_t line) {
  const json& u = RequireField(obj, field, line, "");
  if (!u.is_object()) {
    throw ParseError("field '" + field + "' must be an object", line);
  }
  const std::string prefix = field + ".";
  UserProfile user;
  user.user_id = RequireString(u, "user_id", line, prefix);
  user.tenure_seconds = RequireInt(u, "tenure_seconds", line, prefix);
  user.platform_response_count =
      RequireInt(u, "platform_response_count", line, prefix);
  user.med_expert = RequireBool(u, "med_expert", line, prefix);
  return user;
}

json UserToJson(const UserProfile& u) {
  json j;
  j["user_id"] = u.user_id;
  j["tenure_seconds"] = u.tenure_seconds;
  j["platform_response_count"] = u.platform_response_count;
  j["med_expert"] = u.med_expert;
  return j;
}

json PairToJson(const QRPair& p) {
  json j;
  j["pair_id"] = p.pair_id;
  j["condition"] = p.condition;
  j["question_text"] = p.question_text;
  j["response_text"] = p.response_text;
  j["response_index"] = p.response_index;
  j["questioner_reply_ratio"] = p.questioner_reply_ratio;
  j["q_user"] = UserToJson(p.questioner);
  j["r_user"] = UserToJson(p.responder);
  if (p.issq_label) j["issq_label"] = *p.issq_label;
  if (p.isr_label) j["isr_label"] = *p.isr_label;
  if (p.helpful) j["helpful"] = *p.helpful;
  return j;
}

bool IsBlank(const std::string& s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

std::optional<bool> GetLabel(const QRPair& pair, LabelField field) {
  switch (field) {
    case LabelField::kIssq:
      return pair.issq_label;
    case LabelField::kIsr:
      return pair.isr_label;
    case LabelField::kHelpful:
      return pair.helpful;
  }
  return std::nullopt;
}

const char* LabelFieldName(LabelField field) {
  switch (field) {
    case LabelField::kIssq:
      return "issq_label";
    case LabelField::kIsr:
      return "isr_label";
    case LabelField::kHelpful:
      return "helpful";
  }
  return "?";
}

LabelField ParseLabelField(const std::string& name) {
  if (name == "issq" || name == "issq_label") return LabelField::kIssq;
  if (name == "isr" || name == "isr_label") return LabelField::kIsr;
  if (name == "helpful") return LabelField::kHelpful;
  throw InvalidArgument("unknown label field '" + name + "'");
}

void ValidatePair(const QRPair& p) {
  if (p.pair_id.empty()) throw InvalidArgument("pair_id must be non-empty");
  auto fail = [&](const std::string& field, const std::string& why) {
    throw InvalidArgument("pair '" + p.pair_id + "': field '" + field + "' " +
                          why);
  };
  if (p.condition.empty()) fail("condition", "must be non-empty");
  if (p.response_index < 1) fail("response_index", "must be >= 1");
  if (!(p.questioner_reply_ratio >= 0.0 && p.questioner_reply_ratio <= 1.0)) {
    fail("questioner_reply_ratio", "must lie in [0, 1]");
  }
  for (const auto* u : {&p.questioner, &p.responder}) {
    const std::string who = u == &p.questioner ? "q_user." : "r_user.";
    if (u->tenure_seconds < 0) fail(who + "tenure_seconds", "must be >= 0");
    if (u->platform_response_count < 0) {
      fail(who + "platform_response_count", "must be >= 0");
    }
  }
  if (p.isr_label && p.issq_label != std::optional<bool>(true)) {
    fail("isr_label", "requires issq_label = true");
  }
}

Corpus::Corpus(std::vector<QRPair> pairs, std::string provenance,
               const std::set<std::string>& declared_conditions)
    : pairs_(std::move(pairs)), provenance_(std::move(provenance)) {
  for (size_t i = 0; i < pairs_.size(); ++i) {
    const QRPair& p = pairs_[i];
    ValidatePair(p);
    if (!declared_conditions.empty() &&
        !declared_conditions.count(p.condition)) {
      throw InvalidArgument("pair '" + p.pair_id + "': condition '" +
                            p.condition + "' is not declared");
    }
    if (!index_.emplace(p.pair_id, i).second) {
      throw InvalidArgument("duplicate pair_id '" + p.pair_id + "'");
    }
  }
}

std::vector<std::string> Corpus::Conditions() const {
  std::set<std::string> seen;
  for (const auto& p : pairs_) seen.insert(p.condition);
  return {seen.begin(), seen.end()};
}

std::optional<size_t> Corpus::Find(const std::string& pair_id) const {
  auto it = index_.find(pair_id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Corpus ParseCorpus(std::istream& in, const ParseOptions& options) {
  std::vector<QRPair> pairs;
  std::map<std::string, size_t> seen;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (IsBlank(line)) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    if (!obj.is_object()) throw ParseError("record is not an object", line_no);

    QRPair p;
    p.pair_id = RequireString(obj, "pair_id", line_no);
    p.condition = RequireString(obj, "condition", line_no);
    p.question_text = RequireString(obj, "question_text", line_no);
    p.response_text = RequireString(obj, "response_text", line_no);
    p.response_index = RequireInt(obj, "response_index", line_no);
    p.questioner_reply_ratio =
        RequireNumber(obj, "questioner_reply_ratio", line_no);
    p.questioner = ParseUser(obj, "q_user", line_no);
    p.responder = ParseUser(obj, "r_user", line_no);
    p.issq_label = OptionalBool(obj, "issq_label", line_no);
    p.isr_label = OptionalBool(obj, "isr_label", line_no);
    p.helpful = OptionalBool(obj, "helpful", line_no);

    try {
      ValidatePair(p);
    } catch (const InvalidArgument& e) {
      throw ParseError(e.what(), line_no);
    }
    if (!options.declared_conditions.empty() &&
        !options.declared_conditions.count(p.condition)) {
      throw ParseError("field 'condition' value '" + p.condition +
                           "' is not declared",
                       line_no);
    }
    auto [it, inserted] = seen.emplace(p.pair_id, line_no);
    if (!inserted) {
      throw ParseError("duplicate pair_id '" + p.pair_id +
                           "' (first seen on line " +
                           std::to_string(it->second) + ")",
                       line_no);
    }
    pairs.push_back(std::move(p));
  }
  if (in.bad()) throw IoError("read failure while parsing corpus");
  return Corpus(std::move(pairs), options.provenance,
                options.declared_conditions);
}

void WriteCorpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& p : corpus.pairs()) out << PairToJson(p).dump() << '\n';
}

Corpus ReadCorpusFile(const std::string& path, const ParseOptions& options) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file '" + path + "'");
  ParseOptions opts = options;
  if (opts.provenance == "jsonl") opts.provenance = path;
  return ParseCorpus(in, opts);
}

void WriteCorpusFile(const std::string& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  WriteCorpus(out, corpus);
  if (!out) throw IoError("write failure on '" + path + "'");
}

LabelSummary SummarizeLabels(const Corpus& corpus) {
  LabelSummary summary;
  // A question can head several pairs; count it once.
  std::set<std::pair<std::string, std::string>> counted_questions;
  for (const auto& p : corpus.pairs()) {
    LabelCounts& row = summary.per_condition[p.condition];
    if (p.issq_label &&
        counted_questions.emplace(p.condition, p.question_text).second) {
      ++row.issq_total;
      row.issq_positive += *p.issq_label;
    }
    if (p.isr_label) {
      ++row.isr_total;
      row.isr_positive += *p.isr_label;
    }
  }
  for (const auto& [_, row] : summary.per_condition) {
    summary.total.issq_positive += row.issq_positive;
    summary.total.issq_total += row.issq_total;
    summary.total.isr_positive += row.isr_positive;
    summary.total.isr_total += row.isr_total;
  }
  return summary;
}

std::string FormatRatio(size_t positive, size_t total) {
  long percent =
      total == 0 ? 0 : std::lround(100.0 * static_cast<double>(positive) /
                                   static_cast<double>(total));
  return std::to_string(positive) + "/" + std::to_string(total) + " (" +
         std::to_string(percent) + "%)";
}

std::string FormatLabelSummary(const LabelSummary& summary) {
  std::ostringstream os;
  os << std::left << std::setw(18) << "condition" << std::setw(22) << "ISSQ"
     << "ISR\n";
  auto row = [&](const std::string& name, const LabelCounts& c) {
    os << std::left << std::setw(18) << name << std::setw(22)
       << FormatRatio(c.issq_positive, c.issq_total)
       << FormatRatio(c.isr_positive, c.isr_total) << '\n';
  };
  for (const auto& [name, counts] : summary.per_condition) row(name, counts);
  row("Sum", summary.total);
  return os.str();
}

Corpus StratifiedSample(const Corpus& corpus,
                        const std::map<std::string, size_t>& per_condition,
                        uint64_t seed) {
  std::map<std::string, std::vector<size_t>> strata;
  for (size_t i = 0; i < corpus.size(); ++i) {
    strata[corpus[i].condition].push_back(i);
  }
  std::string provenance = corpus.provenance() +
                           "; stratified_sample(seed=" + std::to_string(seed) +
                           ")";
  std::vector<char> keep(corpus.size(), 0);
  for (const auto& [condition, requested] : per_condition) {
    auto it = strata.find(condition);
    if (it == strata.end()) {
      throw InvalidArgument("stratified_sample: condition '" + condition +
                            "' is not present in the corpus");
    }
    std::vector<size_t> members = it->second;
    if (requested > members.size()) {
      provenance += "; warning: requested " + std::to_string(requested) +
                    " " + condition + " pairs, only " +
                    std::to_string(members.size()) + " available";
    }
    // One generator per stratum so strata do not perturb each other.
    std::seed_seq seq{seed, static_cast<uint64_t>(
                                std::hash<std::string>{}(condition))};
    std::mt19937_64 rng(seq);
    std::shuffle(members.begin(), members.end(), rng);
    size_t take = std::min(requested, members.size());
    for (size_t k = 0; k < take; ++k) keep[members[k]] = 1;
  }
  std::vector<QRPair> out;
  for (size_t i = 0; i < corpus.size(); ++i) {
    if (keep[i]) out.push_back(corpus[i]);
  }
  return Corpus(std::move(out), provenance);
}

std::pair<Corpus, Corpus> HoldoutSplit(const Corpus& corpus,
                                       double train_fraction, uint64_t seed,
                                       std::optional<LabelField> stratify_on) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InvalidArgument("holdout_split: train_fraction must be in (0, 1)");
  }
  // class key -> member indices, in corpus order.
  std::map<int, std::vector<size_t>> classes;
  for (size_t i = 0; i < corpus.size(); ++i) {
    int key = 0;
    if (stratify_on) {
      auto label = GetLabel(corpus[i], *stratify_on);
      if (!label) {
        throw InvalidArgument("holdout_split: pair '" + corpus[i].pair_id +
                              "' has no " + LabelFieldName(*stratify_on));
      }
      key = *label ? 1 : 0;
    }
    classes[key].push_back(i);
  }
  for (const auto& [key, members] : classes) {
    if (members.size() < 2) {
      throw InvalidArgument("holdout_split: label class " +
                            std::to_string(key) + " has fewer than 2 members");
    }
  }

  // Largest-remainder allocation: each class gets floor or ceil of its share.
  const double n = static_cast<double>(corpus.size());
  const size_t target = static_cast<size_t>(std::llround(n * train_fraction));
  std::vector<std::pair<int, double>> remainders;
  std::map<int, size_t> quota;
  size_t assigned = 0;
  for (const auto& [key, members] : classes) {
    double share = static_cast<double>(members.size()) * train_fraction;
    quota[key] = static_cast<size_t>(std::floor(share));
    assigned += quota[key];
    remainders.emplace_back(key, share - std::floor(share));
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  for (size_t k = 0; assigned < target && k < remainders.size(); ++k) {
    ++quota[remainders[k].first];
    ++assigned;
  }

  std::mt19937_64 rng(seed);
  std::vector<char> in_train(corpus.size(), 0);
  for (auto& [key, members] : classes) {
    std::vector<size_t> order = members;
    std::shuffle(order.begin(), order.end(), rng);
    for (size_t k = 0; k < quota[key]; ++k) in_train[order[k]] = 1;
  }
  std::vector<QRPair> train, test;
  for (size_t i = 0; i < corpus.size(); ++i) {
    (in_train[i] ? train : test).push_back(corpus[i]);
  }
  std::string tag = "; holdout_split(fraction=" + std::to_string(train_fraction) +
                    ", seed=" + std::to_string(seed) + ")";
  return {Corpus(std::move(train), corpus.provenance() + tag + " train"),
          Corpus(std::move(test), corpus.provenance() + tag + " test")};
}

}  // namespace ohc
