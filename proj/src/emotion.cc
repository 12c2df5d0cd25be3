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

#include "ohc/emotion.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "json.hpp"
#include "ohc/errors.h"

namespace ohc {
namespace {

using nlohmann::json;

EmotionScores ParseScores(const json& obj, const char* field,
                          const std::string& pair_id, size_t line) {
  auto it = obj.find(field);
  if (it == obj.end()) {
    throw ParseError(std::string("missing field '") + field + "'", line);
  }
  if (!it->is_array() || it->size() != kNumEmotions) {
    throw ParseError(std::string("field '") + field +
                         "' must be an array of 7 numbers",
                     line);
  }
  EmotionScores s;
  for (size_t k = 0; k < kNumEmotions; ++k) {
    if (!(*it)[k].is_number()) {
      throw ParseError(std::string("field '") + field +
                           "' must be an array of 7 numbers",
                       line);
    }
    s.values[k] = (*it)[k].get<double>();
    if (!(s.values[k] >= 0.0 && s.values[k] <= 1.0)) {
      throw ParseError("pair '" + pair_id + "': " + field +
                           " value out of [0, 1]",
                       line);
    }
  }
  if (std::abs(s.Sum() - 1.0) > 1e-3) {
    throw ParseError("pair '" + pair_id + "': " + field + " sums to " +
                         std::to_string(s.Sum()) + ", expected 1",
                     line);
  }
  return s;
}

std::optional<int> OptionalCount(const json& obj, const char* field,
                                 size_t line) {
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_integer() || it->get<int64_t>() < 0) {
    throw ParseError(std::string("field '") + field +
                         "' must be a non-negative integer",
                     line);
  }
  return it->get<int>();
}

}  // namespace

const char* EmotionName(Emotion e) {
  static constexpr const char* kNames[kNumEmotions] = {
      "anger", "disgust", "fear", "joy", "sadness", "surprise", "neutral"};
  return kNames[static_cast<size_t>(e)];
}

std::string EmotionColumnSuffix(Emotion e) {
  std::string s = EmotionName(e);
  for (char& c : s) c = static_cast<char>(std::toupper(c));
  return s;
}

double EmotionScores::Sum() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

Emotion EmotionScores::Argmax() const {
  return static_cast<Emotion>(std::max_element(values.begin(), values.end()) -
                              values.begin());
}

bool EmotionScores::IsValid(double tolerance) const {
  for (double v : values) {
    if (!(v >= 0.0 && v <= 1.0)) return false;
  }
  return std::abs(Sum() - 1.0) <= tolerance;
}

EmotionTable ParseEmotionSidecar(std::istream& in) {
  EmotionTable table;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (std::all_of(line.begin(), line.end(),
                    [](unsigned char c) { return std::isspace(c); })) {
      continue;
    }
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    auto id = obj.find("pair_id");
    if (id == obj.end() || !id->is_string()) {
      throw ParseError("missing field 'pair_id'", line_no);
    }
    const std::string pair_id = id->get<std::string>();
    PairEmotions rec;
    rec.question = ParseScores(obj, "q_emotions", pair_id, line_no);
    rec.response = ParseScores(obj, "r_emotions", pair_id, line_no);
    auto qq = OptionalCount(obj, "q_query", line_no);
    auto qs = OptionalCount(obj, "q_statement", line_no);
    auto rq = OptionalCount(obj, "r_query", line_no);
    auto rs = OptionalCount(obj, "r_statement", line_no);
    if (qq || qs || rq || rs) {
      if (!(qq && qs && rq && rs)) {
        throw ParseError("pair '" + pair_id +
                             "': sentence counts need all of q_query, "
                             "q_statement, r_query, r_statement",
                         line_no);
      }
      rec.sentence_counts =
          SentenceCountsOverride{{*qq, *qs}, {*rq, *rs}};
    }
    if (!table.emplace(pair_id, rec).second) {
      throw ParseError("duplicate pair_id '" + pair_id + "'", line_no);
    }
  }
  return table;
}

EmotionTable LoadEmotionScores(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open emotion sidecar '" + path + "'");
  return ParseEmotionSidecar(in);
}

void WriteEmotionSidecar(std::ostream& out, const EmotionTable& table) {
  for (const auto& [pair_id, rec] : table) {
    json j;
    j["pair_id"] = pair_id;
    j["q_emotions"] = rec.question.values;
    j["r_emotions"] = rec.response.values;
    if (rec.sentence_counts) {
      j["q_query"] = rec.sentence_counts->question.queries;
      j["q_statement"] = rec.sentence_counts->question.statements;
      j["r_query"] = rec.sentence_counts->response.queries;
      j["r_statement"] = rec.sentence_counts->response.statements;
    }
    out << j.dump() << '\n';
  }
}

const EmotionLexicon& DefaultEmotionLexicon() {
  static const EmotionLexicon* lexicon = [] {
    auto* lex = new EmotionLexicon;
    auto add = [&](Emotion e, std::initializer_list<const char*> words) {
      for (const char* w : words) lex->emplace(w, e);
    };
    add(Emotion::kAnger,
        {"angry", "anger", "furious", "mad", "annoyed", "irritated", "rage",
         "outraged", "frustrated", "hate", "resent", "livid", "hostile",
         "infuriating", "fed"});
    add(Emotion::kDisgust,
        {"disgusting", "disgusted", "gross", "nasty", "revolting", "vile",
         "sickening", "awful", "repulsive", "yuck", "horrible", "foul",
         "loathe", "offensive", "distasteful"});
    add(Emotion::kFear,
        {"afraid", "scared", "fear", "terrified", "worried", "anxious",
         "nervous", "panic", "frightened", "dread", "worry", "scary",
         "alarmed", "uneasy", "concerned"});
    add(Emotion::kJoy,
        {"happy", "glad", "joy", "great", "wonderful", "relieved", "thrilled",
         "delighted", "grateful", "blessed", "excited", "love", "fantastic",
         "pleased", "cheerful"});
    add(Emotion::kSadness,
        {"sad", "depressed", "hopeless", "grief", "crying", "lonely",
         "miserable", "heartbroken", "unhappy", "sorrow", "devastated",
         "lost", "tears", "despair", "gloomy"});
    add(Emotion::kSurprise,
        {"surprised", "shocked", "amazed", "astonished", "unexpected",
         "wow", "stunned", "startled", "unbelievable", "sudden", "suddenly",
         "speechless", "incredible", "whoa", "baffled"});
    return lex;
  }();
  return *lexicon;
}

EmotionScores LexiconEmotions(std::string_view text,
                              const EmotionLexicon& lexicon,
                              const TokenizerConfig& tokenizer) {
  EmotionScores scores;
  auto tokens = Tokenize(text, tokenizer);
  if (tokens.empty()) {
    scores[Emotion::kNeutral] = 1.0;
    return scores;
  }
  size_t matched = 0;
  for (const auto& t : tokens) {
    auto it = lexicon.find(t);
    if (it == lexicon.end() || it->second == Emotion::kNeutral) continue;
    scores[it->second] += 1.0;
    ++matched;
  }
  const double total = static_cast<double>(tokens.size());
  for (double& v : scores.values) v /= total;
  scores[Emotion::kNeutral] =
      std::max(0.0, 1.0 - static_cast<double>(matched) / total);
  // The shares already sum to one; renormalize away rounding.
  const double sum = scores.Sum();
  for (double& v : scores.values) v /= sum;
  return scores;
}

PairEmotions EmotionSource::Get(const QRPair& pair) const {
  auto it = sidecar_.find(pair.pair_id);
  if (it != sidecar_.end()) return it->second;
  PairEmotions rec;
  rec.question = LexiconEmotions(pair.question_text, *lexicon_);
  rec.response = LexiconEmotions(pair.response_text, *lexicon_);
  return rec;
}

void EmotionSource::CheckJoin(const Corpus& corpus) const {
  for (const auto& [pair_id, _] : sidecar_) {
    if (!corpus.Find(pair_id)) {
      throw InvalidArgument("emotion sidecar names unknown pair_id '" +
                            pair_id + "'");
    }
  }
}

}  // namespace ohc
