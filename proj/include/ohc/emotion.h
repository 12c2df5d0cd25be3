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

// Seven-class emotion intensities per text: ingested from a sidecar file or
// estimated with a built-in lexicon.

#ifndef OHC_EMOTION_H_
#define OHC_EMOTION_H_

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

#include "ohc/corpus.h"
#include "ohc/textfeat.h"

namespace ohc {

// Fixed order used by every file format and feature schema.
enum class Emotion {
  kAnger = 0,
  kDisgust,
  kFear,
  kJoy,
  kSadness,
  kSurprise,
  kNeutral
};
inline constexpr size_t kNumEmotions = 7;
// "anger", "disgust", ...
const char* EmotionName(Emotion e);
// "ANGER", "DISGUST", ... as used in feature column names.
std::string EmotionColumnSuffix(Emotion e);

struct EmotionScores {
  std::array<double, kNumEmotions> values{};

  double operator[](Emotion e) const {
    return values[static_cast<size_t>(e)];
  }
  double& operator[](Emotion e) { return values[static_cast<size_t>(e)]; }
  double Sum() const;
  Emotion Argmax() const;
  // Each value in [0, 1] and the sum within `tolerance` of 1.
  bool IsValid(double tolerance = 1e-6) const;
  bool operator==(const EmotionScores&) const = default;
};

// Optional precomputed sentence-kind counts carried alongside scores.
struct SentenceCountsOverride {
  SentenceKindCounts question;
  SentenceKindCounts response;
  bool operator==(const SentenceCountsOverride&) const = default;
};

struct PairEmotions {
  EmotionScores question;
  EmotionScores response;
  std::optional<SentenceCountsOverride> sentence_counts;
  bool operator==(const PairEmotions&) const = default;
};

using EmotionTable = std::map<std::string, PairEmotions>;

// Sidecar JSONL: {"pair_id", "q_emotions"[7], "r_emotions"[7]} in the fixed
// order. Optional integer fields q_query, q_statement, r_query, r_statement
// override rule-based sentence counts. Records whose scores sum further than
// 1e-3 from 1 are rejected with the pair id.
EmotionTable ParseEmotionSidecar(std::istream& in);
EmotionTable LoadEmotionScores(const std::string& path);
void WriteEmotionSidecar(std::ostream& out, const EmotionTable& table);

using EmotionLexicon = std::unordered_map<std::string, Emotion>;

// Small built-in lexicon over the six valenced emotions.
const EmotionLexicon& DefaultEmotionLexicon();

// Per-emotion share of matched tokens among all tokens; neutral takes the
// unmatched share. Empty or unmatched text is fully neutral.
EmotionScores LexiconEmotions(std::string_view text,
                              const EmotionLexicon& lexicon,
                              const TokenizerConfig& tokenizer = {});

// Resolves scores for a pair: sidecar first, lexicon otherwise.
class EmotionSource {
 public:
  EmotionSource() : lexicon_(&DefaultEmotionLexicon()) {}
  explicit EmotionSource(EmotionTable sidecar,
                         const EmotionLexicon* lexicon = nullptr)
      : sidecar_(std::move(sidecar)),
        lexicon_(lexicon ? lexicon : &DefaultEmotionLexicon()) {}

  PairEmotions Get(const QRPair& pair) const;
  bool has_sidecar() const { return !sidecar_.empty(); }

  // Throws InvalidArgument when the sidecar names a pair absent from corpus.
  void CheckJoin(const Corpus& corpus) const;

 private:
  EmotionTable sidecar_;
  const EmotionLexicon* lexicon_;
};

}  // namespace ohc

#endif  // OHC_EMOTION_H_
