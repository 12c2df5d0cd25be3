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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "ohc/errors.h"
#include "test_util.h"

namespace ohc {
namespace {

std::string SidecarLine(const std::string& id, const std::string& q,
                        const std::string& r) {
  return "{\"pair_id\":\"" + id + "\",\"q_emotions\":" + q +
         ",\"r_emotions\":" + r + "}\n";
}

TEST(EmotionSidecarTest, OneHotRecordIsValid) {
  std::istringstream in(SidecarLine("p1", "[0,0,0,1,0,0,0]", "[0,0,0,0,0,0,1]"));
  EmotionTable t = ParseEmotionSidecar(in);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_TRUE(t.at("p1").question.IsValid());
  EXPECT_EQ(t.at("p1").question.Argmax(), Emotion::kJoy);
}

TEST(EmotionSidecarTest, RejectsScoresNotSummingToOne) {
  std::istringstream in(
      SidecarLine("bad7", "[0.2,0.2,0.2,0.2,0,0,0]", "[0,0,0,0,0,0,1]"));
  try {
    ParseEmotionSidecar(in);
    FAIL() << "expected rejection";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("bad7"), std::string::npos);
  }
}

TEST(EmotionSidecarTest, RoundTripPreservesValues) {
  std::mt19937_64 rng(17);
  std::gamma_distribution<double> gamma(1.0, 1.0);
  EmotionTable table;
  for (int i = 0; i < 25; ++i) {
    PairEmotions pe;
    for (EmotionScores* s : {&pe.question, &pe.response}) {
      double sum = 0.0;
      for (double& v : s->values) sum += v = gamma(rng);
      for (double& v : s->values) v /= sum;
    }
    if (i % 5 == 0) pe.sentence_counts = SentenceCountsOverride{{1, 2}, {0, 3}};
    table["p" + std::to_string(i)] = pe;
  }
  std::ostringstream out;
  WriteEmotionSidecar(out, table);
  std::istringstream in(out.str());
  EmotionTable back = ParseEmotionSidecar(in);
  ASSERT_EQ(back.size(), table.size());
  for (const auto& [id, pe] : table) {
    const PairEmotions& got = back.at(id);
    for (size_t k = 0; k < kNumEmotions; ++k) {
      EXPECT_NEAR(got.question.values[k], pe.question.values[k], 1e-9);
      EXPECT_NEAR(got.response.values[k], pe.response.values[k], 1e-9);
    }
    EXPECT_EQ(got.sentence_counts, pe.sentence_counts);
  }
}

TEST(LexiconEmotionsTest, EmptyTextIsNeutral) {
  EmotionScores s = LexiconEmotions("", DefaultEmotionLexicon());
  EXPECT_EQ(s[Emotion::kNeutral], 1.0);
  EXPECT_EQ(s.Sum(), 1.0);
}

TEST(LexiconEmotionsTest, OneTaggedOneUntagged) {
  EmotionScores s = LexiconEmotions("scared table", DefaultEmotionLexicon());
  EXPECT_NEAR(s[Emotion::kFear], 0.5, 1e-12);
  EXPECT_NEAR(s[Emotion::kNeutral], 0.5, 1e-12);
}

TEST(LexiconEmotionsTest, NoMatchesIsNeutral) {
  EmotionScores s =
      LexiconEmotions("the table is by the window", DefaultEmotionLexicon());
  EXPECT_EQ(s[Emotion::kNeutral], 1.0);
}

TEST(LexiconEmotionsTest, ValidAndOrderInvariant) {
  std::vector<std::string> words = {"happy", "sad",  "table", "worried",
                                    "angry", "door", "glad",  "gross"};
  std::mt19937_64 rng(2);
  for (int t = 0; t < 20; ++t) {
    std::shuffle(words.begin(), words.end(), rng);
    std::string a, b;
    for (size_t k = 0; k < 5; ++k) a += words[k] + " ";
    for (size_t k = 5; k-- > 0;) b += words[k] + " ";
    EmotionScores sa = LexiconEmotions(a, DefaultEmotionLexicon());
    EmotionScores sb = LexiconEmotions(b, DefaultEmotionLexicon());
    EXPECT_TRUE(sa.IsValid());
    for (size_t k = 0; k < kNumEmotions; ++k) {
      EXPECT_NEAR(sa.values[k], sb.values[k], 1e-15);
      EXPECT_GE(sa.values[k], 0.0);
      EXPECT_LE(sa.values[k], 1.0);
    }
  }
}

TEST(EmotionSourceTest, SidecarTakesPrecedence) {
  QRPair p = testing::MakePair("p1", "cancer", "I am scared", "great news");
  EmotionTable t;
  t["p1"].question[Emotion::kSadness] = 1.0;
  t["p1"].response[Emotion::kNeutral] = 1.0;
  EmotionSource source(t);
  EXPECT_EQ(source.Get(p).question.Argmax(), Emotion::kSadness);
  EmotionSource fallback;
  EXPECT_EQ(fallback.Get(p).question.Argmax(), Emotion::kFear);
}

TEST(EmotionSourceTest, CheckJoinFlagsUnknownIds) {
  EmotionTable t;
  t["ghost"].question[Emotion::kNeutral] = 1.0;
  t["ghost"].response[Emotion::kNeutral] = 1.0;
  Corpus c({testing::MakePair("p1", "cancer", "q", "r")}, "t");
  EXPECT_THROW(EmotionSource(t).CheckJoin(c), InvalidArgument);
}

}  // namespace
}  // namespace ohc
