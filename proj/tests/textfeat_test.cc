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

#include "ohc/textfeat.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace ohc {
namespace {

TEST(SplitSentencesTest, HandCases) {
  EXPECT_TRUE(SplitSentences("").empty());
  EXPECT_EQ(SplitSentences("Have you at least seen your doctor?").size(), 1u);
  EXPECT_EQ(SplitSentences("Sleep well, eat on time and maintain your fluid "
                           "intake and see if all this makes any difference "
                           "to your headache. Good luck!")
                .size(),
            2u);
}

TEST(CountSentenceKindsTest, HandCases) {
  EXPECT_EQ(CountSentenceKinds("Should I go get a brain scan?"),
            (SentenceKindCounts{1, 0}));
  EXPECT_EQ(CountSentenceKinds(""), (SentenceKindCounts{0, 0}));
  EXPECT_EQ(CountSentenceKinds("I have CT with contrast done. Nothing wrong. "
                               "What can I do to get rid of this headache?"),
            (SentenceKindCounts{1, 2}));
}

TEST(CountSentenceKindsTest, KindsPartitionSentences) {
  for (const char* text :
       {"One. Two? Three!", "no terminator at all", "?? what. ok", "a?b?c.",
        "Dr. Smith said so. Really?"}) {
    SentenceKindCounts k = CountSentenceKinds(text);
    EXPECT_EQ(static_cast<size_t>(k.queries + k.statements),
              SplitSentences(text).size())
        << text;
  }
}

TEST(WordCountTest, HandCases) {
  EXPECT_EQ(WordCount(""), 0);
  EXPECT_EQ(WordCount("Good luck!"), 2);
  EXPECT_EQ(WordCount("—  …"), 0);
}

TEST(TfidfTest, SingleTermIdf) {
  TfidfModel m = TfidfModel::Fit({"a", "a"}, 1, {.min_token_length = 1});
  ASSERT_EQ(m.size(), 1);
  EXPECT_EQ(m.terms()[0], "a");
  EXPECT_DOUBLE_EQ(m.idf()[0], std::log(3.0 / 3.0) + 1.0);
}

TEST(TfidfTest, UbiquitousTokenHasMinimumIdf) {
  TfidfModel m = TfidfModel::Fit({"aa bb", "aa cc", "aa bb dd"}, 1);
  const double idf_aa = m.idf()[static_cast<size_t>(m.IndexOf("aa"))];
  for (double v : m.idf()) EXPECT_LE(idf_aa, v);
}

TEST(TfidfTest, MinDfFilters) {
  TfidfModel m = TfidfModel::Fit({"a b", "a c"}, 2, {.min_token_length = 1});
  ASSERT_EQ(m.size(), 1);
  EXPECT_EQ(m.terms()[0], "a");
}

TEST(TfidfTest, VectorMatchesHandComputation) {
  const TokenizerConfig tok{.min_token_length = 1};
  TfidfModel m = TfidfModel::Fit({"a b", "a c"}, 1, tok);
  // idf(a) = ln(3/3) + 1, idf(b) = ln(3/2) + 1; raw counts are 1 each.
  const double wa = 1.0;
  const double wb = std::log(1.5) + 1.0;
  const double norm = std::hypot(wa, wb);
  SparseVector v = m.Vectorize("a b");
  ASSERT_EQ(v.nnz(), 2u);
  EXPECT_NEAR(v.values[static_cast<size_t>(
                  std::find(v.indices.begin(), v.indices.end(), m.IndexOf("a")) -
                  v.indices.begin())],
              wa / norm, 1e-12);
  EXPECT_NEAR(v.Norm(), 1.0, 1e-9);
  // Cosine of "a b" and "a c": only the shared term contributes.
  EXPECT_NEAR(m.CosineSimilarity("a b", "a c"), (wa / norm) * (wa / norm),
              1e-12);
}

TEST(TfidfTest, OutOfVocabularyGivesZeroVector) {
  TfidfModel m = TfidfModel::Fit({"aa bb", "aa cc"}, 1);
  SparseVector v = m.Vectorize("zz yy");
  EXPECT_EQ(v.nnz(), 0u);
  EXPECT_EQ(v.Norm(), 0.0);
}

TEST(TfidfTest, CosineBoundsAndSymmetry) {
  TfidfModel m =
      TfidfModel::Fit({"red green blue", "green yellow", "blue black red"}, 1);
  EXPECT_NEAR(m.CosineSimilarity("red green", "red green"), 1.0, 1e-9);
  EXPECT_EQ(m.CosineSimilarity("red", "yellow"), 0.0);
  std::mt19937_64 rng(3);
  const std::vector<std::string> words = {"red", "green", "blue", "yellow",
                                          "black", "white"};
  std::uniform_int_distribution<size_t> pick(0, words.size() - 1);
  for (int t = 0; t < 50; ++t) {
    std::string q, r;
    for (int k = 0; k < 4; ++k) q += words[pick(rng)] + " ";
    for (int k = 0; k < 4; ++k) r += words[pick(rng)] + " ";
    const double s = m.CosineSimilarity(q, r);
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0 + 1e-12);
    EXPECT_DOUBLE_EQ(s, m.CosineSimilarity(r, q));
  }
}

TEST(TfidfTest, RepeatedDocumentKeepsIdfOrdering) {
  std::vector<std::string> docs = {"aa bb cc", "aa bb", "aa dd", "ee"};
  TfidfModel before = TfidfModel::Fit(docs, 1);
  docs.push_back("aa bb");
  TfidfModel after = TfidfModel::Fit(docs, 1);
  for (int i = 0; i < before.size(); ++i) {
    for (int j = 0; j < before.size(); ++j) {
      const auto& ti = before.terms()[static_cast<size_t>(i)];
      const auto& tj = before.terms()[static_cast<size_t>(j)];
      if (before.idf()[static_cast<size_t>(i)] <
          before.idf()[static_cast<size_t>(j)]) {
        EXPECT_LE(after.idf()[static_cast<size_t>(after.IndexOf(ti))],
                  after.idf()[static_cast<size_t>(after.IndexOf(tj))]);
      }
    }
  }
}

TEST(TokenizeTest, LowercasesAndDropsShortTokens) {
  EXPECT_EQ(Tokenize("A Big-Deal, x2 y"),
            (std::vector<std::string>{"big", "deal", "x2"}));
}

}  // namespace
}  // namespace ohc
