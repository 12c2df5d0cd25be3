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

#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "ohc/errors.h"
#include "test_util.h"

namespace ohc {
namespace {

using testing::MakePair;

std::string Record(const std::string& id, bool with_question = true) {
  std::string s = "{\"pair_id\":\"" + id + "\",\"condition\":\"cancer\",";
  if (with_question) s += "\"question_text\":\"Is it bad?\",";
  s +=
      "\"response_text\":\"See a doctor.\",\"response_index\":1,"
      "\"questioner_reply_ratio\":0.5,"
      "\"q_user\":{\"user_id\":\"u1\",\"tenure_seconds\":10,"
      "\"platform_response_count\":3,\"med_expert\":false},"
      "\"r_user\":{\"user_id\":\"u2\",\"tenure_seconds\":20,"
      "\"platform_response_count\":7,\"med_expert\":true},"
      "\"issq_label\":true,\"isr_label\":null}";
  return s;
}

Corpus Labeled(size_t n, size_t positives, const std::string& condition) {
  std::vector<QRPair> pairs;
  for (size_t i = 0; i < n; ++i) {
    QRPair p = MakePair(condition + std::to_string(i), condition, "q", "r");
    p.issq_label = true;
    p.isr_label = i < positives;
    pairs.push_back(p);
  }
  return Corpus(std::move(pairs), "test");
}

TEST(ParseCorpusTest, EmptyStreamGivesEmptyCorpus) {
  std::istringstream in("");
  EXPECT_TRUE(ParseCorpus(in).empty());
}

TEST(ParseCorpusTest, ReadsAllFields) {
  std::istringstream in(Record("p1") + "\n");
  Corpus c = ParseCorpus(in);
  ASSERT_EQ(c.size(), 1u);
  const QRPair& p = c[0];
  EXPECT_EQ(p.pair_id, "p1");
  EXPECT_EQ(p.question_text, "Is it bad?");
  EXPECT_DOUBLE_EQ(p.questioner_reply_ratio, 0.5);
  EXPECT_EQ(p.responder.platform_response_count, 7);
  EXPECT_TRUE(p.responder.med_expert);
  EXPECT_EQ(p.issq_label, true);
  EXPECT_FALSE(p.isr_label.has_value());
  EXPECT_FALSE(p.helpful.has_value());
}

TEST(ParseCorpusTest, MissingQuestionCitesFieldAndLine) {
  std::istringstream in(Record("p1") + "\n" + Record("p2", false) + "\n");
  try {
    ParseCorpus(in);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("question_text"), std::string::npos);
  }
}

TEST(ParseCorpusTest, RejectsDuplicateIdsAndUndeclaredConditions) {
  std::istringstream dup(Record("p1") + "\n" + Record("p1") + "\n");
  EXPECT_THROW(ParseCorpus(dup), ParseError);
  std::istringstream undeclared(Record("p1") + "\n");
  ParseOptions options;
  options.declared_conditions = {"diabetes"};
  EXPECT_THROW(ParseCorpus(undeclared, options), ParseError);
}

TEST(ParseCorpusTest, RoundTripIsIdentity) {
  SyntheticIsrOptions o;
  o.pairs = 40;
  o.issq_rate = 0.7;
  o.seed = 5;
  Corpus c = GenerateIsrCorpus(o).corpus;
  std::ostringstream out;
  WriteCorpus(out, c);
  std::istringstream in(out.str());
  Corpus back = ParseCorpus(in, {.provenance = c.provenance()});
  EXPECT_EQ(back.pairs(), c.pairs());
  std::ostringstream again;
  WriteCorpus(again, back);
  EXPECT_EQ(again.str(), out.str());
}

TEST(LabelSummaryTest, CountsQuestionsOnceAndFormatsRatios) {
  // 1,947 questions with 1,621 informational ones; 52 of those get a second
  // response so that 1,673 responses carry an ISR label, 1,231 positive.
  std::vector<QRPair> pairs;
  size_t isr_positive = 0;
  for (size_t i = 0; i < 1947; ++i) {
    const bool issq = i < 1621;
    const int responses = issq && i < 52 ? 2 : 1;
    for (int r = 0; r < responses; ++r) {
      QRPair p = MakePair("p" + std::to_string(i) + "_" + std::to_string(r),
                          "cancer", "question " + std::to_string(i), "answer");
      p.issq_label = issq;
      if (issq) {
        p.isr_label = isr_positive < 1231;
        isr_positive += *p.isr_label;
      }
      pairs.push_back(p);
    }
  }
  LabelSummary s = SummarizeLabels(Corpus(pairs, "table"));
  EXPECT_EQ(FormatRatio(s.total.issq_positive, s.total.issq_total),
            "1621/1947 (83%)");
  EXPECT_EQ(FormatRatio(s.total.isr_positive, s.total.isr_total),
            "1231/1673 (74%)");
  EXPECT_NE(FormatLabelSummary(s).find("1621/1947 (83%)"), std::string::npos);
}

TEST(StratifiedSampleTest, ZeroRequestAndFullStratum) {
  std::vector<QRPair> pairs;
  for (int i = 0; i < 30; ++i) {
    pairs.push_back(MakePair("c" + std::to_string(i), "cancer", "q", "r"));
    pairs.push_back(MakePair("d" + std::to_string(i), "diabetes", "q", "r"));
  }
  Corpus c(pairs, "test");
  Corpus none = StratifiedSample(c, {{"cancer", 0}, {"diabetes", 5}}, 1);
  EXPECT_EQ(none.size(), 5u);
  for (const auto& p : none.pairs()) EXPECT_EQ(p.condition, "diabetes");
  for (uint64_t seed : {1u, 2u, 99u}) {
    Corpus full = StratifiedSample(c, {{"cancer", 30}}, seed);
    std::set<std::string> ids;
    for (const auto& p : full.pairs()) ids.insert(p.pair_id);
    EXPECT_EQ(ids.size(), 30u);
  }
}

TEST(StratifiedSampleTest, OversizedRequestWarnsInsteadOfFailing) {
  Corpus c = Labeled(4, 2, "cancer");
  Corpus s = StratifiedSample(c, {{"cancer", 10}}, 3);
  EXPECT_EQ(s.size(), 4u);
  EXPECT_NE(s.provenance().find("warning"), std::string::npos);
}

TEST(StratifiedSampleTest, DeterministicPerSeedAndVariesAcrossSeeds) {
  Corpus c = Labeled(100, 50, "cancer");
  std::ostringstream a, b;
  WriteCorpus(a, StratifiedSample(c, {{"cancer", 10}}, 7));
  WriteCorpus(b, StratifiedSample(c, {{"cancer", 10}}, 7));
  EXPECT_EQ(a.str(), b.str());
  // Two independent 10-of-100 draws coincide with probability 1/C(100,10);
  // over nine seed pairs, any coincidence points at a seeding defect.
  std::set<std::string> distinct;
  for (uint64_t seed = 0; seed < 10; ++seed) {
    std::ostringstream s;
    WriteCorpus(s, StratifiedSample(c, {{"cancer", 10}}, seed));
    distinct.insert(s.str());
  }
  EXPECT_EQ(distinct.size(), 10u);
}

TEST(HoldoutSplitTest, ExactDivisionPreservesClassRatio) {
  Corpus c = Labeled(10, 5, "cancer");
  auto [train, test] = HoldoutSplit(c, 0.8, 1, LabelField::kIsr);
  EXPECT_EQ(train.size(), 8u);
  EXPECT_EQ(test.size(), 2u);
  int train_pos = 0;
  for (const auto& p : train.pairs()) train_pos += *p.isr_label;
  EXPECT_EQ(train_pos, 4);
}

TEST(HoldoutSplitTest, PartitionsTheInput) {
  Corpus c = Labeled(37, 11, "cancer");
  auto [train, test] = HoldoutSplit(c, 0.7, 4, LabelField::kIsr);
  std::multiset<std::string> ids;
  for (const auto& p : train.pairs()) ids.insert(p.pair_id);
  for (const auto& p : test.pairs()) ids.insert(p.pair_id);
  std::multiset<std::string> expected;
  for (const auto& p : c.pairs()) expected.insert(p.pair_id);
  EXPECT_EQ(ids, expected);
}

TEST(HoldoutSplitTest, LargeSplitMatchesPerClassRecount) {
  // Recount: each class contributes floor or ceil of 0.8 of its size.
  const size_t n = 1947;
  const size_t positives = 1621;
  Corpus c = Labeled(n, positives, "cancer");
  auto [train, test] = HoldoutSplit(c, 0.8, 11, LabelField::kIsr);
  EXPECT_TRUE(train.size() == 1557 || train.size() == 1558) << train.size();
  size_t pos = 0;
  for (const auto& p : train.pairs()) pos += *p.isr_label;
  const double want_pos = 0.8 * positives;
  const double want_neg = 0.8 * (n - positives);
  EXPECT_LE(std::abs(static_cast<double>(pos) - want_pos), 1.0);
  EXPECT_LE(std::abs(static_cast<double>(train.size() - pos) - want_neg), 1.0);
}

TEST(HoldoutSplitTest, PureFunctionOfSeed) {
  Corpus c = Labeled(50, 20, "cancer");
  auto a = HoldoutSplit(c, 0.6, 3, LabelField::kIsr);
  auto b = HoldoutSplit(c, 0.6, 3, LabelField::kIsr);
  EXPECT_EQ(a.first.pairs(), b.first.pairs());
  EXPECT_EQ(a.second.pairs(), b.second.pairs());
}

TEST(HoldoutSplitTest, StratifyingRequiresLabels) {
  std::vector<QRPair> pairs = {MakePair("a", "cancer", "q", "r"),
                               MakePair("b", "cancer", "q", "r")};
  EXPECT_THROW(HoldoutSplit(Corpus(pairs, "t"), 0.5, 1, LabelField::kIsr),
               InvalidArgument);
  EXPECT_NO_THROW(HoldoutSplit(Corpus(pairs, "t"), 0.5, 1, std::nullopt));
}

}  // namespace
}  // namespace ohc
