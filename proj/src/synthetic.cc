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

#include "ohc/synthetic.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

#include "ohc/emotion.h"
#include "ohc/errors.h"
#include "ohc/textfeat.h"

namespace ohc {
namespace {

constexpr char kConsonants[] = "bdfgklmnprstvz";
constexpr char kVowels[] = "aeiou";
constexpr int kSyllables = 14 * 5;
constexpr int kWords = kSyllables * kSyllables * kSyllables;

std::string PadId(const std::string& prefix, size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06zu", i);
  return prefix + "-" + buf;
}

// Joins words into sentences of 5 to 9 words; each sentence ends with '?'
// with probability `query_share`, else '.'.
std::string Sentences(const std::vector<std::string>& words, double query_share,
                      std::mt19937_64& rng) {
  std::uniform_int_distribution<int> len(5, 9);
  std::bernoulli_distribution query(query_share);
  std::string out;
  size_t i = 0;
  while (i < words.size()) {
    const size_t end = std::min(words.size(), i + static_cast<size_t>(len(rng)));
    if (!out.empty()) out += ' ';
    for (size_t k = i; k < end; ++k) {
      if (k > i) out += ' ';
      out += words[k];
    }
    out += query(rng) ? '?' : '.';
    i = end;
  }
  return out;
}

UserProfile RandomUser(std::mt19937_64& rng, double tenure_scale,
                       double expert_share) {
  UserProfile u;
  u.user_id = "u" + std::to_string(std::uniform_int_distribution<int>(0, 999)(rng));
  std::exponential_distribution<double> tenure(1.0 / (2.0 * 365 * 86400));
  u.tenure_seconds = static_cast<int64_t>(tenure(rng) * tenure_scale);
  std::normal_distribution<double> log_count(3.0, 1.5);
  u.platform_response_count =
      static_cast<int64_t>(std::floor(std::exp(log_count(rng))));
  u.med_expert = std::bernoulli_distribution(expert_share)(rng);
  return u;
}

std::array<std::vector<std::string>, kNumEmotions> LexiconByEmotion() {
  std::array<std::vector<std::string>, kNumEmotions> out;
  for (const auto& [word, emotion] : DefaultEmotionLexicon()) {
    out[static_cast<size_t>(emotion)].push_back(word);
  }
  for (auto& v : out) std::sort(v.begin(), v.end());
  return out;
}

}  // namespace

std::vector<std::string> PseudoVocabulary(int size) {
  if (size < 1 || size > kWords / 2) {
    throw InvalidArgument("pseudo vocabulary size out of range");
  }
  std::set<std::string> reserved;
  for (const auto& [word, emotion] : DefaultEmotionLexicon()) {
    reserved.insert(word);
  }
  for (const char* w : {"who", "what", "when", "where", "why", "how", "should",
                        "can", "could", "would", "do", "does", "did", "is",
                        "are"}) {
    reserved.insert(w);
  }
  std::vector<std::string> out;
  // 7919 is coprime with kWords, so the walk visits distinct words.
  for (int64_t i = 0; static_cast<int>(out.size()) < size; ++i) {
    int64_t code = (i * 7919 + 13) % kWords;
    std::string w;
    for (int s = 0; s < 3; ++s) {
      const int syl = static_cast<int>(code % kSyllables);
      code /= kSyllables;
      w += kConsonants[syl / 5];
      w += kVowels[syl % 5];
    }
    if (!reserved.count(w)) out.push_back(w);
  }
  return out;
}

SyntheticIsrCorpus GenerateIsrCorpus(const SyntheticIsrOptions& o) {
  if (o.pairs < 4) throw InvalidArgument("synthetic corpus needs >= 4 pairs");
  if (o.conditions.empty()) throw InvalidArgument("no conditions given");
  if (!(o.positive_rate > 0.0 && o.positive_rate < 1.0)) {
    throw InvalidArgument("positive_rate must lie in (0, 1)");
  }
  if (!(o.copy_min >= 0.0 && o.copy_min <= o.copy_max && o.copy_max <= 1.0)) {
    throw InvalidArgument("copy share bounds must satisfy 0 <= min <= max <= 1");
  }
  if (!(o.emotion_max >= 0.0 && o.emotion_max < 1.0)) {
    throw InvalidArgument("emotion_max must lie in [0, 1)");
  }
  if (o.question_words_min < 1 || o.question_words_max < o.question_words_min ||
      o.response_words_min < 1 || o.response_words_max < o.response_words_min) {
    throw InvalidArgument("word count bounds are inconsistent");
  }
  const std::vector<std::string> vocab = PseudoVocabulary(o.vocabulary);
  const auto lexicon = LexiconByEmotion();
  std::mt19937_64 rng(o.seed);
  std::uniform_int_distribution<size_t> pick_word(0, vocab.size() - 1);
  std::uniform_int_distribution<size_t> pick_cond(0, o.conditions.size() - 1);
  std::uniform_int_distribution<int> q_len(o.question_words_min,
                                           o.question_words_max);
  std::uniform_int_distribution<int> r_len(o.response_words_min,
                                           o.response_words_max);
  std::uniform_real_distribution<double> copy(o.copy_min, o.copy_max);
  std::uniform_real_distribution<double> emo(0.0, o.emotion_max);
  std::uniform_int_distribution<size_t> pick_emotion(0, kNumEmotions - 2);
  std::normal_distribution<double> noise(0.0, o.noise);
  std::bernoulli_distribution issq(o.issq_rate);

  std::vector<QRPair> pairs(o.pairs);
  std::vector<double> eps(o.pairs);
  for (size_t i = 0; i < o.pairs; ++i) {
    QRPair& p = pairs[i];
    p.pair_id = PadId(o.id_prefix, i);
    p.condition = o.conditions[pick_cond(rng)];
    std::vector<std::string> qw(static_cast<size_t>(q_len(rng)));
    for (auto& w : qw) w = vocab[pick_word(rng)];
    p.question_text = Sentences(qw, 0.5, rng);

    const auto n_r = static_cast<size_t>(r_len(rng));
    const auto n_copy = static_cast<size_t>(std::lround(copy(rng) * n_r));
    const auto n_emo = std::min(
        n_r - n_copy, static_cast<size_t>(std::lround(emo(rng) * n_r)));
    std::vector<std::string> rw;
    std::uniform_int_distribution<size_t> pick_q(0, qw.size() - 1);
    for (size_t k = 0; k < n_copy; ++k) rw.push_back(qw[pick_q(rng)]);
    for (size_t k = 0; k < n_emo; ++k) {
      const auto& words = lexicon[pick_emotion(rng)];
      rw.push_back(words[std::uniform_int_distribution<size_t>(
          0, words.size() - 1)(rng)]);
    }
    while (rw.size() < n_r) rw.push_back(vocab[pick_word(rng)]);
    std::shuffle(rw.begin(), rw.end(), rng);
    p.response_text = Sentences(rw, 0.2, rng);

    p.response_index = std::uniform_int_distribution<int64_t>(1, 10)(rng);
    p.questioner_reply_ratio = std::uniform_real_distribution<double>(0, 1)(rng);
    p.questioner = RandomUser(rng, o.tenure_scale, 0.05);
    p.responder = RandomUser(rng, o.tenure_scale, 0.10);
    p.issq_label = issq(rng);
    eps[i] = noise(rng);
  }

  std::vector<std::string> docs;
  for (const auto& p : pairs) {
    docs.push_back(p.question_text);
    docs.push_back(p.response_text);
  }
  TfidfModel tfidf = TfidfModel::Fit(docs, 2);
  SyntheticIsrCorpus out;
  std::vector<double> score(o.pairs);
  std::vector<double> eligible;
  for (size_t i = 0; i < o.pairs; ++i) {
    const QRPair& p = pairs[i];
    out.similarity.push_back(
        tfidf.CosineSimilarity(p.question_text, p.response_text));
    out.neutral.push_back(LexiconEmotions(p.response_text,
                                          DefaultEmotionLexicon())[Emotion::kNeutral]);
    score[i] = 0.6 * out.similarity[i] + 0.4 * out.neutral[i] + eps[i];
    if (*p.issq_label) eligible.push_back(score[i]);
  }
  if (o.threshold) {
    out.threshold = *o.threshold;
  } else {
    if (eligible.empty()) throw InvalidArgument("no informational questions drawn");
    std::sort(eligible.begin(), eligible.end());
    const auto k = static_cast<size_t>(
        std::floor((1.0 - o.positive_rate) * static_cast<double>(eligible.size())));
    out.threshold = eligible[std::min(k, eligible.size() - 1)] -
                    (k < eligible.size() && k > 0
                         ? 0.5 * (eligible[k] - eligible[k - 1])
                         : 0.0);
  }
  for (size_t i = 0; i < o.pairs; ++i) {
    if (*pairs[i].issq_label) pairs[i].isr_label = score[i] > out.threshold;
  }
  out.corpus = Corpus(std::move(pairs), "synthetic-isr seed=" +
                                            std::to_string(o.seed));
  return out;
}

SyntheticIsrOptions ShiftedIsrOptions(const SyntheticIsrOptions& source,
                                      double threshold,
                                      const std::string& condition) {
  SyntheticIsrOptions o = source;
  o.threshold = threshold;
  o.conditions = {condition};
  o.id_prefix = source.id_prefix + "-" + condition;
  o.copy_min = std::min(1.0, source.copy_min + 0.1);
  o.copy_max = std::min(1.0, source.copy_max + 0.1);
  o.emotion_max = std::min(0.9, source.emotion_max + 0.05);
  o.question_words_min = source.question_words_min + 5;
  o.question_words_max = source.question_words_max + 10;
  o.response_words_min = source.response_words_min + 5;
  o.response_words_max = source.response_words_max + 10;
  o.tenure_scale = source.tenure_scale * 2.0;
  o.seed = source.seed ^ 0x9e3779b97f4a7c15ULL;
  return o;
}

SyntheticHelpfulness GenerateHelpfulnessCorpus(
    const SyntheticHelpfulnessOptions& o) {
  if (o.responses < 10) throw InvalidArgument("need >= 10 responses");
  if (!(o.isr_odds_ratio > 0.0)) throw InvalidArgument("odds ratio must be > 0");
  if (!(o.base_rate > 0.0 && o.base_rate < 1.0)) {
    throw InvalidArgument("base_rate must lie in (0, 1)");
  }
  const std::vector<std::string> vocab = PseudoVocabulary(60);
  std::mt19937_64 rng(o.seed);
  std::uniform_int_distribution<size_t> pick_word(0, vocab.size() - 1);
  std::uniform_int_distribution<size_t> pick_cond(0, o.conditions.size() - 1);
  std::normal_distribution<double> log_len(5.5, 0.7);
  std::bernoulli_distribution isr(o.isr_rate);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double beta_isr = std::log(o.isr_odds_ratio);
  const double alpha =
      std::log(o.base_rate / (1.0 - o.base_rate)) - beta_isr * o.isr_rate;
  const double mean_len = std::exp(5.5 + 0.5 * 0.7 * 0.7);

  SyntheticHelpfulness out;
  std::vector<QRPair> pairs(o.responses);
  for (size_t i = 0; i < o.responses; ++i) {
    QRPair& p = pairs[i];
    p.pair_id = PadId("help", i);
    p.condition = o.conditions[pick_cond(rng)];
    p.question_text = vocab[pick_word(rng)] + " " + vocab[pick_word(rng)] + "?";
    const auto target =
        static_cast<size_t>(std::clamp(std::exp(log_len(rng)), 20.0, 5000.0));
    std::string text;
    while (text.size() < target) {
      if (!text.empty()) text += ' ';
      text += vocab[pick_word(rng)];
    }
    text += '.';
    p.response_text = std::move(text);
    p.questioner = RandomUser(rng, 1.0, 0.05);
    p.responder = RandomUser(rng, 1.0, 0.10);
    const int r = isr(rng) ? 1 : 0;
    const double eta =
        alpha + beta_isr * r +
        o.length_coef * (static_cast<double>(CharLength(p.response_text)) - mean_len);
    p.helpful = unif(rng) < 1.0 / (1.0 + std::exp(-eta));
    p.issq_label = true;
    p.isr_label = r == 1;
    out.isr.push_back(r);
  }
  out.corpus = Corpus(std::move(pairs),
                      "synthetic-helpfulness seed=" + std::to_string(o.seed));
  return out;
}

}  // namespace ohc
