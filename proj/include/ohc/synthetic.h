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

// Seeded synthetic corpora with known ground truth.
//
// The ISR generator writes question/response texts from a pseudo-word
// vocabulary. A response copies a random share of its question's words and
// mixes in emotion-lexicon words, so TF-IDF similarity and the lexicon's
// neutral score vary across pairs. The label is
//
//   isr = 1{0.6 * TFIDF_CS + 0.4 * R_NEUTRAL + N(0, noise^2) > tau}
//
// with tau at the quantile that yields the requested positive rate, unless a
// fixed tau is supplied. All other metadata is drawn independently of it.

#ifndef OHC_SYNTHETIC_H_
#define OHC_SYNTHETIC_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ohc/corpus.h"

namespace ohc {

struct SyntheticIsrOptions {
  size_t pairs = 2000;
  std::vector<std::string> conditions = {"cancer", "cardiovascular",
                                         "diabetes", "neurological"};
  std::string id_prefix = "syn";
  double positive_rate = 0.74;
  std::optional<double> threshold;
  double noise = 0.02;
  // Share of pairs whose question is informational-seeking. Pairs outside it
  // get issq_label = false and no ISR label.
  double issq_rate = 1.0;
  int vocabulary = 1500;
  double copy_min = 0.0;
  double copy_max = 0.8;
  double emotion_max = 0.5;  // upper bound of the emotion-word share
  int question_words_min = 20;
  int question_words_max = 40;
  int response_words_min = 15;
  int response_words_max = 35;
  double tenure_scale = 1.0;
  uint64_t seed = 0;
};

struct SyntheticIsrCorpus {
  Corpus corpus;
  double threshold = 0.0;
  // Per pair, in corpus order.
  std::vector<double> similarity;
  std::vector<double> neutral;
};

SyntheticIsrCorpus GenerateIsrCorpus(const SyntheticIsrOptions& options);

// Same labeling rule and vocabulary with shifted covariates: higher copy
// shares, longer texts, more emotion words, longer tenures, and a single new
// condition. `threshold` should come from the source corpus.
SyntheticIsrOptions ShiftedIsrOptions(const SyntheticIsrOptions& source,
                                      double threshold,
                                      const std::string& condition = "pregnancy");

struct SyntheticHelpfulnessOptions {
  size_t responses = 20000;
  double isr_rate = 0.7;
  double isr_odds_ratio = 1.32;
  double base_rate = 0.10;  // approximate helpful share
  double length_coef = 3e-4;  // log-odds per character
  std::vector<std::string> conditions = {"cancer", "cardiovascular",
                                         "diabetes", "neurological"};
  uint64_t seed = 0;
};

struct SyntheticHelpfulness {
  Corpus corpus;
  std::vector<int> isr;  // per pair
};

// Helpful flags follow a logit in ISR and response length only; ISR is
// independent of length, condition and user metadata.
SyntheticHelpfulness GenerateHelpfulnessCorpus(
    const SyntheticHelpfulnessOptions& options);

// Deterministic pseudo-words (consonant-vowel triples) that avoid the
// emotion lexicon and question lead words.
std::vector<std::string> PseudoVocabulary(int size);

}  // namespace ohc

#endif  // OHC_SYNTHETIC_H_
