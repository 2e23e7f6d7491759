// tests/vac_harness.h

// Copyright 2026  The corpusforge Authors

// See the LICENSE file at the top of the source tree.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef CORPUSFORGE_TESTS_VAC_HARNESS_H_
#define CORPUSFORGE_TESTS_VAC_HARNESS_H_

// Synthetic chapter readings with known word-level ground truth, for the
// chapter alignment tests.

#include <cstdlib>
#include <string>
#include <vector>

#include "corpusforge/align.h"
#include "corpusforge/utf8.h"
#include "test_util.h"

namespace corpusforge::testing {

struct SyntheticChapter {
  std::vector<std::string> words;  // reference words, no punctuation
  std::string text;                // chapter text with punctuation
  std::vector<TimedWord> hyp;      // one hypothesis word per reference word
};

inline char32_t armenian_letter(Rng& rng) {
  return static_cast<char32_t>(0x0561 + rng.below(0x0586 - 0x0561 + 1));
}

// Each letter is substituted with probability `noise`; word boundaries are
// kept so hypothesis word i reads reference word i.
inline SyntheticChapter make_chapter(Rng& rng, std::size_t n_words, double noise) {
  SyntheticChapter ch;
  double t = 0.3;
  for (std::size_t i = 0; i < n_words; ++i) {
    std::u32string word;
    for (std::size_t k = 2 + rng.below(8); k > 0; --k) word.push_back(armenian_letter(rng));
    std::u32string heard = word;
    for (auto& c : heard) {
      if (rng.uniform() < noise) {
        char32_t other = c;
        while (other == c) other = armenian_letter(rng);
        c = other;
      }
    }
    ch.words.push_back(encode_utf8(word));
    if (i > 0) ch.text += ' ';
    ch.text += ch.words.back();
    const auto mark = rng.below(12);
    if (mark == 0) ch.text += ",";
    if (mark == 1) ch.text += "։";

    const double d = rng.uniform(0.2, 0.6);
    ch.hyp.push_back({encode_utf8(heard), t, t + d});
    t += d + (rng.uniform() < 0.05 ? 1.5 : rng.uniform(0.05, 0.3));
  }
  return ch;
}

struct RecoveryStats {
  std::size_t segments = 0;
  std::size_t recovered = 0;
  double worst_cer = 0.0;
};

// A segment is recovered when both span ends are within `tolerance` words of
// the truth and its CER is at most `cer_max`.
inline RecoveryStats score_recovery(const std::vector<Segment>& segments,
                                    std::size_t tolerance, double cer_max) {
  RecoveryStats stats;
  for (const auto& seg : segments) {
    ++stats.segments;
    if (!seg.ref_span || !seg.cer) continue;
    stats.worst_cer = std::max(stats.worst_cer, *seg.cer);
    const auto dist = [](std::size_t a, std::size_t b) { return a > b ? a - b : b - a; };
    if (dist(seg.ref_span->first, seg.word_span.first) <= tolerance &&
        dist(seg.ref_span->second, seg.word_span.second) <= tolerance && *seg.cer <= cer_max) {
      ++stats.recovered;
    }
  }
  return stats;
}

}  // namespace corpusforge::testing

#endif  // CORPUSFORGE_TESTS_VAC_HARNESS_H_
