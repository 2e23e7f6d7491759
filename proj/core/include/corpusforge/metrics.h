// core/include/corpusforge/metrics.h

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

#ifndef CORPUSFORGE_METRICS_H_
#define CORPUSFORGE_METRICS_H_

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "corpusforge/textnorm.h"

namespace corpusforge {

struct UtteranceErrors {
  std::string id;
  std::size_t ref_word_count = 0;
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t ref_char_count = 0;
  std::size_t char_errors = 0;
  std::size_t ref_punct_count = 0;
  std::size_t punct_errors = 0;

  std::size_t word_errors() const {
    return substitutions + deletions + insertions;
  }
  bool operator==(const UtteranceErrors&) const = default;
};

/// Corpus-level error rates in percent. Rates are pooled: total errors over
/// total reference units, never averaged per utterance. PER is only defined
/// for with-PC evaluation.
struct EvalReport {
  double wer = 0.0;
  double cer = 0.0;
  std::optional<double> per;
  NormalizationMode mode = NormalizationMode::kNoPc;
  std::string language;
  std::vector<UtteranceErrors> per_utterance;
  std::size_t utterance_count = 0;
};

/// Normalizes both sides with (profile, mode) and scores them. With PC,
/// punctuation stays attached to word tokens for WER. `ids` may be empty;
/// otherwise it labels per_utterance entries.
/// Throws ValidationError on length mismatch or when the references contain
/// no words at all ("no reference words").
EvalReport evaluate(const std::vector<std::string>& refs,
                    const std::vector<std::string>& hyps,
                    const LanguageProfile& profile, NormalizationMode mode,
                    const std::vector<std::string>& ids = {});

UtteranceErrors score_utterance(const std::string& normalized_ref,
                                const std::string& normalized_hyp,
                                const LanguageProfile& profile,
                                bool with_punctuation);

/// Punctuation error rate: edit distance between the extracted punctuation
/// symbol sequences, pooled over the corpus, divided by max(1, total
/// reference punctuation marks). Inputs are normalized with PC first.
double per(const std::vector<std::string>& refs,
           const std::vector<std::string>& hyps,
           const LanguageProfile& profile);

/// round(100 * (new - baseline) / baseline), halves away from zero.
/// Throws ValidationError when baseline <= 0.
int relative_improvement(double baseline, double updated);

// JSON document with all report fields; per_utterance is included only when
// requested.
std::string format_eval_report(const EvalReport& report,
                               bool include_per_utterance);

/// Reads the per-utterance section of a report written by
/// format_eval_report(..., true).
std::vector<UtteranceErrors> parse_per_utterance(const std::string& json);

}  // namespace corpusforge

#endif  // CORPUSFORGE_METRICS_H_
