// core/src/metrics.cc

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

#include "corpusforge/metrics.h"

#include <cmath>

#include "corpusforge/align.h"
#include "corpusforge/error.h"
#include "corpusforge/utf8.h"
#include "json.hpp"

namespace corpusforge {

using ojson = nlohmann::ordered_json;

namespace {

std::vector<std::string> punctuation_symbols(const std::string& text,
                                             const LanguageProfile& profile) {
  std::vector<std::string> symbols;
  for (auto& mark : extract_punctuation(text, profile)) {
    symbols.push_back(std::move(mark.symbol));
  }
  return symbols;
}

void check_paired(std::size_t refs, std::size_t hyps) {
  if (refs != hyps) {
    throw ValidationError("reference/hypothesis count mismatch: " +
                          std::to_string(refs) + " vs " + std::to_string(hyps));
  }
}

}  // namespace

UtteranceErrors score_utterance(const std::string& normalized_ref,
                                const std::string& normalized_hyp,
                                const LanguageProfile& profile,
                                bool with_punctuation) {
  UtteranceErrors u;
  const auto ref_words = tokenize_words(normalized_ref);
  const auto hyp_words = tokenize_words(normalized_hyp);
  const auto words = edit_distance(ref_words, hyp_words);
  u.ref_word_count = ref_words.size();
  u.substitutions = words.substitutions;
  u.deletions = words.deletions;
  u.insertions = words.insertions;

  const auto ref_chars = decode_utf8(normalized_ref);
  u.ref_char_count = ref_chars.size();
  u.char_errors = levenshtein(ref_chars, decode_utf8(normalized_hyp));

  if (with_punctuation) {
    const auto ref_punct = punctuation_symbols(normalized_ref, profile);
    const auto hyp_punct = punctuation_symbols(normalized_hyp, profile);
    u.ref_punct_count = ref_punct.size();
    u.punct_errors = edit_distance(ref_punct, hyp_punct).distance;
  }
  return u;
}

EvalReport evaluate(const std::vector<std::string>& refs,
                    const std::vector<std::string>& hyps,
                    const LanguageProfile& profile, NormalizationMode mode,
                    const std::vector<std::string>& ids) {
  check_paired(refs.size(), hyps.size());
  if (!ids.empty() && ids.size() != refs.size()) {
    throw ValidationError("evaluate: id count does not match references");
  }
  const bool with_pc = mode == NormalizationMode::kWithPc;
  EvalReport report;
  report.mode = mode;
  report.language = profile.language();
  report.utterance_count = refs.size();
  std::size_t ref_words = 0, word_errors = 0;
  std::size_t ref_chars = 0, char_errors = 0;
  std::size_t ref_punct = 0, punct_errors = 0;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    auto u = score_utterance(normalize(refs[i], profile, mode),
                             normalize(hyps[i], profile, mode), profile, with_pc);
    u.id = ids.empty() ? std::to_string(i) : ids[i];
    ref_words += u.ref_word_count;
    word_errors += u.word_errors();
    ref_chars += u.ref_char_count;
    char_errors += u.char_errors;
    ref_punct += u.ref_punct_count;
    punct_errors += u.punct_errors;
    report.per_utterance.push_back(std::move(u));
  }
  if (ref_words == 0) throw ValidationError("no reference words");
  report.wer = 100.0 * static_cast<double>(word_errors) / static_cast<double>(ref_words);
  report.cer = 100.0 * static_cast<double>(char_errors) /
               static_cast<double>(std::max<std::size_t>(1, ref_chars));
  if (with_pc) {
    report.per = 100.0 * static_cast<double>(punct_errors) /
                 static_cast<double>(std::max<std::size_t>(1, ref_punct));
  }
  return report;
}

double per(const std::vector<std::string>& refs,
           const std::vector<std::string>& hyps,
           const LanguageProfile& profile) {
  check_paired(refs.size(), hyps.size());
  std::size_t ref_punct = 0, errors = 0;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const auto r = punctuation_symbols(
        normalize(refs[i], profile, NormalizationMode::kWithPc), profile);
    const auto h = punctuation_symbols(
        normalize(hyps[i], profile, NormalizationMode::kWithPc), profile);
    ref_punct += r.size();
    errors += edit_distance(r, h).distance;
  }
  return 100.0 * static_cast<double>(errors) /
         static_cast<double>(std::max<std::size_t>(1, ref_punct));
}

int relative_improvement(double baseline, double updated) {
  if (!(baseline > 0.0) || !std::isfinite(baseline) || !std::isfinite(updated)) {
    throw ValidationError("relative_improvement: baseline must be positive");
  }
  return static_cast<int>(std::lround((updated - baseline) / baseline * 100.0));
}

std::string format_eval_report(const EvalReport& report,
                               bool include_per_utterance) {
  ojson doc;
  doc["language"] = report.language;
  doc["mode"] = to_string(report.mode);
  doc["utterance_count"] = report.utterance_count;
  doc["wer"] = report.wer;
  doc["cer"] = report.cer;
  doc["per"] = report.per ? ojson(*report.per) : ojson(nullptr);
  std::size_t words = 0, s = 0, d = 0, ins = 0;
  for (const auto& u : report.per_utterance) {
    words += u.ref_word_count;
    s += u.substitutions;
    d += u.deletions;
    ins += u.insertions;
  }
  doc["ref_words"] = words;
  doc["substitutions"] = s;
  doc["deletions"] = d;
  doc["insertions"] = ins;
  if (include_per_utterance) {
    ojson rows = ojson::array();
    for (const auto& u : report.per_utterance) {
      ojson row;
      row["id"] = u.id;
      row["ref_words"] = u.ref_word_count;
      row["substitutions"] = u.substitutions;
      row["deletions"] = u.deletions;
      row["insertions"] = u.insertions;
      row["ref_chars"] = u.ref_char_count;
      row["char_errors"] = u.char_errors;
      row["ref_punct"] = u.ref_punct_count;
      row["punct_errors"] = u.punct_errors;
      rows.push_back(std::move(row));
    }
    doc["per_utterance"] = std::move(rows);
  }
  return doc.dump(2, ' ', false, ojson::error_handler_t::strict) + "\n";
}

std::vector<UtteranceErrors> parse_per_utterance(const std::string& text) {
  ojson doc = ojson::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw ValidationError("report is not a JSON object");
  }
  if (!doc.contains("per_utterance") || !doc["per_utterance"].is_array()) {
    throw ValidationError(
        "report has no per_utterance section (run eval with --per-utterance)");
  }
  std::vector<UtteranceErrors> out;
  try {
    for (const auto& row : doc["per_utterance"]) {
      UtteranceErrors u;
      u.id = row.value("id", std::to_string(out.size()));
      u.ref_word_count = row.at("ref_words").get<std::size_t>();
      u.substitutions = row.at("substitutions").get<std::size_t>();
      u.deletions = row.at("deletions").get<std::size_t>();
      u.insertions = row.at("insertions").get<std::size_t>();
      u.ref_char_count = row.value("ref_chars", std::size_t{0});
      u.char_errors = row.value("char_errors", std::size_t{0});
      u.ref_punct_count = row.value("ref_punct", std::size_t{0});
      u.punct_errors = row.value("punct_errors", std::size_t{0});
      out.push_back(std::move(u));
    }
  } catch (const ojson::exception& e) {
    throw ValidationError(std::string("malformed per_utterance row: ") + e.what());
  }
  return out;
}

}  // namespace corpusforge
