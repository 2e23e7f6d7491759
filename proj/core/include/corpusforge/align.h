// core/include/corpusforge/align.h

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

#ifndef CORPUSFORGE_ALIGN_H_
#define CORPUSFORGE_ALIGN_H_

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "corpusforge/manifest.h"
#include "corpusforge/textnorm.h"

namespace corpusforge {

enum class EditOp { kMatch, kSub, kDel, kIns };

const char* to_string(EditOp op);

/// One step of an alignment. ref_index is -1 for insertions, hyp_index is -1
/// for deletions.
struct EditStep {
  EditOp op = EditOp::kMatch;
  int ref_index = -1;
  int hyp_index = -1;

  bool operator==(const EditStep&) const = default;
};

struct EditAlignment {
  std::size_t distance = 0;
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::vector<EditStep> path;
};

/// Unit-cost Levenshtein alignment. The backtrace prefers, at every cell,
/// MATCH, then SUB, then DEL, then INS.
template <typename T>
EditAlignment edit_distance(std::span<const T> ref, std::span<const T> hyp) {
  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();
  const std::size_t width = m + 1;
  std::vector<std::size_t> cost((n + 1) * width);
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& {
    return cost[i * width + j];
  };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t diag = at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      at(i, j) = std::min({diag, at(i - 1, j) + 1, at(i, j - 1) + 1});
    }
  }

  EditAlignment result;
  result.distance = at(n, m);
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 || j > 0) {
    const std::size_t here = at(i, j);
    if (i > 0 && j > 0 && ref[i - 1] == hyp[j - 1] && here == at(i - 1, j - 1)) {
      result.path.push_back({EditOp::kMatch, static_cast<int>(i - 1),
                             static_cast<int>(j - 1)});
      --i;
      --j;
    } else if (i > 0 && j > 0 && here == at(i - 1, j - 1) + 1) {
      result.path.push_back({EditOp::kSub, static_cast<int>(i - 1),
                             static_cast<int>(j - 1)});
      ++result.substitutions;
      --i;
      --j;
    } else if (i > 0 && here == at(i - 1, j) + 1) {
      result.path.push_back({EditOp::kDel, static_cast<int>(i - 1), -1});
      ++result.deletions;
      --i;
    } else {
      result.path.push_back({EditOp::kIns, -1, static_cast<int>(j - 1)});
      ++result.insertions;
      --j;
    }
  }
  std::reverse(result.path.begin(), result.path.end());
  return result;
}

template <typename T>
EditAlignment edit_distance(const std::vector<T>& ref,
                            const std::vector<T>& hyp) {
  return edit_distance(std::span<const T>(ref), std::span<const T>(hyp));
}

// Distance only, two-row DP.
std::size_t levenshtein(std::u32string_view ref, std::u32string_view hyp);

/// Character error rate: distance over code points (spaces included) divided
/// by max(1, reference length).
double cer(std::string_view ref_text, std::string_view hyp_text);

struct TimedWord {
  std::string word;
  double start = 0.0;
  double end = 0.0;

  bool operator==(const TimedWord&) const = default;
};

// Empty when valid; otherwise names the first offending word index.
std::string check_timed_words(std::span<const TimedWord> words);

enum class SegmentStatus {
  kUnaligned,  // not matched against any reference
  kAccepted,
  kRejected,   // matched, but cer above the acceptance threshold
  kUnmatched,  // reference exhausted or nothing to match
};

const char* to_string(SegmentStatus status);

struct Segment {
  std::string parent_audio;
  double offset = 0.0;
  double duration = 0.0;
  std::string hyp_text;
  std::optional<std::string> ref_text;
  std::optional<double> cer;
  // Inclusive indices into the timed-word sequence the segment was cut from.
  std::pair<std::size_t, std::size_t> word_span{0, 0};
  std::optional<std::pair<std::size_t, std::size_t>> ref_span;
  bool over_length = false;
  SegmentStatus status = SegmentStatus::kUnaligned;
};

/// Greedy word-safe chunking. A chunk closes before a word that would push
/// it past `max_dur` (first start to last end) or that follows a gap longer
/// than `gap_break`. Words longer than `max_dur` become their own chunk with
/// over_length set.
std::vector<Segment> chunk_by_timestamps(std::span<const TimedWord> words,
                                         double max_dur = 20.0,
                                         double gap_break = 1.0,
                                         std::string_view parent_audio = {});

struct SpanMatch {
  std::size_t first = 0;
  std::size_t last = 0;  // inclusive
  double cer = 0.0;
};

struct MatchParams {
  double slack = 0.3;
  std::size_t start_margin = 10;
};

/// Searches windows of the reference near `anchor` for the one with the
/// lowest CER against `hyp_text`. Ties go to the earliest start, then the
/// shortest window. Throws Error("reference exhausted") if anchor is at or
/// past the end, ValidationError if the hypothesis is empty.
SpanMatch match_reference_span(const std::vector<std::string>& ref_words,
                               std::string_view hyp_text, std::size_t anchor,
                               const MatchParams& params = {});

struct AlignParams {
  double max_dur = 20.0;
  double gap_break = 1.0;
  double slack = 0.3;
  std::size_t start_margin = 10;
  double cer_accept = 0.3;
};

/// Chunks the hypothesis words and matches each chunk against the chapter
/// text with a monotonically advancing anchor. Matching happens on no-PC
/// forms; ref_text carries the with-PC reference words.
std::vector<Segment> align_chapter(std::string_view ref_text,
                                   std::span<const TimedWord> hyp_words,
                                   const LanguageProfile& profile,
                                   const AlignParams& params = {},
                                   std::string_view parent_audio = {});

struct SegmentFilter {
  double min_dur = 3.0;
  double max_dur = 15.0;
  std::optional<double> cer_max;
};

struct DroppedSegment {
  Segment segment;
  std::string reason;  // "unmatched", "min_dur", "max_dur" or "cer_max"
};

struct SegmentFilterResult {
  std::vector<Segment> kept;
  std::vector<DroppedSegment> dropped;
};

SegmentFilterResult filter_segments(const std::vector<Segment>& segments,
                                    const SegmentFilter& filter);

// text = ref_text (or "" when absent), pred_text = hyp_text, cer and status
// stored as extra keys.
ManifestRecord segment_to_record(const Segment& segment);
Segment record_to_segment(const ManifestRecord& record);

struct RejectedRecord {
  ManifestRecord record;
  std::string reason;  // "no_hypothesis" or "cer"
  std::optional<double> cer;
};

struct AsrValidation {
  std::vector<ManifestRecord> accepted;
  std::vector<RejectedRecord> rejected;
};

/// Accepts a record when the no-PC CER between its text and the matching
/// hypothesis (pred_text, else text, of the record with the same key) is at
/// most `cer_threshold`. Accepted records get pred_text filled in.
AsrValidation validate_by_asr(const std::vector<ManifestRecord>& records,
                              const std::vector<ManifestRecord>& hypotheses,
                              const LanguageProfile& profile,
                              double cer_threshold);

}  // namespace corpusforge

#endif  // CORPUSFORGE_ALIGN_H_
