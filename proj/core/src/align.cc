// core/src/align.cc

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

#include "corpusforge/align.h"

#include <cmath>
#include <sstream>
#include <unordered_map>

#include "corpusforge/error.h"
#include "corpusforge/utf8.h"
#include "json.hpp"

namespace corpusforge {

using json = nlohmann::json;

const char* to_string(EditOp op) {
  switch (op) {
    case EditOp::kMatch: return "MATCH";
    case EditOp::kSub: return "SUB";
    case EditOp::kDel: return "DEL";
    case EditOp::kIns: return "INS";
  }
  return "?";
}

const char* to_string(SegmentStatus status) {
  switch (status) {
    case SegmentStatus::kUnaligned: return "unaligned";
    case SegmentStatus::kAccepted: return "accepted";
    case SegmentStatus::kRejected: return "rejected";
    case SegmentStatus::kUnmatched: return "unmatched";
  }
  return "?";
}

std::size_t levenshtein(std::u32string_view ref, std::u32string_view hyp) {
  std::vector<std::size_t> prev(hyp.size() + 1);
  std::vector<std::size_t> cur(hyp.size() + 1);
  for (std::size_t j = 0; j <= hyp.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= ref.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= hyp.size(); ++j) {
      cur[j] = std::min({prev[j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1),
                         prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[hyp.size()];
}

double cer(std::string_view ref_text, std::string_view hyp_text) {
  const auto ref = decode_utf8(ref_text);
  const auto hyp = decode_utf8(hyp_text);
  const double denom = static_cast<double>(std::max<std::size_t>(1, ref.size()));
  return static_cast<double>(levenshtein(ref, hyp)) / denom;
}

std::string check_timed_words(std::span<const TimedWord> words) {
  constexpr double kEps = 1e-6;
  for (std::size_t i = 0; i < words.size(); ++i) {
    const auto& w = words[i];
    if (!std::isfinite(w.start) || !std::isfinite(w.end) || w.start < 0.0 ||
        !(w.start < w.end)) {
      return "word " + std::to_string(i) + ": need 0 <= start < end";
    }
    if (i > 0 && w.start + kEps < words[i - 1].end) {
      return "word " + std::to_string(i) + ": overlaps the previous word";
    }
  }
  return {};
}

std::vector<Segment> chunk_by_timestamps(std::span<const TimedWord> words,
                                         double max_dur, double gap_break,
                                         std::string_view parent_audio) {
  if (auto problem = check_timed_words(words); !problem.empty()) {
    throw ValidationError("chunk_by_timestamps: " + problem);
  }
  std::vector<Segment> chunks;
  std::size_t first = 0;
  auto close = [&](std::size_t last) {
    Segment seg;
    seg.parent_audio = std::string(parent_audio);
    seg.offset = words[first].start;
    seg.duration = words[last].end - words[first].start;
    seg.word_span = {first, last};
    for (std::size_t i = first; i <= last; ++i) {
      if (i > first) seg.hyp_text.push_back(' ');
      seg.hyp_text += words[i].word;
    }
    seg.over_length = seg.duration > max_dur;
    chunks.push_back(std::move(seg));
  };
  for (std::size_t i = 1; i < words.size(); ++i) {
    const bool too_long = words[i].end - words[first].start > max_dur;
    const bool gap = words[i].start - words[i - 1].end > gap_break;
    if (too_long || gap) {
      close(i - 1);
      first = i;
    }
  }
  if (!words.empty()) close(words.size() - 1);
  return chunks;
}

namespace {

constexpr double kRoundEps = 1e-9;

// (distance, chars) pairs compared as exact fractions d / max(1, chars).
bool better_ratio(std::size_t d1, std::size_t c1, std::size_t d2,
                  std::size_t c2) {
  return d1 * std::max<std::size_t>(1, c2) < d2 * std::max<std::size_t>(1, c1);
}

}  // namespace

SpanMatch match_reference_span(const std::vector<std::string>& ref_words,
                               std::string_view hyp_text, std::size_t anchor,
                               const MatchParams& params) {
  const auto hyp_tokens = tokenize_words(hyp_text);
  if (hyp_tokens.empty()) {
    throw ValidationError("match_reference_span: empty hypothesis");
  }
  const std::size_t n = ref_words.size();
  if (anchor >= n) throw Error("reference exhausted");

  const double len = static_cast<double>(hyp_tokens.size());
  const auto shortest = static_cast<std::size_t>(
      std::max(1.0, std::ceil((1.0 - params.slack) * len - kRoundEps)));
  const auto longest = static_cast<std::size_t>(
      std::floor((1.0 + params.slack) * len + kRoundEps)) + 1;
  const std::size_t last_start = std::min(
      n - 1, anchor + static_cast<std::size_t>(std::floor(params.slack * len + kRoundEps)) +
                 params.start_margin);

  const std::u32string hyp = decode_utf8(join_words(hyp_tokens, 0, hyp_tokens.size()));
  const std::size_t m = hyp.size();

  std::vector<std::u32string> words;
  const std::size_t span_end = std::min(n, last_start + longest);
  words.reserve(span_end - anchor);
  for (std::size_t i = anchor; i < span_end; ++i) words.push_back(decode_utf8(ref_words[i]));

  SpanMatch best;
  std::size_t best_dist = 0;
  std::size_t best_chars = 0;
  bool have_best = false;
  std::vector<std::size_t> prev(m + 1);
  std::vector<std::size_t> cur(m + 1);
  for (std::size_t s = anchor; s <= last_start; ++s) {
    const std::size_t max_len = std::min(longest, n - s);
    const std::size_t min_len = std::min(shortest, max_len);
    for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
    std::size_t chars = 0;
    // Each window extends the previous one, so its DP is a few more rows.
    auto feed = [&](char32_t c) {
      ++chars;
      cur[0] = chars;
      for (std::size_t j = 1; j <= m; ++j) {
        cur[j] = std::min({prev[j - 1] + (c == hyp[j - 1] ? 0 : 1), prev[j] + 1,
                           cur[j - 1] + 1});
      }
      std::swap(prev, cur);
    };
    for (std::size_t k = 1; k <= max_len; ++k) {
      if (k > 1) feed(U' ');
      for (char32_t c : words[s + k - 1 - anchor]) feed(c);
      if (k < min_len) continue;
      const std::size_t dist = prev[m];
      if (!have_best || better_ratio(dist, chars, best_dist, best_chars)) {
        have_best = true;
        best_dist = dist;
        best_chars = chars;
        best.first = s;
        best.last = s + k - 1;
      }
    }
  }
  best.cer = static_cast<double>(best_dist) /
             static_cast<double>(std::max<std::size_t>(1, best_chars));
  return best;
}

std::vector<Segment> align_chapter(std::string_view ref_text,
                                   std::span<const TimedWord> hyp_words,
                                   const LanguageProfile& profile,
                                   const AlignParams& params,
                                   std::string_view parent_audio) {
  // Matching runs on no-PC words; the with-PC token that produced each one is
  // what ends up in the segment. Tokens that are pure punctuation ride along
  // with a neighbouring word.
  std::vector<std::string> match_words;
  std::vector<std::string> display_words;
  std::string leading;
  for (auto& token : tokenize_words(normalize(ref_text, profile, NormalizationMode::kWithPc))) {
    auto bare = normalize(token, profile, NormalizationMode::kNoPc);
    if (bare.empty()) {
      if (display_words.empty()) {
        leading += token + " ";
      } else {
        display_words.back() += " " + token;
      }
      continue;
    }
    match_words.push_back(std::move(bare));
    display_words.push_back(leading + token);
    leading.clear();
  }

  auto segments = chunk_by_timestamps(hyp_words, params.max_dur, params.gap_break,
                                      parent_audio);
  const MatchParams match_params{params.slack, params.start_margin};
  std::size_t anchor = 0;
  for (auto& seg : segments) {
    const auto hyp = normalize(seg.hyp_text, profile, NormalizationMode::kNoPc);
    if (hyp.empty() || anchor >= match_words.size()) {
      seg.status = SegmentStatus::kUnmatched;
      continue;
    }
    const SpanMatch match = match_reference_span(match_words, hyp, anchor, match_params);
    seg.ref_text = join_words(display_words, match.first, match.last + 1);
    seg.cer = match.cer;
    seg.ref_span = std::make_pair(match.first, match.last);
    seg.status = match.cer <= params.cer_accept ? SegmentStatus::kAccepted
                                                 : SegmentStatus::kRejected;
    anchor = match.last + 1;
  }
  return segments;
}

SegmentFilterResult filter_segments(const std::vector<Segment>& segments,
                                    const SegmentFilter& filter) {
  SegmentFilterResult result;
  for (const auto& seg : segments) {
    const char* reason = nullptr;
    if (seg.status == SegmentStatus::kUnmatched) {
      reason = "unmatched";
    } else if (seg.duration < filter.min_dur) {
      reason = "min_dur";
    } else if (seg.duration > filter.max_dur) {
      reason = "max_dur";
    } else if (filter.cer_max && seg.cer && *seg.cer > *filter.cer_max) {
      reason = "cer_max";
    }
    if (reason == nullptr) {
      result.kept.push_back(seg);
    } else {
      result.dropped.push_back({seg, reason});
    }
  }
  return result;
}

ManifestRecord segment_to_record(const Segment& segment) {
  ManifestRecord rec;
  rec.audio_filepath = segment.parent_audio;
  rec.offset = segment.offset;
  rec.duration = segment.duration;
  rec.text = segment.ref_text.value_or("");
  rec.pred_text = segment.hyp_text;
  if (segment.cer) rec.set_extra("cer", json(*segment.cer).dump());
  if (segment.status != SegmentStatus::kUnaligned) {
    rec.set_extra("align_status", json(to_string(segment.status)).dump());
  }
  if (segment.over_length) rec.set_extra("over_length", "true");
  return rec;
}

Segment record_to_segment(const ManifestRecord& record) {
  Segment seg;
  seg.parent_audio = record.audio_filepath;
  seg.offset = record.offset;
  seg.duration = record.duration;
  seg.hyp_text = record.pred_text.value_or("");
  if (!record.text.empty()) seg.ref_text = record.text;
  if (auto raw = record.extra_value("cer")) {
    const auto v = json::parse(*raw, nullptr, false);
    if (v.is_number()) seg.cer = v.get<double>();
  }
  if (auto raw = record.extra_value("align_status")) {
    const auto v = json::parse(*raw, nullptr, false);
    if (v.is_string()) {
      for (auto s : {SegmentStatus::kAccepted, SegmentStatus::kRejected,
                     SegmentStatus::kUnmatched}) {
        if (v.get<std::string>() == to_string(s)) seg.status = s;
      }
    }
  }
  seg.over_length = record.extra_value("over_length") == std::optional<std::string>("true");
  return seg;
}

AsrValidation validate_by_asr(const std::vector<ManifestRecord>& records,
                              const std::vector<ManifestRecord>& hypotheses,
                              const LanguageProfile& profile,
                              double cer_threshold) {
  std::unordered_map<std::string, std::string> by_key;
  for (const auto& h : hypotheses) {
    by_key.emplace(record_key(h), h.pred_text.value_or(h.text));
  }
  AsrValidation result;
  for (const auto& rec : records) {
    auto it = by_key.find(record_key(rec));
    if (it == by_key.end()) {
      result.rejected.push_back({rec, "no_hypothesis", std::nullopt});
      continue;
    }
    const double value =
        cer(normalize(rec.text, profile, NormalizationMode::kNoPc),
            normalize(it->second, profile, NormalizationMode::kNoPc));
    if (value <= cer_threshold) {
      ManifestRecord accepted = rec;
      accepted.pred_text = it->second;
      result.accepted.push_back(std::move(accepted));
    } else {
      result.rejected.push_back({rec, "cer", value});
    }
  }
  return result;
}

}  // namespace corpusforge
