// core/src/ops.cc

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

#include "corpusforge/ops.h"

#include <map>
#include <unordered_map>

#include "corpusforge/error.h"
#include "json.hpp"

namespace corpusforge {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

LanguageProfile resolve_profile(const std::string& lang,
                                const fs::path& profile_path) {
  if (!profile_path.empty()) return load_profile(profile_path);
  return build_profile(lang);
}

std::vector<ManifestRecord> normalize_records(std::vector<ManifestRecord> records,
                                              const LanguageProfile& profile,
                                              NormalizationMode mode,
                                              NormalizeStats* stats) {
  for (auto& rec : records) {
    rec.text = normalize(rec.text, profile, mode, stats);
    if (rec.pred_text) rec.pred_text = normalize(*rec.pred_text, profile, mode, stats);
  }
  return records;
}

std::vector<ManifestRecord> vad_records(const std::vector<ManifestRecord>& records,
                                        const fs::path& root,
                                        const VadParams& params) {
  check_vad_params(params);
  std::vector<ManifestRecord> out;
  std::map<std::string, AudioBuffer> cache;
  for (const auto& rec : records) {
    auto it = cache.find(rec.audio_filepath);
    if (it == cache.end()) {
      it = cache.emplace(rec.audio_filepath, read_wav(root / rec.audio_filepath)).first;
    }
    const AudioBuffer& audio = it->second;
    const double end = std::min(audio.duration(), rec.offset + rec.duration);
    if (!(rec.offset < end)) {
      throw Error(rec.audio_filepath + ": record span lies outside the audio");
    }
    for (const auto& span : energy_vad(slice(audio, rec.offset, end), params)) {
      ManifestRecord seg;
      seg.audio_filepath = rec.audio_filepath;
      seg.offset = rec.offset + span.start;
      seg.duration = span.end - span.start;
      seg.language = rec.language;
      seg.source = rec.source;
      out.push_back(std::move(seg));
    }
  }
  return out;
}

RecordFilterResult filter_records(const std::vector<ManifestRecord>& records,
                                  const SegmentFilter& filter,
                                  const LanguageProfile* profile) {
  RecordFilterResult out;
  for (const auto& rec : records) {
    Segment seg = record_to_segment(rec);
    if (!seg.cer && profile != nullptr && rec.pred_text && !rec.text.empty()) {
      seg.cer = cer(normalize(rec.text, *profile, NormalizationMode::kNoPc),
                    normalize(*rec.pred_text, *profile, NormalizationMode::kNoPc));
    }
    const auto result = filter_segments({seg}, filter);
    if (result.kept.empty()) {
      out.dropped.emplace_back(rec, result.dropped.front().reason);
    } else {
      out.kept.push_back(rec);
    }
  }
  return out;
}

std::vector<std::string> pair_hypotheses(const std::vector<ManifestRecord>& refs,
                                         const std::vector<ManifestRecord>* hyps) {
  std::vector<std::string> out;
  out.reserve(refs.size());
  if (hyps == nullptr) {
    for (const auto& r : refs) {
      if (!r.pred_text) {
        throw ValidationError("no pred_text for " + record_key(r) +
                              " (line " + std::to_string(r.line) + ")");
      }
      out.push_back(*r.pred_text);
    }
    return out;
  }
  std::unordered_map<std::string, const ManifestRecord*> by_key;
  for (const auto& h : *hyps) by_key.emplace(record_key(h), &h);
  for (const auto& r : refs) {
    auto it = by_key.find(record_key(r));
    if (it == by_key.end()) {
      throw ValidationError("no hypothesis for " + record_key(r));
    }
    out.push_back(it->second->pred_text.value_or(it->second->text));
  }
  return out;
}

EvalReport evaluate_records(const std::vector<ManifestRecord>& refs,
                            const std::vector<ManifestRecord>* hyps,
                            const LanguageProfile& profile,
                            NormalizationMode mode) {
  std::vector<std::string> ref_texts, ids;
  for (const auto& r : refs) {
    ref_texts.push_back(r.text);
    ids.push_back(record_key(r));
  }
  return evaluate(ref_texts, pair_hypotheses(refs, hyps), profile, mode, ids);
}

std::string format_summary(const CorpusSummary& summary) {
  ojson doc;
  doc["record_count"] = summary.record_count;
  doc["total_hours"] = summary.total_hours;
  doc["per_source_hours"] = summary.per_source_hours;
  doc["mean_chars_per_second"] = summary.mean_chars_per_second;
  return doc.dump(2, ' ', false, ojson::error_handler_t::strict) + "\n";
}

std::string format_validation_report(const ValidationReport& report,
                                     const std::vector<ManifestRecord>& records) {
  auto describe = [&](std::size_t i) {
    ojson row;
    row["index"] = i;
    row["line"] = records[i].line;
    row["audio_filepath"] = records[i].audio_filepath;
    return row;
  };
  ojson doc;
  doc["ok"] = report.empty();
  for (auto [name, list] : {std::pair{"missing_files", &report.missing_files},
                            std::pair{"unreadable_files", &report.unreadable_files},
                            std::pair{"empty_text", &report.empty_text}}) {
    ojson rows = ojson::array();
    for (std::size_t i : *list) rows.push_back(describe(i));
    doc[name] = std::move(rows);
  }
  ojson mismatches = ojson::array();
  for (const auto& m : report.duration_mismatches) {
    ojson row = describe(m.index);
    row["stored"] = m.stored;
    row["actual"] = m.actual;
    mismatches.push_back(std::move(row));
  }
  doc["duration_mismatches"] = std::move(mismatches);
  return doc.dump(2, ' ', false, ojson::error_handler_t::strict) + "\n";
}

}  // namespace corpusforge
