// core/src/manifest.cc

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

#include "corpusforge/manifest.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "corpusforge/audio.h"
#include "corpusforge/error.h"
#include "corpusforge/fileutil.h"
#include "corpusforge/utf8.h"
#include "json.hpp"

namespace corpusforge {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

bool ManifestRecord::operator==(const ManifestRecord& other) const {
  return audio_filepath == other.audio_filepath && offset == other.offset &&
         duration == other.duration && text == other.text &&
         pred_text == other.pred_text && language == other.language &&
         source == other.source && extra == other.extra;
}

std::optional<std::string> ManifestRecord::extra_value(
    std::string_view key) const {
  for (const auto& [k, v] : extra) {
    if (k == key) return v;
  }
  return std::nullopt;
}

void ManifestRecord::set_extra(std::string_view key, std::string raw_json) {
  for (auto& [k, v] : extra) {
    if (k == key) {
      v = std::move(raw_json);
      return;
    }
  }
  extra.emplace_back(std::string(key), std::move(raw_json));
}

std::string record_key(const ManifestRecord& record) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), record.offset);
  return record.audio_filepath + "#" + std::string(buf, res.ptr);
}

std::string check_record(const ManifestRecord& record) {
  if (record.audio_filepath.empty()) return "empty audio_filepath";
  const auto& p = record.audio_filepath;
  if (p[0] == '/' || p[0] == '\\' ||
      (p.size() > 1 && p[1] == ':' && std::isalpha(static_cast<unsigned char>(p[0])))) {
    return "absolute audio_filepath '" + p + "'";
  }
  if (!std::isfinite(record.duration) || record.duration <= 0.0) {
    return "duration must be > 0";
  }
  if (!std::isfinite(record.offset) || record.offset < 0.0) {
    return "offset must be >= 0";
  }
  return {};
}

namespace {

const char* const kCanonicalKeys[] = {"audio_filepath", "offset",    "duration",
                                      "text",           "pred_text", "language",
                                      "source"};

bool is_canonical_key(const std::string& key) {
  for (const char* k : kCanonicalKeys) {
    if (key == k) return true;
  }
  return false;
}

[[noreturn]] void line_error(std::size_t line_no, const std::string& what) {
  throw ValidationError("line " + std::to_string(line_no) + ": " + what);
}

double get_number(const ojson& doc, const char* key, std::size_t line_no) {
  const auto& v = doc.at(key);
  if (!v.is_number()) line_error(line_no, std::string("invalid ") + key);
  return v.get<double>();
}

std::optional<std::string> get_optional_string(const ojson& doc,
                                               const char* key,
                                               std::size_t line_no) {
  auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) line_error(line_no, std::string("invalid ") + key);
  return it->get<std::string>();
}

}  // namespace

ManifestRecord parse_manifest_line(std::string_view line, std::size_t line_no) {
  ojson doc;
  try {
    doc = ojson::parse(line);
  } catch (const ojson::parse_error& e) {
    line_error(line_no, std::string("malformed record: ") + e.what());
  }
  if (!doc.is_object()) line_error(line_no, "record is not an object");
  for (const char* key : {"audio_filepath", "duration"}) {
    if (!doc.contains(key)) line_error(line_no, std::string("missing ") + key);
  }

  ManifestRecord rec;
  rec.line = line_no;
  const auto& path = doc.at("audio_filepath");
  if (!path.is_string()) line_error(line_no, "invalid audio_filepath");
  rec.audio_filepath = path.get<std::string>();
  rec.duration = get_number(doc, "duration", line_no);
  if (doc.contains("offset")) rec.offset = get_number(doc, "offset", line_no);
  rec.text = get_optional_string(doc, "text", line_no).value_or("");
  rec.pred_text = get_optional_string(doc, "pred_text", line_no);
  rec.language = get_optional_string(doc, "language", line_no);
  rec.source = get_optional_string(doc, "source", line_no);
  for (const auto& [key, value] : doc.items()) {
    if (!is_canonical_key(key)) rec.extra.emplace_back(key, value.dump());
  }
  if (auto problem = check_record(rec); !problem.empty()) {
    line_error(line_no, problem);
  }
  return rec;
}

std::string format_manifest_line(const ManifestRecord& record) {
  ojson doc;
  doc["audio_filepath"] = record.audio_filepath;
  if (record.offset != 0.0) doc["offset"] = record.offset;
  doc["duration"] = record.duration;
  doc["text"] = record.text;
  if (record.pred_text) doc["pred_text"] = *record.pred_text;
  if (record.language) doc["language"] = *record.language;
  if (record.source) doc["source"] = *record.source;
  for (const auto& [key, raw] : record.extra) {
    if (is_canonical_key(key)) continue;
    doc[key] = ojson::parse(raw);
  }
  return doc.dump(-1, ' ', false, ojson::error_handler_t::strict);
}

std::vector<ManifestRecord> read_manifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open manifest " + path.string());
  std::vector<ManifestRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    records.push_back(parse_manifest_line(line, line_no));
  }
  return records;
}

std::string format_manifest(const std::vector<ManifestRecord>& records) {
  std::string out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (auto problem = check_record(records[i]); !problem.empty()) {
      throw ValidationError("record " + std::to_string(i) + ": " + problem);
    }
    out += format_manifest_line(records[i]);
    out.push_back('\n');
  }
  return out;
}

void write_manifest(const std::vector<ManifestRecord>& records,
                    const fs::path& path) {
  write_file_atomic(path, format_manifest(records));
}

ValidationReport validate_corpus(const std::vector<ManifestRecord>& records,
                                 const fs::path& audio_root,
                                 const ValidationOptions& options) {
  std::error_code ec;
  if (!fs::is_directory(audio_root, ec)) {
    throw Error("audio root is not a readable directory: " +
                audio_root.string());
  }
  std::unordered_map<std::string, std::size_t> references;
  for (const auto& rec : records) ++references[rec.audio_filepath];

  ValidationReport report;
  std::unordered_map<std::string, double> durations;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (options.expect_labeled && rec.text.empty()) {
      report.empty_text.push_back(i);
    }
    const fs::path file = audio_root / rec.audio_filepath;
    auto cached = durations.find(rec.audio_filepath);
    if (cached == durations.end()) {
      if (!fs::exists(file, ec)) {
        report.missing_files.push_back(i);
        continue;
      }
      try {
        cached = durations.emplace(rec.audio_filepath,
                                   read_wav_info(file).duration()).first;
      } catch (const Error&) {
        report.unreadable_files.push_back(i);
        continue;
      }
    }
    const double actual = cached->second;
    const double tol = options.duration_tolerance;
    if (rec.offset + rec.duration > actual + tol) {
      report.duration_mismatches.push_back({i, rec.duration, actual - rec.offset});
    } else if (rec.offset == 0.0 && references[rec.audio_filepath] == 1 &&
               std::abs(rec.duration - actual) > tol) {
      report.duration_mismatches.push_back({i, rec.duration, actual});
    }
  }
  return report;
}

OverlapResult remove_overlap(const std::vector<ManifestRecord>& train,
                             const std::vector<ManifestRecord>& test,
                             const LanguageProfile& profile) {
  std::unordered_map<std::string, std::size_t> test_texts;
  for (std::size_t i = 0; i < test.size(); ++i) {
    auto norm = normalize(test[i].text, profile, NormalizationMode::kNoPc);
    // Empty texts carry no leakage; matching them would drop unlabeled data.
    if (!norm.empty()) test_texts.emplace(std::move(norm), i);
  }
  OverlapResult result;
  for (std::size_t i = 0; i < train.size(); ++i) {
    auto it = test_texts.find(
        normalize(train[i].text, profile, NormalizationMode::kNoPc));
    if (it == test_texts.end()) {
      result.kept.push_back(train[i]);
    } else {
      result.removed.push_back(train[i]);
      result.removed_matches.push_back({i, it->second});
    }
  }
  return result;
}

CorpusSummary summarize(const std::vector<ManifestRecord>& records) {
  CorpusSummary summary;
  summary.record_count = records.size();
  std::map<std::string, double> seconds;
  double labeled_seconds = 0.0;
  std::size_t labeled_chars = 0;
  for (const auto& rec : records) {
    seconds[rec.source.value_or("unknown")] += rec.duration;
    if (!rec.text.empty()) {
      labeled_seconds += rec.duration;
      labeled_chars += count_code_points(rec.text);
    }
  }
  for (const auto& [source, secs] : seconds) {
    const double hours = secs / 3600.0;
    summary.per_source_hours[source] = hours;
    summary.total_hours += hours;
  }
  if (labeled_seconds > 0.0) {
    summary.mean_chars_per_second =
        static_cast<double>(labeled_chars) / labeled_seconds;
  }
  return summary;
}

}  // namespace corpusforge
