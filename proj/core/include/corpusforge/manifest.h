// core/include/corpusforge/manifest.h

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

#ifndef CORPUSFORGE_MANIFEST_H_
#define CORPUSFORGE_MANIFEST_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "corpusforge/textnorm.h"

namespace corpusforge {

/// One utterance. Keys not modelled here are carried in `extra` as raw JSON
/// values and written back after the canonical keys, in their original order.
struct ManifestRecord {
  std::string audio_filepath;
  double offset = 0.0;
  double duration = 0.0;
  std::string text;
  std::optional<std::string> pred_text;
  std::optional<std::string> language;
  std::optional<std::string> source;
  std::vector<std::pair<std::string, std::string>> extra;

  // 1-based line in the file the record was read from; 0 if constructed.
  // Diagnostic only, ignored by operator==.
  std::size_t line = 0;

  bool operator==(const ManifestRecord& other) const;

  // Returns the raw JSON text of an extra key, if present.
  std::optional<std::string> extra_value(std::string_view key) const;
  void set_extra(std::string_view key, std::string raw_json);
};

// Identity used to pair records across manifests: path plus offset.
std::string record_key(const ManifestRecord& record);

// Empty string when the record is valid, otherwise a short reason.
std::string check_record(const ManifestRecord& record);

ManifestRecord parse_manifest_line(std::string_view line, std::size_t line_no);
std::string format_manifest_line(const ManifestRecord& record);

/// Reads a line-delimited manifest. Blank lines are skipped. Throws
/// ValidationError("line N: ...") on malformed lines or missing keys.
std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path);

/// Writes canonical form atomically. Throws ValidationError("record I: ...")
/// naming the first record that violates the invariants.
void write_manifest(const std::vector<ManifestRecord>& records,
                    const std::filesystem::path& path);
std::string format_manifest(const std::vector<ManifestRecord>& records);

struct DurationMismatch {
  std::size_t index = 0;
  double stored = 0.0;
  double actual = 0.0;
};

struct ValidationReport {
  std::vector<std::size_t> missing_files;
  std::vector<std::size_t> unreadable_files;
  std::vector<DurationMismatch> duration_mismatches;
  std::vector<std::size_t> empty_text;

  bool empty() const {
    return missing_files.empty() && unreadable_files.empty() &&
           duration_mismatches.empty() && empty_text.empty();
  }
};

struct ValidationOptions {
  double duration_tolerance = 0.1;
  bool expect_labeled = true;
};

/// Checks every record against the audio under `audio_root`. A file
/// referenced by a single record at offset 0 must match the stored duration
/// within tolerance; any record must lie inside its file.
ValidationReport validate_corpus(const std::vector<ManifestRecord>& records,
                                 const std::filesystem::path& audio_root,
                                 const ValidationOptions& options = {});

struct OverlapRemoval {
  std::size_t train_index = 0;
  std::size_t test_index = 0;
};

struct OverlapResult {
  std::vector<ManifestRecord> kept;
  std::vector<ManifestRecord> removed;
  std::vector<OverlapRemoval> removed_matches;
};

/// Drops training records whose no-PC text equals that of any test record.
OverlapResult remove_overlap(const std::vector<ManifestRecord>& train,
                             const std::vector<ManifestRecord>& test,
                             const LanguageProfile& profile);

struct CorpusSummary {
  std::size_t record_count = 0;
  double total_hours = 0.0;
  std::map<std::string, double> per_source_hours;
  double mean_chars_per_second = 0.0;
};

// Records without a source tag are grouped under "unknown".
CorpusSummary summarize(const std::vector<ManifestRecord>& records);

}  // namespace corpusforge

#endif  // CORPUSFORGE_MANIFEST_H_
