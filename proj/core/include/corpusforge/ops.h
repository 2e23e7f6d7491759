// core/include/corpusforge/ops.h

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

#ifndef CORPUSFORGE_OPS_H_
#define CORPUSFORGE_OPS_H_

// Manifest-level wrappers shared by the CLI and the pipeline runner.

#include <filesystem>
#include <string>
#include <vector>

#include "corpusforge/align.h"
#include "corpusforge/audio.h"
#include "corpusforge/manifest.h"
#include "corpusforge/metrics.h"
#include "corpusforge/textnorm.h"

namespace corpusforge {

// Profile from a file when `profile_path` is non-empty, else built-in `lang`.
LanguageProfile resolve_profile(const std::string& lang,
                                const std::filesystem::path& profile_path);

// Normalizes text and pred_text in place.
std::vector<ManifestRecord> normalize_records(std::vector<ManifestRecord> records,
                                              const LanguageProfile& profile,
                                              NormalizationMode mode,
                                              NormalizeStats* stats = nullptr);

/// Runs VAD over each record's span of audio (resolved against `root`) and
/// emits one unlabeled record per detected span, keeping language and source.
std::vector<ManifestRecord> vad_records(const std::vector<ManifestRecord>& records,
                                        const std::filesystem::path& root,
                                        const VadParams& params);

struct RecordFilterResult {
  std::vector<ManifestRecord> kept;
  std::vector<std::pair<ManifestRecord, std::string>> dropped;
};

/// filter_segments() over manifest records. The CER comes from the "cer"
/// extra key, or is computed from text and pred_text (no-PC) when a profile
/// is given. Records flagged align_status "unmatched" are dropped first.
RecordFilterResult filter_records(const std::vector<ManifestRecord>& records,
                                  const SegmentFilter& filter,
                                  const LanguageProfile* profile);

/// Hypotheses paired with `refs` by record key; with no hypothesis manifest,
/// each reference's own pred_text. Throws ValidationError naming the first
/// reference without a hypothesis.
std::vector<std::string> pair_hypotheses(const std::vector<ManifestRecord>& refs,
                                         const std::vector<ManifestRecord>* hyps);

EvalReport evaluate_records(const std::vector<ManifestRecord>& refs,
                            const std::vector<ManifestRecord>* hyps,
                            const LanguageProfile& profile,
                            NormalizationMode mode);

std::string format_summary(const CorpusSummary& summary);
std::string format_validation_report(const ValidationReport& report,
                                     const std::vector<ManifestRecord>& records);

}  // namespace corpusforge

#endif  // CORPUSFORGE_OPS_H_
