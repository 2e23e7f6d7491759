// core/include/corpusforge/ipl.h

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

#ifndef CORPUSFORGE_IPL_H_
#define CORPUSFORGE_IPL_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "corpusforge/manifest.h"
#include "corpusforge/textnorm.h"

namespace corpusforge {

enum class AdapterKind { kExternalCommand, kPrecomputedManifest, kMockCorruptor };

/// Source of hypotheses. Same (version_tag, record) must always give the same
/// hypothesis.
///
/// kExternalCommand: `command` is run through the shell with {input} and
///   {output} replaced by manifest paths (and {version} by the tag). The
///   command must write every input record to {output} with pred_text set.
/// kPrecomputedManifest: pred_text (else text) looked up by record key in
///   `hypotheses`.
/// kMockCorruptor: corrupts the record's own text; each character is
///   substituted, deleted or followed by an insertion with total probability
///   `corruption_rate`, seeded by (seed, version_tag, record key).
struct TranscriberAdapter {
  AdapterKind kind = AdapterKind::kMockCorruptor;
  std::string version_tag = "v0";
  std::string command;
  std::filesystem::path hypotheses;
  double corruption_rate = 0.0;
  std::uint64_t seed = 0;
  // Scratch space for external commands; a temp directory when empty.
  std::filesystem::path workdir;
};

// "cmd:<template>", "precomputed:<path>" or "mock:<rate>[:<seed>]".
TranscriberAdapter parse_adapter_spec(std::string_view spec);

struct TranscriptionResult {
  std::vector<ManifestRecord> records;  // input order, pred_text filled
  std::vector<std::size_t> missing;     // records the adapter had no output for
};

/// Fills pred_text and records the adapter version in the "asr_version"
/// extra key. Throws Error when an external command fails, with its stderr.
TranscriptionResult transcribe(const TranscriberAdapter& adapter,
                               const std::vector<ManifestRecord>& records);

std::string mock_corrupt(std::string_view text, double rate,
                         std::uint64_t seed);

struct IplConfig {
  int iterations = 1;
  double min_dur = 1.0;
  double max_dur = 20.0;
  double min_char_rate = 2.0;
  double max_char_rate = 35.0;
  double agreement_cer_max = 0.25;
  double relabel_fraction = 0.25;
  std::uint64_t seed = 0;
  // When set, per-iteration manifests, the report and a checkpoint are
  // written here; with `resume`, completed iterations are loaded instead of
  // recomputed.
  std::filesystem::path workdir;
  bool resume = false;
};

// Throws ValidationError on inconsistent values.
void check_ipl_config(const IplConfig& config);

struct DroppedRecord {
  ManifestRecord record;
  std::string reason;  // no_hypothesis, min_dur, max_dur, char_rate, agreement
};

struct PseudoFilterResult {
  std::vector<ManifestRecord> kept;
  std::vector<DroppedRecord> dropped;
};

/// `previous` maps record keys to the prior iteration's hypothesis; pass
/// nullptr (or leave a key out) when there is none.
PseudoFilterResult filter_pseudo(
    const std::vector<ManifestRecord>& current,
    const std::map<std::string, std::string>* previous,
    const IplConfig& config, const LanguageProfile& profile);

struct IplIterationReport {
  int iteration = 0;
  std::string adapter_version;
  std::size_t labeled_count = 0;
  double labeled_hours = 0.0;
  std::size_t transcribed = 0;
  std::size_t kept = 0;
  std::map<std::string, std::size_t> dropped;
  std::size_t pseudo_in_manifest = 0;
  double pseudo_hours = 0.0;
  double training_hours = 0.0;
  double labeled_to_pseudo_ratio = 0.0;  // 0 when there is no pseudo audio
};

struct IplReport {
  std::vector<IplIterationReport> iterations;
};

struct IplResult {
  std::vector<std::vector<ManifestRecord>> manifests;  // one per iteration
  IplReport report;
};

/// Iterative pseudo-labeling. Each iteration transcribes every record not yet
/// transcribed plus a seeded relabel_fraction sample of the pseudo cache,
/// filters the fresh hypotheses, and emits labeled + kept pseudo records
/// (text = hypothesis, source = "pseudo"). Labeled records pass through
/// untouched. On adapter failure the completed iterations stay checkpointed
/// in config.workdir and the error is rethrown.
IplResult run_ipl(const std::vector<ManifestRecord>& labeled,
                  const std::vector<ManifestRecord>& unlabeled,
                  const TranscriberAdapter& adapter, const IplConfig& config,
                  const LanguageProfile& profile);

std::string format_ipl_report(const IplReport& report);

}  // namespace corpusforge

#endif  // CORPUSFORGE_IPL_H_
