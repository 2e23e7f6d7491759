// core/include/corpusforge/pipeline.h

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

#ifndef CORPUSFORGE_PIPELINE_H_
#define CORPUSFORGE_PIPELINE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace corpusforge {

enum class StageKind {
  kNormalize,
  kDedupOverlap,
  kVadSegment,
  kAlignChapter,
  kFilter,
  kValidateByAsr,
  kEvaluate,
  kBootstrap,
  kIpl,
  kSummarize,
};

const char* to_string(StageKind kind);
std::optional<StageKind> parse_stage_kind(std::string_view name);
std::string valid_stage_kinds();

/// One pipeline step. `input` names the stage whose output feeds this one
/// ("input" for the pipeline input; empty means the previous stage). Outputs
/// are written relative to the workspace.
struct StageSpec {
  std::string name;
  std::string kind;                // one of valid_stage_kinds()
  std::string params_json = "{}";  // JSON object
  std::string input;
  std::string output;
};

struct PipelineConfig {
  std::filesystem::path workspace;
  std::filesystem::path input;  // optional pipeline-level input manifest
  std::vector<StageSpec> stages;
  bool resume = true;
  std::uint64_t seed = 0;
  // Directory that relative paths inside the config are resolved against.
  std::filesystem::path base_dir;
};

/// Parses the JSON config format. Unknown keys are rejected with a
/// ValidationError; semantic checks are left to validate_config().
/// If the config has no workspace, CORPUSFORGE_WORKSPACE is used.
PipelineConfig parse_pipeline_config(std::string_view json,
                                     const std::filesystem::path& base_dir);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

struct Diagnostic {
  std::string stage;
  std::string field;
  std::string message;
};

std::string to_string(const Diagnostic& diagnostic);

// Empty iff the config is runnable.
std::vector<Diagnostic> validate_config(const PipelineConfig& config);

enum class StageStatus { kRan, kSkipped, kFailed, kNotRun };
const char* to_string(StageStatus status);

struct StageResult {
  std::string name;
  std::string kind;
  StageStatus status = StageStatus::kNotRun;
  double seconds = 0.0;
  std::size_t input_records = 0;
  std::size_t output_records = 0;
  std::filesystem::path output;
  std::string fingerprint;
  std::string message;
};

struct RunReport {
  std::vector<StageResult> stages;
  bool ok = true;
};

struct RunOptions {
  // Stop cleanly after this stage has completed.
  std::optional<std::string> until;
};

/// Runs the stages in order. With config.resume, a stage whose stored
/// completion marker matches its fingerprint and whose output is intact is
/// skipped. Throws ValidationError if validate_config() reports problems and
/// Error if the workspace is locked by another process; a failing stage is
/// recorded in the report and stops the run.
RunReport run_pipeline(const PipelineConfig& config,
                       const RunOptions& options = {});

std::string format_run_report(const RunReport& report);

/// Digest over (kind, canonical params, input digests, toolkit version, stage
/// seed). Exposed for tests.
std::string stage_fingerprint(const PipelineConfig& config,
                              std::size_t stage_index);

std::uint64_t stage_seed(const PipelineConfig& config, std::size_t stage_index);

}  // namespace corpusforge

#endif  // CORPUSFORGE_PIPELINE_H_
