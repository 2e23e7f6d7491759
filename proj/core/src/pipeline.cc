// core/src/pipeline.cc

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

#include "corpusforge/pipeline.h"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <map>
#include <set>

#include "corpusforge/digest.h"
#include "corpusforge/error.h"
#include "corpusforge/fileutil.h"
#include "corpusforge/ipl.h"
#include "corpusforge/ops.h"
#include "corpusforge/stats.h"
#include "corpusforge/timed_words.h"
#include "corpusforge/version.h"
#include "json.hpp"

namespace corpusforge {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

constexpr StageKind kAllKinds[] = {
    StageKind::kNormalize,   StageKind::kDedupOverlap,  StageKind::kVadSegment,
    StageKind::kAlignChapter, StageKind::kFilter,       StageKind::kValidateByAsr,
    StageKind::kEvaluate,    StageKind::kBootstrap,     StageKind::kIpl,
    StageKind::kSummarize,
};

enum class ParamType { kNumber, kInteger, kString, kBool };

struct ParamSpec {
  const char* name;
  ParamType type;
  bool required;
  // String values naming an input file; resolved against the config's
  // directory and folded into the fingerprint.
  bool is_file;
};

constexpr ParamSpec kLanguage{"language", ParamType::kString, false, false};
constexpr ParamSpec kProfile{"profile", ParamType::kString, false, true};
constexpr ParamSpec kMode{"mode", ParamType::kString, false, false};

std::vector<ParamSpec> param_specs(StageKind kind) {
  switch (kind) {
    case StageKind::kNormalize:
      return {kLanguage, kProfile, kMode};
    case StageKind::kDedupOverlap:
      return {{"test", ParamType::kString, true, true}, kLanguage, kProfile};
    case StageKind::kVadSegment:
      return {{"audio_root", ParamType::kString, false, false},
              {"frame_ms", ParamType::kNumber, false, false},
              {"hop_ms", ParamType::kNumber, false, false},
              {"threshold_db", ParamType::kNumber, false, false},
              {"min_speech_ms", ParamType::kNumber, false, false},
              {"min_gap_ms", ParamType::kNumber, false, false},
              {"pad_ms", ParamType::kNumber, false, false}};
    case StageKind::kAlignChapter:
      return {{"words_root", ParamType::kString, false, false},
              kLanguage,
              kProfile,
              {"max_dur", ParamType::kNumber, false, false},
              {"gap_break", ParamType::kNumber, false, false},
              {"slack", ParamType::kNumber, false, false},
              {"start_margin", ParamType::kInteger, false, false},
              {"cer_accept", ParamType::kNumber, false, false}};
    case StageKind::kFilter:
      return {{"min_dur", ParamType::kNumber, false, false},
              {"max_dur", ParamType::kNumber, false, false},
              {"cer_max", ParamType::kNumber, false, false},
              kLanguage,
              kProfile};
    case StageKind::kValidateByAsr:
      return {{"adapter", ParamType::kString, true, false},
              {"cer_max", ParamType::kNumber, false, false},
              kLanguage,
              kProfile};
    case StageKind::kEvaluate:
      return {{"hypotheses", ParamType::kString, false, true},
              kLanguage,
              kProfile,
              kMode,
              {"per_utterance", ParamType::kBool, false, false}};
    case StageKind::kBootstrap:
      return {{"baseline", ParamType::kString, true, true},
              kLanguage,
              kProfile,
              kMode,
              {"replicates", ParamType::kInteger, false, false},
              {"level", ParamType::kNumber, false, false},
              {"threshold", ParamType::kNumber, false, false}};
    case StageKind::kIpl:
      return {{"unlabeled", ParamType::kString, true, true},
              {"adapter", ParamType::kString, true, false},
              kLanguage,
              kProfile,
              {"iterations", ParamType::kInteger, false, false},
              {"min_dur", ParamType::kNumber, false, false},
              {"max_dur", ParamType::kNumber, false, false},
              {"min_char_rate", ParamType::kNumber, false, false},
              {"max_char_rate", ParamType::kNumber, false, false},
              {"agreement_cer_max", ParamType::kNumber, false, false},
              {"relabel_fraction", ParamType::kNumber, false, false}};
    case StageKind::kSummarize:
      return {};
  }
  return {};
}

bool needs_language(StageKind kind) {
  switch (kind) {
    case StageKind::kNormalize:
    case StageKind::kDedupOverlap:
    case StageKind::kAlignChapter:
    case StageKind::kValidateByAsr:
    case StageKind::kEvaluate:
    case StageKind::kBootstrap:
    case StageKind::kIpl:
      return true;
    default:
      return false;
  }
}

// Stages whose output is a JSON report rather than a manifest.
bool writes_report(StageKind kind) {
  return kind == StageKind::kEvaluate || kind == StageKind::kBootstrap ||
         kind == StageKind::kSummarize;
}

const char* type_name(ParamType type) {
  switch (type) {
    case ParamType::kNumber: return "a number";
    case ParamType::kInteger: return "an integer";
    case ParamType::kString: return "a string";
    case ParamType::kBool: return "a boolean";
  }
  return "?";
}

bool type_matches(const json& value, ParamType type) {
  switch (type) {
    case ParamType::kNumber: return value.is_number();
    case ParamType::kInteger: return value.is_number_integer();
    case ParamType::kString: return value.is_string();
    case ParamType::kBool: return value.is_boolean();
  }
  return false;
}

fs::path resolve(const fs::path& base, const fs::path& p) {
  return p.is_absolute() ? p : base / p;
}

fs::path output_path(const PipelineConfig& config, const StageSpec& stage) {
  return resolve(config.workspace, stage.output);
}

// Index of the stage feeding `index`, or -1 for the pipeline input.
int input_stage(const PipelineConfig& config, std::size_t index) {
  const std::string& input = config.stages[index].input;
  if (input == "input") return -1;
  if (input.empty()) return static_cast<int>(index) - 1;
  for (std::size_t i = 0; i < index; ++i) {
    if (config.stages[i].name == input) return static_cast<int>(i);
  }
  throw ValidationError("stage '" + config.stages[index].name +
                        "': input '" + input + "' is not a prior stage");
}

fs::path input_path(const PipelineConfig& config, std::size_t index) {
  const int src = input_stage(config, index);
  if (src < 0) return resolve(config.base_dir, config.input);
  return output_path(config, config.stages[static_cast<std::size_t>(src)]);
}

json stage_params(const StageSpec& stage) {
  return json::parse(stage.params_json);
}

double number_or(const json& params, const char* key, double fallback) {
  return params.contains(key) ? params.at(key).get<double>() : fallback;
}

std::string string_or(const json& params, const char* key, std::string fallback) {
  return params.contains(key) ? params.at(key).get<std::string>() : fallback;
}

LanguageProfile stage_profile(const PipelineConfig& config, const json& params) {
  fs::path profile;
  if (params.contains("profile")) {
    profile = resolve(config.base_dir, params.at("profile").get<std::string>());
  }
  return resolve_profile(string_or(params, "language", ""), profile);
}

NormalizationMode stage_mode(const json& params, NormalizationMode fallback) {
  if (!params.contains("mode")) return fallback;
  return parse_normalization_mode(params.at("mode").get<std::string>());
}

// Applies the stage seed to mock adapters whose spec carries no seed.
TranscriberAdapter stage_adapter(const PipelineConfig& config, std::size_t index,
                                 const json& params, const fs::path& workdir) {
  const std::string spec = params.at("adapter").get<std::string>();
  TranscriberAdapter adapter = parse_adapter_spec(spec);
  if (adapter.kind == AdapterKind::kMockCorruptor &&
      spec.find(':', 5) == std::string::npos) {
    adapter.seed = derive_seed(stage_seed(config, index), "adapter");
  }
  if (adapter.kind == AdapterKind::kPrecomputedManifest) {
    adapter.hypotheses = resolve(config.base_dir, adapter.hypotheses);
  }
  adapter.workdir = workdir;
  return adapter;
}

fs::path state_dir(const PipelineConfig& config) {
  return config.workspace / ".corpusforge";
}

fs::path marker_path(const PipelineConfig& config, const StageSpec& stage) {
  return state_dir(config) / "stages" / (stage.name + ".json");
}

// Holds an exclusive advisory lock on the workspace for its lifetime.
class WorkspaceLock {
 public:
  explicit WorkspaceLock(const fs::path& dir) {
    fs::create_directories(dir);
    const fs::path path = dir / "lock";
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw Error("cannot open lock file " + path.string());
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
      ::close(fd_);
      throw Error("workspace " + dir.parent_path().string() +
                  " is in use by another corpusforge process");
    }
  }
  ~WorkspaceLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  WorkspaceLock(const WorkspaceLock&) = delete;
  WorkspaceLock& operator=(const WorkspaceLock&) = delete;

 private:
  int fd_ = -1;
};

std::string dump_report(const ojson& doc) {
  return doc.dump(2, ' ', false, ojson::error_handler_t::strict) + "\n";
}

struct StageOutput {
  std::string content;
  std::size_t input_records = 0;
  std::size_t output_records = 0;
};

// Word timings come from an embedded "words" list, a "words_path" key, or a
// file named after the audio with a .words extension. Empty when embedded.
std::optional<fs::path> words_file(const ManifestRecord& rec, const fs::path& words_root) {
  if (rec.extra_value("words")) return std::nullopt;
  fs::path path;
  if (auto raw = rec.extra_value("words_path")) {
    path = json::parse(*raw).get<std::string>();
  } else {
    path = fs::path(rec.audio_filepath).replace_extension(".words");
  }
  return resolve(words_root, path);
}

std::vector<TimedWord> words_for(const ManifestRecord& rec, const fs::path& words_root) {
  if (auto path = words_file(rec, words_root)) return read_timed_words(*path);
  std::string lines;
  for (const auto& item : json::parse(*rec.extra_value("words"))) lines += item.dump() + "\n";
  return parse_timed_words(lines);
}

StageOutput execute_stage(const PipelineConfig& config, std::size_t index,
                          const std::vector<ManifestRecord>& input) {
  const StageSpec& stage = config.stages[index];
  const StageKind kind = *parse_stage_kind(stage.kind);
  const json params = stage_params(stage);
  StageOutput out;
  out.input_records = input.size();
  std::vector<ManifestRecord> records;

  switch (kind) {
    case StageKind::kNormalize: {
      records = normalize_records(input, stage_profile(config, params),
                                  stage_mode(params, NormalizationMode::kNoPc));
      break;
    }
    case StageKind::kDedupOverlap: {
      const auto test = read_manifest(
          resolve(config.base_dir, params.at("test").get<std::string>()));
      records = remove_overlap(input, test, stage_profile(config, params)).kept;
      break;
    }
    case StageKind::kVadSegment: {
      VadParams vad;
      vad.frame_ms = number_or(params, "frame_ms", vad.frame_ms);
      vad.hop_ms = number_or(params, "hop_ms", vad.hop_ms);
      vad.threshold_db = number_or(params, "threshold_db", vad.threshold_db);
      vad.min_speech_ms = number_or(params, "min_speech_ms", vad.min_speech_ms);
      vad.min_gap_ms = number_or(params, "min_gap_ms", vad.min_gap_ms);
      vad.pad_ms = number_or(params, "pad_ms", vad.pad_ms);
      records = vad_records(
          input, resolve(config.base_dir, string_or(params, "audio_root", ".")), vad);
      break;
    }
    case StageKind::kAlignChapter: {
      AlignParams align;
      align.max_dur = number_or(params, "max_dur", align.max_dur);
      align.gap_break = number_or(params, "gap_break", align.gap_break);
      align.slack = number_or(params, "slack", align.slack);
      if (params.contains("start_margin")) {
        align.start_margin = params.at("start_margin").get<std::size_t>();
      }
      align.cer_accept = number_or(params, "cer_accept", align.cer_accept);
      const auto profile = stage_profile(config, params);
      const fs::path words_root =
          resolve(config.base_dir, string_or(params, "words_root", "."));
      for (const auto& chapter : input) {
        const auto words = words_for(chapter, words_root);
        for (const auto& seg :
             align_chapter(chapter.text, words, profile, align, chapter.audio_filepath)) {
          ManifestRecord rec = segment_to_record(seg);
          rec.offset += chapter.offset;
          rec.language = chapter.language;
          rec.source = chapter.source;
          records.push_back(std::move(rec));
        }
      }
      break;
    }
    case StageKind::kFilter: {
      SegmentFilter filter;
      filter.min_dur = number_or(params, "min_dur", filter.min_dur);
      filter.max_dur = number_or(params, "max_dur", filter.max_dur);
      if (params.contains("cer_max")) filter.cer_max = params.at("cer_max").get<double>();
      std::optional<LanguageProfile> profile;
      if (params.contains("language") || params.contains("profile")) {
        profile = stage_profile(config, params);
      }
      records = filter_records(input, filter, profile ? &*profile : nullptr).kept;
      break;
    }
    case StageKind::kValidateByAsr: {
      const fs::path workdir = state_dir(config) / "work" / stage.name;
      const auto adapter = stage_adapter(config, index, params, workdir);
      const auto hyps = transcribe(adapter, input);
      records = validate_by_asr(input, hyps.records, stage_profile(config, params),
                                number_or(params, "cer_max", 0.3))
                    .accepted;
      break;
    }
    case StageKind::kEvaluate: {
      std::optional<std::vector<ManifestRecord>> hyps;
      if (params.contains("hypotheses")) {
        hyps = read_manifest(
            resolve(config.base_dir, params.at("hypotheses").get<std::string>()));
      }
      const auto report =
          evaluate_records(input, hyps ? &*hyps : nullptr, stage_profile(config, params),
                           stage_mode(params, NormalizationMode::kNoPc));
      out.content = format_eval_report(
          report, params.contains("per_utterance") && params.at("per_utterance").get<bool>());
      out.output_records = input.size();
      return out;
    }
    case StageKind::kBootstrap: {
      const auto profile = stage_profile(config, params);
      const auto mode = stage_mode(params, NormalizationMode::kNoPc);
      const auto baseline_hyps = read_manifest(
          resolve(config.base_dir, params.at("baseline").get<std::string>()));
      const auto base = evaluate_records(input, &baseline_hyps, profile, mode);
      const auto cand = evaluate_records(input, nullptr, profile, mode);
      BootstrapOptions options;
      if (params.contains("replicates")) {
        options.replicates = params.at("replicates").get<std::uint64_t>();
      }
      options.level = number_or(params, "level", options.level);
      options.seed = stage_seed(config, index);
      const auto report =
          bootstrap_compare(scores_from_report(base.per_utterance, "baseline"),
                            scores_from_report(cand.per_utterance, stage.name), options);
      out.content = format_bootstrap_report(report, number_or(params, "threshold", 0.95));
      out.output_records = input.size();
      return out;
    }
    case StageKind::kIpl: {
      IplConfig ipl;
      if (params.contains("iterations")) ipl.iterations = params.at("iterations").get<int>();
      ipl.min_dur = number_or(params, "min_dur", ipl.min_dur);
      ipl.max_dur = number_or(params, "max_dur", ipl.max_dur);
      ipl.min_char_rate = number_or(params, "min_char_rate", ipl.min_char_rate);
      ipl.max_char_rate = number_or(params, "max_char_rate", ipl.max_char_rate);
      ipl.agreement_cer_max = number_or(params, "agreement_cer_max", ipl.agreement_cer_max);
      ipl.relabel_fraction = number_or(params, "relabel_fraction", ipl.relabel_fraction);
      ipl.seed = derive_seed(stage_seed(config, index), "ipl");
      // One scratch directory per fingerprint, so a stale checkpoint is never
      // resumed against changed inputs.
      ipl.workdir = state_dir(config) / "work" / stage.name /
                    stage_fingerprint(config, index).substr(0, 16);
      ipl.resume = config.resume;
      const auto unlabeled = read_manifest(
          resolve(config.base_dir, params.at("unlabeled").get<std::string>()));
      const auto adapter = stage_adapter(config, index, params, ipl.workdir / "asr");
      auto result = run_ipl(input, unlabeled, adapter, ipl, stage_profile(config, params));
      records = result.manifests.empty() ? input : std::move(result.manifests.back());
      break;
    }
    case StageKind::kSummarize: {
      out.content = format_summary(summarize(input));
      out.output_records = input.size();
      return out;
    }
  }
  out.content = format_manifest(records);
  out.output_records = summarize(records).record_count;
  return out;
}

void add_file_digest(Sha256& hash, const fs::path& path) {
  hash.update_field(path.filename().string());
  hash.update_field(fs::exists(path) ? file_sha256_hex(path) : std::string("missing"));
}

}  // namespace

const char* to_string(StageKind kind) {
  switch (kind) {
    case StageKind::kNormalize: return "normalize";
    case StageKind::kDedupOverlap: return "dedup_overlap";
    case StageKind::kVadSegment: return "vad_segment";
    case StageKind::kAlignChapter: return "align_chapter";
    case StageKind::kFilter: return "filter";
    case StageKind::kValidateByAsr: return "validate_by_asr";
    case StageKind::kEvaluate: return "evaluate";
    case StageKind::kBootstrap: return "bootstrap";
    case StageKind::kIpl: return "ipl";
    case StageKind::kSummarize: return "summarize";
  }
  return "?";
}

std::optional<StageKind> parse_stage_kind(std::string_view name) {
  for (StageKind kind : kAllKinds) {
    if (name == to_string(kind)) return kind;
  }
  return std::nullopt;
}

std::string valid_stage_kinds() {
  std::string out;
  for (StageKind kind : kAllKinds) {
    if (!out.empty()) out += ", ";
    out += to_string(kind);
  }
  return out;
}

PipelineConfig parse_pipeline_config(std::string_view text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("config: expected a JSON object");

  auto expect = [](bool ok, const std::string& what) {
    if (!ok) throw ValidationError("config: " + what);
  };
  PipelineConfig config;
  config.base_dir = base_dir;
  static const std::set<std::string> kTopKeys = {"workspace", "input", "stages",
                                                 "resume", "seed"};
  for (const auto& [key, value] : doc.items()) {
    expect(kTopKeys.count(key) > 0, "unknown key '" + key + "'");
  }
  if (doc.contains("workspace")) {
    expect(doc["workspace"].is_string(), "workspace must be a string");
    config.workspace = resolve(base_dir, doc["workspace"].get<std::string>());
  } else if (const char* env = std::getenv("CORPUSFORGE_WORKSPACE"); env && *env) {
    config.workspace = env;
  }
  if (doc.contains("input")) {
    expect(doc["input"].is_string(), "input must be a string");
    config.input = doc["input"].get<std::string>();
  }
  if (doc.contains("resume")) {
    expect(doc["resume"].is_boolean(), "resume must be a boolean");
    config.resume = doc["resume"].get<bool>();
  }
  if (doc.contains("seed")) {
    expect(doc["seed"].is_number_unsigned(), "seed must be a non-negative integer");
    config.seed = doc["seed"].get<std::uint64_t>();
  }
  expect(doc.contains("stages") && doc["stages"].is_array(), "stages must be a list");

  static const std::set<std::string> kStageKeys = {"name", "kind", "params", "input",
                                                   "output"};
  std::size_t i = 0;
  for (const auto& s : doc["stages"]) {
    const std::string where = "stage " + std::to_string(i++);
    expect(s.is_object(), where + " must be an object");
    for (const auto& [key, value] : s.items()) {
      expect(kStageKeys.count(key) > 0, where + ": unknown key '" + key + "'");
    }
    StageSpec spec;
    expect(s.contains("name") && s["name"].is_string(), where + ": name must be a string");
    expect(s.contains("kind") && s["kind"].is_string(), where + ": kind must be a string");
    spec.name = s["name"].get<std::string>();
    spec.kind = s["kind"].get<std::string>();
    if (s.contains("params")) {
      expect(s["params"].is_object(), where + ": params must be an object");
      spec.params_json = s["params"].dump();
    }
    if (s.contains("input")) {
      expect(s["input"].is_string(), where + ": input must be a string");
      spec.input = s["input"].get<std::string>();
    }
    if (s.contains("output")) {
      expect(s["output"].is_string(), where + ": output must be a string");
      spec.output = s["output"].get<std::string>();
    } else {
      const auto kind = parse_stage_kind(spec.kind);
      spec.output = spec.name + (kind && writes_report(*kind) ? ".json" : ".jsonl");
    }
    config.stages.push_back(std::move(spec));
  }
  return config;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw ValidationError(std::string("cannot read config: ") + e.what());
  }
  return parse_pipeline_config(text, fs::absolute(path).parent_path());
}

std::string to_string(const Diagnostic& d) {
  std::string out;
  if (!d.stage.empty()) out += "stage '" + d.stage + "'";
  if (!d.field.empty()) out += (out.empty() ? "" : ", ") + std::string("field '") + d.field + "'";
  return out.empty() ? d.message : out + ": " + d.message;
}

std::vector<Diagnostic> validate_config(const PipelineConfig& config) {
  std::vector<Diagnostic> diags;
  auto add = [&](std::string stage, std::string field, std::string message) {
    diags.push_back({std::move(stage), std::move(field), std::move(message)});
  };
  if (config.workspace.empty()) {
    add("", "workspace", "no workspace given (set it in the config or CORPUSFORGE_WORKSPACE)");
  }
  if (config.stages.empty()) add("", "stages", "no stages");

  std::set<std::string> names;
  std::set<fs::path> outputs;
  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < config.stages.size(); ++i) {
    const StageSpec& stage = config.stages[i];
    if (stage.name.empty()) add(stage.name, "name", "empty stage name");
    if (!names.insert(stage.name).second) add(stage.name, "name", "duplicate stage");
    position.emplace(stage.name, i);

    const auto kind = parse_stage_kind(stage.kind);
    if (!kind) {
      add(stage.name, "kind",
          "unknown kind '" + stage.kind + "' (valid kinds: " + valid_stage_kinds() + ")");
    }

    // Input wiring.
    int src = -2;
    if (stage.input == "input") {
      if (config.input.empty()) add(stage.name, "input", "the config has no input manifest");
      src = -1;
    } else if (stage.input.empty()) {
      if (i == 0 && config.input.empty()) {
        add(stage.name, "input", "first stage needs the config input manifest");
      }
      src = static_cast<int>(i) - 1;
    } else {
      auto it = position.find(stage.input);
      if (it == position.end() || it->second >= i) {
        add(stage.name, "input",
            "'" + stage.input + "' is not the output of an earlier stage");
      } else {
        src = static_cast<int>(it->second);
      }
    }
    if (src >= 0) {
      const auto src_kind = parse_stage_kind(config.stages[static_cast<std::size_t>(src)].kind);
      if (src_kind && writes_report(*src_kind)) {
        add(stage.name, "input",
            "stage '" + config.stages[static_cast<std::size_t>(src)].name +
                "' writes a report, not a manifest");
      }
    }

    if (stage.output.empty()) {
      add(stage.name, "output", "empty output path");
    } else {
      const fs::path out = resolve(config.workspace, stage.output).lexically_normal();
      if (!outputs.insert(out).second) {
        add(stage.name, "output", "output path shared with an earlier stage");
      }
    }

    json params;
    try {
      params = json::parse(stage.params_json);
    } catch (const json::parse_error&) {
      add(stage.name, "params", "not valid JSON");
      continue;
    }
    if (!params.is_object()) {
      add(stage.name, "params", "must be an object");
      continue;
    }
    if (!kind) continue;
    const auto specs = param_specs(*kind);
    for (const auto& [key, value] : params.items()) {
      auto spec = std::find_if(specs.begin(), specs.end(),
                               [&](const ParamSpec& p) { return key == p.name; });
      if (spec == specs.end()) {
        add(stage.name, key, "unknown parameter for kind " + stage.kind);
      } else if (!type_matches(value, spec->type)) {
        add(stage.name, key, std::string("must be ") + type_name(spec->type));
      }
    }
    for (const auto& spec : specs) {
      if (spec.required && !params.contains(spec.name)) {
        add(stage.name, spec.name, "required parameter missing");
      }
    }
    if (needs_language(*kind) && !params.contains("language") && !params.contains("profile")) {
      add(stage.name, "language", "required parameter missing (or give a profile)");
    }
    if (params.contains("language") && params["language"].is_string() &&
        !params.contains("profile")) {
      try {
        build_profile(params["language"].get<std::string>());
      } catch (const ValidationError& e) {
        add(stage.name, "language", e.what());
      }
    }
    if (params.contains("mode") && params["mode"].is_string()) {
      try {
        parse_normalization_mode(params["mode"].get<std::string>());
      } catch (const ValidationError& e) {
        add(stage.name, "mode", e.what());
      }
    }
    if (params.contains("adapter") && params["adapter"].is_string()) {
      try {
        parse_adapter_spec(params["adapter"].get<std::string>());
      } catch (const ValidationError& e) {
        add(stage.name, "adapter", e.what());
      }
    }
  }
  return diags;
}

const char* to_string(StageStatus status) {
  switch (status) {
    case StageStatus::kRan: return "ran";
    case StageStatus::kSkipped: return "skipped";
    case StageStatus::kFailed: return "failed";
    case StageStatus::kNotRun: return "not_run";
  }
  return "?";
}

std::uint64_t stage_seed(const PipelineConfig& config, std::size_t stage_index) {
  return derive_seed(config.seed, "stage:" + config.stages.at(stage_index).name);
}

std::string stage_fingerprint(const PipelineConfig& config, std::size_t stage_index) {
  const StageSpec& stage = config.stages.at(stage_index);
  const json params = stage_params(stage);
  Sha256 hash;
  hash.update_field("corpusforge-stage");
  hash.update_field(kVersion);
  hash.update_field(stage.kind);
  // nlohmann::json keeps object keys sorted, which makes this canonical.
  hash.update_field(params.dump());
  hash.update_field(std::to_string(stage_seed(config, stage_index)));
  add_file_digest(hash, input_path(config, stage_index));

  const auto kind = parse_stage_kind(stage.kind);
  if (kind) {
    for (const auto& spec : param_specs(*kind)) {
      if (spec.is_file && params.contains(spec.name)) {
        add_file_digest(hash, resolve(config.base_dir, params[spec.name].get<std::string>()));
      }
    }
    if (params.contains("adapter")) {
      const auto adapter = parse_adapter_spec(params["adapter"].get<std::string>());
      if (adapter.kind == AdapterKind::kPrecomputedManifest) {
        add_file_digest(hash, resolve(config.base_dir, adapter.hypotheses));
      }
    }
    // Stages that read audio or word timings depend on those files too.
    if (*kind == StageKind::kVadSegment || *kind == StageKind::kAlignChapter) {
      const fs::path in = input_path(config, stage_index);
      if (fs::exists(in)) {
        const auto root = resolve(
            config.base_dir,
            params.value(*kind == StageKind::kVadSegment ? "audio_root" : "words_root", "."));
        std::set<fs::path> seen;
        for (const auto& rec : read_manifest(in)) {
          std::optional<fs::path> p = *kind == StageKind::kVadSegment
                                          ? resolve(root, rec.audio_filepath)
                                          : words_file(rec, root);
          if (!p) continue;
          if (seen.insert(*p).second) add_file_digest(hash, *p);
        }
      }
    }
  }
  return hash.hex_digest();
}

RunReport run_pipeline(const PipelineConfig& config, const RunOptions& options) {
  if (auto diags = validate_config(config); !diags.empty()) {
    std::string message = "invalid pipeline config:";
    for (const auto& d : diags) message += "\n  " + to_string(d);
    throw ValidationError(message);
  }
  if (options.until) {
    const bool known = std::any_of(config.stages.begin(), config.stages.end(),
                                   [&](const StageSpec& s) { return s.name == *options.until; });
    if (!known) throw ValidationError("--until: no stage named '" + *options.until + "'");
  }

  fs::create_directories(config.workspace);
  WorkspaceLock lock(state_dir(config));

  RunReport report;
  for (const auto& stage : config.stages) {
    StageResult result;
    result.name = stage.name;
    result.kind = stage.kind;
    result.output = output_path(config, stage);
    report.stages.push_back(std::move(result));
  }

  for (std::size_t i = 0; i < config.stages.size(); ++i) {
    const StageSpec& stage = config.stages[i];
    StageResult& result = report.stages[i];
    const auto start = std::chrono::steady_clock::now();
    try {
      const fs::path in = input_path(config, i);
      result.fingerprint = stage_fingerprint(config, i);
      const fs::path marker = marker_path(config, stage);

      bool skip = false;
      if (config.resume && fs::exists(marker) && fs::exists(result.output)) {
        const json doc = json::parse(read_file(marker), nullptr, false);
        skip = doc.is_object() && doc.value("fingerprint", "") == result.fingerprint &&
               doc.value("output_digest", "") == file_sha256_hex(result.output);
        if (skip) {
          result.input_records = doc.value("input_records", std::size_t{0});
          result.output_records = doc.value("output_records", std::size_t{0});
        }
      }

      if (skip) {
        result.status = StageStatus::kSkipped;
      } else {
        fs::remove(marker);
        const auto input = read_manifest(in);
        StageOutput out = execute_stage(config, i, input);
        write_file_atomic(result.output, out.content);
        result.input_records = out.input_records;
        result.output_records = out.output_records;
        json doc;
        doc["fingerprint"] = result.fingerprint;
        doc["output_digest"] = sha256_hex(out.content);
        doc["input_records"] = result.input_records;
        doc["output_records"] = result.output_records;
        write_file_atomic(marker, doc.dump(1) + "\n");
        result.status = StageStatus::kRan;
      }
    } catch (const std::exception& e) {
      result.status = StageStatus::kFailed;
      result.message = e.what();
      report.ok = false;
    }
    result.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (result.status == StageStatus::kFailed) break;
    if (options.until && stage.name == *options.until) break;
  }
  return report;
}

std::string format_run_report(const RunReport& report) {
  ojson doc;
  doc["ok"] = report.ok;
  ojson stages = ojson::array();
  for (const auto& s : report.stages) {
    ojson row;
    row["name"] = s.name;
    row["kind"] = s.kind;
    row["status"] = to_string(s.status);
    row["seconds"] = s.seconds;
    row["input_records"] = s.input_records;
    row["output_records"] = s.output_records;
    row["output"] = s.output.string();
    row["fingerprint"] = s.fingerprint;
    if (!s.message.empty()) row["message"] = s.message;
    stages.push_back(std::move(row));
  }
  doc["stages"] = std::move(stages);
  return dump_report(doc);
}

}  // namespace corpusforge
