// tools/corpusforge.cc

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

// corpusforge command-line entry point.
//
// Exit codes: 0 success, 1 validation error (bad input, bad arguments,
// failed checks), 2 runtime failure.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "corpusforge/align.h"
#include "corpusforge/audio.h"
#include "corpusforge/error.h"
#include "corpusforge/fileutil.h"
#include "corpusforge/ipl.h"
#include "corpusforge/manifest.h"
#include "corpusforge/metrics.h"
#include "corpusforge/ops.h"
#include "corpusforge/pipeline.h"
#include "corpusforge/stats.h"
#include "corpusforge/timed_words.h"
#include "corpusforge/version.h"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace corpusforge;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

// Report text goes to `path`, or stdout when it is empty or "-".
void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_file_atomic(path, text);
  }
}

void emit_manifest(const std::vector<ManifestRecord>& records, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << format_manifest(records);
  } else {
    write_manifest(records, path);
  }
}

struct LangOptions {
  std::string lang;
  std::string profile;
  std::string mode = "no_pc";

  void add(CLI::App* app, bool with_mode) {
    app->add_option("--lang", lang, "Built-in language profile (hy, ka)");
    app->add_option("--profile", profile, "Language profile JSON file")->check(CLI::ExistingFile);
    if (with_mode) {
      app->add_option("--mode", mode, "Normalization mode")
          ->check(CLI::IsMember({"with_pc", "no_pc"}));
    }
  }
  LanguageProfile resolve() const {
    if (lang.empty() && profile.empty()) {
      throw ValidationError("one of --lang or --profile is required");
    }
    return resolve_profile(lang, profile);
  }
  NormalizationMode normalization() const { return parse_normalization_mode(mode); }
};

void add_manifest_commands(CLI::App& app) {
  auto* manifest = app.add_subcommand("manifest", "Validate, summarize and deduplicate manifests");
  manifest->require_subcommand(1);

  {
    auto* cmd = manifest->add_subcommand("validate", "Check records against the audio files");
    auto path = std::make_shared<std::string>();
    auto root = std::make_shared<std::string>(".");
    auto opts = std::make_shared<ValidationOptions>();
    auto unlabeled = std::make_shared<bool>(false);
    auto out = std::make_shared<std::string>();
    cmd->add_option("manifest", *path, "Manifest file")->required();
    cmd->add_option("--root,--audio-root", *root, "Directory audio paths are relative to");
    cmd->add_option("--tolerance", opts->duration_tolerance, "Duration tolerance in seconds");
    cmd->add_flag("--unlabeled", *unlabeled, "Do not report empty transcripts");
    cmd->add_option("-o,--output", *out, "Write the report here instead of stdout");
    cmd->callback([=] {
      const auto records = read_manifest(*path);
      ValidationOptions options = *opts;
      options.expect_labeled = !*unlabeled;
      const auto report = validate_corpus(records, *root, options);
      emit(format_validation_report(report, records), *out);
      if (!report.empty()) throw ValidationError("manifest has problems (see report)");
    });
  }
  {
    auto* cmd = manifest->add_subcommand("summarize", "Hours per source and character rate");
    auto paths = std::make_shared<std::vector<std::string>>();
    auto out = std::make_shared<std::string>();
    cmd->add_option("manifests", *paths, "Manifest files (pooled)")->required();
    cmd->add_option("-o,--output", *out, "Write the summary here instead of stdout");
    cmd->callback([=] {
      std::vector<ManifestRecord> all;
      for (const auto& p : *paths) {
        auto records = read_manifest(p);
        all.insert(all.end(), records.begin(), records.end());
      }
      emit(format_summary(summarize(all)), *out);
    });
  }
  {
    auto* cmd = manifest->add_subcommand(
        "dedup-overlap", "Drop training records whose text appears in a test set");
    auto train = std::make_shared<std::string>();
    auto test = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto removed = std::make_shared<std::string>();
    auto lang = std::make_shared<LangOptions>();
    cmd->add_option("input", *train, "Training manifest")->required();
    cmd->add_option("--test", *test, "Test manifest")->required();
    cmd->add_option("-o,--output", *out, "Deduplicated training manifest")->required();
    cmd->add_option("--removed", *removed, "Also write the removed records here");
    lang->add(cmd, false);
    cmd->callback([=] {
      const auto result =
          remove_overlap(read_manifest(*train), read_manifest(*test), lang->resolve());
      write_manifest(result.kept, *out);
      if (!removed->empty()) write_manifest(result.removed, *removed);
      std::cerr << "kept " << result.kept.size() << ", removed " << result.removed.size()
                << "\n";
    });
  }
}

void add_normalize(CLI::App& app) {
  auto* cmd = app.add_subcommand("normalize", "Normalize text and pred_text of a manifest");
  auto in = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto lang = std::make_shared<LangOptions>();
  cmd->add_option("input", *in, "Input manifest")->required();
  cmd->add_option("-o,--output", *out, "Output manifest (stdout when omitted)");
  lang->add(cmd, true);
  cmd->callback([=] {
    NormalizeStats stats;
    const auto records =
        normalize_records(read_manifest(*in), lang->resolve(), lang->normalization(), &stats);
    emit_manifest(records, *out);
    if (stats.dropped > 0) {
      std::cerr << "dropped " << stats.dropped << " characters outside the profile\n";
    }
  });
}

void add_vad(CLI::App& app) {
  auto* cmd = app.add_subcommand("vad", "Energy VAD over long recordings");
  auto in = std::make_shared<std::string>();
  auto wav = std::make_shared<std::string>();
  auto root = std::make_shared<std::string>(".");
  auto out = std::make_shared<std::string>();
  auto params = std::make_shared<VadParams>();
  auto* source = cmd->add_option_group("source");
  source->add_option("input", *in, "Manifest of recordings");
  source->add_option("--wav", *wav, "Single WAV file; prints spans as JSON");
  source->require_option(1);
  cmd->add_option("--root,--audio-root", *root, "Directory audio paths are relative to");
  cmd->add_option("-o,--output", *out, "Output manifest (stdout when omitted)");
  cmd->add_option("--frame-ms", params->frame_ms, "Analysis frame length");
  cmd->add_option("--hop-ms", params->hop_ms, "Frame hop");
  cmd->add_option("--threshold-db", params->threshold_db,
                  "Speech threshold below the 95th percentile frame level");
  cmd->add_option("--min-speech-ms", params->min_speech_ms, "Shortest kept span");
  cmd->add_option("--min-gap-ms", params->min_gap_ms, "Shorter gaps are bridged");
  cmd->add_option("--pad-ms", params->pad_ms, "Padding added to each span");
  cmd->callback([=] {
    if (!wav->empty()) {
      check_vad_params(*params);
      nlohmann::ordered_json spans = nlohmann::ordered_json::array();
      for (const auto& s : energy_vad(read_wav(*wav), *params)) {
        spans.push_back({{"start", s.start}, {"end", s.end}});
      }
      emit(spans.dump(2) + "\n", *out);
      return;
    }
    emit_manifest(vad_records(read_manifest(*in), *root, *params), *out);
  });
}

void add_segment(CLI::App& app) {
  auto* cmd = app.add_subcommand("segment", "Cut timed words into word-safe chunks");
  auto words = std::make_shared<std::string>();
  auto audio = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto max_dur = std::make_shared<double>(20.0);
  auto gap = std::make_shared<double>(1.0);
  cmd->add_option("words", *words, "Timed words (JSON lines, 'word start end' or CTM)")
      ->required();
  cmd->add_option("--audio", *audio, "audio_filepath for the emitted records")->required();
  cmd->add_option("-o,--output", *out, "Output manifest (stdout when omitted)");
  cmd->add_option("--max-dur", *max_dur, "Longest chunk in seconds");
  cmd->add_option("--gap-break", *gap, "Pauses longer than this always split");
  cmd->callback([=] {
    if (!(*max_dur > 0.0) || *gap < 0.0) {
      throw ValidationError("need --max-dur > 0 and --gap-break >= 0");
    }
    const auto timed = read_timed_words(*words);
    std::vector<ManifestRecord> records;
    for (const auto& seg : chunk_by_timestamps(timed, *max_dur, *gap, *audio)) {
      records.push_back(segment_to_record(seg));
    }
    emit_manifest(records, *out);
  });
}

void add_align_chapter(CLI::App& app) {
  auto* cmd = app.add_subcommand("align-chapter",
                                 "Align ASR chunks of a long recording to its text");
  auto text = std::make_shared<std::string>();
  auto words = std::make_shared<std::string>();
  auto audio = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto params = std::make_shared<AlignParams>();
  auto lang = std::make_shared<LangOptions>();
  cmd->add_option("--ref,--text", *text, "Chapter text file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--words", *words, "ASR timed words")->required()->check(CLI::ExistingFile);
  cmd->add_option("--audio", *audio,
                  "audio_filepath for the emitted records (default: chapter file stem + .wav)");
  cmd->add_option("-o,--output", *out, "Output manifest (stdout when omitted)");
  cmd->add_option("--max-dur", params->max_dur, "Longest chunk in seconds");
  cmd->add_option("--gap-break", params->gap_break, "Pauses longer than this always split");
  cmd->add_option("--slack", params->slack, "Relative window length slack");
  cmd->add_option("--start-margin", params->start_margin, "Extra start positions searched");
  cmd->add_option("--cer-accept", params->cer_accept, "Accept segments up to this CER");
  lang->add(cmd, false);
  cmd->callback([=] {
    const std::string audio_path =
        audio->empty() ? fs::path(*text).filename().replace_extension(".wav").string() : *audio;
    std::vector<ManifestRecord> records;
    for (const auto& seg : align_chapter(read_file(*text), read_timed_words(*words),
                                         lang->resolve(), *params, audio_path)) {
      records.push_back(segment_to_record(seg));
    }
    emit_manifest(records, *out);
  });
}

void add_filter(CLI::App& app) {
  auto* cmd = app.add_subcommand("filter", "Drop segments by duration and CER");
  auto in = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto rejected = std::make_shared<std::string>();
  auto filter = std::make_shared<SegmentFilter>();
  auto cer_max = std::make_shared<std::optional<double>>();
  auto lang = std::make_shared<LangOptions>();
  cmd->add_option("input", *in, "Input manifest")->required();
  cmd->add_option("-o,--output", *out, "Kept records (stdout when omitted)");
  cmd->add_option("--rejected", *rejected, "Write dropped records with a reason here");
  cmd->add_option("--min-dur", filter->min_dur, "Shortest kept duration");
  cmd->add_option("--max-dur", filter->max_dur, "Longest kept duration");
  cmd->add_option("--cer-max", *cer_max, "Highest kept CER");
  lang->add(cmd, false);
  cmd->callback([=] {
    SegmentFilter f = *filter;
    f.cer_max = *cer_max;
    std::optional<LanguageProfile> profile;
    if (!lang->lang.empty() || !lang->profile.empty()) profile = lang->resolve();
    auto result = filter_records(read_manifest(*in), f, profile ? &*profile : nullptr);
    emit_manifest(result.kept, *out);
    if (!rejected->empty()) {
      std::vector<ManifestRecord> dropped;
      for (auto& [rec, reason] : result.dropped) {
        rec.set_extra("filter_reason", nlohmann::json(reason).dump());
        dropped.push_back(rec);
      }
      write_manifest(dropped, *rejected);
    }
    std::cerr << "kept " << result.kept.size() << ", dropped " << result.dropped.size()
              << "\n";
  });
}

void add_eval(CLI::App& app) {
  auto* cmd = app.add_subcommand("eval", "WER, CER and (with PC) PER");
  auto ref = std::make_shared<std::string>();
  auto hyp = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto per_utt = std::make_shared<bool>(false);
  auto lang = std::make_shared<LangOptions>();
  cmd->add_option("--refs,--ref", *ref, "Reference manifest")->required();
  cmd->add_option("--hyps,--hyp", *hyp,
                  "Hypothesis manifest paired by record key (default: pred_text of --ref)");
  cmd->add_option("-o,--output", *out, "Write the report here instead of stdout");
  cmd->add_flag("--per-utterance", *per_utt, "Include per-utterance error counts");
  lang->add(cmd, true);
  cmd->callback([=] {
    const auto refs = read_manifest(*ref);
    std::optional<std::vector<ManifestRecord>> hyps;
    if (!hyp->empty()) hyps = read_manifest(*hyp);
    const auto report = evaluate_records(refs, hyps ? &*hyps : nullptr, lang->resolve(),
                                         lang->normalization());
    emit(format_eval_report(report, *per_utt), *out);
  });
}

void add_bootstrap(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "bootstrap", "Paired bootstrap CI and probability of improvement of B over A");
  auto a = std::make_shared<std::string>();
  auto b = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto options = std::make_shared<BootstrapOptions>();
  auto threshold = std::make_shared<double>(0.95);
  cmd->add_option("--a", *a, "Eval report of system A written with --per-utterance")
      ->required();
  cmd->add_option("--b", *b, "Eval report of system B written with --per-utterance")
      ->required();
  cmd->add_option("-o,--output", *out, "Write the report here instead of stdout");
  cmd->add_option("--B,--replicates", options->replicates, "Bootstrap replicates");
  cmd->add_option("--level", options->level, "Confidence level of the interval");
  cmd->add_option("--seed", options->seed, "Random seed");
  cmd->add_option("--threads", options->threads, "Worker threads");
  cmd->add_flag("--enumerate", options->enumerate,
                "Use all N^N resamples instead of random ones (N <= 8)");
  cmd->add_option("--threshold", *threshold, "POI needed to call B significantly better");
  cmd->callback([=] {
    const auto sa = scores_from_report(parse_per_utterance(read_file(*a)), *a);
    const auto sb = scores_from_report(parse_per_utterance(read_file(*b)), *b);
    emit(format_bootstrap_report(bootstrap_compare(sa, sb, *options), *threshold), *out);
  });
}

void add_ipl(CLI::App& app) {
  auto* cmd = app.add_subcommand("ipl", "Iterative pseudo-labeling");
  auto labeled = std::make_shared<std::string>();
  auto unlabeled = std::make_shared<std::string>();
  auto adapter = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto report = std::make_shared<std::string>();
  auto config = std::make_shared<IplConfig>();
  auto lang = std::make_shared<LangOptions>();
  cmd->add_option("--labeled", *labeled, "Labeled manifest")->required();
  cmd->add_option("--unlabeled", *unlabeled, "Unlabeled manifest")->required();
  cmd->add_option("--adapter", *adapter,
                  "cmd:<template>, precomputed:<manifest> or mock:<rate>[:<seed>]")
      ->required();
  cmd->add_option("-o,--output", *out,
                  "Work directory: per-iteration manifests, checkpoint, report and the "
                  "final train.jsonl")
      ->required();
  cmd->add_option("--report", *report, "Also write the iteration report here");
  cmd->add_flag("--resume", config->resume, "Continue from the checkpoint in the work directory");
  cmd->add_option("--iterations", config->iterations, "Number of iterations");
  cmd->add_option("--min-dur", config->min_dur, "Shortest pseudo-labeled utterance");
  cmd->add_option("--max-dur", config->max_dur, "Longest pseudo-labeled utterance");
  cmd->add_option("--min-char-rate", config->min_char_rate, "Lowest characters per second");
  cmd->add_option("--max-char-rate", config->max_char_rate, "Highest characters per second");
  cmd->add_option("--agreement-cer-max", config->agreement_cer_max,
                  "Largest CER between consecutive hypotheses");
  cmd->add_option("--relabel-fraction", config->relabel_fraction,
                  "Share of the pseudo cache re-transcribed each iteration");
  cmd->add_option("--seed", config->seed, "Random seed");
  lang->add(cmd, false);
  cmd->callback([=] {
    IplConfig c = *config;
    c.workdir = *out;
    auto spec = parse_adapter_spec(*adapter);
    if (spec.workdir.empty()) spec.workdir = c.workdir / "asr";
    const auto result = run_ipl(read_manifest(*labeled), read_manifest(*unlabeled), spec, c,
                                lang->resolve());
    write_manifest(result.manifests.back(), c.workdir / "train.jsonl");
    const std::string text = format_ipl_report(result.report);
    std::cout << text;
    if (!report->empty()) write_file_atomic(*report, text);
  });
}

void add_run(CLI::App& app) {
  auto* cmd = app.add_subcommand("run", "Run a pipeline config");
  auto path = std::make_shared<std::string>();
  auto workspace = std::make_shared<std::string>();
  auto until = std::make_shared<std::string>();
  auto no_resume = std::make_shared<bool>(false);
  auto check = std::make_shared<bool>(false);
  auto out = std::make_shared<std::string>();
  cmd->add_option("config", *path, "Pipeline config (JSON)")->required();
  cmd->add_option("--workspace", *workspace,
                  "Override the workspace (default: config, then CORPUSFORGE_WORKSPACE)");
  cmd->add_option("--until", *until, "Stop after this stage");
  cmd->add_flag("--no-resume", *no_resume, "Re-run every stage");
  cmd->add_flag("--check", *check, "Only validate the config");
  cmd->add_option("--report", *out, "Write the run report here instead of stdout");
  cmd->callback([=] {
    PipelineConfig config = load_pipeline_config(*path);
    if (!workspace->empty()) config.workspace = *workspace;
    if (*no_resume) config.resume = false;
    if (*check) {
      const auto diags = validate_config(config);
      for (const auto& d : diags) std::cerr << to_string(d) << "\n";
      if (!diags.empty()) throw ValidationError("config has " + std::to_string(diags.size()) +
                                                " problem(s)");
      return;
    }
    RunOptions options;
    if (!until->empty()) options.until = *until;
    const RunReport report = run_pipeline(config, options);
    emit(format_run_report(report), *out);
    if (!report.ok) {
      for (const auto& s : report.stages) {
        if (s.status == StageStatus::kFailed) {
          throw Error("stage '" + s.name + "' failed: " + s.message);
        }
      }
    }
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"corpusforge: speech corpus construction and evaluation"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  add_manifest_commands(app);
  add_normalize(app);
  add_vad(app);
  add_segment(app);
  add_align_chapter(app);
  add_filter(app);
  add_eval(app);
  add_bootstrap(app);
  add_ipl(app);
  add_run(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
