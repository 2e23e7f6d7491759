// tests/ipl_test.cc

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

#include "corpusforge/ipl.h"

#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "corpusforge/align.h"
#include "corpusforge/error.h"
#include "corpusforge/fileutil.h"
#include "corpusforge/utf8.h"
#include "test_util.h"

namespace corpusforge {
namespace {

using testing::Rng;
using testing::TempDir;

const LanguageProfile& profile() {
  static const LanguageProfile p = build_profile("hy");
  return p;
}

// Records of 3 to 12 seconds carrying roughly 12 characters per second.
std::vector<ManifestRecord> make_pool(Rng& rng, std::size_t n, const std::string& prefix,
                                      const std::string& source) {
  std::vector<ManifestRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    ManifestRecord rec;
    rec.audio_filepath = prefix + "/" + std::to_string(i) + ".wav";
    rec.duration = rng.uniform(3.0, 12.0);
    while (rec.text.size() < rec.duration * 12.0) {
      if (!rec.text.empty()) rec.text += ' ';
      rec.text += testing::random_word(rng, 3, 7);
    }
    rec.source = source;
    out.push_back(std::move(rec));
  }
  return out;
}

// Shell script "transcriber" that copies text into pred_text ($1 -> $2).
void write_echo_transcriber(const std::filesystem::path& path) {
  std::ofstream f(path);
  f << "sed 's/\"text\":\"\\([^\"]*\\)\"/\"text\":\"\\1\",\"pred_text\":\"\\1\"/' "
       "\"$1\" > \"$2\"\n";
}

TranscriberAdapter mock(double rate, std::uint64_t seed = 1) {
  TranscriberAdapter a;
  a.kind = AdapterKind::kMockCorruptor;
  a.corruption_rate = rate;
  a.seed = seed;
  return a;
}

TEST(ParseAdapterSpec, Kinds) {
  auto a = parse_adapter_spec("mock:0.25:9");
  EXPECT_EQ(a.kind, AdapterKind::kMockCorruptor);
  EXPECT_DOUBLE_EQ(a.corruption_rate, 0.25);
  EXPECT_EQ(a.seed, 9u);
  EXPECT_EQ(parse_adapter_spec("precomputed:h.manifest").hypotheses, "h.manifest");
  EXPECT_EQ(parse_adapter_spec("cmd:cp {input} {output}").command, "cp {input} {output}");
  EXPECT_THROW(parse_adapter_spec("mock:2"), ValidationError);
  EXPECT_THROW(parse_adapter_spec("mock:x"), ValidationError);
  EXPECT_THROW(parse_adapter_spec("whisper"), ValidationError);
  EXPECT_THROW(parse_adapter_spec("cmd:"), ValidationError);
}

TEST(Transcribe, MockRateZeroIsIdentity) {
  Rng rng(1);
  const auto records = make_pool(rng, 20, "u", "unlabeled");
  const auto out = transcribe(mock(0.0), records);
  ASSERT_EQ(out.records.size(), records.size());
  EXPECT_TRUE(out.missing.empty());
  for (std::size_t i = 0; i < records.size(); ++i) {
    EXPECT_EQ(out.records[i].pred_text, records[i].text);
    EXPECT_EQ(out.records[i].extra_value("asr_version"), "\"v0\"");
  }
}

TEST(Transcribe, MockIsReproducibleAndNoisyAtTheStatedRate) {
  Rng rng(2);
  const auto records = make_pool(rng, 50, "u", "unlabeled");
  const auto a = transcribe(mock(0.1, 7), records);
  const auto b = transcribe(mock(0.1, 7), records);
  auto other = mock(0.1, 7);
  other.version_tag = "v1";
  const auto c = transcribe(other, records);
  std::size_t letters = 0;
  std::size_t distance = 0;
  std::size_t differing = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    EXPECT_EQ(a.records[i].pred_text, b.records[i].pred_text);
    differing += a.records[i].pred_text != c.records[i].pred_text;
    for (char ch : records[i].text) letters += ch != ' ';
    distance += levenshtein(decode_utf8(records[i].text), decode_utf8(*a.records[i].pred_text));
  }
  EXPECT_GT(differing, 40u);
  // Each corrupted letter costs exactly one edit (an adjacent pair can merge
  // at most to fewer), so the total sits near 10 % of the letters.
  const double rate = static_cast<double>(distance) / static_cast<double>(letters);
  EXPECT_GT(rate, 0.07);
  EXPECT_LT(rate, 0.13);
}

TEST(Transcribe, PrecomputedLookupAndMissingKeysFlagged) {
  TempDir dir;
  Rng rng(3);
  auto records = make_pool(rng, 4, "u", "unlabeled");
  std::vector<ManifestRecord> hyps = {records[0], records[2]};
  hyps[0].pred_text = "stored hypothesis";
  hyps[1].text = "from text";
  write_manifest(hyps, dir / "h.manifest");
  TranscriberAdapter a;
  a.kind = AdapterKind::kPrecomputedManifest;
  a.hypotheses = dir / "h.manifest";
  const auto out = transcribe(a, records);
  EXPECT_EQ(out.records[0].pred_text, "stored hypothesis");
  EXPECT_EQ(out.records[2].pred_text, "from text");
  EXPECT_EQ(out.missing, (std::vector<std::size_t>{1, 3}));
  EXPECT_FALSE(out.records[1].pred_text.has_value());
  ASSERT_EQ(out.records.size(), 4u);
}

TEST(Transcribe, ExternalCommandContract) {
  TempDir dir;
  const auto script = dir / "asr.sh";
  write_echo_transcriber(script);
  Rng rng(4);
  const auto records = make_pool(rng, 5, "u", "unlabeled");
  TranscriberAdapter a;
  a.kind = AdapterKind::kExternalCommand;
  a.command = "sh " + script.string() + " {input} {output}";
  a.workdir = dir / "work";
  const auto out = transcribe(a, records);
  EXPECT_TRUE(out.missing.empty());
  for (std::size_t i = 0; i < records.size(); ++i) {
    EXPECT_EQ(out.records[i].pred_text, records[i].text);
  }

  a.command = "echo 'model exploded' >&2; exit 3";
  try {
    transcribe(a, records);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("exit code 3"), std::string::npos) << what;
    EXPECT_NE(what.find("model exploded"), std::string::npos) << what;
  }

  a.command = "true";
  EXPECT_THROW(transcribe(a, records), Error);
}

IplConfig permissive() {
  IplConfig c;
  c.min_dur = 1.0;
  c.max_dur = 20.0;
  return c;
}

TEST(FilterPseudo, Reasons) {
  auto rec = [](double dur, std::optional<std::string> pred) {
    ManifestRecord r;
    r.audio_filepath = "x" + std::to_string(dur) + ".wav";
    r.duration = dur;
    r.pred_text = std::move(pred);
    return r;
  };
  const std::string ten_seconds = "the quick brown fox jumps over the lazy dog again";
  std::vector<ManifestRecord> current = {
      rec(10.0, ten_seconds),  // kept
      rec(0.5, "hi"),          // min_dur
      rec(25.0, ten_seconds),  // max_dur
      rec(10.0, "a"),          // char_rate, too slow
      rec(2.0, std::string(100, 'x')),  // char_rate, too fast
      rec(10.0, std::nullopt),          // no hypothesis
      rec(9.0, ten_seconds),            // agreement
  };
  std::map<std::string, std::string> previous = {
      {record_key(current[0]), ten_seconds},
      {record_key(current[6]), "completely different words entirely here ok"},
  };
  const auto result = filter_pseudo(current, &previous, permissive(), profile());
  ASSERT_EQ(result.kept.size(), 1u);
  EXPECT_EQ(result.kept[0].duration, 10.0);
  std::vector<std::string> reasons;
  for (const auto& d : result.dropped) reasons.push_back(d.reason);
  EXPECT_EQ(reasons, (std::vector<std::string>{"min_dur", "max_dur", "char_rate", "char_rate",
                                               "no_hypothesis", "agreement"}));

  // Without a previous iteration there is nothing to disagree with.
  EXPECT_EQ(filter_pseudo(current, nullptr, permissive(), profile()).kept.size(), 2u);
}

TEST(FilterPseudo, PartitionProperty) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    auto records = transcribe(mock(rng.uniform(0.0, 0.6), trial),
                              make_pool(rng, 30, "u", "unlabeled")).records;
    for (auto& r : records) r.duration = rng.uniform(0.2, 25.0);
    std::map<std::string, std::string> previous;
    for (const auto& r : records) {
      if (rng.below(2) == 0) previous[record_key(r)] = r.text;
    }
    IplConfig c = permissive();
    c.agreement_cer_max = rng.uniform(0.0, 0.5);
    const auto result = filter_pseudo(records, &previous, c, profile());
    ASSERT_EQ(result.kept.size() + result.dropped.size(), records.size());
    std::multiset<std::string> in;
    std::multiset<std::string> out;
    for (const auto& r : records) in.insert(record_key(r));
    for (const auto& r : result.kept) out.insert(record_key(r));
    for (const auto& d : result.dropped) out.insert(record_key(d.record));
    EXPECT_EQ(in, out);
  }
}

TEST(CheckIplConfig, RejectsInconsistentValues) {
  IplConfig c;
  EXPECT_NO_THROW(check_ipl_config(c));
  c.iterations = 0;
  EXPECT_THROW(check_ipl_config(c), ValidationError);
  c = IplConfig{};
  c.min_dur = 5.0;
  c.max_dur = 5.0;
  EXPECT_THROW(check_ipl_config(c), ValidationError);
  c = IplConfig{};
  c.min_char_rate = 0.0;
  EXPECT_THROW(check_ipl_config(c), ValidationError);
  c = IplConfig{};
  c.relabel_fraction = 0.0;
  EXPECT_THROW(check_ipl_config(c), ValidationError);
}

double hours_of(const std::vector<ManifestRecord>& records) {
  double seconds = 0.0;
  for (const auto& r : records) seconds += r.duration;
  return seconds / 3600.0;
}

TEST(RunIpl, ZeroNoiseSingleIterationKeepsEverything) {
  Rng rng(6);
  const auto labeled = make_pool(rng, 10, "l", "labeled");
  const auto unlabeled = make_pool(rng, 40, "u", "unlabeled");
  const auto result = run_ipl(labeled, unlabeled, mock(0.0), permissive(), profile());
  ASSERT_EQ(result.manifests.size(), 1u);
  const auto& manifest = result.manifests[0];
  ASSERT_EQ(manifest.size(), labeled.size() + unlabeled.size());
  for (std::size_t i = 0; i < labeled.size(); ++i) EXPECT_EQ(manifest[i], labeled[i]);
  for (std::size_t i = 0; i < unlabeled.size(); ++i) {
    const auto& rec = manifest[labeled.size() + i];
    EXPECT_EQ(rec.text, unlabeled[i].text);
    EXPECT_EQ(rec.source, "pseudo");
    EXPECT_FALSE(rec.pred_text.has_value());
  }
  const auto& report = result.report.iterations[0];
  EXPECT_EQ(report.transcribed, unlabeled.size());
  EXPECT_EQ(report.kept, unlabeled.size());
  EXPECT_TRUE(report.dropped.empty());
  EXPECT_EQ(report.adapter_version, "v0@1");
}

TEST(RunIpl, ZeroNoiseReachesAFixedPoint) {
  Rng rng(7);
  const auto labeled = make_pool(rng, 5, "l", "labeled");
  const auto unlabeled = make_pool(rng, 30, "u", "unlabeled");
  IplConfig c = permissive();
  c.iterations = 3;
  const auto result = run_ipl(labeled, unlabeled, mock(0.0), c, profile());
  ASSERT_EQ(result.manifests.size(), 3u);
  EXPECT_EQ(format_manifest(result.manifests[1]), format_manifest(result.manifests[0]));
  EXPECT_EQ(format_manifest(result.manifests[2]), format_manifest(result.manifests[0]));
  // Iteration 2 relabels ceil(0.25 * 30) cached records.
  EXPECT_EQ(result.report.iterations[1].transcribed, 8u);
}

TEST(RunIpl, StrictAgreementUnderHeavyNoiseDropsMost) {
  Rng rng(8);
  const auto labeled = make_pool(rng, 5, "l", "labeled");
  const auto unlabeled = make_pool(rng, 60, "u", "unlabeled");
  IplConfig c = permissive();
  c.iterations = 2;
  c.relabel_fraction = 1.0;
  c.agreement_cer_max = 0.05;
  const auto result = run_ipl(labeled, unlabeled, mock(0.5), c, profile());
  const auto& second = result.report.iterations[1];
  EXPECT_EQ(second.transcribed, 60u);
  ASSERT_TRUE(second.dropped.count("agreement"));
  EXPECT_GT(second.dropped.at("agreement"), 50u);
  EXPECT_LT(second.pseudo_in_manifest, 10u);
}

TEST(RunIpl, ReportInvariantsHoldForRandomRuns) {
  Rng rng(9);
  for (int trial = 0; trial < 8; ++trial) {
    const auto labeled = make_pool(rng, 1 + rng.below(5), "l", "labeled");
    auto unlabeled = make_pool(rng, rng.below(40), "u", "unlabeled");
    for (auto& r : unlabeled) r.duration = rng.uniform(0.5, 24.0);
    IplConfig c = permissive();
    c.iterations = 1 + static_cast<int>(rng.below(4));
    c.relabel_fraction = rng.uniform(0.05, 1.0);
    c.agreement_cer_max = rng.uniform(0.0, 0.4);
    c.seed = trial;
    const auto result = run_ipl(labeled, unlabeled, mock(rng.uniform(0.0, 0.4), trial), c,
                                profile());
    ASSERT_EQ(result.manifests.size(), static_cast<std::size_t>(c.iterations));
    for (std::size_t i = 0; i < result.manifests.size(); ++i) {
      const auto& m = result.manifests[i];
      const auto& r = result.report.iterations[i];
      std::size_t dropped = 0;
      for (const auto& [reason, count] : r.dropped) dropped += count;
      EXPECT_EQ(r.kept + dropped, r.transcribed);
      for (std::size_t k = 0; k < labeled.size(); ++k) ASSERT_EQ(m[k], labeled[k]);
      EXPECT_EQ(m.size(), labeled.size() + r.pseudo_in_manifest);
      EXPECT_DOUBLE_EQ(r.training_hours, summarize(m).total_hours);
      EXPECT_NEAR(r.training_hours, hours_of(m), 1e-9);
      EXPECT_NEAR(r.pseudo_hours + r.labeled_hours, r.training_hours, 1e-9);
    }
  }
}

TEST(RunIpl, DeterministicGivenInputsAndSeed) {
  Rng rng(10);
  const auto labeled = make_pool(rng, 3, "l", "labeled");
  const auto unlabeled = make_pool(rng, 30, "u", "unlabeled");
  IplConfig c = permissive();
  c.iterations = 3;
  c.seed = 4;
  const auto a = run_ipl(labeled, unlabeled, mock(0.2, 3), c, profile());
  const auto b = run_ipl(labeled, unlabeled, mock(0.2, 3), c, profile());
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(format_manifest(a.manifests[i]), format_manifest(b.manifests[i]));
  }
  EXPECT_EQ(format_ipl_report(a.report), format_ipl_report(b.report));
}

TEST(RunIpl, RejectsEmptyLabeledAndDuplicateKeys) {
  Rng rng(11);
  const auto pool = make_pool(rng, 3, "u", "unlabeled");
  EXPECT_THROW(run_ipl({}, pool, mock(0.0), permissive(), profile()), ValidationError);
  auto dup = pool;
  dup.push_back(pool[0]);
  EXPECT_THROW(run_ipl(pool, dup, mock(0.0), permissive(), profile()), ValidationError);
}

TEST(RunIpl, ResumeAfterAdapterFailure) {
  TempDir dir;
  Rng rng(12);
  const auto labeled = make_pool(rng, 3, "l", "labeled");
  const auto unlabeled = make_pool(rng, 12, "u", "unlabeled");
  const auto good = dir / "asr.sh";
  write_echo_transcriber(good);
  // Succeeds for iteration 1 and fails from iteration 2 until the flag file
  // exists.
  const auto flag = dir / "allow";
  TranscriberAdapter adapter;
  adapter.kind = AdapterKind::kExternalCommand;
  adapter.command = "case {version} in *@1) ;; *) test -e " + flag.string() +
                    " || { echo down >&2; exit 1; } ;; esac; sh " + good.string() +
                    " {input} {output}";
  IplConfig c = permissive();
  c.iterations = 3;
  c.workdir = dir / "ipl";
  c.resume = true;

  try {
    run_ipl(labeled, unlabeled, adapter, c, profile());
    FAIL() << "expected the second iteration to fail";
  } catch (const Error& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("ipl iteration 2 failed"), std::string::npos) << what;
    EXPECT_NE(what.find("down"), std::string::npos) << what;
  }
  EXPECT_TRUE(std::filesystem::exists(c.workdir / "iter_1.manifest"));
  EXPECT_FALSE(std::filesystem::exists(c.workdir / "iter_2.manifest"));
  const std::string first = read_file(c.workdir / "iter_1.manifest");

  std::ofstream(flag).put('\n');
  const auto resumed = run_ipl(labeled, unlabeled, adapter, c, profile());
  ASSERT_EQ(resumed.manifests.size(), 3u);
  ASSERT_EQ(resumed.report.iterations.size(), 3u);
  EXPECT_EQ(format_manifest(resumed.manifests[0]), first);

  // A fresh, uninterrupted run produces the same artifacts.
  IplConfig fresh = c;
  fresh.workdir = dir / "fresh";
  const auto direct = run_ipl(labeled, unlabeled, adapter, fresh, profile());
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(format_manifest(direct.manifests[i]), format_manifest(resumed.manifests[i]));
  }
  EXPECT_EQ(format_ipl_report(direct.report), format_ipl_report(resumed.report));

  // Changed settings must not silently reuse the checkpoint.
  IplConfig changed = c;
  changed.agreement_cer_max = 0.1;
  EXPECT_THROW(run_ipl(labeled, unlabeled, adapter, changed, profile()), ValidationError);
}

}  // namespace
}  // namespace corpusforge
