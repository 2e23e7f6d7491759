// tests/pipeline_fixture.h

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

#ifndef CORPUSFORGE_TESTS_PIPELINE_FIXTURE_H_
#define CORPUSFORGE_TESTS_PIPELINE_FIXTURE_H_

#include <filesystem>
#include <string>
#include <vector>

#include "corpusforge/manifest.h"
#include "test_util.h"

namespace corpusforge::testing {

// Labeled records with mixed case and punctuation, 1 to 18 seconds long.
inline std::vector<ManifestRecord> labeled_corpus(Rng& rng, std::size_t n) {
  static const char* kMarks[] = {",", ".", "?", ""};
  std::vector<ManifestRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    ManifestRecord rec;
    rec.audio_filepath = "clips/l" + std::to_string(i) + ".wav";
    rec.duration = rng.uniform(1.0, 18.0);
    const std::size_t words = 3 + rng.below(12);
    for (std::size_t w = 0; w < words; ++w) {
      std::string word = random_word(rng, 2, 7);
      if (rng.below(4) == 0) word[0] = static_cast<char>(word[0] - 'a' + 'A');
      if (!rec.text.empty()) rec.text += ' ';
      rec.text += word + kMarks[rng.below(4)];
    }
    rec.source = rng.below(2) == 0 ? "mcv" : "fleurs";
    out.push_back(std::move(rec));
  }
  return out;
}

inline std::vector<ManifestRecord> unlabeled_pool(Rng& rng, std::size_t n) {
  std::vector<ManifestRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    ManifestRecord rec;
    rec.audio_filepath = "clips/u" + std::to_string(i) + ".wav";
    rec.duration = rng.uniform(2.0, 12.0);
    while (rec.text.size() < rec.duration * 10.0) {
      if (!rec.text.empty()) rec.text += ' ';
      rec.text += random_word(rng, 3, 7);
    }
    rec.source = "youtube";
    out.push_back(std::move(rec));
  }
  return out;
}

/// Writes input.jsonl, test.jsonl and unlabeled.jsonl into `dir` and returns
/// a four-stage config (normalize, dedup_overlap, filter, ipl) over them with
/// its workspace at `dir`/`workspace`.
inline std::string four_stage_fixture(const std::filesystem::path& dir,
                                      const std::string& workspace = "ws") {
  Rng rng(2024);
  auto train = labeled_corpus(rng, 60);
  auto test = labeled_corpus(rng, 10);
  for (std::size_t i = 0; i < 5; ++i) test[i].text = train[i * 7].text;
  write_manifest(train, dir / "input.jsonl");
  write_manifest(test, dir / "test.jsonl");
  write_manifest(unlabeled_pool(rng, 40), dir / "unlabeled.jsonl");
  return R"({
  "workspace": ")" + workspace + R"(",
  "input": "input.jsonl",
  "seed": 7,
  "stages": [
    {"name": "norm", "kind": "normalize", "params": {"language": "hy", "mode": "with_pc"}},
    {"name": "dedup", "kind": "dedup_overlap", "params": {"language": "hy", "test": "test.jsonl"}},
    {"name": "trim", "kind": "filter", "params": {"min_dur": 2.0, "max_dur": 15.0}},
    {"name": "ipl", "kind": "ipl", "params": {"language": "hy", "unlabeled": "unlabeled.jsonl",
      "adapter": "mock:0.05", "iterations": 3, "agreement_cer_max": 0.2}}
  ]
})";
}

}  // namespace corpusforge::testing

#endif  // CORPUSFORGE_TESTS_PIPELINE_FIXTURE_H_
