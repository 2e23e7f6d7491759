// tests/textnorm_test.cc

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

#include "corpusforge/textnorm.h"

#include <gtest/gtest.h>

#include <fstream>

#include "corpusforge/error.h"
#include "corpusforge/utf8.h"
#include "test_util.h"

namespace corpusforge {
namespace {

using testing::Rng;
using testing::TempDir;

// Preceding-word index computed per whitespace token: a mark belongs to the
// last token (before or at its position) that has a non-punctuation
// character ahead of it.
std::vector<PunctuationMark> scan_punctuation(const std::string& text,
                                              const LanguageProfile& profile) {
  std::vector<PunctuationMark> out;
  int complete_words = 0;
  for (const auto& token : tokenize_words(text)) {
    bool seen_letter = false;
    for (char32_t cp : decode_utf8(token)) {
      if (profile.is_kept_punctuation(cp)) {
        out.push_back({encode_utf8(std::u32string(1, cp)),
                       complete_words + (seen_letter ? 1 : 0) - 1});
      } else {
        seen_letter = true;
      }
    }
    if (seen_letter) ++complete_words;
  }
  return out;
}

std::string random_text(Rng& rng, const std::u32string& pool, std::size_t len) {
  std::u32string s;
  for (std::size_t i = 0; i < len; ++i) s.push_back(pool[rng.below(pool.size())]);
  return encode_utf8(s);
}

const std::u32string kArmenianPool =
    U"աբգդեզԱԲԳՄՆabcXY019 \t\n։՞՜՛՝՟՚ՙ֊.,«»!?@#-ÉΩ";
const std::u32string kGeorgianPool = U"აბგდევზთ019  .,?!;:«»ABcd\n";

TEST(TextNorm, GeorgianDropsExclamation) {
  const auto ka = build_profile("ka");
  EXPECT_EQ(normalize("კარგი!", ka, NormalizationMode::kWithPc), "კარგი");
}

TEST(TextNorm, NoPcLowercasesCasedProfiles) {
  const auto hy = build_profile("hy");
  EXPECT_EQ(normalize("Abc, def.", hy, NormalizationMode::kNoPc), "abc def");
  EXPECT_EQ(normalize("Բարև, Աշխարհ։", hy, NormalizationMode::kNoPc), "բարև աշխարհ");
}

TEST(TextNorm, WithPcKeepsCaseAndPunctuation) {
  const auto hy = build_profile("hy");
  EXPECT_EQ(normalize("  Բարև,\t«Աշխարհ»։  ", hy, NormalizationMode::kWithPc),
            "Բարև, «Աշխարհ»։");
}

TEST(TextNorm, DigitsAreKept) {
  const auto ka = build_profile("ka");
  EXPECT_EQ(normalize("2024 წელი.", ka, NormalizationMode::kNoPc), "2024 წელი");
}

TEST(TextNorm, DroppedCharactersAreCounted) {
  const auto ka = build_profile("ka");
  NormalizeStats stats;
  EXPECT_EQ(normalize("ა@ბ#გ", ka, NormalizationMode::kWithPc, &stats), "აბგ");
  EXPECT_EQ(stats.dropped, 2u);
}

TEST(TextNorm, BuiltInProfiles) {
  const auto ka = build_profile("ka");
  EXPECT_FALSE(ka.cased());
  EXPECT_EQ(ka.kept_punctuation(), (std::vector<char32_t>{U'.', U',', U'?'}));
  const auto hy = build_profile("hy");
  EXPECT_TRUE(hy.cased());
  for (char32_t cp : {U'։', U'՞', U'՜', U'՛', U'՝', U'՟', U'՚', U'ՙ', U'֊', U'.', U',', U'«', U'»'}) {
    EXPECT_TRUE(hy.is_kept_punctuation(cp)) << static_cast<unsigned>(cp);
  }
  EXPECT_THROW(build_profile("xx"), ValidationError);
  try {
    build_profile("xx");
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("hy, ka"), std::string::npos);
  }
}

TEST(TextNorm, ProfileRejectsPunctuationInsideAlphabet) {
  EXPECT_THROW(LanguageProfile("zz", "Z", false, {U'a'}, {{U'a', U'z'}}), ValidationError);
}

TEST(TextNorm, LoadProfileFile) {
  TempDir dir;
  std::ofstream(dir / "p.json") << R"({"language": "en", "cased": true,
      "kept_punctuation": [46, "U+002C", "!"], "alphabet_ranges": [[65, 90], ["a", "z"]]})";
  const auto p = load_profile(dir / "p.json");
  EXPECT_EQ(p.language(), "en");
  EXPECT_TRUE(p.is_kept_punctuation(U'!'));
  EXPECT_EQ(normalize("Hi, there! ok?", p, NormalizationMode::kWithPc), "Hi, there! ok");
  EXPECT_EQ(normalize("Hi, there! ok?", p, NormalizationMode::kNoPc), "hi there ok");

  std::ofstream(dir / "bad.json") << R"({"language": "en", "cased": true, "typo": 1,
      "kept_punctuation": [], "alphabet_ranges": []})";
  EXPECT_THROW(load_profile(dir / "bad.json"), ValidationError);
}

TEST(TextNorm, TokenizeWords) {
  EXPECT_TRUE(tokenize_words("").empty());
  EXPECT_EQ(tokenize_words("a b"), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(tokenize_words("  a   b "), (std::vector<std::string>{"a", "b"}));
}

TEST(TextNorm, ExtractPunctuationExamples) {
  const auto hy = build_profile("hy");
  EXPECT_EQ(extract_punctuation("a, b.", hy),
            (std::vector<PunctuationMark>{{",", 0}, {".", 1}}));
  EXPECT_EQ(extract_punctuation("«a»", hy),
            (std::vector<PunctuationMark>{{"«", -1}, {"»", 0}}));
  EXPECT_TRUE(extract_punctuation("no marks here", hy).empty());
}

TEST(TextNormProperty, ExtractPunctuationMatchesScanner) {
  Rng rng(11);
  for (const auto& [profile, pool] :
       {std::pair{build_profile("hy"), kArmenianPool}, std::pair{build_profile("ka"), kGeorgianPool}}) {
    for (int i = 0; i < 2000; ++i) {
      const auto text = normalize(random_text(rng, pool, rng.below(30)), profile,
                                  NormalizationMode::kWithPc);
      const auto marks = extract_punctuation(text, profile);
      ASSERT_EQ(marks, scan_punctuation(text, profile)) << text;
      for (std::size_t k = 1; k < marks.size(); ++k) {
        ASSERT_LE(marks[k - 1].preceding_word, marks[k].preceding_word);
      }
    }
  }
}

TEST(TextNormProperty, IdempotentAndComposable) {
  Rng rng(7);
  for (const auto& [profile, pool] :
       {std::pair{build_profile("hy"), kArmenianPool}, std::pair{build_profile("ka"), kGeorgianPool}}) {
    for (int i = 0; i < 3000; ++i) {
      const auto t = random_text(rng, pool, rng.below(40));
      for (auto mode : {NormalizationMode::kWithPc, NormalizationMode::kNoPc}) {
        const auto once = normalize(t, profile, mode);
        ASSERT_EQ(normalize(once, profile, mode), once);
        for (const auto& tok : tokenize_words(once)) ASSERT_FALSE(tok.empty());
      }
      const auto with_pc = normalize(t, profile, NormalizationMode::kWithPc);
      ASSERT_EQ(normalize(t, profile, NormalizationMode::kNoPc),
                normalize(with_pc, profile, NormalizationMode::kNoPc));
    }
  }
}

TEST(TextNormProperty, NoPcHasNoPunctuationOrUppercase) {
  const auto hy = build_profile("hy");
  const auto ka = build_profile("ka");
  Rng rng(3);
  for (int i = 0; i < 3000; ++i) {
    const auto out = normalize(random_text(rng, kArmenianPool, 40), hy, NormalizationMode::kNoPc);
    for (char32_t cp : decode_utf8(out)) {
      ASSERT_FALSE(hy.is_kept_punctuation(cp));
      ASSERT_FALSE(ka.is_kept_punctuation(cp));
      ASSERT_EQ(to_lower(cp), cp);
    }
  }
}

TEST(TextNormProperty, RandomWhitespaceNeverYieldsEmptyTokens) {
  Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    std::vector<std::string> words;
    std::string raw;
    for (std::size_t k = rng.below(6); k > 0; --k) {
      words.push_back(testing::random_word(rng));
      raw += std::string(rng.below(3), ' ') + words.back() + std::string(1 + rng.below(3), ' ');
    }
    ASSERT_EQ(tokenize_words(raw), words) << raw;
  }
}

}  // namespace
}  // namespace corpusforge
