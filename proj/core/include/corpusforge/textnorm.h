// core/include/corpusforge/textnorm.h

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

#ifndef CORPUSFORGE_TEXTNORM_H_
#define CORPUSFORGE_TEXTNORM_H_

#include <cstddef>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace corpusforge {

/// Whether punctuation and capitalization survive normalization.
enum class NormalizationMode { kWithPc, kNoPc };

std::string to_string(NormalizationMode mode);
// Accepts "with_pc" / "no_pc" (case-insensitive). Throws ValidationError.
NormalizationMode parse_normalization_mode(std::string_view name);

/// Inclusive code-point range.
struct CodePointRange {
  char32_t first = 0;
  char32_t last = 0;
};

/// Per-language normalization rules. Immutable once built; the constructor
/// enforces that kept punctuation and the alphabet are disjoint.
class LanguageProfile {
 public:
  LanguageProfile(std::string language, std::string name, bool cased,
                  std::vector<char32_t> kept_punctuation,
                  std::vector<CodePointRange> alphabet);

  const std::string& language() const { return language_; }
  const std::string& name() const { return name_; }
  bool cased() const { return cased_; }
  // Reading order as given at construction, duplicates removed.
  const std::vector<char32_t>& kept_punctuation() const { return kept_; }
  const std::vector<CodePointRange>& alphabet_ranges() const {
    return alphabet_;
  }

  bool is_letter(char32_t cp) const;
  bool is_kept_punctuation(char32_t cp) const;

 private:
  std::string language_;
  std::string name_;
  bool cased_;
  std::vector<char32_t> kept_;
  std::set<char32_t> kept_set_;
  std::vector<CodePointRange> alphabet_;
};

/// Built-in profiles: "hy" (Armenian, cased) and "ka" (Georgian, unicameral).
/// Throws ValidationError listing the supported codes for anything else.
LanguageProfile build_profile(std::string_view language_code);

/// Parses a JSON profile file with keys language, name (optional), cased,
/// kept_punctuation (code points) and alphabet_ranges ([first, last] pairs).
/// Code points may be integers, "U+XXXX" strings or one-character strings.
LanguageProfile load_profile(const std::filesystem::path& path);

/// Counts characters that normalize() dropped because they are neither
/// letters, digits, whitespace nor punctuation known to the profile.
struct NormalizeStats {
  std::size_t dropped = 0;
};

char32_t to_lower(char32_t cp);
bool is_ascii_digit(char32_t cp);
bool is_space(char32_t cp);

std::string normalize(std::string_view text, const LanguageProfile& profile,
                      NormalizationMode mode, NormalizeStats* stats = nullptr);

// Splits on runs of spaces; never yields empty tokens.
std::vector<std::string> tokenize_words(std::string_view text);

/// A punctuation mark and the index of the word it follows (-1 when it
/// precedes the first word).
struct PunctuationMark {
  std::string symbol;
  int preceding_word = -1;

  bool operator==(const PunctuationMark&) const = default;
};

std::vector<PunctuationMark> extract_punctuation(
    std::string_view text, const LanguageProfile& profile);

// Joins tokens with single spaces.
std::string join_words(const std::vector<std::string>& words,
                       std::size_t first, std::size_t last_exclusive);

}  // namespace corpusforge

#endif  // CORPUSFORGE_TEXTNORM_H_
