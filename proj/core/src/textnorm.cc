// core/src/textnorm.cc

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

#include <algorithm>
#include <cctype>
#include <fstream>

#include "corpusforge/error.h"
#include "corpusforge/fileutil.h"
#include "corpusforge/utf8.h"
#include "json.hpp"

namespace corpusforge {

using json = nlohmann::json;

std::string to_string(NormalizationMode mode) {
  return mode == NormalizationMode::kWithPc ? "with_pc" : "no_pc";
}

NormalizationMode parse_normalization_mode(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "with_pc" || lower == "pc") return NormalizationMode::kWithPc;
  if (lower == "no_pc" || lower == "nopc") return NormalizationMode::kNoPc;
  throw ValidationError("unknown normalization mode '" + std::string(name) +
                        "' (expected with_pc or no_pc)");
}

LanguageProfile::LanguageProfile(std::string language, std::string name,
                                 bool cased,
                                 std::vector<char32_t> kept_punctuation,
                                 std::vector<CodePointRange> alphabet)
    : language_(std::move(language)),
      name_(std::move(name)),
      cased_(cased),
      alphabet_(std::move(alphabet)) {
  for (char32_t cp : kept_punctuation) {
    if (kept_set_.insert(cp).second) kept_.push_back(cp);
  }
  for (const auto& range : alphabet_) {
    if (range.first > range.last) {
      throw ValidationError("profile " + language_ +
                            ": alphabet range with first > last");
    }
  }
  for (char32_t cp : kept_) {
    if (is_letter(cp) || is_ascii_digit(cp) || is_space(cp)) {
      throw ValidationError("profile " + language_ + ": punctuation U+" +
                            std::to_string(static_cast<unsigned>(cp)) +
                            " overlaps the alphabet");
    }
  }
}

bool LanguageProfile::is_letter(char32_t cp) const {
  return std::any_of(alphabet_.begin(), alphabet_.end(), [cp](const auto& r) {
    return cp >= r.first && cp <= r.last;
  });
}

bool LanguageProfile::is_kept_punctuation(char32_t cp) const {
  return kept_set_.count(cp) != 0;
}

LanguageProfile build_profile(std::string_view language_code) {
  if (language_code == "ka") {
    return LanguageProfile("ka", "Georgian", false, {U'.', U',', U'?'},
                           {{0x10D0, 0x10FA}, {0x10FD, 0x10FF}});
  }
  if (language_code == "hy") {
    return LanguageProfile(
        "hy", "Armenian", true,
        {0x0589, 0x055E, 0x055C, 0x055B, 0x055D, 0x055F, 0x055A, 0x0559,
         0x058A, U'.', U',', 0x00AB, 0x00BB},
        {{0x0531, 0x0556}, {0x0560, 0x0588}, {U'A', U'Z'}, {U'a', U'z'}});
  }
  throw ValidationError("unsupported language '" + std::string(language_code) +
                        "' (supported: hy, ka; or pass a profile file)");
}

namespace {

char32_t parse_code_point(const json& value) {
  if (value.is_number_unsigned()) {
    return static_cast<char32_t>(value.get<std::uint64_t>());
  }
  if (value.is_string()) {
    const auto s = value.get<std::string>();
    if (s.size() > 2 && (s[0] == 'U' || s[0] == 'u') && s[1] == '+') {
      return static_cast<char32_t>(std::stoul(s.substr(2), nullptr, 16));
    }
    const auto cps = decode_utf8(s);
    if (cps.size() == 1) return cps[0];
  }
  throw ValidationError("invalid code point " + value.dump());
}

}  // namespace

LanguageProfile load_profile(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  static const std::set<std::string> kKeys = {
      "language", "name", "cased", "kept_punctuation", "alphabet_ranges"};
  for (const auto& [key, value] : doc.items()) {
    if (!kKeys.count(key)) {
      throw ValidationError(path.string() + ": unknown key '" + key + "'");
    }
  }
  for (const char* key : {"language", "cased", "kept_punctuation",
                          "alphabet_ranges"}) {
    if (!doc.contains(key)) {
      throw ValidationError(path.string() + ": missing " + key);
    }
  }
  try {
    std::vector<char32_t> kept;
    for (const auto& v : doc.at("kept_punctuation")) {
      kept.push_back(parse_code_point(v));
    }
    std::vector<CodePointRange> ranges;
    for (const auto& r : doc.at("alphabet_ranges")) {
      if (!r.is_array() || r.size() != 2) {
        throw ValidationError("alphabet range must be [first, last]");
      }
      ranges.push_back({parse_code_point(r[0]), parse_code_point(r[1])});
    }
    const auto language = doc.at("language").get<std::string>();
    return LanguageProfile(language, doc.value("name", language),
                           doc.at("cased").get<bool>(), std::move(kept),
                           std::move(ranges));
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

char32_t to_lower(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return cp + 32;
  if (cp < 0xC0) return cp;
  if (cp <= 0xDE && cp != 0xD7) return cp + 32;
  if (cp >= 0x0391 && cp <= 0x03A9 && cp != 0x03A2) return cp + 32;
  if (cp >= 0x0410 && cp <= 0x042F) return cp + 32;
  if (cp >= 0x0400 && cp <= 0x040F) return cp + 80;
  if (cp >= 0x0531 && cp <= 0x0556) return cp + 48;
  return cp;
}

bool is_ascii_digit(char32_t cp) { return cp >= U'0' && cp <= U'9'; }

bool is_space(char32_t cp) {
  return cp == U' ' || (cp >= 0x09 && cp <= 0x0D) || cp == 0xA0 ||
         (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 || cp == 0x2029 ||
         cp == 0x202F || cp == 0x205F || cp == 0x3000;
}

std::string normalize(std::string_view text, const LanguageProfile& profile,
                      NormalizationMode mode, NormalizeStats* stats) {
  const bool no_pc = mode == NormalizationMode::kNoPc;
  const bool lower = no_pc && profile.cased();
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char32_t cp : decode_utf8(text)) {
    if (is_space(cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (lower) cp = to_lower(cp);
    const bool punct = profile.is_kept_punctuation(cp);
    const bool keep = profile.is_letter(cp) || is_ascii_digit(cp) ||
                      (punct && !no_pc);
    if (!keep) {
      if (!punct && stats != nullptr) ++stats->dropped;
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    append_utf8(out, cp);
  }
  return out;
}

std::vector<std::string> tokenize_words(std::string_view text) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() &&
           std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
    }
    const std::size_t start = i;
    while (i < text.size() &&
           !std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
    }
    if (i > start) words.emplace_back(text.substr(start, i - start));
  }
  return words;
}

std::vector<PunctuationMark> extract_punctuation(
    std::string_view text, const LanguageProfile& profile) {
  std::vector<PunctuationMark> marks;
  int words = 0;
  bool in_word = false;
  for (char32_t cp : decode_utf8(text)) {
    if (is_space(cp)) {
      in_word = false;
    } else if (profile.is_kept_punctuation(cp)) {
      std::string symbol;
      append_utf8(symbol, cp);
      marks.push_back({std::move(symbol), words - 1});
    } else if (!in_word) {
      ++words;
      in_word = true;
    }
  }
  return marks;
}

std::string join_words(const std::vector<std::string>& words,
                       std::size_t first, std::size_t last_exclusive) {
  std::string out;
  for (std::size_t i = first; i < last_exclusive && i < words.size(); ++i) {
    if (i > first) out.push_back(' ');
    out += words[i];
  }
  return out;
}

}  // namespace corpusforge
