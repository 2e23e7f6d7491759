// core/src/timed_words.cc

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

#include "corpusforge/timed_words.h"

#include <sstream>

#include "corpusforge/error.h"
#include "corpusforge/fileutil.h"
#include "json.hpp"

namespace corpusforge {

using json = nlohmann::json;

namespace {

[[noreturn]] void line_error(std::size_t line_no, const std::string& what) {
  throw ValidationError("line " + std::to_string(line_no) + ": " + what);
}

double parse_seconds(const std::string& field, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(field, &used);
    if (used == field.size()) return v;
  } catch (const std::exception&) {
  }
  line_error(line_no, "invalid time '" + field + "'");
}

}  // namespace

std::vector<TimedWord> parse_timed_words(const std::string& content) {
  std::vector<TimedWord> words;
  std::istringstream in(content);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line.compare(first, 2, ";;") == 0 ||
        line[first] == '#') {
      continue;
    }
    TimedWord w;
    if (line[first] == '{') {
      const auto doc = json::parse(line, nullptr, false);
      if (doc.is_discarded() || !doc.is_object()) line_error(line_no, "malformed record");
      for (const char* key : {"word", "start", "end"}) {
        if (!doc.contains(key)) line_error(line_no, std::string("missing ") + key);
      }
      if (!doc["word"].is_string() || !doc["start"].is_number() ||
          !doc["end"].is_number()) {
        line_error(line_no, "wrong field types");
      }
      w.word = doc["word"].get<std::string>();
      w.start = doc["start"].get<double>();
      w.end = doc["end"].get<double>();
    } else {
      std::istringstream fields(line);
      std::vector<std::string> f;
      for (std::string tok; fields >> tok;) f.push_back(tok);
      if (f.size() == 3) {
        w.word = f[0];
        w.start = parse_seconds(f[1], line_no);
        w.end = parse_seconds(f[2], line_no);
      } else if (f.size() == 5 || f.size() == 6) {
        w.start = parse_seconds(f[2], line_no);
        w.end = w.start + parse_seconds(f[3], line_no);
        w.word = f[4];
      } else {
        line_error(line_no, "expected 'word start end' or a CTM line");
      }
    }
    if (!(w.start >= 0.0 && w.start < w.end)) {
      line_error(line_no, "need 0 <= start < end");
    }
    if (!words.empty() && w.start + 1e-6 < words.back().end) {
      line_error(line_no, "word overlaps the previous one");
    }
    words.push_back(std::move(w));
  }
  return words;
}

std::vector<TimedWord> read_timed_words(const std::filesystem::path& path) {
  try {
    return parse_timed_words(read_file(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string format_timed_words(const std::vector<TimedWord>& words) {
  std::string out;
  for (const auto& w : words) {
    json doc = json::object();
    doc["word"] = w.word;
    doc["start"] = w.start;
    doc["end"] = w.end;
    out += doc.dump(-1, ' ', false, json::error_handler_t::strict);
    out.push_back('\n');
  }
  return out;
}

}  // namespace corpusforge
