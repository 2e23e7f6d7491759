// core/include/corpusforge/timed_words.h

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

#ifndef CORPUSFORGE_TIMED_WORDS_H_
#define CORPUSFORGE_TIMED_WORDS_H_

#include <filesystem>
#include <string>
#include <vector>

#include "corpusforge/align.h"

namespace corpusforge {

// Reads word timestamps, one word per line, in any of:
//   {"word": "...", "start": 1.0, "end": 1.4}
//   word start end
//   utt channel start duration word [confidence]     (CTM)
// Lines starting with ';;' or '#' are comments. Throws ValidationError
// naming the line on malformed input or invalid timing.
std::vector<TimedWord> read_timed_words(const std::filesystem::path& path);
std::vector<TimedWord> parse_timed_words(const std::string& content);

// JSON-lines form.
std::string format_timed_words(const std::vector<TimedWord>& words);

}  // namespace corpusforge

#endif  // CORPUSFORGE_TIMED_WORDS_H_
