// core/include/corpusforge/utf8.h

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

#ifndef CORPUSFORGE_UTF8_H_
#define CORPUSFORGE_UTF8_H_

#include <cstddef>
#include <string>
#include <string_view>

namespace corpusforge {

// Throws Error on malformed input (overlongs, surrogates, truncation).
std::u32string decode_utf8(std::string_view bytes);

std::string encode_utf8(std::u32string_view code_points);
void append_utf8(std::string& out, char32_t cp);

std::size_t count_code_points(std::string_view bytes);

}  // namespace corpusforge

#endif  // CORPUSFORGE_UTF8_H_
