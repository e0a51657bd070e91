// Copyright 2026 The persianlm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PERSIANLM_UTF8_H_
#define PERSIANLM_UTF8_H_

#include <string>
#include <string_view>

namespace persianlm {
namespace utf8 {

// Decodes UTF-8 into codepoints. Throws DataError naming the byte offset of
// the first invalid sequence (overlongs, surrogates and values above
// U+10FFFF are rejected).
std::u32string Decode(std::string_view bytes);

// Returns the byte offset of the first invalid sequence, or npos.
size_t FindInvalid(std::string_view bytes);

std::string Encode(std::u32string_view codepoints);
void Append(char32_t cp, std::string *out);

// Number of codepoints; input must be valid.
size_t Length(std::string_view bytes);

bool IsWhitespace(char32_t cp);
bool IsDigit(char32_t cp);  // ASCII, Arabic-Indic or Extended Arabic-Indic.
bool IsPunctuation(char32_t cp);
bool IsLetter(char32_t cp);  // Latin, Arabic-script letters.
bool IsLowerLatin(char32_t cp);

constexpr char32_t kZwnj = 0x200C;

}  // namespace utf8
}  // namespace persianlm

#endif  // PERSIANLM_UTF8_H_
