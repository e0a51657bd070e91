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

#ifndef PERSIANLM_TEXTNORM_H_
#define PERSIANLM_TEXTNORM_H_

#include <map>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

namespace persianlm {

enum class JunkKind {
  kHtmlTag,
  kUrl,
  kEmail,
  kControlChar,
  kEmoji,
  kZeroWidthJunk,
};

const char *JunkKindName(JunkKind kind);

struct CodepointRange {
  char32_t first;
  char32_t last;
};

// One junk rule. Regex kinds (html-tag, url, email) carry an ECMAScript
// pattern applied to UTF-8 bytes; codepoint kinds carry a range list such as
// "U+0000-U+0008,U+000E-U+001F" and always delete.
struct JunkRule {
  JunkKind kind;
  std::string pattern;
  std::string replacement;
};

// The full rule inventory for both pre-processing steps. Build through
// DefaultNormalizationRules() or LoadNormalizationRules(); both validate that
// char_map is idempotent (no target codepoint is itself mapped).
class NormalizationRules {
 public:
  NormalizationRules() = default;

  int version = 1;
  std::vector<JunkRule> junk_patterns;
  std::map<char32_t, std::u32string> char_map;
  std::vector<CodepointRange> strip_marks;
  bool collapse_runs = true;
  bool trim = true;

  // Compiles regexes and range tables; throws ConfigError on invalid rules.
  void Finalize();

  bool IsJunkCodepoint(char32_t cp) const;
  bool IsStrippedMark(char32_t cp) const;
  bool IsMapped(char32_t cp) const { return char_map.count(cp) > 0; }
  bool IsMapTarget(char32_t cp) const;

  const std::vector<std::regex> &compiled() const { return compiled_; }
  // Index into junk_patterns for each compiled regex.
  const std::vector<size_t> &regex_rules() const { return regex_rules_; }

 private:
  std::vector<std::regex> compiled_;
  std::vector<size_t> regex_rules_;
  std::vector<CodepointRange> junk_ranges_;
  std::vector<CodepointRange> mark_ranges_;
  std::vector<char32_t> targets_;
};

const NormalizationRules &DefaultNormalizationRules();

// Rules file: one line record per rule with string fields kind, pattern and
// replacement. Kinds: version, html-tag, url, email, control-char, emoji,
// zero-width-junk, char-map, strip-mark, whitespace.
NormalizationRules LoadNormalizationRules(const std::string &path);
std::string DumpNormalizationRules(const NormalizationRules &rules);

// Step one: drops markup, links, control characters, emoji and zero-width
// characters other than ZWNJ. Applied until no rule fires.
std::string CleanJunk(std::string_view text, const NormalizationRules &rules);

// Step two: folds character variants, strips diacritics, tidies ZWNJ and
// whitespace.
std::string StandardizeChars(std::string_view text,
                             const NormalizationRules &rules);

// StandardizeChars(CleanJunk(text)), repeated until stable; idempotent.
std::string Normalize(std::string_view text, const NormalizationRules &rules);
std::string Normalize(std::string_view text);

}  // namespace persianlm

#endif  // PERSIANLM_TEXTNORM_H_
