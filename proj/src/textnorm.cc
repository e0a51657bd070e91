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

#include "persianlm/textnorm.h"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "persianlm/errors.h"
#include "persianlm/jsonl.h"
#include "persianlm/utf8.h"

namespace persianlm {
namespace {

struct RangeMap {
  char32_t first;
  char32_t last;
  const char32_t *target;
};

// Arabic presentation forms (FB50-FBFF, FE70-FEFF) folded through NFKC, with
// Arabic yeh/kaf replaced by their Persian letters and diacritics dropped.
constexpr RangeMap kPresentationForms[] = {
#include "presentation_forms.inc"
};

constexpr struct {
  JunkKind kind;
  const char *name;
} kKindNames[] = {
    {JunkKind::kHtmlTag, "html-tag"},
    {JunkKind::kUrl, "url"},
    {JunkKind::kEmail, "email"},
    {JunkKind::kControlChar, "control-char"},
    {JunkKind::kEmoji, "emoji"},
    {JunkKind::kZeroWidthJunk, "zero-width-junk"},
};

bool IsRegexKind(JunkKind kind) {
  return kind == JunkKind::kHtmlTag || kind == JunkKind::kUrl ||
         kind == JunkKind::kEmail;
}

std::string FormatCodepoint(char32_t cp) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "U+%04X", static_cast<unsigned>(cp));
  return buf;
}

char32_t ParseCodepoint(std::string_view s) {
  if (s.size() < 3 || s.substr(0, 2) != "U+") {
    throw ConfigError("bad codepoint \"" + std::string(s) + "\"");
  }
  size_t used = 0;
  unsigned long v;
  try {
    v = std::stoul(std::string(s.substr(2)), &used, 16);
  } catch (const std::exception &) {
    throw ConfigError("bad codepoint \"" + std::string(s) + "\"");
  }
  if (used != s.size() - 2 || v > 0x10FFFF) {
    throw ConfigError("bad codepoint \"" + std::string(s) + "\"");
  }
  return static_cast<char32_t>(v);
}

std::string Trimmed(std::string_view s) {
  const size_t b = s.find_first_not_of(' ');
  if (b == std::string_view::npos) return "";
  const size_t e = s.find_last_not_of(' ');
  return std::string(s.substr(b, e - b + 1));
}

// "U+0041-U+0043,U+0061" -> ranges.
std::vector<CodepointRange> ParseRanges(std::string_view spec) {
  std::vector<CodepointRange> out;
  size_t pos = 0;
  while (pos <= spec.size()) {
    size_t comma = spec.find(',', pos);
    if (comma == std::string_view::npos) comma = spec.size();
    const std::string item = Trimmed(spec.substr(pos, comma - pos));
    if (!item.empty()) {
      const size_t dash = item.find('-');
      CodepointRange r;
      if (dash == std::string::npos) {
        r.first = r.last = ParseCodepoint(item);
      } else {
        r.first = ParseCodepoint(item.substr(0, dash));
        r.last = ParseCodepoint(item.substr(dash + 1));
      }
      if (r.last < r.first) throw ConfigError("empty range in " + item);
      out.push_back(r);
    }
    pos = comma + 1;
  }
  return out;
}

std::string FormatRanges(const std::vector<CodepointRange> &ranges) {
  std::string out;
  for (const auto &r : ranges) {
    if (!out.empty()) out += ',';
    out += FormatCodepoint(r.first);
    if (r.last != r.first) out += "-" + FormatCodepoint(r.last);
  }
  return out;
}

// Space-separated codepoints, possibly empty.
std::u32string ParseSequence(std::string_view spec) {
  std::u32string out;
  std::istringstream is{std::string(spec)};
  std::string item;
  while (is >> item) out.push_back(ParseCodepoint(item));
  return out;
}

std::string FormatSequence(std::u32string_view seq) {
  std::string out;
  for (char32_t cp : seq) {
    if (!out.empty()) out += ' ';
    out += FormatCodepoint(cp);
  }
  return out;
}

bool InRanges(const std::vector<CodepointRange> &sorted, char32_t cp) {
  auto it = std::upper_bound(
      sorted.begin(), sorted.end(), cp,
      [](char32_t v, const CodepointRange &r) { return v < r.first; });
  if (it == sorted.begin()) return false;
  --it;
  return cp <= it->last;
}

void AddCharMap(NormalizationRules *rules, const CodepointRange &from,
                std::u32string_view target) {
  for (char32_t cp = from.first; cp <= from.last; ++cp) {
    auto [it, inserted] = rules->char_map.emplace(cp, target);
    if (!inserted && it->second != target) {
      throw ConfigError("char-map maps " + FormatCodepoint(cp) + " twice");
    }
  }
}

// "U+0030-U+0039" -> "U+06F0-U+06F9" maps element-wise.
void AddRangeShift(NormalizationRules *rules, const CodepointRange &from,
                   const CodepointRange &to) {
  if (to.last - to.first != from.last - from.first) {
    throw ConfigError("char-map range lengths differ");
  }
  for (char32_t i = 0; i <= from.last - from.first; ++i) {
    AddCharMap(rules, {from.first + i, from.first + i},
               std::u32string(1, to.first + i));
  }
}

NormalizationRules BuildDefaults() {
  NormalizationRules r;
  r.version = 1;
  r.junk_patterns = {
      {JunkKind::kControlChar, "U+0000-U+0008,U+000E-U+001F,U+007F-U+0084,"
                               "U+0086-U+009F", ""},
      {JunkKind::kZeroWidthJunk, "U+00AD,U+061C,U+180E,U+200B,U+200D-U+200F,"
                                 "U+202A-U+202E,U+2060-U+2064,U+2066-U+2069,"
                                 "U+FEFF", ""},
      {JunkKind::kEmoji, "U+20E3,U+2300-U+23FF,U+2600-U+27BF,U+2B00-U+2BFF,"
                         "U+FE00-U+FE0F,U+1F000-U+1FAFF,U+E0000-U+E007F", ""},
      {JunkKind::kHtmlTag, "<!--[\\s\\S]*?-->|</?[A-Za-z][^<>]*>", ""},
      {JunkKind::kUrl, "(https?|ftp)://[^\\s]+|www\\.[^\\s]+", ""},
      {JunkKind::kEmail,
       "[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\\.[A-Za-z]{2,}", ""},
  };
  AddCharMap(&r, {0x0643, 0x0643}, U"ک");
  AddCharMap(&r, {0x0649, 0x0649}, U"ی");
  AddCharMap(&r, {0x064A, 0x064A}, U"ی");
  AddCharMap(&r, {0x06C1, 0x06C1}, U"ه");
  AddCharMap(&r, {0x06D5, 0x06D5}, U"ه");
  AddCharMap(&r, {0x0640, 0x0640}, U"");
  AddCharMap(&r, {0x066B, 0x066B}, U".");
  AddCharMap(&r, {0x066C, 0x066C}, U",");
  AddRangeShift(&r, {0x0030, 0x0039}, {0x06F0, 0x06F9});
  AddRangeShift(&r, {0x0660, 0x0669}, {0x06F0, 0x06F9});
  for (const auto &pf : kPresentationForms) {
    AddCharMap(&r, {pf.first, pf.last}, pf.target);
  }
  r.strip_marks = {{0x064B, 0x0652}, {0x0670, 0x0670}};
  // Presentation forms may decompose to letters that are folded themselves
  // (U+06C1, U+0649); route their targets through the map.
  for (auto &[from, to] : r.char_map) {
    std::u32string folded;
    for (char32_t cp : to) {
      auto it = r.char_map.find(cp);
      if (it == r.char_map.end()) {
        folded.push_back(cp);
      } else {
        folded += it->second;
      }
    }
    to = folded;
  }
  r.Finalize();
  return r;
}

std::string ApplyRegexRules(std::string text, const NormalizationRules &rules) {
  for (size_t i = 0; i < rules.compiled().size(); ++i) {
    const JunkRule &rule = rules.junk_patterns[rules.regex_rules()[i]];
    text = std::regex_replace(text, rules.compiled()[i], rule.replacement);
  }
  return text;
}

std::string DropJunkCodepoints(std::string_view text,
                               const NormalizationRules &rules) {
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : utf8::Decode(text)) {
    if (!rules.IsJunkCodepoint(cp)) utf8::Append(cp, &out);
  }
  return out;
}

}  // namespace

const char *JunkKindName(JunkKind kind) {
  for (const auto &k : kKindNames) {
    if (k.kind == kind) return k.name;
  }
  return "?";
}

void NormalizationRules::Finalize() {
  compiled_.clear();
  regex_rules_.clear();
  junk_ranges_.clear();
  for (size_t i = 0; i < junk_patterns.size(); ++i) {
    const JunkRule &rule = junk_patterns[i];
    if (IsRegexKind(rule.kind)) {
      try {
        compiled_.emplace_back(rule.pattern, std::regex::ECMAScript |
                                                 std::regex::optimize);
      } catch (const std::regex_error &e) {
        throw ConfigError(std::string("bad ") + JunkKindName(rule.kind) +
                          " pattern: " + e.what());
      }
      regex_rules_.push_back(i);
    } else {
      for (const auto &r : ParseRanges(rule.pattern)) junk_ranges_.push_back(r);
    }
  }
  auto by_first = [](const CodepointRange &a, const CodepointRange &b) {
    return a.first < b.first;
  };
  std::sort(junk_ranges_.begin(), junk_ranges_.end(), by_first);
  mark_ranges_ = strip_marks;
  std::sort(mark_ranges_.begin(), mark_ranges_.end(), by_first);

  targets_.clear();
  for (const auto &[from, to] : char_map) {
    for (char32_t cp : to) {
      if (char_map.count(cp)) {
        throw ConfigError("char-map is not idempotent: target " +
                          FormatCodepoint(cp) + " is itself mapped");
      }
      if (IsJunkCodepoint(cp) || IsStrippedMark(cp)) {
        throw ConfigError("char-map target " + FormatCodepoint(cp) +
                          " is removed by another rule");
      }
      targets_.push_back(cp);
    }
  }
  std::sort(targets_.begin(), targets_.end());
  targets_.erase(std::unique(targets_.begin(), targets_.end()), targets_.end());
  if (IsJunkCodepoint(utf8::kZwnj)) {
    throw ConfigError("ZWNJ must not be a junk codepoint");
  }
}

bool NormalizationRules::IsJunkCodepoint(char32_t cp) const {
  return InRanges(junk_ranges_, cp);
}

bool NormalizationRules::IsStrippedMark(char32_t cp) const {
  return InRanges(mark_ranges_, cp);
}

bool NormalizationRules::IsMapTarget(char32_t cp) const {
  return std::binary_search(targets_.begin(), targets_.end(), cp);
}

const NormalizationRules &DefaultNormalizationRules() {
  static const NormalizationRules rules = BuildDefaults();
  return rules;
}

NormalizationRules LoadNormalizationRules(const std::string &path) {
  NormalizationRules rules;
  rules.collapse_runs = false;
  rules.trim = false;
  LineRecordReader reader(path);
  Json rec;
  while (reader.Next(&rec)) {
    const std::string where = path + ": line " +
                              std::to_string(reader.line_number());
    const std::string kind = RequireString(rec, "kind", where);
    const std::string pattern = RequireString(rec, "pattern", where);
    const std::string replacement =
        rec.contains("replacement") ? RequireString(rec, "replacement", where)
                                    : "";
    try {
      if (kind == "version") {
        rules.version = std::stoi(pattern);
      } else if (kind == "char-map") {
        const auto from = ParseRanges(pattern);
        if (from.size() != 1) throw ConfigError("char-map needs one range");
        const bool shift = replacement.find('-') != std::string::npos;
        if (shift) {
          const auto to = ParseRanges(replacement);
          if (to.size() != 1) throw ConfigError("char-map needs one range");
          AddRangeShift(&rules, from[0], to[0]);
        } else {
          AddCharMap(&rules, from[0], ParseSequence(replacement));
        }
      } else if (kind == "strip-mark") {
        for (const auto &r : ParseRanges(pattern)) {
          rules.strip_marks.push_back(r);
        }
      } else if (kind == "whitespace") {
        if (pattern == "collapse-runs") {
          rules.collapse_runs = true;
        } else if (pattern == "trim") {
          rules.trim = true;
        } else {
          throw ConfigError("unknown whitespace policy " + pattern);
        }
      } else {
        bool found = false;
        for (const auto &k : kKindNames) {
          if (kind == k.name) {
            rules.junk_patterns.push_back({k.kind, pattern, replacement});
            found = true;
          }
        }
        if (!found) throw ConfigError("unknown rule kind " + kind);
      }
    } catch (const ConfigError &e) {
      throw ConfigError(where + ": " + e.what());
    } catch (const std::logic_error &) {
      throw ConfigError(where + ": bad value \"" + pattern + "\"");
    }
  }
  rules.Finalize();
  return rules;
}

std::string DumpNormalizationRules(const NormalizationRules &rules) {
  std::string out;
  auto emit = [&out](const std::string &kind, const std::string &pattern,
                     const std::string &replacement) {
    out += ToLine(Json{{"kind", kind},
                       {"pattern", pattern},
                       {"replacement", replacement}});
    out += '\n';
  };
  emit("version", std::to_string(rules.version), "");
  for (const auto &rule : rules.junk_patterns) {
    emit(JunkKindName(rule.kind), rule.pattern, rule.replacement);
  }
  // Runs of consecutive sources with one shared target collapse to a range.
  for (auto it = rules.char_map.begin(); it != rules.char_map.end();) {
    auto end = std::next(it);
    char32_t last = it->first;
    while (end != rules.char_map.end() && end->first == last + 1 &&
           end->second == it->second) {
      last = end->first;
      ++end;
    }
    emit("char-map", FormatRanges({{it->first, last}}),
         FormatSequence(it->second));
    it = end;
  }
  emit("strip-mark", FormatRanges(rules.strip_marks), "");
  if (rules.collapse_runs) emit("whitespace", "collapse-runs", "");
  if (rules.trim) emit("whitespace", "trim", "");
  return out;
}

std::string CleanJunk(std::string_view text, const NormalizationRules &rules) {
  std::string current(text);
  // Removing one match can splice a new one together ("<<b>b>"), so iterate.
  for (;;) {
    std::string next = ApplyRegexRules(DropJunkCodepoints(current, rules),
                                       rules);
    if (next == current) return next;
    current = std::move(next);
  }
}

std::string StandardizeChars(std::string_view text,
                             const NormalizationRules &rules) {
  std::u32string mapped;
  mapped.reserve(text.size());
  for (char32_t cp : utf8::Decode(text)) {
    if (rules.IsStrippedMark(cp)) continue;
    auto it = rules.char_map.find(cp);
    if (it != rules.char_map.end()) {
      mapped += it->second;
    } else {
      mapped.push_back(cp);
    }
  }
  if (!rules.collapse_runs && !rules.trim) return utf8::Encode(mapped);

  // Collapse whitespace runs to one space and ZWNJ runs to one ZWNJ.
  std::u32string collapsed;
  collapsed.reserve(mapped.size());
  for (char32_t cp : mapped) {
    const bool ws = utf8::IsWhitespace(cp);
    if (rules.collapse_runs) {
      if (ws) cp = U' ';
      if (!collapsed.empty() && collapsed.back() == cp &&
          (cp == U' ' || cp == utf8::kZwnj)) {
        continue;
      }
    }
    collapsed.push_back(cp);
  }
  // ZWNJ next to a space or a text edge joins nothing.
  std::u32string out;
  out.reserve(collapsed.size());
  for (size_t i = 0; i < collapsed.size(); ++i) {
    const char32_t cp = collapsed[i];
    if (cp == utf8::kZwnj && rules.collapse_runs) {
      const bool left_edge = out.empty() || out.back() == U' ';
      const bool right_edge =
          i + 1 == collapsed.size() || collapsed[i + 1] == U' ';
      if (left_edge || right_edge) continue;
    }
    if (rules.collapse_runs && cp == U' ' && !out.empty() && out.back() == U' ') {
      continue;
    }
    out.push_back(cp);
  }
  if (rules.trim) {
    const auto is_ws = [](char32_t c) { return utf8::IsWhitespace(c); };
    while (!out.empty() && is_ws(out.back())) out.pop_back();
    size_t b = 0;
    while (b < out.size() && is_ws(out[b])) ++b;
    out.erase(0, b);
  }
  return utf8::Encode(out);
}

std::string Normalize(std::string_view text, const NormalizationRules &rules) {
  std::string current = StandardizeChars(CleanJunk(text, rules), rules);
  // Stripping a mark can splice a link together ("wwًw.x"); after the
  // first pass every step only deletes, so this terminates.
  for (;;) {
    std::string next = StandardizeChars(CleanJunk(current, rules), rules);
    if (next == current) return next;
    current = std::move(next);
  }
}

std::string Normalize(std::string_view text) {
  return Normalize(text, DefaultNormalizationRules());
}

}  // namespace persianlm
