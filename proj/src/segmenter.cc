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

#include "persianlm/segmenter.h"

#include <fstream>

#include "persianlm/jsonl.h"
#include "persianlm/utf8.h"

namespace persianlm {
namespace {

constexpr size_t kContextTokens = 5;

bool IsOpeningPunct(char32_t cp) {
  return cp == U'(' || cp == U'[' || cp == U'«' || cp == U'"' || cp == U'\'';
}

// Single letters each followed by a dot, at least two of them ("ا.ب.").
bool IsLetterDotRun(std::u32string_view token) {
  if (token.size() < 4 || token.size() % 2 != 0) return false;
  for (size_t i = 0; i < token.size(); i += 2) {
    if (!utf8::IsLetter(token[i]) || token[i + 1] != U'.') return false;
  }
  return true;
}

// Rules (a) and (b) for a dot at `offset` of whitespace token `token`.
bool DotIsNotBoundary(std::u32string_view token, size_t offset,
                      const std::set<std::string> &abbreviations) {
  if (offset > 0 && offset + 1 < token.size() &&
      utf8::IsDigit(token[offset - 1]) && utf8::IsDigit(token[offset + 1])) {
    return true;
  }
  size_t start = 0;
  while (start < token.size() && IsOpeningPunct(token[start])) ++start;
  if (offset < start) return false;
  const std::u32string_view body = token.substr(start);
  const size_t rel = offset - start;
  const std::string body_utf8 = utf8::Encode(body);
  for (const std::string &abbr : abbreviations) {
    if (body_utf8.compare(0, abbr.size(), abbr) == 0 &&
        rel < utf8::Length(abbr)) {
      return true;
    }
  }
  return IsLetterDotRun(body);
}

bool IsBoundaryChar(const SegmenterConfig &config, char32_t cp) {
  return config.boundary_chars.find(cp) != std::u32string::npos;
}

std::vector<std::string> SplitTokens(std::u32string_view text) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && utf8::IsWhitespace(text[i])) ++i;
    const size_t b = i;
    while (i < text.size() && !utf8::IsWhitespace(text[i])) ++i;
    if (i > b) out.push_back(utf8::Encode(text.substr(b, i - b)));
  }
  return out;
}

std::string TrimU32(std::u32string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && utf8::IsWhitespace(s[b])) ++b;
  while (e > b && utf8::IsWhitespace(s[e - 1])) --e;
  std::string out;
  for (size_t i = b; i < e; ++i) {
    // Sentences never carry a newline.
    utf8::Append(utf8::IsWhitespace(s[i]) ? U' ' : s[i], &out);
  }
  return out;
}

std::vector<std::string> SplitAt(const std::u32string &text,
                                 const std::vector<size_t> &cuts) {
  std::vector<std::string> out;
  size_t prev = 0;
  for (size_t cut : cuts) {
    std::string piece = TrimU32(std::u32string_view(text).substr(prev, cut + 1 - prev));
    if (!piece.empty()) out.push_back(std::move(piece));
    prev = cut + 1;
  }
  std::string tail = TrimU32(std::u32string_view(text).substr(prev));
  if (!tail.empty()) out.push_back(std::move(tail));
  return out;
}

std::vector<Sentence> ToSentences(std::vector<std::string> texts,
                                  const std::string &doc_id) {
  std::vector<Sentence> out;
  out.reserve(texts.size());
  for (auto &t : texts) {
    out.push_back(Sentence{std::move(t), doc_id, out.size()});
  }
  return out;
}

BoundaryContext MakeContext(const std::u32string &text, size_t sentence_start,
                            size_t pos) {
  BoundaryContext ctx;
  ctx.boundary = text[pos];
  auto left = SplitTokens(
      std::u32string_view(text).substr(sentence_start, pos + 1 - sentence_start));
  for (size_t k = 0; k < kContextTokens && k < left.size(); ++k) {
    ctx.left_tokens.push_back(left[left.size() - 1 - k]);
  }
  ctx.mid_token = pos + 1 < text.size() && !utf8::IsWhitespace(text[pos + 1]);
  size_t end = pos + 1;
  for (size_t seen = 0; end < text.size(); ++end) {
    if (utf8::IsWhitespace(text[end]) &&
        (end == pos + 1 || !utf8::IsWhitespace(text[end - 1]))) {
      if (++seen > kContextTokens) break;
    }
  }
  auto right = SplitTokens(std::u32string_view(text).substr(pos + 1, end - pos - 1));
  if (right.size() > kContextTokens) right.resize(kContextTokens);
  ctx.right_tokens = std::move(right);
  return ctx;
}

}  // namespace

bool RuleBasedAdjudicator::Accept(const BoundaryContext &context) const {
  if (context.left_tokens.empty()) return true;
  if (context.boundary != U'.') return true;
  std::u32string token = utf8::Decode(context.left_tokens.front());
  const size_t offset = token.size() - 1;
  if (context.mid_token && !context.right_tokens.empty()) {
    token += utf8::Decode(context.right_tokens.front());
  }
  return !DotIsNotBoundary(token, offset, abbreviations_);
}

void SegmenterConfig::Validate() const {
  if (boundary_chars.empty()) throw ConfigError("boundary_chars is empty");
  if (min_tokens < 1) throw ConfigError("min_tokens must be at least 1");
}

std::set<std::string> DefaultAbbreviations() {
  return {"ق.م.", "ه.ق.", "ه.ش.", "م.", "ع.", "ص.", "ره.",
          "ج.ا.ا.", "ج.ا.", "ق.ظ.", "ب.ظ.", "ر.ک."};
}

std::set<std::string> LoadAbbreviations(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::set<std::string> out;
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const size_t b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const size_t e = line.find_last_not_of(" \t\r");
    std::string entry = line.substr(b, e - b + 1);
    if (utf8::FindInvalid(entry) != std::string::npos) {
      throw DataError(path + ": invalid UTF-8 at line " +
                      std::to_string(line_number));
    }
    out.insert(std::move(entry));
  }
  return out;
}

size_t CountTokens(std::string_view text) {
  return SplitTokens(utf8::Decode(text)).size();
}

std::vector<Sentence> SegmentByNotation(std::string_view text,
                                        const SegmenterConfig &config,
                                        const std::string &doc_id) {
  config.Validate();
  const std::u32string u = utf8::Decode(text);
  std::vector<size_t> cuts;
  for (size_t i = 0; i < u.size(); ++i) {
    if (IsBoundaryChar(config, u[i])) cuts.push_back(i);
  }
  return ToSentences(SplitAt(u, cuts), doc_id);
}

std::vector<Sentence> SegmentTrue(std::string_view text,
                                  const SegmenterConfig &config,
                                  const std::string &doc_id) {
  config.Validate();
  const std::u32string u = utf8::Decode(text);
  std::vector<size_t> cuts;
  size_t sentence_start = 0;
  for (size_t i = 0; i < u.size(); ++i) {
    if (!IsBoundaryChar(config, u[i])) continue;
    // Only the last character of a run like "?!" or "..." can end a sentence.
    if (i + 1 < u.size() && IsBoundaryChar(config, u[i + 1])) continue;
    const bool next_is_space = i + 1 < u.size() && utf8::IsWhitespace(u[i + 1]);
    bool boundary = true;
    if (u[i] == U'.') {
      size_t b = i;
      while (b > 0 && !utf8::IsWhitespace(u[b - 1])) --b;
      size_t e = i + 1;
      while (e < u.size() && !utf8::IsWhitespace(u[e])) ++e;
      boundary = !DotIsNotBoundary(std::u32string_view(u).substr(b, e - b),
                                   i - b, config.abbreviations);
    } else if (u[i] == U':') {
      if (i + 1 < u.size()) {
        size_t j = i + 1;
        while (j < u.size() && utf8::IsWhitespace(u[j])) ++j;
        boundary = next_is_space && j < u.size() && !utf8::IsLowerLatin(u[j]);
      }
    }
    if (boundary && config.adjudicator) {
      const BoundaryContext ctx = MakeContext(u, sentence_start, i);
      try {
        boundary = config.adjudicator->Accept(ctx);
      } catch (const std::exception &e) {
        if (!config.lenient) {
          throw AdjudicatorError(std::string("boundary adjudicator failed: ") +
                                 e.what());
        }
      }
    }
    if (boundary) {
      cuts.push_back(i);
      sentence_start = i + 1;
    }
  }

  // Short fragments are folded into the next sentence; a short tail is
  // dropped unless it is all the document has.
  std::vector<std::string> merged;
  std::string pending;
  for (std::string &fragment : SplitAt(u, cuts)) {
    pending = pending.empty() ? std::move(fragment) : pending + " " + fragment;
    if (CountTokens(pending) >= config.min_tokens) {
      merged.push_back(std::move(pending));
      pending.clear();
    }
  }
  if (!pending.empty() && merged.empty()) merged.push_back(std::move(pending));
  return ToSentences(std::move(merged), doc_id);
}

void WriteSentenceRecords(const std::vector<Sentence> &sentences,
                          const std::string &path, bool append) {
  std::ofstream out(path, std::ios::binary |
                              (append ? std::ios::app : std::ios::trunc));
  if (!out) throw IoError("cannot open " + path + " for writing");
  for (const Sentence &s : sentences) {
    out << ToLine(Json{{"doc_id", s.doc_id}, {"index", s.index},
                       {"text", s.text}})
        << '\n';
  }
  if (!out) throw IoError("write failure on " + path);
}

}  // namespace persianlm
