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

#ifndef PERSIANLM_SEGMENTER_H_
#define PERSIANLM_SEGMENTER_H_

#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "persianlm/errors.h"

namespace persianlm {

// Raised by an adjudicator that cannot reach a decision.
class AdjudicatorError : public Error {
 public:
  using Error::Error;
};

struct BoundaryContext {
  // Whitespace tokens before the candidate (the last one carries the
  // boundary character) and after it, nearest first on each side.
  std::vector<std::string> left_tokens;
  std::vector<std::string> right_tokens;
  char32_t boundary;
  // True when the boundary sits inside a whitespace token, so
  // right_tokens[0] is the rest of that token.
  bool mid_token = false;
};

// Confirms or vetoes candidate sentence boundaries. Implementations must be
// safe to call from several threads at once.
class BoundaryAdjudicator {
 public:
  virtual ~BoundaryAdjudicator() = default;
  virtual bool Accept(const BoundaryContext &context) const = 0;
};

// Lexicon + digit + single-letter rules phrased over token context. This is
// the extension point a part-of-speech backed adjudicator would replace.
class RuleBasedAdjudicator : public BoundaryAdjudicator {
 public:
  explicit RuleBasedAdjudicator(std::set<std::string> abbreviations)
      : abbreviations_(std::move(abbreviations)) {}
  bool Accept(const BoundaryContext &context) const override;

 private:
  std::set<std::string> abbreviations_;
};

struct SegmenterConfig {
  std::u32string boundary_chars = U"؟?!.:";
  std::set<std::string> abbreviations;
  size_t min_tokens = 3;
  std::shared_ptr<const BoundaryAdjudicator> adjudicator;
  // On adjudicator failure keep the rule-based decision instead of failing.
  bool lenient = false;

  void Validate() const;
};

struct Sentence {
  std::string text;
  std::string doc_id;
  size_t index = 0;

  bool operator==(const Sentence &) const = default;
};

// Shipped Persian abbreviation lexicon.
std::set<std::string> DefaultAbbreviations();

// One abbreviation per line; '#' starts a comment.
std::set<std::string> LoadAbbreviations(const std::string &path);

// Splits after every boundary character. No repair, no length filter.
std::vector<Sentence> SegmentByNotation(std::string_view text,
                                        const SegmenterConfig &config,
                                        const std::string &doc_id = "");

// Notation splitting repaired by abbreviation, decimal, single-letter and
// colon rules, an optional adjudicator, and the min_tokens merge.
std::vector<Sentence> SegmentTrue(std::string_view text,
                                  const SegmenterConfig &config,
                                  const std::string &doc_id = "");

size_t CountTokens(std::string_view text);

void WriteSentenceRecords(const std::vector<Sentence> &sentences,
                          const std::string &path, bool append = false);

}  // namespace persianlm

#endif  // PERSIANLM_SEGMENTER_H_
