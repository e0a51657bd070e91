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

#ifndef PERSIANLM_METRICS_H_
#define PERSIANLM_METRICS_H_

#include <compare>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace persianlm {

// Fraction of exact matches. Throws on empty or unequal inputs.
double Accuracy(const std::vector<std::string> &gold,
                const std::vector<std::string> &pred);

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  size_t support = 0;  // gold count
  size_t tp = 0, fp = 0, fn = 0;
};

struct EvalReport {
  double accuracy = 0.0;
  std::vector<std::string> labels;     // inventory order
  std::vector<ClassScores> per_class;  // parallel to labels
  double macro_f1 = 0.0;     // unweighted mean over the inventory
  double weighted_f1 = 0.0;  // support-weighted mean
};

// Every 0/0 ratio is 0. A class without support still counts toward the
// macro mean. Throws DataError on a label outside the inventory.
EvalReport F1Report(const std::vector<std::string> &gold,
                    const std::vector<std::string> &pred,
                    const std::vector<std::string> &inventory);

struct EntitySpan {
  std::string category;
  size_t start = 0;
  size_t end = 0;  // inclusive

  auto operator<=>(const EntitySpan &) const = default;
};

// A parsed IOB tag: prefix 'O', 'B' or 'I'; "B-X" and "B_X" are the same.
struct IobTag {
  char prefix = 'O';
  std::string category;
};

// Throws DataError for anything that is not O, B-<cat> or I-<cat>.
IobTag ParseIobTag(std::string_view tag);

// Maximal spans, sorted by start. An I-<cat> that does not continue a span
// of the same category opens a new one; with strict it is an error instead.
std::vector<EntitySpan> ExtractEntities(const std::vector<std::string> &tags,
                                        bool strict = false);

struct EntityScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  size_t tp = 0, fp = 0, fn = 0;
};

struct EntityReport {
  EntityScores overall;  // micro-averaged
  std::map<std::string, EntityScores> per_category;
};

// Exact (category, start, end) matching. A corpus with no gold and no
// predicted entity scores 1 everywhere. Throws DataError naming the first
// item whose sequences differ in length.
EntityReport EntityF1(const std::vector<std::vector<std::string>> &gold,
                      const std::vector<std::vector<std::string>> &pred,
                      bool strict = false);

std::string FormatEvalReport(const EvalReport &report);
std::string FormatEntityReport(const EntityReport &report);
void WriteEvalReport(const EvalReport &report, const std::string &path);
void WriteEntityReport(const EntityReport &report, const std::string &path);

}  // namespace persianlm

#endif  // PERSIANLM_METRICS_H_
