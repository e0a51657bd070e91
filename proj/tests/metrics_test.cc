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

#include "persianlm/metrics.h"

#include <gtest/gtest.h>

#include <set>
#include <tuple>

#include "persianlm/errors.h"
#include "persianlm/random.h"
#include "test_util.h"

namespace persianlm {
namespace {

using Tags = std::vector<std::string>;
using Corpus = std::vector<Tags>;

TEST(AccuracyTest, Examples) {
  EXPECT_EQ(Accuracy({"a", "b"}, {"a", "b"}), 1.0);
  EXPECT_EQ(Accuracy({"a", "b", "a", "b"}, {"a", "b", "b", "b"}), 0.75);
  EXPECT_THROW(Accuracy({}, {}), DataError);
  EXPECT_THROW(Accuracy({"a"}, {"a", "b"}), DataError);
}

TEST(F1ReportTest, FixedExamples) {
  // Class a: tp 1, fp 0, fn 1. Class b: tp 2, fp 1, fn 0.
  const EvalReport r = F1Report({"a", "a", "b", "b"}, {"a", "b", "b", "b"},
                                {"a", "b", "c"});
  ASSERT_EQ(r.labels, (Tags{"a", "b", "c"}));
  EXPECT_DOUBLE_EQ(r.per_class[0].precision, 1.0);
  EXPECT_DOUBLE_EQ(r.per_class[0].recall, 0.5);
  EXPECT_DOUBLE_EQ(r.per_class[0].f1, 2.0 / 3.0);
  EXPECT_EQ(r.per_class[0].support, 2u);
  EXPECT_DOUBLE_EQ(r.per_class[1].precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.per_class[1].recall, 1.0);
  EXPECT_DOUBLE_EQ(r.per_class[1].f1, 0.8);
  // Class c has no support and no false positive.
  EXPECT_EQ(r.per_class[2].f1, 0.0);
  EXPECT_EQ(r.per_class[2].support, 0u);
  EXPECT_DOUBLE_EQ(r.macro_f1, (2.0 / 3.0 + 0.8 + 0.0) / 3.0);
  EXPECT_DOUBLE_EQ(r.weighted_f1, (2 * (2.0 / 3.0) + 2 * 0.8) / 4.0);
  EXPECT_DOUBLE_EQ(r.accuracy, 0.75);

  const EvalReport perfect = F1Report({"x", "y"}, {"x", "y"}, {"x", "y"});
  EXPECT_EQ(perfect.macro_f1, 1.0);
  EXPECT_EQ(perfect.weighted_f1, 1.0);
  EXPECT_THROW(F1Report({"a"}, {"z"}, {"a"}), DataError);
}

TEST(F1ReportTest, WeightedBetweenSupportedExtremes) {
  Rng rng(1);
  const Tags inventory = {"p", "q", "r", "s"};
  for (int trial = 0; trial < 300; ++trial) {
    Tags gold, pred;
    const size_t n = 1 + rng.Below(40);
    for (size_t i = 0; i < n; ++i) {
      gold.push_back(inventory[rng.Below(4)]);
      pred.push_back(inventory[rng.Below(4)]);
    }
    const EvalReport r = F1Report(gold, pred, inventory);
    double lo = 1.0, hi = 0.0, weighted = 0.0;
    for (const auto &c : r.per_class) {
      ASSERT_GE(c.precision, 0.0);
      ASSERT_LE(c.precision, 1.0);
      ASSERT_GE(c.recall, 0.0);
      ASSERT_LE(c.recall, 1.0);
      if (c.support == 0) continue;
      lo = std::min(lo, c.f1);
      hi = std::max(hi, c.f1);
      weighted += c.f1 * static_cast<double>(c.support);
    }
    ASSERT_LE(r.weighted_f1, hi + 1e-12);
    ASSERT_GE(r.weighted_f1, lo - 1e-12);
    ASSERT_NEAR(r.weighted_f1, weighted / static_cast<double>(n), 1e-12);
  }
}

TEST(IobTest, Parsing) {
  EXPECT_EQ(ParseIobTag("O").prefix, 'O');
  EXPECT_EQ(ParseIobTag("B-LOC").category, "LOC");
  EXPECT_EQ(ParseIobTag("I_PER").prefix, 'I');
  EXPECT_EQ(ParseIobTag("I_PER").category, "PER");
  for (const char *bad : {"", "B", "B-", "X-LOC", "o", "BLOC"}) {
    EXPECT_THROW(ParseIobTag(bad), DataError) << bad;
  }
}

TEST(ExtractEntitiesTest, Conventions) {
  EXPECT_EQ(ExtractEntities({"B-LOC", "I-LOC", "O", "B-PER"}),
            (std::vector<EntitySpan>{{"LOC", 0, 1}, {"PER", 3, 3}}));
  EXPECT_EQ(ExtractEntities({"I-LOC", "I-LOC"}),
            (std::vector<EntitySpan>{{"LOC", 0, 1}}));
  EXPECT_TRUE(ExtractEntities({"O", "O"}).empty());
  EXPECT_EQ(ExtractEntities({"B-LOC", "I-PER", "B-PER", "B-PER"}),
            (std::vector<EntitySpan>{
                {"LOC", 0, 0}, {"PER", 1, 1}, {"PER", 2, 2}, {"PER", 3, 3}}));
  EXPECT_EQ(ExtractEntities({"B-LOC", "I_LOC"}),
            (std::vector<EntitySpan>{{"LOC", 0, 1}}));
  EXPECT_THROW(ExtractEntities({"O", "I-LOC"}, true), DataError);
  EXPECT_NO_THROW(ExtractEntities({"B-LOC", "I-LOC"}, true));
}

TEST(EntityF1Test, Examples) {
  EntityReport r = EntityF1({{"B-LOC", "I-LOC"}}, {{"B-LOC", "I-LOC"}});
  EXPECT_EQ(r.overall.f1, 1.0);
  r = EntityF1({{"B-LOC", "I-LOC"}}, {{"B-LOC", "O"}});
  EXPECT_EQ(r.overall.tp, 0u);
  EXPECT_EQ(r.overall.fp, 1u);
  EXPECT_EQ(r.overall.fn, 1u);
  EXPECT_EQ(r.overall.f1, 0.0);
  r = EntityF1({{"O", "O"}, {"O"}}, {{"O", "O"}, {"O"}});
  EXPECT_EQ(r.overall.f1, 1.0);
  EXPECT_EQ(r.overall.precision, 1.0);
  EXPECT_EQ(r.overall.recall, 1.0);
  try {
    EntityF1({{"O"}, {"O", "O"}}, {{"O"}, {"O"}});
    FAIL();
  } catch (const DataError &e) {
    EXPECT_NE(std::string(e.what()).find("1"), std::string::npos);
  }
  EXPECT_THROW(EntityF1({{"O"}}, {}), DataError);
}

// Spans by definition: (s, e, c) is an entity when s opens a c span, every
// tag in (s, e] is I-c, and the tag after e is not I-c.
std::set<std::tuple<size_t, size_t, size_t, std::string>> BruteForceSpans(
    const Corpus &corpus) {
  std::set<std::tuple<size_t, size_t, size_t, std::string>> out;
  for (size_t item = 0; item < corpus.size(); ++item) {
    const Tags &t = corpus[item];
    for (const std::string c : {"LOC", "PER", "ORG"}) {
      const std::string b = "B-" + c, i = "I-" + c;
      for (size_t s = 0; s < t.size(); ++s) {
        const bool opens =
            t[s] == b || (t[s] == i && (s == 0 || (t[s - 1] != b && t[s - 1] != i)));
        if (!opens) continue;
        for (size_t e = s; e < t.size(); ++e) {
          bool inside = true;
          for (size_t k = s + 1; k <= e; ++k) inside = inside && t[k] == i;
          const bool closed = e + 1 == t.size() || t[e + 1] != i;
          if (inside && closed) out.insert({item, s, e, c});
        }
      }
    }
  }
  return out;
}

TEST(EntityF1Test, MatchesBruteForceOracle) {
  Rng rng(2);
  const Tags alphabet = {"O",     "O",     "B-LOC", "I-LOC", "B-PER",
                         "I-PER", "B-ORG", "I-ORG", "O"};
  for (int trial = 0; trial < 500; ++trial) {
    Corpus gold, pred;
    const size_t items = 1 + rng.Below(5);
    for (size_t k = 0; k < items; ++k) {
      const size_t len = 1 + rng.Below(12);
      Tags g, p;
      for (size_t w = 0; w < len; ++w) {
        g.push_back(alphabet[rng.Below(alphabet.size())]);
        // Predictions mostly copy gold so matches are common.
        p.push_back(rng.Below(3) ? g.back() : alphabet[rng.Below(alphabet.size())]);
      }
      gold.push_back(g);
      pred.push_back(p);
    }
    const auto gs = BruteForceSpans(gold), ps = BruteForceSpans(pred);
    size_t tp = 0;
    for (const auto &s : ps) tp += gs.count(s);
    const size_t fp = ps.size() - tp, fn = gs.size() - tp;
    double f1 = 1.0;
    if (!gs.empty() || !ps.empty()) {
      f1 = tp == 0 ? 0.0 : 2.0 * tp / static_cast<double>(2 * tp + fp + fn);
    }
    const EntityReport r = EntityF1(gold, pred);
    ASSERT_EQ(r.overall.tp, tp) << trial;
    ASSERT_EQ(r.overall.fp, fp) << trial;
    ASSERT_EQ(r.overall.fn, fn) << trial;
    ASSERT_NEAR(r.overall.f1, f1, 1e-12) << trial;

    // Swapping gold and prediction exchanges precision and recall.
    const EntityReport s = EntityF1(pred, gold);
    ASSERT_DOUBLE_EQ(s.overall.precision, r.overall.recall);
    ASSERT_DOUBLE_EQ(s.overall.recall, r.overall.precision);
    ASSERT_DOUBLE_EQ(s.overall.f1, r.overall.f1);

    for (const auto &tags : gold) {
      const auto spans = ExtractEntities(tags);
      for (size_t k = 1; k < spans.size(); ++k) {
        ASSERT_GT(spans[k].start, spans[k - 1].end);
      }
    }
  }
}

TEST(EntityF1Test, PerCategory) {
  const EntityReport r = EntityF1({{"B-LOC", "O", "B-PER", "I-PER"}},
                                  {{"B-LOC", "O", "B-PER", "O"}});
  EXPECT_EQ(r.per_category.at("LOC").f1, 1.0);
  EXPECT_EQ(r.per_category.at("PER").f1, 0.0);
  EXPECT_DOUBLE_EQ(r.overall.f1, 0.5);
}

TEST(ReportTest, Writers) {
  test::TempDir dir;
  const EvalReport r = F1Report({"a", "b"}, {"a", "a"}, {"a", "b"});
  EXPECT_NE(FormatEvalReport(r).find("macro"), std::string::npos);
  WriteEvalReport(r, dir.Path("r.jsonl"));
  EXPECT_FALSE(test::ReadFile(dir.Path("r.jsonl")).empty());
  const EntityReport e = EntityF1({{"B-LOC"}}, {{"B-LOC"}});
  EXPECT_NE(FormatEntityReport(e).find("LOC"), std::string::npos);
  WriteEntityReport(e, dir.Path("e.jsonl"));
  EXPECT_FALSE(test::ReadFile(dir.Path("e.jsonl")).empty());
}

}  // namespace
}  // namespace persianlm
