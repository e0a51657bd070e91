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

#include "persianlm/synthetic.h"

#include <gtest/gtest.h>

#include <set>

#include "persianlm/errors.h"
#include "persianlm/metrics.h"
#include "persianlm/segmenter.h"
#include "persianlm/textnorm.h"
#include "persianlm/utf8.h"
#include "persianlm/wordpiece.h"

namespace persianlm {
namespace {

TEST(LexiconTest, DeterministicAndDisjoint) {
  const Lexicon a = BuildLexicon(0), b = BuildLexicon(0);
  EXPECT_EQ(a.AllWords(), b.AllWords());
  EXPECT_NE(BuildLexicon(1).AllWords(), a.AllWords());
  const auto all = a.AllWords();
  EXPECT_TRUE(std::is_sorted(all.begin(), all.end()));
  EXPECT_EQ(std::set<std::string>(all.begin(), all.end()).size(), all.size());
  EXPECT_GE(a.markers.size(), 2u);
}

TEST(ClassificationTest, MarkerDeterminesLabel) {
  ClassificationOptions o;
  o.seed = 11;
  const auto data = GenerateClassification(o);
  ASSERT_EQ(data.size(), 250u);
  EXPECT_EQ(GenerateClassification(o), data);
  const Lexicon lex = BuildLexicon(o.lexicon_seed);
  std::map<std::string, size_t> per_label;
  for (const auto &item : data) {
    ++per_label[item.label];
    const size_t cls = std::stoul(item.label.substr(item.label.find('_') + 1));
    ASSERT_LT(cls, o.classes);
    size_t own = 0, other = 0;
    for (const auto &word : PreTokenize(item.text)) {
      const std::string w = utf8::Encode(word);
      for (size_t c = 0; c < o.classes; ++c) {
        for (const auto &m : lex.markers[c]) {
          if (w == m) ++(c == cls ? own : other);
        }
      }
    }
    ASSERT_EQ(own, 1u) << item.text;
    ASSERT_EQ(other, 0u) << item.text;
    ASSERT_EQ(Normalize(item.text), item.text);
  }
  EXPECT_EQ(per_label.size(), 2u);
  for (const auto &[label, n] : per_label) EXPECT_GT(n, 75u) << label;
}

TEST(NerTest, TagsAreValidIob) {
  NerOptions o;
  o.seed = 12;
  const auto data = GenerateNer(o);
  ASSERT_EQ(data.size(), 250u);
  EXPECT_EQ(GenerateNer(o), data);
  const Lexicon lex = BuildLexicon(o.lexicon_seed);
  size_t entities = 0;
  for (const auto &seq : data) {
    ASSERT_EQ(seq.tokens.size(), seq.tags.size());
    ASSERT_FALSE(seq.tokens.empty());
    const auto spans = ExtractEntities(seq.tags, true);
    entities += spans.size();
    for (const auto &span : spans) {
      size_t first = span.start;
      if (span.category == "ORG") {
        // Two words: a head noun, then a dictionary name.
        ASSERT_EQ(span.end, span.start + 1);
        const auto &heads = lex.org_heads;
        ASSERT_NE(std::find(heads.begin(), heads.end(), seq.tokens[first]),
                  heads.end());
        ++first;
      }
      std::string name;
      for (size_t k = first; k <= span.end; ++k) {
        name += (k > first ? " " : "") + seq.tokens[k];
      }
      const auto &names = lex.entities.at(span.category);
      ASSERT_NE(std::find(names.begin(), names.end(), name), names.end())
          << span.category << " " << name;
    }
  }
  EXPECT_GT(entities, 100u);
}

TEST(MlmCorpusTest, GoldSegmentationIsRecoverable) {
  MlmCorpusOptions o;
  o.seed = 5;
  o.documents = 200;
  const SyntheticCorpus corpus = GenerateMlmCorpus(o);
  ASSERT_EQ(corpus.documents.size(), 200u);
  const SyntheticCorpus again = GenerateMlmCorpus(o);
  SegmenterConfig config;
  config.abbreviations = DefaultAbbreviations();
  config.adjudicator = std::make_shared<RuleBasedAdjudicator>(config.abbreviations);
  size_t with_abbreviation = 0;
  for (size_t d = 0; d < corpus.documents.size(); ++d) {
    const Document &doc = corpus.documents[d];
    ASSERT_EQ(doc.text, again.documents[d].text);
    std::string joined;
    for (const auto &s : corpus.sentences[d]) joined += (joined.empty() ? "" : " ") + s;
    ASSERT_EQ(doc.text, joined);
    ASSERT_EQ(Normalize(doc.text), doc.text);
    std::vector<std::string> got;
    for (const auto &s : SegmentTrue(doc.text, config)) got.push_back(s.text);
    ASSERT_EQ(got, corpus.sentences[d]) << doc.text;
    if (corpus.abbreviation_count[d] > 0) {
      ++with_abbreviation;
      ASSERT_GT(SegmentByNotation(doc.text, config).size(), got.size());
    }
  }
  EXPECT_GT(with_abbreviation, 50u);
}

TEST(OptionsTest, Validation) {
  MlmCorpusOptions m;
  m.min_sentences = 9;
  EXPECT_THROW(m.Validate(), ConfigError);
  m = MlmCorpusOptions();
  m.marker_rate = 1.5;
  EXPECT_THROW(m.Validate(), ConfigError);
  ClassificationOptions c;
  c.classes = 1;
  EXPECT_THROW(c.Validate(), ConfigError);
  NerOptions n;
  n.entity_rate = -0.1;
  EXPECT_THROW(n.Validate(), ConfigError);
}

}  // namespace
}  // namespace persianlm
