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

#ifndef PERSIANLM_SYNTHETIC_H_
#define PERSIANLM_SYNTHETIC_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "persianlm/corpus.h"
#include "persianlm/finetune.h"

namespace persianlm {

// Artificial Persian-letter vocabulary shared by every generator, so a
// tokenizer trained on the MLM corpus covers the task datasets too.
struct Lexicon {
  struct Topic {
    std::vector<std::string> nouns;
    std::vector<std::string> adjectives;
    std::vector<std::string> verbs;
    std::vector<size_t> noun_adjective;  // per noun
    std::vector<size_t> noun_verb;       // per noun
  };

  std::vector<Topic> topics;
  std::map<std::string, std::vector<std::string>> entities;  // PER, LOC, ORG
  std::vector<std::string> org_heads;  // first word of two-word ORG names
  std::vector<std::vector<std::string>> markers;  // per class
  std::vector<std::string> abbreviations;  // planted after year numbers

  // Every generated surface word, sorted.
  std::vector<std::string> AllWords() const;
};

Lexicon BuildLexicon(uint64_t seed);

struct MlmCorpusOptions {
  uint64_t seed = 0;
  uint64_t lexicon_seed = 0;
  size_t documents = 500;
  size_t min_sentences = 4;
  size_t max_sentences = 8;
  double abbreviation_rate = 0.15;  // per sentence
  double decimal_rate = 0.1;        // per sentence
  double entity_rate = 0.1;         // per object slot
  // Per sentence. Each document draws one class and uses only its markers.
  double marker_rate = 1.0;

  void Validate() const;
};

struct SyntheticCorpus {
  std::vector<Document> documents;
  // Gold sentences per document; a document's text is these joined by ' '.
  std::vector<std::vector<std::string>> sentences;
  std::vector<size_t> abbreviation_count;  // per document
  std::vector<size_t> decimal_count;       // per document
};

// Topic-coherent documents. Word choice within a topic is Zipf-like, each
// noun has a fixed adjective and verb, and every sentence after the first
// opens with the noun that closed its predecessor.
SyntheticCorpus GenerateMlmCorpus(const MlmCorpusOptions &options);

struct ClassificationOptions {
  uint64_t seed = 0;
  uint64_t lexicon_seed = 0;
  size_t items = 250;
  size_t classes = 2;

  void Validate() const;
};

// Labels "class_0" ... ; each text carries one marker word of its class and
// none of any other.
std::vector<LabeledText> GenerateClassification(
    const ClassificationOptions &options);

struct NerOptions {
  uint64_t seed = 0;
  uint64_t lexicon_seed = 0;
  size_t items = 250;
  double entity_rate = 0.35;  // per noun slot

  void Validate() const;
};

// Sentences whose noun slots are sometimes filled by dictionary entities,
// tagged B-/I-<category>.
std::vector<TaggedSequence> GenerateNer(const NerOptions &options);

// Line records {id, source, text}.
void WriteCorpus(const SyntheticCorpus &corpus, const std::string &path);
// Line records {doc_id, index, text}.
void WriteGoldSentences(const SyntheticCorpus &corpus, const std::string &path);

}  // namespace persianlm

#endif  // PERSIANLM_SYNTHETIC_H_
