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

#include <algorithm>
#include <set>

#include "persianlm/errors.h"
#include "persianlm/jsonl.h"
#include "persianlm/random.h"

namespace persianlm {
namespace {

constexpr size_t kTopics = 24;
constexpr size_t kNounsPerTopic = 10;
constexpr size_t kAdjectivesPerTopic = 4;
constexpr size_t kVerbsPerTopic = 4;
constexpr size_t kNamesPerCategory = 12;
constexpr size_t kOrgNames = 8;
constexpr size_t kMaxClasses = 8;
constexpr size_t kMarkersPerClass = 3;

const char *const kConsonants[] = {"ب", "پ", "ت", "ج", "چ", "خ", "د", "ر", "ز",
                                   "س", "ش", "ف", "ک", "گ", "ل", "م", "ن"};
const char *const kVowels[] = {"ا", "و", "ی"};
const char *const kDigits[] = {"۰", "۱", "۲", "۳", "۴", "۵", "۶", "۷", "۸", "۹"};

// Real function words; none has the consonant-vowel-consonant shape of the
// generated words.
const char *const kReserved[] = {"در", "با", "و",   "را",  "این", "سال",
                                 "نرخ", "درصد", "شرکت", "سازمان"};

// C V C or C V C V.
std::string MakeWord(Rng *rng) {
  static const int kShape[][4] = {{0, 1, 0, -1}, {0, 1, 0, 1}};
  const auto &shape = kShape[rng->Below(2)];
  std::string w;
  for (int kind : shape) {
    if (kind < 0) break;
    w += kind == 0 ? kConsonants[rng->Below(std::size(kConsonants))]
                   : kVowels[rng->Below(std::size(kVowels))];
  }
  return w;
}

class WordSource {
 public:
  explicit WordSource(uint64_t seed) : rng_(seed) {
    used_.insert(std::begin(kReserved), std::end(kReserved));
  }
  std::string Next() {
    for (;;) {
      std::string w = MakeWord(&rng_);
      if (used_.insert(w).second) return w;
    }
  }
  std::vector<std::string> Take(size_t n) {
    std::vector<std::string> out;
    for (size_t i = 0; i < n; ++i) out.push_back(Next());
    return out;
  }
  Rng *rng() { return &rng_; }

 private:
  Rng rng_;
  std::set<std::string> used_;
};

// Index drawn with probability proportional to 1 / (rank + 1).
size_t Zipf(size_t n, Rng *rng) {
  double total = 0.0;
  for (size_t r = 0; r < n; ++r) total += 1.0 / static_cast<double>(r + 1);
  double u = rng->Uniform() * total;
  for (size_t r = 0; r < n; ++r) {
    u -= 1.0 / static_cast<double>(r + 1);
    if (u < 0.0) return r;
  }
  return n - 1;
}

std::string Digits(size_t count, bool leading_nonzero, Rng *rng) {
  std::string s;
  for (size_t i = 0; i < count; ++i) {
    s += kDigits[i == 0 && leading_nonzero ? 1 + rng->Below(9) : rng->Below(10)];
  }
  return s;
}

struct Token {
  std::string word;
  std::string tag = "O";
};

struct SentencePlan {
  double abbreviation_rate = 0.0;
  double decimal_rate = 0.0;
  double entity_rate = 0.0;
};

struct GeneratedSentence {
  std::vector<Token> tokens;  // words, final punctuation last
  size_t object = 0;          // noun index within the topic
  bool abbreviation = false;
  bool decimal = false;
};

void AddEntity(const Lexicon &lex, const std::string &category, Rng *rng,
               std::vector<Token> *out) {
  if (category == "ORG") {
    out->push_back({lex.org_heads[rng->Below(lex.org_heads.size())], "B-ORG"});
    const auto &names = lex.entities.at("ORG");
    out->push_back({names[rng->Below(names.size())], "I-ORG"});
    return;
  }
  const auto &names = lex.entities.at(category);
  out->push_back({names[rng->Below(names.size())], "B-" + category});
}

GeneratedSentence MakeSentence(const Lexicon &lex, size_t topic_index,
                               size_t subject, const SentencePlan &plan,
                               Rng *rng) {
  const Lexicon::Topic &topic = lex.topics[topic_index];
  GeneratedSentence s;
  s.object = Zipf(topic.nouns.size(), rng);
  const std::string &subj = topic.nouns[subject];
  const std::string &obj = topic.nouns[s.object];
  auto adj = [&](size_t noun) {
    return Token{topic.adjectives[topic.noun_adjective[noun]]};
  };
  auto verb = [&](size_t noun) {
    return Token{topic.verbs[topic.noun_verb[noun]]};
  };
  std::vector<Token> &t = s.tokens;
  if (rng->Uniform() < plan.entity_rate) AddEntity(lex, "ORG", rng, &t);
  const uint64_t shape = rng->Below(3);
  size_t verb_noun = subject;
  if (shape == 0) {
    t.push_back({subj});
    t.push_back(adj(subject));
    if (rng->Uniform() < plan.entity_rate) {
      t.push_back({"با"});
      AddEntity(lex, "PER", rng, &t);
    }
    t.push_back({obj});
    t.push_back({"را"});
  } else if (shape == 1) {
    t.push_back({subj});
    if (rng->Uniform() < plan.entity_rate) AddEntity(lex, "PER", rng, &t);
    t.push_back({"با"});
    t.push_back({obj});
    t.push_back(adj(s.object));
    verb_noun = s.object;
  } else {
    t.push_back({"این"});
    t.push_back({subj});
    t.push_back(adj(subject));
    t.push_back({"و"});
    t.push_back({obj});
  }
  if (rng->Uniform() < plan.abbreviation_rate) {
    s.abbreviation = true;
    t.push_back({"در"});
    t.push_back({"سال"});
    t.push_back({"۱۳" + Digits(2, false, rng)});
    t.push_back({lex.abbreviations[rng->Below(lex.abbreviations.size())]});
  }
  if (rng->Uniform() < plan.decimal_rate) {
    s.decimal = true;
    t.push_back({"با"});
    t.push_back({"نرخ"});
    t.push_back({Digits(1, true, rng) + "." + Digits(1, false, rng)});
    t.push_back({"درصد"});
  }
  if (rng->Uniform() < plan.entity_rate) {
    t.push_back({"در"});
    AddEntity(lex, "LOC", rng, &t);
  }
  t.push_back(verb(verb_noun));
  const double u = rng->Uniform();
  t.push_back({u < 0.8 ? "." : (u < 0.9 ? "؟" : "!")});
  return s;
}

// Words separated by spaces with the final punctuation attached.
std::string Render(const std::vector<Token> &tokens) {
  std::string text;
  for (size_t i = 0; i + 1 < tokens.size(); ++i) {
    if (i > 0) text += ' ';
    text += tokens[i].word;
  }
  return text + tokens.back().word;
}

}  // namespace

std::vector<std::string> Lexicon::AllWords() const {
  std::set<std::string> words(std::begin(kReserved), std::end(kReserved));
  for (const auto &t : topics) {
    words.insert(t.nouns.begin(), t.nouns.end());
    words.insert(t.adjectives.begin(), t.adjectives.end());
    words.insert(t.verbs.begin(), t.verbs.end());
  }
  for (const auto &[cat, names] : entities) words.insert(names.begin(), names.end());
  words.insert(org_heads.begin(), org_heads.end());
  for (const auto &m : markers) words.insert(m.begin(), m.end());
  return {words.begin(), words.end()};
}

Lexicon BuildLexicon(uint64_t seed) {
  WordSource source(DeriveSeed(seed, 0x1e));
  Lexicon lex;
  for (size_t k = 0; k < kTopics; ++k) {
    Lexicon::Topic topic;
    topic.nouns = source.Take(kNounsPerTopic);
    topic.adjectives = source.Take(kAdjectivesPerTopic);
    topic.verbs = source.Take(kVerbsPerTopic);
    for (size_t n = 0; n < kNounsPerTopic; ++n) {
      topic.noun_adjective.push_back(source.rng()->Below(kAdjectivesPerTopic));
      topic.noun_verb.push_back(source.rng()->Below(kVerbsPerTopic));
    }
    lex.topics.push_back(std::move(topic));
  }
  lex.entities["PER"] = source.Take(kNamesPerCategory);
  lex.entities["LOC"] = source.Take(kNamesPerCategory);
  lex.entities["ORG"] = source.Take(kOrgNames);
  lex.org_heads = {"شرکت", "سازمان"};
  for (size_t c = 0; c < kMaxClasses; ++c) {
    lex.markers.push_back(source.Take(kMarkersPerClass));
  }
  lex.abbreviations = {"ه.ش.", "ه.ق.", "ق.م.", "م."};
  return lex;
}

namespace {

// Puts one of class c's markers at a random word slot before the punctuation.
void InsertMarker(const Lexicon &lex, size_t c, GeneratedSentence *s, Rng *rng) {
  const auto &markers = lex.markers[c];
  const size_t pos = rng->Below(s->tokens.size());
  s->tokens.insert(s->tokens.begin() + static_cast<std::ptrdiff_t>(pos),
                   Token{markers[rng->Below(markers.size())]});
}

}  // namespace

void MlmCorpusOptions::Validate() const {
  if (documents == 0) throw ConfigError("mlm-corpus needs at least 1 document");
  if (min_sentences < 2 || max_sentences < min_sentences) {
    throw ConfigError("sentences per document must satisfy 2 <= min <= max");
  }
  for (double r : {abbreviation_rate, decimal_rate, entity_rate, marker_rate}) {
    if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("rates must lie in [0, 1]");
  }
}

SyntheticCorpus GenerateMlmCorpus(const MlmCorpusOptions &options) {
  options.Validate();
  const Lexicon lex = BuildLexicon(options.lexicon_seed);
  const SentencePlan plan{options.abbreviation_rate, options.decimal_rate,
                          options.entity_rate};
  SyntheticCorpus corpus;
  for (size_t d = 0; d < options.documents; ++d) {
    Rng rng(DeriveSeed(options.seed, d));
    const size_t topic = rng.Below(kTopics);
    const size_t count =
        options.min_sentences +
        rng.Below(options.max_sentences - options.min_sentences + 1);
    std::vector<std::string> sentences;
    size_t abbreviations = 0, decimals = 0;
    size_t subject = Zipf(kNounsPerTopic, &rng);
    const size_t marker_class = rng.Below(kMaxClasses);
    for (size_t i = 0; i < count; ++i) {
      GeneratedSentence s = MakeSentence(lex, topic, subject, plan, &rng);
      if (rng.Uniform() < options.marker_rate) InsertMarker(lex, marker_class, &s, &rng);
      sentences.push_back(Render(s.tokens));
      abbreviations += s.abbreviation;
      decimals += s.decimal;
      subject = s.object;
    }
    std::string text;
    for (const auto &s : sentences) text += (text.empty() ? "" : " ") + s;
    Document doc;
    doc.id = "doc-" + std::to_string(d + 1);
    char source[16];
    std::snprintf(source, sizeof(source), "topic-%02zu", topic);
    doc.source = source;
    doc.text = std::move(text);
    corpus.documents.push_back(std::move(doc));
    corpus.sentences.push_back(std::move(sentences));
    corpus.abbreviation_count.push_back(abbreviations);
    corpus.decimal_count.push_back(decimals);
  }
  return corpus;
}

void ClassificationOptions::Validate() const {
  if (classes < 2) throw ConfigError("cls needs at least 2 classes");
  if (classes > kMaxClasses) {
    throw ConfigError("cls supports at most " + std::to_string(kMaxClasses) +
                      " classes");
  }
  if (items < classes) {
    throw ConfigError("cls needs at least one item per class");
  }
}

std::vector<LabeledText> GenerateClassification(
    const ClassificationOptions &options) {
  options.Validate();
  const Lexicon lex = BuildLexicon(options.lexicon_seed);
  Rng rng(DeriveSeed(options.seed, 0xc1));
  std::vector<size_t> classes;
  for (size_t i = 0; i < options.items; ++i) {
    classes.push_back(i < options.classes ? i : rng.Below(options.classes));
  }
  rng.Shuffle(&classes);
  std::vector<LabeledText> out;
  for (size_t c : classes) {
    const size_t topic = rng.Below(kTopics);
    GeneratedSentence s =
        MakeSentence(lex, topic, Zipf(kNounsPerTopic, &rng), {}, &rng);
    InsertMarker(lex, c, &s, &rng);
    out.push_back({Render(s.tokens), "class_" + std::to_string(c)});
  }
  return out;
}

void NerOptions::Validate() const {
  if (items == 0) throw ConfigError("ner needs at least 1 item");
  if (!(entity_rate >= 0.0 && entity_rate <= 1.0)) {
    throw ConfigError("entity rate must lie in [0, 1]");
  }
}

std::vector<TaggedSequence> GenerateNer(const NerOptions &options) {
  options.Validate();
  const Lexicon lex = BuildLexicon(options.lexicon_seed);
  Rng rng(DeriveSeed(options.seed, 0xe2));
  SentencePlan plan;
  plan.entity_rate = options.entity_rate;
  std::vector<TaggedSequence> out;
  for (size_t i = 0; i < options.items; ++i) {
    const size_t topic = rng.Below(kTopics);
    const GeneratedSentence s =
        MakeSentence(lex, topic, Zipf(kNounsPerTopic, &rng), plan, &rng);
    TaggedSequence seq;
    for (const auto &t : s.tokens) {
      seq.tokens.push_back(t.word);
      seq.tags.push_back(t.tag);
    }
    out.push_back(std::move(seq));
  }
  return out;
}

void WriteCorpus(const SyntheticCorpus &corpus, const std::string &path) {
  LineRecordWriter out(path);
  for (const auto &doc : corpus.documents) {
    Json rec;
    rec["id"] = doc.id;
    rec["source"] = doc.source;
    rec["text"] = doc.text;
    out.Write(rec);
  }
  out.Close();
}

void WriteGoldSentences(const SyntheticCorpus &corpus,
                        const std::string &path) {
  LineRecordWriter out(path);
  for (size_t d = 0; d < corpus.documents.size(); ++d) {
    for (size_t i = 0; i < corpus.sentences[d].size(); ++i) {
      Json rec;
      rec["doc_id"] = corpus.documents[d].id;
      rec["index"] = i;
      rec["text"] = corpus.sentences[d][i];
      out.Write(rec);
    }
  }
  out.Close();
}

}  // namespace persianlm
