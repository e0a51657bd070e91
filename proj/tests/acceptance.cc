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

// Acceptance runner: prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. Tolerances are pinned below.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "CLI11.hpp"
#include "manifest.h"
#include "persianlm/checkpoint.h"
#include "persianlm/corpus.h"
#include "persianlm/errors.h"
#include "persianlm/finetune.h"
#include "persianlm/jsonl.h"
#include "persianlm/metrics.h"
#include "persianlm/model.h"
#include "persianlm/pretrain_data.h"
#include "persianlm/pretrainer.h"
#include "persianlm/segmenter.h"
#include "persianlm/synthetic.h"
#include "persianlm/textnorm.h"
#include "persianlm/utf8.h"
#include "persianlm/wordpiece.h"

namespace persianlm {
namespace {

namespace fs = std::filesystem;

// Criterion 1.
constexpr uint64_t kMaskSeed = 7;
constexpr size_t kMinSelected = 100000;
constexpr double kMaskTolerance = 0.01;
constexpr double kMaskSeconds = 60;
// Criterion 2.
constexpr size_t kRoundTripSentences = 10000;
constexpr double kTokenizerSeconds = 120;
// Criterion 3.
constexpr size_t kSegmentDocuments = 500;
constexpr double kSegmentSeconds = 30;
// Criterion 4.
constexpr size_t kNormalizeStrings = 10000;
constexpr double kNormalizeSeconds = 30;
// Criterion 5.
constexpr size_t kGradCoordinates = 50;
constexpr double kGradStep = 1e-4;
constexpr double kGradTolerance = 1e-4;
constexpr double kGradSeconds = 120;
// Criterion 6.
constexpr double kMlmLossFraction = 0.5;  // of ln V
constexpr double kNspAccuracy = 0.9;
constexpr size_t kFinalWindow = 50;  // training steps averaged
constexpr double kPretrainSeconds = 15 * 60;
// Criterion 7.
constexpr double kClsAccuracy = 0.95;
constexpr size_t kClsEpochs = 5;
constexpr double kNerF1 = 0.90;
constexpr size_t kNerEpochs = 10;
constexpr double kFinetuneSeconds = 10 * 60;
// Criterion 8.
constexpr size_t kMetricCorpora = 500;
constexpr double kMetricSeconds = 30;
constexpr double kMetricTolerance = 1e-12;

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double Seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Format(const char *fmt, ...) __attribute__((format(printf, 1, 2)));
std::string Format(const char *fmt, ...) {
  char buf[1024];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  return buf;
}

class Report {
 public:
  explicit Report(std::string path) : path_(std::move(path)) {}

  void Add(int criterion, const std::string &name, double seconds,
           double limit, const Outcome &o) {
    const bool pass = o.pass && seconds < limit;
    const std::string line =
        Format("criterion %d %-24s %s  %s; %.1f s (limit %.0f s)", criterion,
               name.c_str(), pass ? "PASS" : "FAIL", o.detail.c_str(), seconds,
               limit);
    std::printf("%s\n", line.c_str());
    std::fflush(stdout);
    lines_ += line + "\n";
    failures_ += pass ? 0 : 1;
    if (!path_.empty()) {
      std::ofstream out(path_, std::ios::trunc);
      out << lines_;
    }
  }

  int failures() const { return failures_; }

 private:
  std::string path_;
  std::string lines_;
  int failures_ = 0;
};

// ------------------------------------------------------------ criterion 1

Outcome CheckMasking() {
  const VocabInfo vocab{1000, 5, 0, 2, 3, 4};
  const MaskingPolicy policy;
  Rng lengths(kMaskSeed);
  size_t selected = 0, replaced = 0, randomized = 0, kept = 0;
  size_t examples = 0, count_errors = 0, special_errors = 0;
  while (selected < kMinSelected) {
    std::vector<int32_t> a(1 + lengths.Below(60)), b(1 + lengths.Below(60));
    for (auto &id : a) id = static_cast<int32_t>(5 + lengths.Below(995));
    for (auto &id : b) id = static_cast<int32_t>(5 + lengths.Below(995));
    PretrainExample ex = AssembleIds(a, b, NspLabel::kIsNext, vocab, 128);
    const std::vector<int32_t> original = ex.input_ids;
    Rng rng(DeriveSeed(kMaskSeed, examples++));
    ApplyMlmMask(&ex, policy, vocab, &rng);
    size_t candidates = 0, labeled = 0;
    for (size_t i = 0; i < ex.max_len(); ++i) {
      const bool special = original[i] < static_cast<int32_t>(vocab.num_special);
      candidates += special ? 0 : 1;
      if (ex.mlm_labels[i] == kIgnoreLabel) {
        if (ex.input_ids[i] != original[i]) ++special_errors;
        continue;
      }
      ++labeled;
      if (special || ex.mlm_labels[i] != original[i]) ++special_errors;
      if (ex.input_ids[i] == vocab.mask_id) {
        ++replaced;
      } else if (ex.input_ids[i] != original[i]) {
        ++randomized;
        if (ex.input_ids[i] < static_cast<int32_t>(vocab.num_special)) {
          ++special_errors;
        }
      } else {
        ++kept;
      }
    }
    // round(0.15 n) by integer arithmetic, at least one.
    const size_t expected = std::max<size_t>(1, (15 * candidates + 50) / 100);
    if (labeled != expected) ++count_errors;
    selected += labeled;
  }
  const double n = static_cast<double>(selected);
  const double fr = replaced / n, fx = randomized / n, fk = kept / n;
  Outcome o;
  o.pass = std::abs(fr - 0.8) <= kMaskTolerance &&
           std::abs(fx - 0.1) <= kMaskTolerance &&
           std::abs(fk - 0.1) <= kMaskTolerance && count_errors == 0 &&
           special_errors == 0;
  o.detail = Format(
      "%zu selected in %zu examples: replace %.4f random %.4f keep %.4f "
      "(+-%.2f), count mismatches %zu, special selections %zu",
      selected, examples, fr, fx, fk, kMaskTolerance, count_errors,
      special_errors);
  return o;
}

// ------------------------------------------------------------ criterion 2

// Sentences of a normalized, segmented synthetic corpus.
std::vector<std::string> CorpusSentences(uint64_t seed, size_t documents) {
  MlmCorpusOptions options;
  options.seed = seed;
  options.documents = documents;
  const SyntheticCorpus corpus = GenerateMlmCorpus(options);
  SegmenterConfig config;
  config.abbreviations = DefaultAbbreviations();
  config.adjudicator = std::make_shared<RuleBasedAdjudicator>(config.abbreviations);
  std::vector<std::string> out;
  for (const Document &doc : corpus.documents) {
    for (Sentence &s : SegmentTrue(Normalize(doc.text), config, doc.id)) {
      out.push_back(std::move(s.text));
    }
  }
  return out;
}

std::string Collapse(const std::string &s) {
  std::string out;
  for (char32_t cp : utf8::Decode(s)) {
    if (utf8::IsWhitespace(cp)) {
      if (!out.empty() && out.back() != ' ') out += ' ';
    } else {
      utf8::Append(cp, &out);
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

// Violations of the model invariants for a trained vocabulary.
size_t VocabViolations(const WordPieceModel &model,
                       const std::vector<std::u32string> &words,
                       const TokenizerTrainConfig &config, std::string *why) {
  size_t bad = 0;
  auto flag = [&](const std::string &msg) {
    if (bad++ == 0) *why = msg;
  };
  if (model.size() > config.vocab_size) flag("vocab above cap");
  // Alphabet: the alphabet_limit most frequent characters.
  std::map<char32_t, uint64_t> freq;
  for (const auto &w : words) {
    for (char32_t c : w) ++freq[c];
  }
  std::vector<std::pair<uint64_t, char32_t>> ranked;
  for (auto &[c, f] : freq) ranked.push_back({f, c});
  std::sort(ranked.begin(), ranked.end(), [](auto &a, auto &b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::set<char32_t> alphabet;
  for (size_t i = 0; i < ranked.size() && i < config.alphabet_limit; ++i) {
    alphabet.insert(ranked[i].second);
  }
  // Occurrence counts of each surface string at word-initial and inner
  // positions: a merge needs a pair seen min_frequency times, so every merged
  // piece's surface occurs at least that often.
  std::map<std::u32string, uint64_t> initial, inner;
  for (const auto &w : words) {
    for (size_t b = 0; b < w.size(); ++b) {
      for (size_t e = b + 2; e <= w.size(); ++e) {
        ++(b == 0 ? initial : inner)[w.substr(b, e - b)];
      }
    }
  }
  for (size_t id = config.special_tokens.size(); id < model.size(); ++id) {
    std::string piece = model.vocab()[id];
    const bool cont = piece.rfind(config.continuation_prefix, 0) == 0;
    if (cont) piece = piece.substr(config.continuation_prefix.size());
    const std::u32string u = utf8::Decode(piece);
    for (char32_t c : u) {
      if (!alphabet.count(c)) flag("character outside the alphabet in " + piece);
    }
    if (u.size() >= 2) {
      const auto &table = cont ? inner : initial;
      auto it = table.find(u);
      if (it == table.end() || it->second < config.min_frequency) {
        flag("merged piece " + piece + " is rarer than min_frequency");
      }
    }
  }
  return bad;
}

Outcome CheckTokenizer() {
  const std::vector<std::string> sentences = CorpusSentences(1, 6000);
  std::vector<std::u32string> words;
  std::set<std::u32string> clean_words;
  for (const auto &s : sentences) {
    for (auto &w : PreTokenize(s)) {
      bool letters = true;
      for (char32_t c : w) letters = letters && !utf8::IsPunctuation(c);
      if (letters) clean_words.insert(w);
      words.push_back(std::move(w));
    }
  }
  size_t violations = 0;
  std::string why;
  std::vector<std::string> sizes;
  TokenizerTrainConfig pipeline;
  pipeline.vocab_size = 1000;
  TokenizerTrainConfig tight = pipeline;
  tight.alphabet_limit = 25;
  TokenizerTrainConfig full;  // the 100K cap
  bool reproducible = true;
  std::optional<WordPieceModel> main_model;
  for (TokenizerTrainConfig *c : {&pipeline, &tight, &full}) {
    const WordPieceModel model = TrainWordPiece(sentences, *c);
    reproducible = reproducible &&
                   TrainWordPiece(sentences, *c).Serialize() == model.Serialize();
    violations += VocabViolations(model, words, *c, &why);
    sizes.push_back(std::to_string(model.size()) + "/" +
                    std::to_string(c->vocab_size) + " alphabet " +
                    std::to_string(c->alphabet_limit));
    if (!main_model) main_model = model;
  }

  const std::vector<std::u32string> pool(clean_words.begin(), clean_words.end());
  Rng rng(2);
  size_t mismatches = 0, unknown = 0;
  for (size_t k = 0; k < kRoundTripSentences; ++k) {
    std::string s = rng.Below(4) == 0 ? " " : "";
    const size_t n = 1 + rng.Below(15);
    for (size_t i = 0; i < n; ++i) {
      s += utf8::Encode(pool[rng.Below(pool.size())]);
      s += rng.Below(5) == 0 ? "  " : " ";
    }
    const auto ids = main_model->Encode(s);
    for (int32_t id : ids) unknown += id == main_model->unk_id() ? 1 : 0;
    if (main_model->Decode(ids) != Collapse(s)) ++mismatches;
  }
  Outcome o;
  o.pass = violations == 0 && reproducible && mismatches == 0 && unknown == 0;
  o.detail = Format("%zu round-trip mismatches, %zu [UNK], vocab sizes %s; %s; "
                    "%zu invariant violations%s%s",
                    mismatches, unknown,
                    (sizes[0] + ", " + sizes[1] + ", " + sizes[2]).c_str(),
                    reproducible ? "retraining byte-identical"
                                 : "retraining DIFFERS",
                    violations, violations ? ": " : "", why.c_str());
  return o;
}

// ------------------------------------------------------------ criterion 3

Outcome CheckSegmentation() {
  MlmCorpusOptions options;
  options.seed = 3;
  options.documents = kSegmentDocuments;
  const SyntheticCorpus corpus = GenerateMlmCorpus(options);
  SegmenterConfig config;
  config.abbreviations = DefaultAbbreviations();
  config.adjudicator = std::make_shared<RuleBasedAdjudicator>(config.abbreviations);
  size_t exact = 0, with_abbr = 0, oversplit = 0, decimals = 0;
  for (size_t d = 0; d < corpus.documents.size(); ++d) {
    const std::string &text = corpus.documents[d].text;
    std::vector<std::string> got;
    for (const Sentence &s : SegmentTrue(text, config)) got.push_back(s.text);
    exact += got == corpus.sentences[d] ? 1 : 0;
    decimals += corpus.decimal_count[d];
    if (corpus.abbreviation_count[d] > 0) {
      ++with_abbr;
      if (SegmentByNotation(text, config).size() > corpus.sentences[d].size()) {
        ++oversplit;
      }
    }
  }
  Outcome o;
  o.pass = exact == corpus.documents.size() && with_abbr > 0 &&
           oversplit == with_abbr;
  o.detail = Format("true segmentation exact on %zu/%zu documents; notation "
                    "over-splits %zu/%zu abbreviation documents (%zu decimals "
                    "planted)",
                    exact, corpus.documents.size(), oversplit, with_abbr,
                    decimals);
  return o;
}

// ------------------------------------------------------------ criterion 4

std::string MessyString(Rng *rng) {
  static const std::vector<std::u32string> kPieces = {
      U"سلام", U"كتاب", U"علي", U"ی", U"ك", U"ي", U"ة", U"ۀ", U"أ", U"إ",
      U"ﻻ", U"ﺎ", U"ﯼ", U"ﻯ", U"ﮏ", U"ﺑ", U"١٢٣", U"۴۵۶", U"789",
      U"ً", U"َ", U"ِ", U"ْ", U"ٰ", U"‌", U"‍", U"​", U"⁠", U"﻿", U"\x01",
      U"\x1b", U"\x7f", U"\u0085", U"\U0001F600", U"❤", U"\U0001F44D", U"<b>",
      U"</div>", U"<a href=\"x\">", U"http://a.b/c", U"www.x.ir", U"u@v.com",
      U" ", U"  ", U"\t", U"\n", U"\r", U" ", U" ", U".", U"؟", U"!",
      U"،", U"«", U"»", U"abc", U"Z", U"-", U"<", U">", U"@", U"/", U":"};
  std::u32string out;
  const size_t n = 1 + rng->Below(16);
  for (size_t i = 0; i < n; ++i) {
    if (rng->Below(6) == 0) {
      char32_t cp = static_cast<char32_t>(rng->Below(0x10000));
      if (cp >= 0xD800 && cp <= 0xDFFF) cp = U'x';
      out.push_back(cp);
    } else {
      out += kPieces[rng->Below(kPieces.size())];
    }
  }
  return utf8::Encode(out);
}

Outcome CheckNormalization() {
  const NormalizationRules &rules = DefaultNormalizationRules();
  Rng rng(4);
  size_t not_idempotent = 0, junk = 0, mapped = 0;
  for (size_t i = 0; i < kNormalizeStrings; ++i) {
    const std::string once = Normalize(MessyString(&rng), rules);
    if (Normalize(once, rules) != once) ++not_idempotent;
    for (char32_t cp : utf8::Decode(once)) {
      junk += rules.IsJunkCodepoint(cp) ? 1 : 0;
      mapped += rules.IsMapped(cp) ? 1 : 0;
    }
  }
  Outcome o;
  o.pass = not_idempotent == 0 && junk == 0 && mapped == 0;
  o.detail = Format("%zu strings: %zu not idempotent, %zu junk and %zu mapped "
                    "codepoints in output",
                    kNormalizeStrings, not_idempotent, junk, mapped);
  return o;
}

// ------------------------------------------------------------ criterion 5

Outcome CheckGradients() {
  const ModelConfig config = ModelConfig::DeskScale(1000);
  const Params<double> params = InitParams<double>(config, 5);
  const VocabInfo vocab{1000, 5, 0, 2, 3, 4};
  Rng rng(5);
  std::vector<PretrainExample> batch;
  for (int k = 0; k < 4; ++k) {
    std::vector<int32_t> a(3 + rng.Below(10)), b(3 + rng.Below(10));
    for (auto &id : a) id = static_cast<int32_t>(5 + rng.Below(995));
    for (auto &id : b) id = static_cast<int32_t>(5 + rng.Below(995));
    auto ex = AssembleIds(a, b, k % 2 ? NspLabel::kIsNext : NspLabel::kNotNext,
                          vocab, 32);
    ApplyMlmMask(&ex, MaskingPolicy(), vocab, &rng);
    batch.push_back(ex);
  }
  // A uniformly chosen tensor, then a uniformly chosen coordinate in it.
  const auto &tensors = params.layout.tensors();
  std::vector<size_t> indices;
  for (size_t k = 0; k < kGradCoordinates; ++k) {
    const TensorSpec &t = tensors[rng.Below(tensors.size())];
    indices.push_back(t.offset + rng.Below(t.size()));
  }
  const GradCheckResult r =
      FiniteDifferenceCheck(params, batch, indices, kGradStep);
  std::string worst;
  for (const auto &t : tensors) {
    if (r.worst_index >= t.offset && r.worst_index < t.offset + t.size()) {
      worst = t.name;
    }
  }
  Outcome o;
  o.pass = r.max_relative_error < kGradTolerance;
  o.detail = Format("(2,2,64) model, %zu coordinates, h=%.0e, float64: max "
                    "relative error %.3e at %s (limit %.0e)",
                    indices.size(), kGradStep, r.max_relative_error,
                    worst.c_str(), kGradTolerance);
  return o;
}

// ------------------------------------------------------------ criterion 6

std::vector<StepLoss> ReadLossTrace(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  std::getline(in, line);
  std::vector<StepLoss> out;
  while (std::getline(in, line)) {
    StepLoss l{};
    unsigned long long step = 0;
    if (std::sscanf(line.c_str(), "%llu,%lf,%lf", &step, &l.mlm_loss,
                    &l.nsp_loss) != 3) {
      throw DataError(path + ": bad trace line");
    }
    l.step = step;
    out.push_back(l);
  }
  return out;
}

Outcome CheckPretraining(const std::string &run) {
  const WordPieceModel vocab = WordPieceModel::Load(run + "/vocab.txt");
  const Checkpoint ckpt = LoadCheckpoint(run + "/pretrained.ckpt");
  const auto trace = ReadLossTrace(run + "/loss.csv");
  const auto dev = ReadExamples(run + "/dev.bin");
  const PretrainEval eval = EvaluatePretraining(ckpt.params, dev);
  double tail = 0.0;
  const size_t window = std::min(kFinalWindow, trace.size());
  for (size_t i = trace.size() - window; i < trace.size(); ++i) {
    tail += trace[i].mlm_loss;
  }
  tail /= static_cast<double>(std::max<size_t>(window, 1));
  const double ln_v = std::log(static_cast<double>(vocab.size()));
  const double limit = kMlmLossFraction * ln_v;
  const OptimizerConfig &opt = ckpt.optimizer;
  Outcome o;
  o.pass = ckpt.step == 2000 && opt.batch_size == 32 && opt.beta1 == 0.9 &&
           opt.beta2 == 0.98 && tail <= limit && eval.mlm_loss <= limit &&
           eval.nsp_accuracy >= kNspAccuracy;
  o.detail = Format(
      "%llu steps, batch %zu, Adam(%.2f, %.2f), V=%zu: final MLM loss %.3f "
      "(last %zu steps) and %.3f (dev) vs limit %.3f; dev NSP accuracy %.4f "
      "on %zu pairs (limit %.2f)",
      static_cast<unsigned long long>(ckpt.step), opt.batch_size, opt.beta1,
      opt.beta2, vocab.size(), tail, window, eval.mlm_loss, limit,
      eval.nsp_accuracy, eval.examples, kNspAccuracy);
  return o;
}

// ------------------------------------------------------------ criterion 7

std::vector<double> ReadTrace(const std::string &path) {
  LineRecordReader reader(path);
  std::vector<double> out;
  Json rec;
  while (reader.Next(&rec)) out.push_back(rec.at("dev_score").get<double>());
  return out;
}

Outcome CheckFinetuning(const std::string &run) {
  const WordPieceModel vocab = WordPieceModel::Load(run + "/vocab.txt");
  const Checkpoint pretrained = LoadCheckpoint(run + "/pretrained.ckpt");
  PretrainOptions init;
  init.model = pretrained.config();
  init.optimizer = pretrained.optimizer;
  init.seed = pretrained.seed;
  init.vocab_fingerprint = pretrained.vocab_fingerprint;
  const Checkpoint random_init = InitialCheckpoint(init);

  const auto cls_train = LoadClassificationData(run + "/cls_train.jsonl");
  const auto cls_dev = LoadClassificationData(run + "/cls_dev.jsonl");
  const auto ner_train = LoadConllData(run + "/ner_train.conll");
  const auto ner_dev = LoadConllData(run + "/ner_dev.conll");

  // The manifest's fine-tuning settings.
  FinetuneConfig config;
  config.seed = 1;
  config.max_len = 64;
  config.batch_size = 8;
  FinetuneConfig cls = config, ner = config;
  cls.learning_rate = 1e-3;
  ner.learning_rate = 2e-4;
  cls.epochs = kClsEpochs;
  cls.label_inventory = InferLabelInventory(cls_train);
  ner.epochs = kNerEpochs;
  ner.label_inventory = InferTagInventory(ner_train);

  auto scores = [](const FinetuneResult &r) {
    std::vector<double> out;
    for (const auto &e : r.epochs) out.push_back(e.dev_score);
    return out;
  };
  const FinetuneResult cls_pre =
      FinetuneSequence(pretrained, vocab, cls_train, cls_dev, cls);
  const FinetuneResult ner_pre =
      FinetuneTokens(pretrained, vocab, ner_train, ner_dev, ner);
  const FinetuneResult cls_rand =
      FinetuneSequence(random_init, vocab, cls_train, cls_dev, cls);
  const FinetuneResult ner_rand =
      FinetuneTokens(random_init, vocab, ner_train, ner_dev, ner);

  const std::vector<double> cls_scores = scores(cls_pre);
  const std::vector<double> ner_scores = scores(ner_pre);
  const bool matches_pipeline =
      cls_scores == ReadTrace(run + "/cls_trace.jsonl") &&
      ner_scores == ReadTrace(run + "/ner_trace.jsonl");
  std::vector<std::string> texts, gold;
  for (const auto &x : cls_train) {
    texts.push_back(x.text);
    gold.push_back(x.label);
  }
  const double train_accuracy =
      Accuracy(gold, PredictLabels(cls_pre.checkpoint, vocab, texts, 64));

  const double best_cls = *std::max_element(cls_scores.begin(), cls_scores.end());
  const double best_ner = *std::max_element(ner_scores.begin(), ner_scores.end());
  const double cls_p = cls_scores.back(), cls_r = scores(cls_rand).back();
  const double ner_p = ner_scores.back(), ner_r = scores(ner_rand).back();
  Outcome o;
  o.pass = best_cls >= kClsAccuracy && best_ner >= kNerF1 &&
           (cls_r < cls_p || ner_r < ner_p) && matches_pipeline &&
           train_accuracy >= kClsAccuracy;
  o.detail = Format(
      "pretrained: cls accuracy %.3f within %zu epochs (final %.3f, train "
      "%.3f), NER F1 %.3f within %zu epochs (final %.3f); random init at "
      "equal budget: cls %.3f, NER %.3f; in-process runs %s the pipeline "
      "traces",
      best_cls, kClsEpochs, cls_p, train_accuracy, best_ner, kNerEpochs, ner_p,
      cls_r, ner_r, matches_pipeline ? "match" : "DIFFER from");
  return o;
}

// ------------------------------------------------------------ criterion 8

using Span = std::tuple<size_t, size_t, size_t, std::string>;

std::set<Span> EnumerateSpans(const std::vector<std::vector<std::string>> &c) {
  std::set<Span> out;
  for (size_t item = 0; item < c.size(); ++item) {
    const auto &t = c[item];
    for (const std::string cat : {"LOC", "PER", "ORG"}) {
      const std::string b = "B-" + cat, i = "I-" + cat;
      for (size_t s = 0; s < t.size(); ++s) {
        if (!(t[s] == b || (t[s] == i && (s == 0 || (t[s - 1] != b && t[s - 1] != i))))) {
          continue;
        }
        size_t e = s;
        while (e + 1 < t.size() && t[e + 1] == i) ++e;
        out.insert({item, s, e, cat});
      }
    }
  }
  return out;
}

Outcome CheckMetrics() {
  Rng rng(8);
  const std::vector<std::string> tags = {"O", "O", "O", "B-LOC", "I-LOC",
                                         "B-PER", "I-PER", "B-ORG", "I-ORG"};
  size_t disagreements = 0;
  for (size_t k = 0; k < kMetricCorpora; ++k) {
    std::vector<std::vector<std::string>> gold, pred;
    const size_t items = 1 + rng.Below(6);
    for (size_t j = 0; j < items; ++j) {
      const size_t len = 1 + rng.Below(15);
      std::vector<std::string> g, p;
      for (size_t w = 0; w < len; ++w) {
        g.push_back(tags[rng.Below(tags.size())]);
        p.push_back(rng.Below(3) ? g.back() : tags[rng.Below(tags.size())]);
      }
      gold.push_back(g);
      pred.push_back(p);
    }
    const auto gs = EnumerateSpans(gold), ps = EnumerateSpans(pred);
    size_t tp = 0;
    for (const auto &s : ps) tp += gs.count(s);
    const size_t fp = ps.size() - tp, fn = gs.size() - tp;
    const double f1 = gs.empty() && ps.empty()
                          ? 1.0
                          : (tp == 0 ? 0.0 : 2.0 * tp / double(2 * tp + fp + fn));
    const EntityReport r = EntityF1(gold, pred);
    if (r.overall.tp != tp || r.overall.fp != fp || r.overall.fn != fn ||
        std::abs(r.overall.f1 - f1) > kMetricTolerance) {
      ++disagreements;
    }
  }
  // Fixed examples.
  size_t fixed_failures = 0;
  auto expect = [&](bool ok) { fixed_failures += ok ? 0 : 1; };
  const EvalReport a = F1Report({"a", "a", "b", "b"}, {"a", "b", "b", "b"},
                                {"a", "b", "c"});
  expect(a.per_class[0].precision == 1.0 && a.per_class[0].recall == 0.5 &&
         std::abs(a.per_class[0].f1 - 2.0 / 3.0) < 1e-15);
  expect(a.per_class[2].f1 == 0.0 && a.per_class[2].support == 0);
  expect(std::abs(a.weighted_f1 - (2 * (2.0 / 3.0) + 2 * 0.8) / 4) < 1e-15);
  const EvalReport p = F1Report({"x", "y"}, {"x", "y"}, {"x", "y"});
  expect(p.macro_f1 == 1.0 && p.weighted_f1 == 1.0 && p.accuracy == 1.0);
  expect(Accuracy({"a", "b", "a", "b"}, {"a", "b", "b", "b"}) == 0.75);
  expect(EntityF1({{"B-LOC", "I-LOC"}}, {{"B-LOC", "O"}}).overall.f1 == 0.0);
  expect(EntityF1({{"O"}}, {{"O"}}).overall.f1 == 1.0);
  Outcome o;
  o.pass = disagreements == 0 && fixed_failures == 0;
  o.detail = Format("entity_f1 disagrees with brute force on %zu/%zu corpora; "
                    "%zu fixed-example failures",
                    disagreements, kMetricCorpora, fixed_failures);
  return o;
}

// ------------------------------------------------------------ criterion 9

std::string ReadBytes(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome CheckDeterminism(const std::string &a, const std::string &b) {
  size_t compared = 0;
  std::vector<std::string> differing;
  for (const auto &entry : fs::directory_iterator(a)) {
    const std::string name = entry.path().filename().string();
    ++compared;
    const fs::path other = fs::path(b) / name;
    if (!fs::exists(other) || ReadBytes(entry.path()) != ReadBytes(other)) {
      differing.push_back(name);
    }
  }
  bool key_files = true;
  for (const char *name : {"vocab.txt", "train.bin", "dev.bin", "pretrained.ckpt",
                           "cls.ckpt", "ner.ckpt"}) {
    key_files = key_files && fs::exists(fs::path(a) / name);
  }
  std::string list;
  for (const auto &d : differing) list += " " + d;
  Outcome o;
  o.pass = differing.empty() && key_files && compared > 0;
  o.detail = Format("%zu artifacts compared across two manifest runs (vocab, "
                    "example files, checkpoints included): %zu differ%s",
                    compared, differing.size(), list.c_str());
  return o;
}

int Main(int argc, char **argv) {
  CLI::App app{"Acceptance runner"};
  std::string manifest, report_path, work_dir;
  bool keep = false;
  app.add_option("--manifest", manifest, "Pipeline manifest")->required();
  app.add_option("--report", report_path, "Also write the result lines here");
  app.add_option("--work-dir", work_dir, "Directory for the two manifest runs");
  app.add_flag("--keep", keep, "Keep the manifest run directories");
  CLI11_PARSE(app, argc, argv);

  const bool own_dir = work_dir.empty();
  if (own_dir) {
    work_dir = (fs::temp_directory_path() /
                ("persianlm-acceptance-" + std::to_string(::getpid())))
                   .string();
  }
  fs::create_directories(work_dir);
  const std::string run_a = fs::absolute(work_dir + "/run_a").string();
  const std::string run_b = fs::absolute(work_dir + "/run_b").string();

  Report report(report_path);
  auto guarded = [&](int n, const std::string &name, double limit,
                     const std::function<Outcome()> &fn) {
    Stopwatch w;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception &e) {
      o = {false, std::string("error: ") + e.what()};
    }
    report.Add(n, name, w.Seconds(), limit, o);
  };

  guarded(1, "masking", kMaskSeconds, CheckMasking);
  guarded(2, "tokenizer", kTokenizerSeconds, CheckTokenizer);
  guarded(3, "segmentation", kSegmentSeconds, CheckSegmentation);
  guarded(4, "normalization", kNormalizeSeconds, CheckNormalization);
  guarded(5, "gradient-check", kGradSeconds, CheckGradients);
  guarded(8, "metrics", kMetricSeconds, CheckMetrics);

  // Criterion 6 times the whole manifest run, fine-tuning included.
  double run_seconds = 0.0;
  guarded(6, "pretraining", kPretrainSeconds, [&] {
    Stopwatch w;
    const int status = cli::RunManifest(manifest, {{"out", run_a}});
    run_seconds = w.Seconds();
    if (status != 0) {
      return Outcome{false, "manifest run failed with status " +
                                std::to_string(status)};
    }
    return CheckPretraining(run_a);
  });
  guarded(7, "finetuning", kFinetuneSeconds,
          [&] { return CheckFinetuning(run_a); });
  guarded(9, "determinism", 2 * run_seconds + 60, [&] {
    const int status = cli::RunManifest(manifest, {{"out", run_b}});
    if (status != 0) {
      return Outcome{false, "second manifest run failed with status " +
                                std::to_string(status)};
    }
    return CheckDeterminism(run_a, run_b);
  });

  if (!keep) {
    std::error_code ec;
    if (own_dir) {
      fs::remove_all(work_dir, ec);
    } else {
      fs::remove_all(run_a, ec);
      fs::remove_all(run_b, ec);
    }
  }
  std::printf("%d of 9 criteria failed\n", report.failures());
  return report.failures() == 0 ? 0 : 1;
}

}  // namespace
}  // namespace persianlm

int main(int argc, char **argv) { return persianlm::Main(argc, argv); }
