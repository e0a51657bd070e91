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

#include "persianlm/finetune.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <unordered_map>

#include "persianlm/errors.h"
#include "persianlm/jsonl.h"
#include "persianlm/metrics.h"
#include "persianlm/random.h"
#include "persianlm/utf8.h"

namespace persianlm {
namespace {

constexpr uint64_t kHeadStream = 0;
constexpr uint64_t kOrderStream = 1;
constexpr uint64_t kDropoutStream = 2;

using MatF = Mat<float>;
using RowF = RowVec<float>;

Eigen::Map<const MatF> HeadW(const Params<float> &p) {
  const ParamLayout &lay = p.layout;
  return Eigen::Map<const MatF>(
      p.values.data() + lay.head_w,
      static_cast<Eigen::Index>(lay.config().hidden),
      static_cast<Eigen::Index>(lay.num_labels()));
}

Eigen::Map<const RowF> HeadB(const Params<float> &p) {
  return Eigen::Map<const RowF>(
      p.values.data() + p.layout.head_b,
      static_cast<Eigen::Index>(p.layout.num_labels()));
}

// Log-softmax cross-entropy of one row; turns probs into d loss / d logits.
double CrossEntropy(const Eigen::Ref<const RowF> &logits, int32_t target,
                    RowF *grad) {
  const double m = static_cast<double>(logits.maxCoeff());
  double sum = 0.0;
  grad->resize(logits.size());
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    const double e = std::exp(static_cast<double>(logits(i)) - m);
    (*grad)(i) = static_cast<float>(e);
    sum += e;
  }
  *grad /= static_cast<float>(sum);
  (*grad)(target) -= 1.0f;
  return m + std::log(sum) - static_cast<double>(logits(target));
}

int32_t ArgMax(const Eigen::Ref<const RowF> &row) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < row.size(); ++i) {
    if (row(i) > row(best)) best = i;
  }
  return static_cast<int32_t>(best);
}

std::vector<int32_t> EncodeText(const WordPieceModel &tok,
                                const std::string &text, size_t max_len) {
  std::vector<int32_t> pieces = tok.Encode(text);
  if (pieces.size() + 2 > max_len) pieces.resize(max_len - 2);
  std::vector<int32_t> ids;
  ids.reserve(pieces.size() + 2);
  ids.push_back(tok.cls_id());
  ids.insert(ids.end(), pieces.begin(), pieces.end());
  ids.push_back(tok.sep_id());
  return ids;
}

std::unordered_map<std::string, int32_t> IndexLabels(
    const std::vector<std::string> &labels) {
  std::unordered_map<std::string, int32_t> index;
  for (size_t i = 0; i < labels.size(); ++i) {
    index.emplace(labels[i], static_cast<int32_t>(i));
  }
  return index;
}

void CheckTokenizer(const Checkpoint &ckpt, const WordPieceModel &tok) {
  CheckVocabulary(ckpt, tok.size(), tok.Fingerprint());
}

struct TaskExample {
  std::vector<int32_t> ids;
  // One label for classifiers, one per position for taggers.
  std::vector<int32_t> labels;
};

// Runs the encoder and the task head on one example, accumulating scaled
// gradients when grads is set. Returns the summed loss.
double TaskLoss(const Params<float> &p, const TaskExample &ex, float scale,
                FlatVec<float> *grads, Rng *dropout, EncoderPass<float> *pass,
                std::vector<int32_t> *predictions) {
  const ParamLayout &lay = p.layout;
  const size_t n = ex.ids.size();
  const std::vector<uint8_t> segments(n, 0), attention(n, 1);
  pass->Forward(p, ex.ids, segments, attention, n, dropout);
  const MatF &hidden = pass->hidden();
  const auto w = HeadW(p);
  const auto b = HeadB(p);
  const auto h = static_cast<Eigen::Index>(lay.config().hidden);
  const auto c = static_cast<Eigen::Index>(lay.num_labels());
  RowF grad;
  double loss = 0.0;
  if (lay.head() == HeadKind::kSequenceClassifier) {
    const RowF pooled = Pool(p, hidden);
    RowF logits = pooled * w;
    logits += b;
    if (predictions) predictions->assign(1, ArgMax(logits));
    if (ex.labels.empty()) return 0.0;
    loss = CrossEntropy(logits, ex.labels[0], &grad);
    if (grads) {
      grad *= scale;
      Eigen::Map<MatF>(grads->data() + lay.head_w, h, c).noalias() +=
          pooled.transpose() * grad;
      Eigen::Map<RowF>(grads->data() + lay.head_b, c) += grad;
      const RowF d_pooled = grad * w.transpose();
      MatF d_hidden = MatF::Zero(hidden.rows(), hidden.cols());
      d_hidden.row(0) = PoolBackward(p, hidden, pooled, d_pooled, grads);
      pass->Backward(p, d_hidden, grads);
    }
    return loss;
  }
  MatF logits = hidden * w;
  logits.rowwise() += b;
  if (predictions) {
    predictions->resize(n);
    for (size_t i = 0; i < n; ++i) {
      (*predictions)[i] = ArgMax(logits.row(static_cast<Eigen::Index>(i)));
    }
  }
  if (ex.labels.empty()) return 0.0;
  MatF d_logits = MatF::Zero(logits.rows(), logits.cols());
  for (size_t i = 0; i < n; ++i) {
    if (ex.labels[i] == kIgnoreLabel) continue;
    const auto r = static_cast<Eigen::Index>(i);
    loss += CrossEntropy(logits.row(r), ex.labels[i], &grad);
    d_logits.row(r) = grad * scale;
  }
  if (grads) {
    Eigen::Map<MatF>(grads->data() + lay.head_w, h, c).noalias() +=
        hidden.transpose() * d_logits;
    Eigen::Map<RowF>(grads->data() + lay.head_b, c) += d_logits.colwise().sum();
    const MatF d_hidden = d_logits * w.transpose();
    pass->Backward(p, d_hidden, grads);
  }
  return loss;
}

size_t LossTerms(const TaskExample &ex, HeadKind head) {
  if (head == HeadKind::kSequenceClassifier) return 1;
  return static_cast<size_t>(std::count_if(
      ex.labels.begin(), ex.labels.end(),
      [](int32_t l) { return l != kIgnoreLabel; }));
}

using DevScorer = std::function<double(const Checkpoint &)>;

FinetuneResult Train(Checkpoint ckpt, const std::vector<TaskExample> &train,
                     const FinetuneConfig &config, const DevScorer &score_dev) {
  OptimizerConfig opt;
  opt.learning_rate = config.learning_rate;
  opt.batch_size = config.batch_size;
  opt.Validate();
  ckpt.optimizer = opt;
  ckpt.adam = AdamState<float>::Zeros(ckpt.params.layout.total());
  ckpt.step = 0;
  ckpt.seed = config.seed;

  FinetuneResult result;
  const HeadKind head = ckpt.head();
  std::vector<size_t> order(train.size());
  FlatVec<float> grads;
  EncoderPass<float> pass;
  for (size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), size_t{0});
    Rng shuffle(DeriveSeed(DeriveSeed(config.seed, kOrderStream), epoch));
    shuffle.Shuffle(&order);
    double epoch_loss = 0.0;
    size_t epoch_terms = 0;
    for (size_t start = 0; start < order.size(); start += config.batch_size) {
      const size_t end = std::min(order.size(), start + config.batch_size);
      size_t terms = 0;
      for (size_t i = start; i < end; ++i) terms += LossTerms(train[order[i]], head);
      grads.setZero(static_cast<Eigen::Index>(ckpt.params.layout.total()));
      const float scale = terms == 0 ? 0.0f : 1.0f / static_cast<float>(terms);
      Rng dropout(DeriveSeed(DeriveSeed(config.seed, kDropoutStream), ckpt.step));
      for (size_t i = start; i < end; ++i) {
        epoch_loss += TaskLoss(ckpt.params, train[order[i]], scale, &grads,
                               &dropout, &pass, nullptr);
      }
      epoch_terms += terms;
      ++ckpt.step;
      AdamStep(&ckpt.params.values, grads, &ckpt.adam, opt, ckpt.step,
               opt.learning_rate);
    }
    const double loss =
        epoch_terms == 0 ? 0.0 : epoch_loss / static_cast<double>(epoch_terms);
    result.epochs.push_back({epoch + 1, loss, score_dev(ckpt)});
  }
  result.checkpoint = std::move(ckpt);
  return result;
}

void RequireHead(const Checkpoint &ckpt, HeadKind head) {
  if (ckpt.head() != head) {
    throw ConfigError(std::string("checkpoint has a ") +
                      HeadKindName(ckpt.head()) + " head, expected " +
                      HeadKindName(head));
  }
}

}  // namespace

void FinetuneConfig::Validate() const {
  if (label_inventory.empty()) throw ConfigError("label inventory is empty");
  std::set<std::string> seen;
  for (const auto &l : label_inventory) {
    if (!seen.insert(l).second) {
      throw ConfigError("duplicate label in inventory: " + l);
    }
  }
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (max_len < 3) throw ConfigError("max_len must be at least 3");
  if (subword_label_mode != "first-piece") {
    throw ConfigError("unsupported subword label mode: " + subword_label_mode);
  }
}

std::vector<LabeledText> LoadClassificationData(const std::string &path) {
  LineRecordReader reader(path);
  std::vector<LabeledText> data;
  Json rec;
  while (reader.Next(&rec)) {
    const std::string where = path + ":" + std::to_string(reader.line_number());
    data.push_back({RequireString(rec, "text", where),
                    RequireString(rec, "label", where)});
  }
  return data;
}

void WriteClassificationData(const std::vector<LabeledText> &data,
                             const std::string &path) {
  LineRecordWriter out(path);
  for (const auto &item : data) {
    Json rec;
    rec["text"] = item.text;
    rec["label"] = item.label;
    out.Write(rec);
  }
  out.Close();
}

std::vector<TaggedSequence> LoadConllData(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<TaggedSequence> data;
  TaggedSequence current;
  std::string line;
  size_t line_number = 0;
  auto flush = [&]() {
    if (!current.tokens.empty()) data.push_back(std::move(current));
    current = {};
  };
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string where = path + ":" + std::to_string(line_number);
    if (const size_t bad = utf8::FindInvalid(line); bad != std::string::npos) {
      throw DataError(where + ": invalid UTF-8 at column " +
                      std::to_string(bad + 1));
    }
    if (line.find_first_not_of(" \t") == std::string::npos) {
      flush();
      continue;
    }
    const size_t tab = line.rfind('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
      throw DataError(where + ": expected token<TAB>tag");
    }
    current.tokens.push_back(line.substr(0, tab));
    current.tags.push_back(line.substr(tab + 1));
  }
  flush();
  return data;
}

void WriteConllData(const std::vector<TaggedSequence> &data,
                    const std::string &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  for (size_t s = 0; s < data.size(); ++s) {
    if (data[s].tokens.size() != data[s].tags.size()) {
      throw DataError("sequence " + std::to_string(s) +
                      " has differing token and tag counts");
    }
    if (s > 0) out << '\n';
    for (size_t i = 0; i < data[s].tokens.size(); ++i) {
      out << data[s].tokens[i] << '\t' << data[s].tags[i] << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

std::vector<std::string> InferLabelInventory(
    const std::vector<LabeledText> &data) {
  std::set<std::string> labels;
  for (const auto &item : data) labels.insert(item.label);
  return {labels.begin(), labels.end()};
}

std::vector<std::string> InferTagInventory(
    const std::vector<TaggedSequence> &data) {
  std::set<std::string> tags;
  for (const auto &seq : data) tags.insert(seq.tags.begin(), seq.tags.end());
  std::vector<std::string> out = {"O"};
  for (const auto &t : tags) {
    if (t != "O") out.push_back(t);
  }
  return out;
}

void ValidateTaggedData(const std::vector<TaggedSequence> &data,
                        const std::vector<std::string> &inventory) {
  const std::set<std::string> known(inventory.begin(), inventory.end());
  for (size_t s = 0; s < data.size(); ++s) {
    const TaggedSequence &seq = data[s];
    if (seq.tokens.size() != seq.tags.size()) {
      throw DataError("sequence " + std::to_string(s) + " has " +
                      std::to_string(seq.tokens.size()) + " tokens but " +
                      std::to_string(seq.tags.size()) + " tags");
    }
    for (size_t i = 0; i < seq.tags.size(); ++i) {
      const std::string where =
          "sequence " + std::to_string(s) + ", position " + std::to_string(i);
      try {
        ParseIobTag(seq.tags[i]);
      } catch (const DataError &e) {
        throw DataError(where + ": " + e.what());
      }
      if (!known.count(seq.tags[i])) {
        throw DataError(where + ": tag '" + seq.tags[i] +
                        "' is not in the label inventory");
      }
    }
  }
}

WordAlignment AlignWords(const WordPieceModel &tokenizer,
                         const std::vector<std::string> &words,
                         size_t max_len) {
  if (max_len < 2) throw ConfigError("max_len must be at least 2");
  WordAlignment a;
  a.ids.push_back(tokenizer.cls_id());
  for (const auto &word : words) {
    std::vector<int32_t> pieces = tokenizer.Encode(word);
    if (pieces.empty()) pieces.push_back(tokenizer.unk_id());
    if (a.ids.size() + 1 > max_len - 1) {
      a.first_piece.push_back(-1);
      continue;
    }
    a.first_piece.push_back(static_cast<int32_t>(a.ids.size()));
    const size_t room = max_len - 1 - a.ids.size();
    a.ids.insert(a.ids.end(), pieces.begin(),
                 pieces.begin() + static_cast<std::ptrdiff_t>(
                                      std::min(room, pieces.size())));
  }
  a.ids.push_back(tokenizer.sep_id());
  return a;
}

std::vector<int32_t> AlignLabels(const WordAlignment &alignment,
                                 const std::vector<int32_t> &word_labels) {
  if (word_labels.size() != alignment.first_piece.size()) {
    throw DataError("label count does not match word count");
  }
  std::vector<int32_t> labels(alignment.ids.size(), kIgnoreLabel);
  for (size_t w = 0; w < word_labels.size(); ++w) {
    const int32_t pos = alignment.first_piece[w];
    if (pos >= 0) labels[static_cast<size_t>(pos)] = word_labels[w];
  }
  return labels;
}

Checkpoint AttachHead(const Checkpoint &base, HeadKind head,
                      const std::vector<std::string> &labels, uint64_t seed) {
  if (head == HeadKind::kPretraining) {
    throw ConfigError("a task head is required");
  }
  Checkpoint task;
  task.params = InitParams<float>(base.config(), DeriveSeed(seed, kHeadStream),
                                  head, labels.size());
  for (const auto &t : task.params.layout.tensors()) {
    if (base.params.layout.Has(t.name)) {
      task.params.View(t) = base.params.View(t.name);
    }
  }
  task.labels = labels;
  task.seed = seed;
  task.vocab_fingerprint = base.vocab_fingerprint;
  task.adam = AdamState<float>::Zeros(task.params.layout.total());
  return task;
}

FinetuneResult FinetuneSequence(const Checkpoint &base,
                                const WordPieceModel &tokenizer,
                                const std::vector<LabeledText> &train,
                                const std::vector<LabeledText> &dev,
                                const FinetuneConfig &config) {
  config.Validate();
  CheckTokenizer(base, tokenizer);
  if (train.empty()) throw DataError("training set is empty");
  const auto index = IndexLabels(config.label_inventory);
  auto encode = [&](const std::vector<LabeledText> &data, const char *name) {
    std::vector<TaskExample> out;
    for (size_t i = 0; i < data.size(); ++i) {
      auto it = index.find(data[i].label);
      if (it == index.end()) {
        throw DataError(std::string(name) + " item " + std::to_string(i) +
                        ": label '" + data[i].label +
                        "' is not in the label inventory");
      }
      out.push_back({EncodeText(tokenizer, data[i].text, config.max_len),
                     {it->second}});
    }
    return out;
  };
  const auto train_ex = encode(train, "train");
  encode(dev, "dev");
  std::vector<std::string> dev_texts, dev_gold;
  for (const auto &d : dev) {
    dev_texts.push_back(d.text);
    dev_gold.push_back(d.label);
  }
  const Checkpoint start = AttachHead(base, HeadKind::kSequenceClassifier,
                                      config.label_inventory, config.seed);
  return Train(start, train_ex, config, [&](const Checkpoint &ckpt) {
    if (dev.empty()) return 0.0;
    return Accuracy(dev_gold,
                    PredictLabels(ckpt, tokenizer, dev_texts, config.max_len));
  });
}

FinetuneResult FinetuneTokens(const Checkpoint &base,
                              const WordPieceModel &tokenizer,
                              const std::vector<TaggedSequence> &train,
                              const std::vector<TaggedSequence> &dev,
                              const FinetuneConfig &config) {
  config.Validate();
  CheckTokenizer(base, tokenizer);
  if (train.empty()) throw DataError("training set is empty");
  ValidateTaggedData(train, config.label_inventory);
  ValidateTaggedData(dev, config.label_inventory);
  const auto index = IndexLabels(config.label_inventory);
  std::vector<TaskExample> train_ex;
  for (const auto &seq : train) {
    const WordAlignment a = AlignWords(tokenizer, seq.tokens, config.max_len);
    std::vector<int32_t> word_labels;
    for (const auto &tag : seq.tags) word_labels.push_back(index.at(tag));
    train_ex.push_back({a.ids, AlignLabels(a, word_labels)});
  }
  std::vector<std::vector<std::string>> dev_words, dev_gold;
  for (const auto &seq : dev) {
    dev_words.push_back(seq.tokens);
    dev_gold.push_back(seq.tags);
  }
  const Checkpoint start = AttachHead(base, HeadKind::kTokenTagger,
                                      config.label_inventory, config.seed);
  return Train(start, train_ex, config, [&](const Checkpoint &ckpt) {
    return EntityF1(dev_gold,
                    PredictTags(ckpt, tokenizer, dev_words, config.max_len))
        .overall.f1;
  });
}

std::vector<std::string> PredictLabels(const Checkpoint &classifier,
                                       const WordPieceModel &tokenizer,
                                       const std::vector<std::string> &texts,
                                       size_t max_len) {
  RequireHead(classifier, HeadKind::kSequenceClassifier);
  CheckTokenizer(classifier, tokenizer);
  std::vector<std::string> out;
  EncoderPass<float> pass;
  std::vector<int32_t> pred;
  for (const auto &text : texts) {
    const TaskExample ex{EncodeText(tokenizer, text, max_len), {}};
    TaskLoss(classifier.params, ex, 0.0f, nullptr, nullptr, &pass, &pred);
    out.push_back(classifier.labels.at(static_cast<size_t>(pred[0])));
  }
  return out;
}

std::vector<std::vector<std::string>> PredictTags(
    const Checkpoint &tagger, const WordPieceModel &tokenizer,
    const std::vector<std::vector<std::string>> &sentences, size_t max_len) {
  RequireHead(tagger, HeadKind::kTokenTagger);
  CheckTokenizer(tagger, tokenizer);
  std::vector<std::vector<std::string>> out;
  EncoderPass<float> pass;
  std::vector<int32_t> pred;
  for (const auto &words : sentences) {
    const WordAlignment a = AlignWords(tokenizer, words, max_len);
    TaskLoss(tagger.params, {a.ids, {}}, 0.0f, nullptr, nullptr, &pass, &pred);
    std::vector<std::string> tags;
    for (int32_t pos : a.first_piece) {
      tags.push_back(pos < 0 ? "O"
                             : tagger.labels.at(static_cast<size_t>(
                                   pred[static_cast<size_t>(pos)])));
    }
    out.push_back(std::move(tags));
  }
  return out;
}

}  // namespace persianlm
