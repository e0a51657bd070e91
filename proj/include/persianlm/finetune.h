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

#ifndef PERSIANLM_FINETUNE_H_
#define PERSIANLM_FINETUNE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "persianlm/checkpoint.h"
#include "persianlm/wordpiece.h"

namespace persianlm {

struct LabeledText {
  std::string text;
  std::string label;

  bool operator==(const LabeledText &) const = default;
};

struct TaggedSequence {
  std::vector<std::string> tokens;
  std::vector<std::string> tags;  // IOB, one per token

  bool operator==(const TaggedSequence &) const = default;
};

struct FinetuneConfig {
  size_t epochs = 10;
  double learning_rate = 5e-4;
  size_t batch_size = 16;
  uint64_t seed = 0;
  std::vector<std::string> label_inventory;
  // Longest input sequence including [CLS] and [SEP].
  size_t max_len = 128;
  // Only "first-piece" is supported.
  std::string subword_label_mode = "first-piece";

  void Validate() const;
};

// {text, label} line records.
std::vector<LabeledText> LoadClassificationData(const std::string &path);
void WriteClassificationData(const std::vector<LabeledText> &data,
                             const std::string &path);

// "token<TAB>tag" lines, a blank line between sequences.
std::vector<TaggedSequence> LoadConllData(const std::string &path);
void WriteConllData(const std::vector<TaggedSequence> &data,
                    const std::string &path);

// Sorted distinct labels; for tag data "O" comes first.
std::vector<std::string> InferLabelInventory(
    const std::vector<LabeledText> &data);
std::vector<std::string> InferTagInventory(
    const std::vector<TaggedSequence> &data);

// Throws DataError naming the sequence and position of the first tag that is
// not valid IOB or not in the inventory.
void ValidateTaggedData(const std::vector<TaggedSequence> &data,
                        const std::vector<std::string> &inventory);

// Piece ids for [CLS] words [SEP]. first_piece[w] is the position of word w's
// first piece, or -1 when truncation dropped it.
struct WordAlignment {
  std::vector<int32_t> ids;
  std::vector<int32_t> first_piece;
};

WordAlignment AlignWords(const WordPieceModel &tokenizer,
                         const std::vector<std::string> &words,
                         size_t max_len);

// Per-position labels under the first-piece rule: the label of a word on its
// first piece, kIgnoreLabel everywhere else.
std::vector<int32_t> AlignLabels(const WordAlignment &alignment,
                                 const std::vector<int32_t> &word_labels);

struct EpochReport {
  size_t epoch;  // 1-based
  double train_loss;
  // Accuracy for classifiers, micro entity F1 for taggers.
  double dev_score;
};

struct FinetuneResult {
  Checkpoint checkpoint;
  std::vector<EpochReport> epochs;
};

// Task model sharing the encoder and pooler of `base` with a freshly
// initialized head. Every weight is trained.
Checkpoint AttachHead(const Checkpoint &base, HeadKind head,
                      const std::vector<std::string> &labels, uint64_t seed);

FinetuneResult FinetuneSequence(const Checkpoint &base,
                                const WordPieceModel &tokenizer,
                                const std::vector<LabeledText> &train,
                                const std::vector<LabeledText> &dev,
                                const FinetuneConfig &config);

FinetuneResult FinetuneTokens(const Checkpoint &base,
                              const WordPieceModel &tokenizer,
                              const std::vector<TaggedSequence> &train,
                              const std::vector<TaggedSequence> &dev,
                              const FinetuneConfig &config);

std::vector<std::string> PredictLabels(const Checkpoint &classifier,
                                       const WordPieceModel &tokenizer,
                                       const std::vector<std::string> &texts,
                                       size_t max_len = 128);

// One tag per input word. Words cut off by max_len are tagged "O".
std::vector<std::vector<std::string>> PredictTags(
    const Checkpoint &tagger, const WordPieceModel &tokenizer,
    const std::vector<std::vector<std::string>> &sentences,
    size_t max_len = 128);

}  // namespace persianlm

#endif  // PERSIANLM_FINETUNE_H_
