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

#ifndef PERSIANLM_PRETRAIN_DATA_H_
#define PERSIANLM_PRETRAIN_DATA_H_

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "persianlm/random.h"
#include "persianlm/wordpiece.h"

namespace persianlm {

constexpr int32_t kIgnoreLabel = -1;

enum class NspLabel : uint8_t { kIsNext = 0, kNotNext = 1 };

struct MaskingPolicy {
  double select_fraction = 0.15;
  double mask_prob = 0.80;
  double random_prob = 0.10;
  double keep_prob = 0.10;

  void Validate() const;
};

struct PackingConfig {
  size_t max_len = 512;
  uint64_t rng_seed = 0;

  void Validate() const;
};

// One packed [CLS] A [SEP] B [SEP] sequence, padded to max_len.
struct PretrainExample {
  std::vector<int32_t> input_ids;
  std::vector<uint8_t> segment_ids;
  std::vector<uint8_t> attention_mask;
  std::vector<int32_t> mlm_labels;
  NspLabel nsp_label = NspLabel::kIsNext;

  size_t max_len() const { return input_ids.size(); }
  // Number of non-padding positions.
  size_t length() const;

  bool operator==(const PretrainExample &) const = default;
};

struct SentencePair {
  std::string first;
  std::string second;
  NspLabel label;

  bool operator==(const SentencePair &) const = default;
};

struct NspOptions {
  uint64_t seed = 0;
  // 0 and 1 force all-negative or all-positive pairs.
  double is_next_probability = 0.5;
};

// One pair per adjacent sentence pair of every document. Randomness for pair
// k comes from DeriveSeed(seed, k), so the result depends only on the corpus
// and the seed.
std::vector<SentencePair> BuildNspPairs(
    const std::vector<std::vector<std::string>> &documents,
    const NspOptions &options);

// Token layout of the vocabulary that masking and packing need.
struct VocabInfo {
  size_t vocab_size;
  size_t num_special;  // specials occupy ids [0, num_special)
  int32_t pad_id;
  int32_t cls_id;
  int32_t sep_id;
  int32_t mask_id;

  static VocabInfo From(const WordPieceModel &model);
};

// [CLS] A [SEP] B [SEP], longest-first truncation, [PAD] to max_len.
PretrainExample AssembleIds(std::vector<int32_t> first,
                            std::vector<int32_t> second, NspLabel label,
                            const VocabInfo &vocab, size_t max_len);
PretrainExample AssembleInput(const SentencePair &pair,
                              const WordPieceModel &tokenizer,
                              const PackingConfig &packing);

// round(select_fraction * candidates), half up, at least 1 when any
// candidate exists.
size_t MaskCount(size_t candidates, double select_fraction);

void ApplyMlmMask(PretrainExample *example, const MaskingPolicy &policy,
                  const VocabInfo &vocab, Rng *rng);

// NSP pairs, packing and masking for a whole segmented corpus. Masking for
// example k draws from DeriveSeed(DeriveSeed(rng_seed, 1), k).
std::vector<PretrainExample> BuildPretrainExamples(
    const std::vector<std::vector<std::string>> &documents,
    const WordPieceModel &tokenizer, const PackingConfig &packing,
    const MaskingPolicy &policy, double is_next_probability = 0.5);

struct ExampleFileHeader {
  uint32_t version = 1;
  uint32_t max_len = 0;
  uint32_t vocab_size = 0;
};

// Binary example file: a 16-byte header {magic "PLMX", version, max_len,
// vocab_size} then records of {u32 payload size, payload, u32 CRC-32}.
class ExampleWriter {
 public:
  ExampleWriter(const std::string &path, const ExampleFileHeader &header);
  void Write(const PretrainExample &example);
  void Close();

 private:
  std::string path_;
  std::ofstream out_;
  ExampleFileHeader header_;
};

class ExampleReader {
 public:
  explicit ExampleReader(const std::string &path);
  const ExampleFileHeader &header() const { return header_; }
  // Returns false at a clean end of file; throws DataError naming the record
  // index on truncation or corruption.
  bool Next(PretrainExample *example);

 private:
  std::string path_;
  std::ifstream in_;
  ExampleFileHeader header_;
  size_t index_ = 0;
};

void WriteExamples(const std::vector<PretrainExample> &examples,
                   const ExampleFileHeader &header, const std::string &path);
std::vector<PretrainExample> ReadExamples(const std::string &path,
                                          ExampleFileHeader *header = nullptr);

// Debug dump: one line record per example.
void DumpExamples(const std::vector<PretrainExample> &examples,
                  const std::string &path);

}  // namespace persianlm

#endif  // PERSIANLM_PRETRAIN_DATA_H_
