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

#ifndef PERSIANLM_WORDPIECE_H_
#define PERSIANLM_WORDPIECE_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace persianlm {

struct TokenizerTrainConfig {
  size_t vocab_size = 100000;
  uint64_t min_frequency = 3;
  size_t alphabet_limit = 1500;
  std::vector<std::string> special_tokens = {"[PAD]", "[UNK]", "[CLS]",
                                             "[SEP]", "[MASK]"};
  std::string continuation_prefix = "##";
  size_t max_word_chars = 100;

  void Validate() const;
};

// Whitespace split with every punctuation character isolated as its own word.
// ZWNJ stays inside words.
std::vector<std::u32string> PreTokenize(std::string_view text);

class WordPieceModel {
 public:
  // Validates that the special tokens lead the vocabulary in config order.
  WordPieceModel(std::vector<std::string> vocab, TokenizerTrainConfig config);

  static WordPieceModel Load(const std::string &path,
                             TokenizerTrainConfig config = {});
  void Save(const std::string &path) const;
  // Newline-terminated tokens, line number = id.
  std::string Serialize() const;

  size_t size() const { return vocab_.size(); }
  const std::vector<std::string> &vocab() const { return vocab_; }
  const TokenizerTrainConfig &config() const { return config_; }
  std::optional<int32_t> IdOf(std::string_view piece) const;
  const std::string &Piece(int32_t id) const;

  bool IsSpecial(int32_t id) const {
    return id >= 0 && static_cast<size_t>(id) < config_.special_tokens.size();
  }
  int32_t SpecialId(std::string_view token) const;
  int32_t pad_id() const { return pad_id_; }
  int32_t unk_id() const { return unk_id_; }
  int32_t cls_id() const { return cls_id_; }
  int32_t sep_id() const { return sep_id_; }
  int32_t mask_id() const { return mask_id_; }

  std::vector<int32_t> Encode(std::string_view text) const;
  // Greedy longest-match-first over one pre-tokenized word.
  std::vector<int32_t> EncodeWord(std::u32string_view word) const;
  std::vector<std::string> EncodeToPieces(std::string_view text) const;

  // Throws DataError naming the first id outside the vocabulary.
  std::string Decode(std::span<const int32_t> ids) const;

  // CRC-32 of the serialized vocabulary. Checkpoints record it so a model is
  // never paired with a different tokenizer.
  uint32_t Fingerprint() const;

 private:
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, int32_t> ids_;
  TokenizerTrainConfig config_;
  int32_t pad_id_ = -1, unk_id_ = -1, cls_id_ = -1, sep_id_ = -1,
          mask_id_ = -1;
};

// Accumulates word counts from a sentence stream, then runs the merges.
class WordPieceTrainer {
 public:
  explicit WordPieceTrainer(TokenizerTrainConfig config);

  void AddSentence(std::string_view sentence);
  // Throws ConfigError for an empty corpus or a vocab_size below the
  // special tokens plus the base character pieces.
  WordPieceModel Train() const;

 private:
  TokenizerTrainConfig config_;
  std::map<std::u32string, uint64_t> word_counts_;
};

WordPieceModel TrainWordPiece(const std::vector<std::string> &sentences,
                              const TokenizerTrainConfig &config);

}  // namespace persianlm

#endif  // PERSIANLM_WORDPIECE_H_
