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

#include "persianlm/wordpiece.h"

#include <zlib.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "persianlm/errors.h"
#include "persianlm/utf8.h"

namespace persianlm {

void TokenizerTrainConfig::Validate() const {
  std::set<std::string> seen(special_tokens.begin(), special_tokens.end());
  if (seen.size() != special_tokens.size()) {
    throw ConfigError("special tokens must be pairwise distinct");
  }
  if (vocab_size < special_tokens.size() + 1) {
    throw ConfigError("vocab_size must exceed the number of special tokens");
  }
  if (alphabet_limit == 0) throw ConfigError("alphabet_limit must be positive");
  if (continuation_prefix.empty()) {
    throw ConfigError("continuation_prefix must not be empty");
  }
  if (max_word_chars == 0) throw ConfigError("max_word_chars must be positive");
}

std::vector<std::u32string> PreTokenize(std::string_view text) {
  std::vector<std::u32string> words;
  std::u32string current;
  auto flush = [&] {
    if (!current.empty()) words.push_back(std::move(current));
    current.clear();
  };
  for (char32_t cp : utf8::Decode(text)) {
    if (utf8::IsWhitespace(cp)) {
      flush();
    } else if (utf8::IsPunctuation(cp)) {
      flush();
      words.emplace_back(1, cp);
    } else {
      current.push_back(cp);
    }
  }
  flush();
  return words;
}

WordPieceModel::WordPieceModel(std::vector<std::string> vocab,
                               TokenizerTrainConfig config)
    : vocab_(std::move(vocab)), config_(std::move(config)) {
  config_.Validate();
  if (vocab_.size() > config_.vocab_size) {
    throw DataError("vocabulary has " + std::to_string(vocab_.size()) +
                    " tokens, above vocab_size " +
                    std::to_string(config_.vocab_size));
  }
  for (size_t i = 0; i < config_.special_tokens.size(); ++i) {
    if (i >= vocab_.size() || vocab_[i] != config_.special_tokens[i]) {
      throw DataError("special token " + config_.special_tokens[i] +
                      " must have id " + std::to_string(i));
    }
  }
  ids_.reserve(vocab_.size());
  for (size_t i = 0; i < vocab_.size(); ++i) {
    const std::string &piece = vocab_[i];
    if (piece.empty() || piece.find_first_of(" \t\r\n") != std::string::npos) {
      throw DataError("vocabulary entry " + std::to_string(i) + " is invalid");
    }
    if (!ids_.emplace(piece, static_cast<int32_t>(i)).second) {
      throw DataError("duplicate vocabulary entry \"" + piece + "\"");
    }
  }
  auto find = [this](const char *name) {
    auto it = ids_.find(name);
    return it == ids_.end() ? -1 : it->second;
  };
  pad_id_ = find("[PAD]");
  unk_id_ = find("[UNK]");
  cls_id_ = find("[CLS]");
  sep_id_ = find("[SEP]");
  mask_id_ = find("[MASK]");
  if (pad_id_ != 0) throw DataError("[PAD] must have id 0");
  if (unk_id_ < 0 || cls_id_ < 0 || sep_id_ < 0 || mask_id_ < 0) {
    throw DataError("vocabulary lacks a required BERT special token");
  }
}

WordPieceModel WordPieceModel::Load(const std::string &path,
                                    TokenizerTrainConfig config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::string> vocab;
  std::string line;
  while (std::getline(in, line)) {
    if (utf8::FindInvalid(line) != std::string::npos) {
      throw DataError(path + ": invalid UTF-8 at line " +
                      std::to_string(vocab.size() + 1));
    }
    vocab.push_back(line);
  }
  if (config.vocab_size < vocab.size()) config.vocab_size = vocab.size();
  return WordPieceModel(std::move(vocab), std::move(config));
}

std::string WordPieceModel::Serialize() const {
  std::string out;
  for (const auto &piece : vocab_) {
    out += piece;
    out += '\n';
  }
  return out;
}

void WordPieceModel::Save(const std::string &path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << Serialize();
  if (!out) throw IoError("write failure on " + path);
}

uint32_t WordPieceModel::Fingerprint() const {
  const std::string bytes = Serialize();
  return static_cast<uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef *>(bytes.data()),
            static_cast<uInt>(bytes.size())));
}

std::optional<int32_t> WordPieceModel::IdOf(std::string_view piece) const {
  auto it = ids_.find(std::string(piece));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

const std::string &WordPieceModel::Piece(int32_t id) const {
  if (id < 0 || static_cast<size_t>(id) >= vocab_.size()) {
    throw DataError("token id " + std::to_string(id) + " out of range");
  }
  return vocab_[id];
}

int32_t WordPieceModel::SpecialId(std::string_view token) const {
  for (size_t i = 0; i < config_.special_tokens.size(); ++i) {
    if (config_.special_tokens[i] == token) return static_cast<int32_t>(i);
  }
  throw DataError("unknown special token " + std::string(token));
}

std::vector<int32_t> WordPieceModel::EncodeWord(
    std::u32string_view word) const {
  if (word.empty()) return {};
  if (word.size() > config_.max_word_chars) return {unk_id_};
  std::vector<int32_t> pieces;
  std::string candidate;
  size_t start = 0;
  while (start < word.size()) {
    int32_t found = -1;
    size_t end = word.size();
    for (; end > start; --end) {
      candidate.clear();
      if (start > 0) candidate = config_.continuation_prefix;
      for (size_t i = start; i < end; ++i) utf8::Append(word[i], &candidate);
      auto it = ids_.find(candidate);
      if (it != ids_.end() && !IsSpecial(it->second)) {
        found = it->second;
        break;
      }
    }
    if (found < 0) return {unk_id_};
    pieces.push_back(found);
    start = end;
  }
  return pieces;
}

std::vector<int32_t> WordPieceModel::Encode(std::string_view text) const {
  std::vector<int32_t> ids;
  for (const auto &word : PreTokenize(text)) {
    for (int32_t id : EncodeWord(word)) ids.push_back(id);
  }
  return ids;
}

std::vector<std::string> WordPieceModel::EncodeToPieces(
    std::string_view text) const {
  std::vector<std::string> out;
  for (int32_t id : Encode(text)) out.push_back(vocab_[id]);
  return out;
}

std::string WordPieceModel::Decode(std::span<const int32_t> ids) const {
  std::string out;
  const std::string &prefix = config_.continuation_prefix;
  for (int32_t id : ids) {
    if (id < 0 || static_cast<size_t>(id) >= vocab_.size()) {
      throw DataError("token id " + std::to_string(id) + " out of range");
    }
    const std::string &piece = vocab_[id];
    if (IsSpecial(id)) {
      if (id != unk_id_) continue;
      if (!out.empty()) out += ' ';
      out += piece;
      continue;
    }
    if (piece.compare(0, prefix.size(), prefix) == 0 &&
        piece.size() > prefix.size()) {
      out.append(piece, prefix.size());
    } else {
      if (!out.empty()) out += ' ';
      out += piece;
    }
  }
  return out;
}

namespace {

using Symbol = int32_t;

struct PairHash {
  size_t operator()(const std::pair<Symbol, Symbol> &p) const {
    return std::hash<uint64_t>()((static_cast<uint64_t>(p.first) << 32) ^
                                 static_cast<uint32_t>(p.second));
  }
};

struct Word {
  std::vector<Symbol> symbols;
  uint64_t count;
};

// Merge state for one training run. Pair counts are maintained
// incrementally; the best pair is found by a full scan since every merge
// changes the unigram counts in the score's denominator.
class MergeState {
 public:
  MergeState(const TokenizerTrainConfig &config) : config_(config) {}

  Symbol Intern(const std::string &piece) {
    auto [it, inserted] =
        symbol_ids_.emplace(piece, static_cast<Symbol>(symbols_.size()));
    if (inserted) {
      symbols_.push_back(piece);
      surface_.push_back(StripPrefix(piece));
      symbol_freq_.push_back(0);
    }
    return it->second;
  }

  void AddWord(std::vector<Symbol> symbols, uint64_t count) {
    for (Symbol s : symbols) symbol_freq_[s] += count;
    words_.push_back({std::move(symbols), count});
    const size_t w = words_.size() - 1;
    AddPairs(w);
  }

  // Returns false when no pair reaches min_frequency.
  bool BestPair(std::pair<Symbol, Symbol> *best) const {
    bool have = false;
    uint64_t best_freq = 0;
    unsigned __int128 best_denominator = 1;
    std::string best_surface, best_full;
    for (const auto &[pair, freq] : pair_freq_) {
      if (freq < config_.min_frequency) continue;
      const unsigned __int128 denominator =
          static_cast<unsigned __int128>(symbol_freq_[pair.first]) *
          symbol_freq_[pair.second];
      if (have) {
        // Compare freq/denominator without rounding.
        const unsigned __int128 lhs =
            static_cast<unsigned __int128>(freq) * best_denominator;
        const unsigned __int128 rhs =
            static_cast<unsigned __int128>(best_freq) * denominator;
        if (lhs < rhs) continue;
        if (lhs == rhs) {
          if (freq < best_freq) continue;
          if (freq == best_freq) {
            const std::string surface =
                surface_[pair.first] + surface_[pair.second];
            if (surface > best_surface) continue;
            const std::string full = MergedPiece(pair);
            if (surface == best_surface) {
              if (full > best_full) continue;
              if (full == best_full && pair > *best) continue;
            }
          }
        }
      }
      have = true;
      *best = pair;
      best_freq = freq;
      best_denominator = denominator;
      best_surface = surface_[pair.first] + surface_[pair.second];
      best_full = MergedPiece(pair);
    }
    return have;
  }

  std::string MergedPiece(const std::pair<Symbol, Symbol> &pair) const {
    return symbols_[pair.first] + surface_[pair.second];
  }

  // Rewrites every word holding `pair` and returns the merged symbol.
  Symbol Apply(const std::pair<Symbol, Symbol> &pair) {
    const Symbol merged = Intern(MergedPiece(pair));
    auto it = pair_words_.find(pair);
    std::vector<size_t> affected(it->second.begin(), it->second.end());
    std::sort(affected.begin(), affected.end());
    for (size_t w : affected) {
      RemovePairs(w);
      Word &word = words_[w];
      std::vector<Symbol> out;
      out.reserve(word.symbols.size());
      for (size_t i = 0; i < word.symbols.size(); ++i) {
        if (i + 1 < word.symbols.size() && word.symbols[i] == pair.first &&
            word.symbols[i + 1] == pair.second) {
          out.push_back(merged);
          symbol_freq_[pair.first] -= word.count;
          symbol_freq_[pair.second] -= word.count;
          symbol_freq_[merged] += word.count;
          ++i;
        } else {
          out.push_back(word.symbols[i]);
        }
      }
      word.symbols = std::move(out);
      AddPairs(w);
    }
    pair_words_.erase(pair);
    return merged;
  }

  const std::string &piece(Symbol s) const { return symbols_[s]; }

 private:
  std::string StripPrefix(const std::string &piece) const {
    const std::string &p = config_.continuation_prefix;
    if (piece.size() > p.size() && piece.compare(0, p.size(), p) == 0) {
      return piece.substr(p.size());
    }
    return piece;
  }

  void AddPairs(size_t w) {
    const Word &word = words_[w];
    for (size_t i = 0; i + 1 < word.symbols.size(); ++i) {
      const auto pair = std::make_pair(word.symbols[i], word.symbols[i + 1]);
      pair_freq_[pair] += word.count;
      pair_words_[pair].insert(w);
    }
  }

  void RemovePairs(size_t w) {
    const Word &word = words_[w];
    for (size_t i = 0; i + 1 < word.symbols.size(); ++i) {
      const auto pair = std::make_pair(word.symbols[i], word.symbols[i + 1]);
      auto it = pair_freq_.find(pair);
      it->second -= word.count;
      if (it->second == 0) pair_freq_.erase(it);
    }
  }

  const TokenizerTrainConfig &config_;
  std::vector<std::string> symbols_;
  std::vector<std::string> surface_;
  std::unordered_map<std::string, Symbol> symbol_ids_;
  std::vector<uint64_t> symbol_freq_;
  std::vector<Word> words_;
  std::unordered_map<std::pair<Symbol, Symbol>, uint64_t, PairHash> pair_freq_;
  std::unordered_map<std::pair<Symbol, Symbol>, std::set<size_t>, PairHash>
      pair_words_;
};

}  // namespace

WordPieceTrainer::WordPieceTrainer(TokenizerTrainConfig config)
    : config_(std::move(config)) {
  config_.Validate();
}

void WordPieceTrainer::AddSentence(std::string_view sentence) {
  for (auto &word : PreTokenize(sentence)) ++word_counts_[std::move(word)];
}

WordPieceModel WordPieceTrainer::Train() const {
  if (word_counts_.empty()) throw ConfigError("empty training corpus");

  // Alphabet: most frequent characters, ties by codepoint.
  std::map<char32_t, uint64_t> char_freq;
  for (const auto &[word, count] : word_counts_) {
    for (char32_t cp : word) char_freq[cp] += count;
  }
  std::vector<std::pair<char32_t, uint64_t>> ranked(char_freq.begin(),
                                                   char_freq.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto &a, const auto &b) { return a.second > b.second; });
  if (ranked.size() > config_.alphabet_limit) {
    ranked.resize(config_.alphabet_limit);
  }
  std::map<char32_t, size_t> rank;
  for (size_t i = 0; i < ranked.size(); ++i) rank[ranked[i].first] = i;

  // Base pieces in alphabet order: initial form, then continuation form.
  std::vector<bool> initial(ranked.size()), inner(ranked.size());
  for (const auto &[word, count] : word_counts_) {
    if (word.size() > config_.max_word_chars) continue;
    bool ok = true;
    for (char32_t cp : word) ok = ok && rank.count(cp);
    if (!ok) continue;
    initial[rank[word[0]]] = true;
    for (size_t i = 1; i < word.size(); ++i) inner[rank[word[i]]] = true;
  }
  MergeState state(config_);
  std::vector<std::string> vocab = config_.special_tokens;
  for (const auto &special : config_.special_tokens) state.Intern(special);
  for (size_t i = 0; i < ranked.size(); ++i) {
    std::string c;
    utf8::Append(ranked[i].first, &c);
    if (initial[i]) {
      state.Intern(c);
      vocab.push_back(c);
    }
    if (inner[i]) {
      state.Intern(config_.continuation_prefix + c);
      vocab.push_back(config_.continuation_prefix + c);
    }
  }
  if (vocab.size() > config_.vocab_size) {
    throw ConfigError("vocab_size " + std::to_string(config_.vocab_size) +
                      " is " + std::to_string(vocab.size() - config_.vocab_size) +
                      " short of the special tokens plus " +
                      std::to_string(vocab.size() - config_.special_tokens.size()) +
                      " base character pieces");
  }

  for (const auto &[word, count] : word_counts_) {
    if (word.size() > config_.max_word_chars) continue;
    std::vector<Symbol> symbols;
    bool ok = true;
    for (size_t i = 0; i < word.size() && ok; ++i) {
      if (!rank.count(word[i])) {
        ok = false;
        break;
      }
      std::string c = i == 0 ? "" : config_.continuation_prefix;
      utf8::Append(word[i], &c);
      symbols.push_back(state.Intern(c));
    }
    if (ok) state.AddWord(std::move(symbols), count);
  }

  std::set<std::string> in_vocab(vocab.begin(), vocab.end());
  std::pair<Symbol, Symbol> best;
  while (vocab.size() < config_.vocab_size && state.BestPair(&best)) {
    const Symbol merged = state.Apply(best);
    const std::string &piece = state.piece(merged);
    if (in_vocab.insert(piece).second) vocab.push_back(piece);
  }
  return WordPieceModel(std::move(vocab), config_);
}

WordPieceModel TrainWordPiece(const std::vector<std::string> &sentences,
                              const TokenizerTrainConfig &config) {
  WordPieceTrainer trainer(config);
  for (const auto &s : sentences) trainer.AddSentence(s);
  return trainer.Train();
}

}  // namespace persianlm
