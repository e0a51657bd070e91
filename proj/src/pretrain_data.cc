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

#include "persianlm/pretrain_data.h"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "binary_io.h"
#include "persianlm/errors.h"
#include "persianlm/jsonl.h"

namespace persianlm {
namespace {

constexpr char kExampleMagic[4] = {'P', 'L', 'M', 'X'};
constexpr uint32_t kExampleVersion = 1;

uint32_t Crc(const std::string &bytes) {
  return static_cast<uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef *>(bytes.data()),
            static_cast<uInt>(bytes.size())));
}

}  // namespace

void MaskingPolicy::Validate() const {
  if (!(select_fraction > 0.0 && select_fraction < 1.0)) {
    throw ConfigError("select_fraction must lie in (0, 1)");
  }
  if (mask_prob < 0 || random_prob < 0 || keep_prob < 0 ||
      std::abs(mask_prob + random_prob + keep_prob - 1.0) > 1e-12) {
    throw ConfigError("mask/random/keep probabilities must sum to 1");
  }
}

void PackingConfig::Validate() const {
  if (max_len < 8) throw ConfigError("max_len must be at least 8");
}

size_t PretrainExample::length() const {
  return static_cast<size_t>(
      std::count(attention_mask.begin(), attention_mask.end(), 1));
}

std::vector<SentencePair> BuildNspPairs(
    const std::vector<std::vector<std::string>> &documents,
    const NspOptions &options) {
  size_t total = 0;
  std::vector<size_t> doc_start;
  std::vector<const std::string *> flat;
  for (const auto &doc : documents) {
    doc_start.push_back(total);
    total += doc.size();
    for (const auto &s : doc) flat.push_back(&s);
  }
  if (total < 2) throw DataError("insufficient sentences for NSP");

  std::vector<SentencePair> pairs;
  uint64_t pair_index = 0;
  for (size_t d = 0; d < documents.size(); ++d) {
    const auto &doc = documents[d];
    for (size_t i = 0; i + 1 < doc.size(); ++i, ++pair_index) {
      Rng rng(DeriveSeed(options.seed, pair_index));
      const std::string &next = doc[i + 1];
      if (rng.Uniform() < options.is_next_probability) {
        pairs.push_back({doc[i], next, NspLabel::kIsNext});
        continue;
      }
      // Prefer a sentence from another document; fall back to this one
      // without its true successor.
      const size_t others = total - doc.size();
      const std::string *pick = nullptr;
      for (int attempt = 0; attempt < 64 && pick == nullptr; ++attempt) {
        size_t idx;
        if (others > 0) {
          idx = rng.Below(others);
          if (idx >= doc_start[d]) idx += doc.size();
        } else {
          idx = rng.Below(total - 1);
          if (idx >= doc_start[d] + i + 1) ++idx;
        }
        if (*flat[idx] != next) pick = flat[idx];
      }
      if (pick == nullptr) {
        throw DataError("cannot sample a negative sentence distinct from the "
                        "true next sentence");
      }
      pairs.push_back({doc[i], *pick, NspLabel::kNotNext});
    }
  }
  return pairs;
}

VocabInfo VocabInfo::From(const WordPieceModel &model) {
  return VocabInfo{model.size(), model.config().special_tokens.size(),
                   model.pad_id(), model.cls_id(), model.sep_id(),
                   model.mask_id()};
}

PretrainExample AssembleIds(std::vector<int32_t> first,
                            std::vector<int32_t> second, NspLabel label,
                            const VocabInfo &vocab, size_t max_len) {
  if (max_len < 8) throw ConfigError("max_len must be at least 8");
  if (first.empty() || second.empty()) {
    throw DataError("pair untokenizable at max_len " + std::to_string(max_len));
  }
  while (first.size() + second.size() + 3 > max_len) {
    auto &longer = first.size() >= second.size() ? first : second;
    longer.pop_back();
  }
  if (first.empty() || second.empty()) {
    throw DataError("pair untokenizable at max_len " + std::to_string(max_len));
  }
  PretrainExample ex;
  ex.input_ids.reserve(max_len);
  ex.input_ids.push_back(vocab.cls_id);
  ex.input_ids.insert(ex.input_ids.end(), first.begin(), first.end());
  ex.input_ids.push_back(vocab.sep_id);
  const size_t second_start = ex.input_ids.size();
  ex.input_ids.insert(ex.input_ids.end(), second.begin(), second.end());
  ex.input_ids.push_back(vocab.sep_id);
  const size_t length = ex.input_ids.size();
  ex.input_ids.resize(max_len, vocab.pad_id);
  ex.segment_ids.assign(max_len, 0);
  std::fill(ex.segment_ids.begin() + second_start,
            ex.segment_ids.begin() + length, 1);
  ex.attention_mask.assign(max_len, 0);
  std::fill(ex.attention_mask.begin(), ex.attention_mask.begin() + length, 1);
  ex.mlm_labels.assign(max_len, kIgnoreLabel);
  ex.nsp_label = label;
  return ex;
}

PretrainExample AssembleInput(const SentencePair &pair,
                              const WordPieceModel &tokenizer,
                              const PackingConfig &packing) {
  packing.Validate();
  return AssembleIds(tokenizer.Encode(pair.first), tokenizer.Encode(pair.second),
                     pair.label, VocabInfo::From(tokenizer), packing.max_len);
}

size_t MaskCount(size_t candidates, double select_fraction) {
  if (candidates == 0) return 0;
  // The epsilon keeps exact halves (0.15 * 10) from rounding down.
  const auto k = static_cast<size_t>(
      std::floor(select_fraction * static_cast<double>(candidates) + 0.5 + 1e-9));
  return std::clamp<size_t>(k, 1, candidates);
}

void ApplyMlmMask(PretrainExample *example, const MaskingPolicy &policy,
                  const VocabInfo &vocab, Rng *rng) {
  policy.Validate();
  std::vector<size_t> candidates;
  for (size_t i = 0; i < example->input_ids.size(); ++i) {
    const int32_t id = example->input_ids[i];
    if (example->attention_mask[i] == 1 && id >= 0 &&
        static_cast<size_t>(id) >= vocab.num_special) {
      candidates.push_back(i);
    }
  }
  std::fill(example->mlm_labels.begin(), example->mlm_labels.end(),
            kIgnoreLabel);
  const size_t k = MaskCount(candidates.size(), policy.select_fraction);
  // Partial Fisher-Yates: the first k entries become a uniform sample.
  for (size_t i = 0; i < k; ++i) {
    const size_t j = i + rng->Below(candidates.size() - i);
    std::swap(candidates[i], candidates[j]);
  }
  std::sort(candidates.begin(), candidates.begin() + k);
  const size_t non_special = vocab.vocab_size - vocab.num_special;
  for (size_t i = 0; i < k; ++i) {
    const size_t pos = candidates[i];
    const int32_t original = example->input_ids[pos];
    example->mlm_labels[pos] = original;
    const double u = rng->Uniform();
    if (u < policy.mask_prob) {
      example->input_ids[pos] = vocab.mask_id;
    } else if (u < policy.mask_prob + policy.random_prob) {
      example->input_ids[pos] =
          static_cast<int32_t>(vocab.num_special + rng->Below(non_special));
    }
  }
}

std::vector<PretrainExample> BuildPretrainExamples(
    const std::vector<std::vector<std::string>> &documents,
    const WordPieceModel &tokenizer, const PackingConfig &packing,
    const MaskingPolicy &policy, double is_next_probability) {
  packing.Validate();
  policy.Validate();
  const auto pairs =
      BuildNspPairs(documents, NspOptions{packing.rng_seed, is_next_probability});
  const VocabInfo vocab = VocabInfo::From(tokenizer);
  const uint64_t mask_seed = DeriveSeed(packing.rng_seed, 1);
  std::vector<PretrainExample> out;
  out.reserve(pairs.size());
  for (size_t k = 0; k < pairs.size(); ++k) {
    PretrainExample ex = AssembleInput(pairs[k], tokenizer, packing);
    Rng rng(DeriveSeed(mask_seed, k));
    ApplyMlmMask(&ex, policy, vocab, &rng);
    out.push_back(std::move(ex));
  }
  return out;
}

ExampleWriter::ExampleWriter(const std::string &path,
                             const ExampleFileHeader &header)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc),
      header_(header) {
  if (!out_) throw IoError("cannot open " + path + " for writing");
  std::string buf(kExampleMagic, 4);
  binary::Put<uint32_t>(&buf, kExampleVersion);
  binary::Put<uint32_t>(&buf, header.max_len);
  binary::Put<uint32_t>(&buf, header.vocab_size);
  out_.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void ExampleWriter::Write(const PretrainExample &ex) {
  const size_t n = header_.max_len;
  if (ex.input_ids.size() != n || ex.segment_ids.size() != n ||
      ex.attention_mask.size() != n || ex.mlm_labels.size() != n) {
    throw DataError("example length differs from file max_len");
  }
  std::string payload;
  binary::PutArray(&payload, ex.input_ids.data(), n);
  binary::PutArray(&payload, ex.segment_ids.data(), n);
  binary::PutArray(&payload, ex.attention_mask.data(), n);
  binary::PutArray(&payload, ex.mlm_labels.data(), n);
  binary::Put<uint8_t>(&payload, static_cast<uint8_t>(ex.nsp_label));
  std::string record;
  binary::Put<uint32_t>(&record, static_cast<uint32_t>(payload.size()));
  record += payload;
  binary::Put<uint32_t>(&record, Crc(payload));
  out_.write(record.data(), static_cast<std::streamsize>(record.size()));
  if (!out_) throw IoError("write failure on " + path_);
}

void ExampleWriter::Close() {
  out_.close();
  if (out_.fail()) throw IoError("close failure on " + path_);
}

ExampleReader::ExampleReader(const std::string &path)
    : path_(path), in_(path, std::ios::binary) {
  if (!in_) throw IoError("cannot open " + path);
  char buf[16];
  in_.read(buf, sizeof(buf));
  if (in_.gcount() != 16) throw DataError(path + ": truncated header");
  if (std::memcmp(buf, kExampleMagic, 4) != 0) {
    throw DataError(path + ": not an example file");
  }
  binary::Cursor cursor(buf + 4, 12, path);
  header_.version = cursor.Get<uint32_t>();
  header_.max_len = cursor.Get<uint32_t>();
  header_.vocab_size = cursor.Get<uint32_t>();
  if (header_.version != kExampleVersion) {
    throw DataError(path + ": example file version " +
                    std::to_string(header_.version) + ", expected " +
                    std::to_string(kExampleVersion));
  }
}

bool ExampleReader::Next(PretrainExample *ex) {
  const std::string where = path_ + ": record " + std::to_string(index_);
  uint32_t size;
  in_.read(reinterpret_cast<char *>(&size), sizeof(size));
  if (in_.gcount() == 0) return false;
  if (in_.gcount() != sizeof(size)) throw DataError(where + " is truncated");
  const size_t n = header_.max_len;
  const size_t expected = n * (4 + 1 + 1 + 4) + 1;
  if (size != expected) throw DataError(where + " has a corrupt length");
  std::string payload(size, '\0');
  in_.read(payload.data(), size);
  uint32_t crc = 0;
  in_.read(reinterpret_cast<char *>(&crc), sizeof(crc));
  if (!in_) throw DataError(where + " is truncated");
  if (crc != Crc(payload)) throw DataError(where + " fails its checksum");
  binary::Cursor cursor(payload.data(), payload.size(), where);
  ex->input_ids.resize(n);
  ex->segment_ids.resize(n);
  ex->attention_mask.resize(n);
  ex->mlm_labels.resize(n);
  cursor.GetArray(ex->input_ids.data(), n);
  cursor.GetArray(ex->segment_ids.data(), n);
  cursor.GetArray(ex->attention_mask.data(), n);
  cursor.GetArray(ex->mlm_labels.data(), n);
  const auto nsp = cursor.Get<uint8_t>();
  if (nsp > 1) throw DataError(where + " has an invalid NSP label");
  ex->nsp_label = static_cast<NspLabel>(nsp);
  ++index_;
  return true;
}

void WriteExamples(const std::vector<PretrainExample> &examples,
                   const ExampleFileHeader &header, const std::string &path) {
  ExampleWriter writer(path, header);
  for (const auto &ex : examples) writer.Write(ex);
  writer.Close();
}

std::vector<PretrainExample> ReadExamples(const std::string &path,
                                          ExampleFileHeader *header) {
  ExampleReader reader(path);
  if (header != nullptr) *header = reader.header();
  std::vector<PretrainExample> out;
  PretrainExample ex;
  while (reader.Next(&ex)) out.push_back(ex);
  return out;
}

void DumpExamples(const std::vector<PretrainExample> &examples,
                  const std::string &path) {
  LineRecordWriter out(path);
  for (size_t i = 0; i < examples.size(); ++i) {
    const auto &ex = examples[i];
    out.Write(Json{{"index", i},
                   {"input_ids", ex.input_ids},
                   {"segment_ids", ex.segment_ids},
                   {"attention_mask", ex.attention_mask},
                   {"mlm_labels", ex.mlm_labels},
                   {"nsp_label", ex.nsp_label == NspLabel::kIsNext
                                     ? "is-next"
                                     : "not-next"}});
  }
  out.Close();
}

}  // namespace persianlm
