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

#include "persianlm/checkpoint.h"

#include <cstring>
#include <fstream>
#include <sstream>

#include <zlib.h>

#include "binary_io.h"
#include "persianlm/errors.h"

namespace persianlm {
namespace {

constexpr char kMagic[4] = {'P', 'L', 'M', 'C'};

uint32_t Crc(const char *data, size_t n) {
  return static_cast<uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef *>(data), static_cast<uInt>(n)));
}

void PutConfig(std::string *buf, const ModelConfig &c) {
  for (size_t v : {c.layers, c.heads, c.hidden, c.intermediate, c.vocab_size,
                   c.max_positions, c.type_vocab}) {
    binary::Put<uint64_t>(buf, v);
  }
  binary::Put<double>(buf, c.dropout);
  binary::Put<double>(buf, c.init_std);
}

ModelConfig GetConfig(binary::Cursor *in) {
  ModelConfig c;
  for (size_t *v : {&c.layers, &c.heads, &c.hidden, &c.intermediate,
                    &c.vocab_size, &c.max_positions, &c.type_vocab}) {
    *v = in->Get<uint64_t>();
  }
  c.dropout = in->Get<double>();
  c.init_std = in->Get<double>();
  return c;
}

}  // namespace

std::string SerializeCheckpoint(const Checkpoint &ckpt) {
  const ParamLayout &lay = ckpt.params.layout;
  std::string buf(kMagic, 4);
  binary::Put<uint32_t>(&buf, Checkpoint::kVersion);
  PutConfig(&buf, lay.config());
  binary::Put<uint32_t>(&buf, static_cast<uint32_t>(lay.head()));
  binary::Put<uint64_t>(&buf, lay.num_labels());
  binary::Put<uint64_t>(&buf, ckpt.labels.size());
  for (const auto &l : ckpt.labels) binary::PutString(&buf, l);
  const OptimizerConfig &o = ckpt.optimizer;
  binary::Put<double>(&buf, o.beta1);
  binary::Put<double>(&buf, o.beta2);
  binary::Put<double>(&buf, o.learning_rate);
  binary::Put<double>(&buf, o.epsilon);
  binary::Put<uint64_t>(&buf, o.batch_size);
  binary::Put<uint64_t>(&buf, o.max_steps);
  binary::Put<uint64_t>(&buf, o.warmup_steps);
  binary::Put<uint32_t>(&buf, o.linear_decay ? 1u : 0u);
  binary::Put<uint64_t>(&buf, ckpt.step);
  binary::Put<uint64_t>(&buf, ckpt.seed);
  binary::Put<uint32_t>(&buf, ckpt.vocab_fingerprint);

  if (static_cast<size_t>(ckpt.params.values.size()) != lay.total()) {
    throw ConfigError("parameter buffer does not match its layout");
  }
  binary::Put<uint32_t>(&buf, static_cast<uint32_t>(lay.tensors().size()));
  for (const auto &t : lay.tensors()) {
    binary::PutString(&buf, t.name);
    binary::Put<uint64_t>(&buf, t.rows);
    binary::Put<uint64_t>(&buf, t.cols);
    binary::PutArray(&buf, ckpt.params.values.data() + t.offset, t.size());
  }
  const bool has_moments = ckpt.adam.m.size() == ckpt.params.values.size() &&
                           ckpt.adam.v.size() == ckpt.params.values.size();
  binary::Put<uint8_t>(&buf, has_moments ? 1 : 0);
  binary::Put<uint64_t>(&buf, ckpt.adam.t);
  if (has_moments) {
    binary::PutArray(&buf, ckpt.adam.m.data(), lay.total());
    binary::PutArray(&buf, ckpt.adam.v.data(), lay.total());
  }
  binary::Put<uint32_t>(&buf, Crc(buf.data(), buf.size()));
  return buf;
}

Checkpoint DeserializeCheckpoint(const std::string &bytes,
                                 const std::string &what) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw DataError(what + ": not a checkpoint file");
  }
  uint32_t stored;
  std::memcpy(&stored, bytes.data() + bytes.size() - 4, 4);
  if (stored != Crc(bytes.data(), bytes.size() - 4)) {
    throw DataError(what + ": checkpoint fails its checksum");
  }
  binary::Cursor in(bytes.data() + 4, bytes.size() - 8, what);
  const auto version = in.Get<uint32_t>();
  if (version != Checkpoint::kVersion) {
    throw DataError(what + ": unsupported checkpoint version " +
                    std::to_string(version));
  }
  Checkpoint ckpt;
  const ModelConfig config = GetConfig(&in);
  const auto head_raw = in.Get<uint32_t>();
  if (head_raw > static_cast<uint32_t>(HeadKind::kTokenTagger)) {
    throw DataError(what + ": unknown head kind " + std::to_string(head_raw));
  }
  const auto head = static_cast<HeadKind>(head_raw);
  const auto num_labels = in.Get<uint64_t>();
  const auto label_count = in.Get<uint64_t>();
  if (label_count > in.remaining()) throw DataError(what + ": corrupt label list");
  for (uint64_t i = 0; i < label_count; ++i) ckpt.labels.push_back(in.GetString());
  OptimizerConfig &o = ckpt.optimizer;
  o.beta1 = in.Get<double>();
  o.beta2 = in.Get<double>();
  o.learning_rate = in.Get<double>();
  o.epsilon = in.Get<double>();
  o.batch_size = in.Get<uint64_t>();
  o.max_steps = in.Get<uint64_t>();
  o.warmup_steps = in.Get<uint64_t>();
  o.linear_decay = in.Get<uint32_t>() != 0;
  ckpt.step = in.Get<uint64_t>();
  ckpt.seed = in.Get<uint64_t>();
  ckpt.vocab_fingerprint = in.Get<uint32_t>();

  try {
    ckpt.params.layout = ParamLayout(config, head, num_labels);
  } catch (const ConfigError &e) {
    throw DataError(what + ": " + e.what());
  }
  const ParamLayout &lay = ckpt.params.layout;
  ckpt.params.values.resize(static_cast<Eigen::Index>(lay.total()));
  const auto tensor_count = in.Get<uint32_t>();
  if (tensor_count != lay.tensors().size()) {
    throw DataError(what + ": tensor count " + std::to_string(tensor_count) +
                    " does not match the configuration");
  }
  for (const auto &t : lay.tensors()) {
    const std::string name = in.GetString();
    const auto rows = in.Get<uint64_t>();
    const auto cols = in.Get<uint64_t>();
    if (name != t.name || rows != t.rows || cols != t.cols) {
      throw DataError(what + ": tensor " + name + " does not match expected " +
                      t.name + " [" + std::to_string(t.rows) + "x" +
                      std::to_string(t.cols) + "]");
    }
    in.GetArray(ckpt.params.values.data() + t.offset, t.size());
  }
  const bool has_moments = in.Get<uint8_t>() != 0;
  ckpt.adam.t = in.Get<uint64_t>();
  if (has_moments) {
    ckpt.adam.m.resize(static_cast<Eigen::Index>(lay.total()));
    ckpt.adam.v.resize(static_cast<Eigen::Index>(lay.total()));
    in.GetArray(ckpt.adam.m.data(), lay.total());
    in.GetArray(ckpt.adam.v.data(), lay.total());
  }
  if (in.remaining() != 0) throw DataError(what + ": trailing bytes");
  if (!ckpt.params.values.allFinite()) {
    throw DataError(what + ": checkpoint holds non-finite parameters");
  }
  return ckpt;
}

void SaveCheckpoint(const Checkpoint &ckpt, const std::string &path) {
  const std::string bytes = SerializeCheckpoint(ckpt);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path);
}

Checkpoint LoadCheckpoint(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return DeserializeCheckpoint(ss.str(), path);
}

void CheckVocabulary(const Checkpoint &ckpt, size_t vocab_size,
                     uint32_t fingerprint) {
  if (ckpt.config().vocab_size != vocab_size) {
    throw DataError("checkpoint vocab_size " +
                    std::to_string(ckpt.config().vocab_size) +
                    " does not match tokenizer vocab_size " +
                    std::to_string(vocab_size));
  }
  if (ckpt.vocab_fingerprint != 0 && fingerprint != 0 &&
      ckpt.vocab_fingerprint != fingerprint) {
    throw DataError("checkpoint was trained with a different vocabulary");
  }
}

}  // namespace persianlm
