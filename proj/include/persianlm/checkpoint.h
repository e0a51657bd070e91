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

#ifndef PERSIANLM_CHECKPOINT_H_
#define PERSIANLM_CHECKPOINT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "persianlm/model.h"

namespace persianlm {

// Everything needed to resume training or run inference.
struct Checkpoint {
  static constexpr uint32_t kVersion = 1;

  Params<float> params;
  // Label inventory of a task head, empty for pre-training checkpoints.
  std::vector<std::string> labels;
  OptimizerConfig optimizer;
  AdamState<float> adam;
  uint64_t step = 0;
  uint64_t seed = 0;
  // CRC-32 of the vocabulary the ids refer to; 0 when unknown.
  uint32_t vocab_fingerprint = 0;

  const ModelConfig &config() const { return params.layout.config(); }
  HeadKind head() const { return params.layout.head(); }
};

// Binary container: magic "PLMC", version, config, head kind and labels,
// optimizer settings, step and seed, named float32 tensors in layout order,
// Adam moments, and a trailing CRC-32 of all preceding bytes.
std::string SerializeCheckpoint(const Checkpoint &ckpt);
Checkpoint DeserializeCheckpoint(const std::string &bytes,
                                 const std::string &what);

void SaveCheckpoint(const Checkpoint &ckpt, const std::string &path);
Checkpoint LoadCheckpoint(const std::string &path);

// Throws DataError unless the checkpoint was built for this vocabulary.
void CheckVocabulary(const Checkpoint &ckpt, size_t vocab_size,
                     uint32_t fingerprint);

}  // namespace persianlm

#endif  // PERSIANLM_CHECKPOINT_H_
