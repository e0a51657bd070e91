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

#ifndef PERSIANLM_PRETRAINER_H_
#define PERSIANLM_PRETRAINER_H_

#include <cstdint>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "persianlm/checkpoint.h"
#include "persianlm/model.h"
#include "persianlm/pretrain_data.h"

namespace persianlm {

struct StepLoss {
  uint64_t step;  // 1-based
  double mlm_loss;
  double nsp_loss;
};

struct PretrainOptions {
  ModelConfig model;
  OptimizerConfig optimizer;
  uint64_t seed = 0;
  // Training stops once this many steps have been taken in total.
  uint64_t steps = 0;
  uint32_t vocab_fingerprint = 0;
  // Called after every step.
  std::function<void(const StepLoss &)> on_step;
};

// Example indices of the batch for a 0-based step: consecutive slices of an
// endless stream of per-epoch permutations, each drawn from the seed and the
// epoch number alone.
class BatchSchedule {
 public:
  BatchSchedule(size_t num_examples, size_t batch_size, uint64_t seed);
  std::vector<size_t> Batch(uint64_t step);

 private:
  const std::vector<size_t> &Epoch(uint64_t epoch);

  size_t n_;
  size_t batch_size_;
  uint64_t seed_;
  uint64_t cached_epoch_ = static_cast<uint64_t>(-1);
  std::vector<size_t> order_;
};

// Fresh pre-training state: initialized parameters, zero moments, step 0.
Checkpoint InitialCheckpoint(const PretrainOptions &options);

// Advances `ckpt` to options.steps. The header's vocab_size must match the
// model config; this is checked before any step runs. Resuming from a
// checkpoint saved at step k and running to n gives the same parameters as
// an uninterrupted run to n.
void Pretrain(const std::vector<PretrainExample> &examples,
              const ExampleFileHeader &header, const PretrainOptions &options,
              Checkpoint *ckpt);

struct PretrainEval {
  double mlm_loss = 0.0;
  double mlm_accuracy = 0.0;
  double nsp_loss = 0.0;
  double nsp_accuracy = 0.0;
  size_t examples = 0;
  size_t masked_positions = 0;
};

PretrainEval EvaluatePretraining(const Params<float> &params,
                                 const std::vector<PretrainExample> &examples,
                                 size_t batch_size = 64);

// CSV loss trace: header "step,mlm_loss,nsp_loss" unless appending.
class LossTraceWriter {
 public:
  LossTraceWriter(const std::string &path, bool append);
  ~LossTraceWriter();
  LossTraceWriter(const LossTraceWriter &) = delete;
  LossTraceWriter &operator=(const LossTraceWriter &) = delete;

  void Write(const StepLoss &loss);

 private:
  std::string path_;
  std::FILE *file_ = nullptr;
};

}  // namespace persianlm

#endif  // PERSIANLM_PRETRAINER_H_
