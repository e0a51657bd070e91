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

#include "persianlm/pretrainer.h"

#include <cstdio>
#include <numeric>

#include "persianlm/errors.h"
#include "persianlm/random.h"

namespace persianlm {
namespace {

// Independent random streams derived from the run seed.
constexpr uint64_t kInitStream = 0;
constexpr uint64_t kOrderStream = 1;
constexpr uint64_t kDropoutStream = 2;

}  // namespace

BatchSchedule::BatchSchedule(size_t num_examples, size_t batch_size,
                             uint64_t seed)
    : n_(num_examples), batch_size_(batch_size), seed_(seed) {
  if (n_ == 0) throw DataError("no training examples");
  if (batch_size_ == 0) throw ConfigError("batch size must be positive");
}

const std::vector<size_t> &BatchSchedule::Epoch(uint64_t epoch) {
  if (epoch != cached_epoch_) {
    order_.resize(n_);
    std::iota(order_.begin(), order_.end(), size_t{0});
    Rng rng(DeriveSeed(DeriveSeed(seed_, kOrderStream), epoch));
    rng.Shuffle(&order_);
    cached_epoch_ = epoch;
  }
  return order_;
}

std::vector<size_t> BatchSchedule::Batch(uint64_t step) {
  std::vector<size_t> batch;
  batch.reserve(batch_size_);
  for (size_t i = 0; i < batch_size_; ++i) {
    const uint64_t j = step * batch_size_ + i;
    batch.push_back(Epoch(j / n_)[j % n_]);
  }
  return batch;
}

Checkpoint InitialCheckpoint(const PretrainOptions &options) {
  options.model.Validate();
  options.optimizer.Validate();
  Checkpoint ckpt;
  ckpt.params = InitParams<float>(options.model,
                                  DeriveSeed(options.seed, kInitStream));
  ckpt.adam = AdamState<float>::Zeros(ckpt.params.layout.total());
  ckpt.optimizer = options.optimizer;
  ckpt.seed = options.seed;
  ckpt.vocab_fingerprint = options.vocab_fingerprint;
  return ckpt;
}

void Pretrain(const std::vector<PretrainExample> &examples,
              const ExampleFileHeader &header, const PretrainOptions &options,
              Checkpoint *ckpt) {
  const ModelConfig &config = ckpt->config();
  if (header.vocab_size != config.vocab_size) {
    throw DataError("example file vocab_size " +
                    std::to_string(header.vocab_size) +
                    " does not match model vocab_size " +
                    std::to_string(config.vocab_size));
  }
  if (header.max_len > config.max_positions) {
    throw DataError("example max_len " + std::to_string(header.max_len) +
                    " exceeds max_positions " +
                    std::to_string(config.max_positions));
  }
  if (ckpt->head() != HeadKind::kPretraining) {
    throw ConfigError("cannot pre-train a checkpoint with a task head");
  }
  if (ckpt->step > options.steps) {
    throw ConfigError("checkpoint is already at step " +
                      std::to_string(ckpt->step));
  }
  if (ckpt->step == options.steps) return;
  const OptimizerConfig &opt = options.optimizer;
  opt.Validate();
  if (ckpt->adam.m.size() != ckpt->params.values.size()) {
    ckpt->adam = AdamState<float>::Zeros(ckpt->params.layout.total());
  }
  ckpt->optimizer = opt;

  BatchSchedule schedule(examples.size(), opt.batch_size, ckpt->seed);
  std::vector<PretrainExample> batch;
  FlatVec<float> grads;
  for (uint64_t step = ckpt->step; step < options.steps; ++step) {
    batch.clear();
    for (size_t i : schedule.Batch(step)) batch.push_back(examples[i]);
    Rng dropout(DeriveSeed(DeriveSeed(ckpt->seed, kDropoutStream), step));
    const Losses losses =
        LossAndGradients(ckpt->params, std::span<const PretrainExample>(batch),
                         &grads, &dropout);
    if (!std::isfinite(losses.total)) {
      throw DataError("loss diverged at step " + std::to_string(step + 1));
    }
    AdamStep(&ckpt->params.values, grads, &ckpt->adam, opt, step + 1,
             opt.RateAt(step));
    ckpt->step = step + 1;
    if (options.on_step) {
      options.on_step({step + 1, losses.mlm_loss, losses.nsp_loss});
    }
  }
}

PretrainEval EvaluatePretraining(const Params<float> &params,
                                 const std::vector<PretrainExample> &examples,
                                 size_t batch_size) {
  PretrainEval eval;
  double mlm_sum = 0.0, nsp_sum = 0.0;
  size_t mlm_correct = 0, nsp_correct = 0;
  for (size_t start = 0; start < examples.size(); start += batch_size) {
    const size_t n = std::min(batch_size, examples.size() - start);
    const std::span<const PretrainExample> batch(examples.data() + start, n);
    const Losses l = LossAndGradients<float>(params, batch, nullptr);
    mlm_sum += l.mlm_loss * static_cast<double>(l.masked_positions);
    nsp_sum += l.nsp_loss * static_cast<double>(n);
    mlm_correct += l.mlm_correct;
    nsp_correct += l.nsp_correct;
    eval.masked_positions += l.masked_positions;
    eval.examples += n;
  }
  if (eval.masked_positions > 0) {
    eval.mlm_loss = mlm_sum / static_cast<double>(eval.masked_positions);
    eval.mlm_accuracy = static_cast<double>(mlm_correct) /
                        static_cast<double>(eval.masked_positions);
  }
  if (eval.examples > 0) {
    eval.nsp_loss = nsp_sum / static_cast<double>(eval.examples);
    eval.nsp_accuracy = static_cast<double>(nsp_correct) /
                        static_cast<double>(eval.examples);
  }
  return eval;
}

LossTraceWriter::LossTraceWriter(const std::string &path, bool append)
    : path_(path) {
  file_ = std::fopen(path.c_str(), append ? "ab" : "wb");
  if (file_ == nullptr) throw IoError("cannot open " + path + " for writing");
  if (!append) std::fputs("step,mlm_loss,nsp_loss\n", file_);
}

LossTraceWriter::~LossTraceWriter() {
  if (file_ != nullptr) std::fclose(file_);
}

void LossTraceWriter::Write(const StepLoss &loss) {
  std::fprintf(file_, "%llu,%.9g,%.9g\n",
               static_cast<unsigned long long>(loss.step), loss.mlm_loss,
               loss.nsp_loss);
}

}  // namespace persianlm
