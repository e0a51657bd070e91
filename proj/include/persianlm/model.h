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

#ifndef PERSIANLM_MODEL_H_
#define PERSIANLM_MODEL_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "persianlm/pretrain_data.h"
#include "persianlm/random.h"

namespace persianlm {

// Architecture hyperparameters. The defaults are the BERT-base shape.
struct ModelConfig {
  size_t layers = 12;
  size_t heads = 12;
  size_t hidden = 768;
  size_t intermediate = 3072;
  size_t vocab_size = 100000;
  size_t max_positions = 512;
  size_t type_vocab = 2;
  double dropout = 0.1;
  // Stddev of the truncated-normal weight init.
  double init_std = 0.02;

  // 2 layers, 2 heads, hidden 64, intermediate 256, 128 positions, no dropout.
  static ModelConfig DeskScale(size_t vocab_size);
  // DeskScale widened to 4 heads, hidden 128, intermediate 512, with init
  // stddev 1/sqrt(hidden).
  static ModelConfig SmallScale(size_t vocab_size);

  void Validate() const;
  bool operator==(const ModelConfig &) const = default;
};

enum class HeadKind : uint32_t {
  kPretraining = 0,         // MLM + NSP heads
  kSequenceClassifier = 1,  // affine layer on the pooled [CLS] state
  kTokenTagger = 2,         // affine layer on every position
};

const char *HeadKindName(HeadKind kind);

struct TensorSpec {
  std::string name;
  size_t rows;
  size_t cols;
  size_t offset;

  size_t size() const { return rows * cols; }
};

// Fixed-order list of every parameter tensor and its place in one flat
// buffer. Shapes follow from the config alone.
class ParamLayout {
 public:
  static constexpr size_t kAbsent = static_cast<size_t>(-1);

  struct Layer {
    size_t q_w, q_b, k_w, k_b, v_w, v_b, o_w, o_b, attn_ln_g, attn_ln_b;
    size_t ffn_in_w, ffn_in_b, ffn_out_w, ffn_out_b, ffn_ln_g, ffn_ln_b;
  };

  ParamLayout() = default;
  ParamLayout(const ModelConfig &config, HeadKind head, size_t num_labels);

  const ModelConfig &config() const { return config_; }
  HeadKind head() const { return head_; }
  size_t num_labels() const { return num_labels_; }
  const std::vector<TensorSpec> &tensors() const { return tensors_; }
  size_t total() const { return total_; }
  bool Has(std::string_view name) const;
  const TensorSpec &Get(std::string_view name) const;

  // Offsets into the flat buffer. kAbsent for heads this layout lacks.
  size_t word_emb = kAbsent, pos_emb = kAbsent, type_emb = kAbsent;
  size_t emb_ln_g = kAbsent, emb_ln_b = kAbsent;
  std::vector<Layer> layers;
  size_t pooler_w = kAbsent, pooler_b = kAbsent;
  size_t mlm_w = kAbsent, mlm_b = kAbsent, mlm_ln_g = kAbsent,
         mlm_ln_b = kAbsent, mlm_bias = kAbsent;
  size_t nsp_w = kAbsent, nsp_b = kAbsent;
  size_t head_w = kAbsent, head_b = kAbsent;

 private:
  size_t Add(std::string name, size_t rows, size_t cols);

  ModelConfig config_;
  HeadKind head_ = HeadKind::kPretraining;
  size_t num_labels_ = 0;
  std::vector<TensorSpec> tensors_;
  size_t total_ = 0;
};

// Closed-form parameter count, computed independently of ParamLayout.
size_t AnalyticParamCount(const ModelConfig &config, HeadKind head,
                          size_t num_labels);

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename S>
using RowVec = Eigen::Matrix<S, 1, Eigen::Dynamic>;
template <typename S>
using FlatVec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

template <typename S>
struct Params {
  ParamLayout layout;
  FlatVec<S> values;

  Eigen::Map<const Mat<S>> View(const TensorSpec &t) const {
    return Eigen::Map<const Mat<S>>(values.data() + t.offset,
                                    static_cast<Eigen::Index>(t.rows),
                                    static_cast<Eigen::Index>(t.cols));
  }
  Eigen::Map<Mat<S>> View(const TensorSpec &t) {
    return Eigen::Map<Mat<S>>(values.data() + t.offset,
                              static_cast<Eigen::Index>(t.rows),
                              static_cast<Eigen::Index>(t.cols));
  }
  Eigen::Map<const Mat<S>> View(std::string_view name) const {
    return View(layout.Get(name));
  }
  Eigen::Map<Mat<S>> View(std::string_view name) {
    return View(layout.Get(name));
  }
};

// Truncated normal (stddev config.init_std) weights and embeddings, zero biases, unit
// layer-norm gains. Deterministic by seed.
template <typename S>
Params<S> InitParams(const ModelConfig &config, uint64_t seed,
                     HeadKind head = HeadKind::kPretraining,
                     size_t num_labels = 0);

template <typename S, typename T>
Params<T> CastParams(const Params<S> &params) {
  return Params<T>{params.layout, params.values.template cast<T>()};
}

// Forward/backward state of the encoder over one sequence. Only the first
// `length` positions are processed; padding keys beyond it, and any position
// whose attention flag is 0, receive no attention weight.
template <typename S>
class EncoderPass {
 public:
  void Forward(const Params<S> &params, std::span<const int32_t> ids,
               std::span<const uint8_t> segments,
               std::span<const uint8_t> attention, size_t length,
               Rng *dropout_rng = nullptr);

  // length x hidden final states.
  const Mat<S> &hidden() const { return layers_.empty() ? emb_out_ : layers_.back().out; }

  // Accumulates parameter gradients of sum(d_hidden .* hidden()) into grads.
  void Backward(const Params<S> &params, const Mat<S> &d_hidden,
                FlatVec<S> *grads) const;

 private:
  struct LayerCache {
    Mat<S> in, q, k, v, ctx, attn_xhat, h1, ffn_pre, ffn_act, ffn_xhat, out;
    std::vector<Mat<S>> probs;
    RowVec<S> attn_rstd, ffn_rstd;
    Mat<S> attn_drop, ffn_drop;
  };

  std::vector<int32_t> ids_;
  std::vector<uint8_t> segments_;
  std::vector<uint8_t> key_valid_;
  Mat<S> emb_xhat_, emb_out_, emb_drop_;
  RowVec<S> emb_rstd_;
  std::vector<LayerCache> layers_;
  bool dropout_ = false;
};

// Pooler: tanh(h_cls W + b).
template <typename S>
RowVec<S> Pool(const Params<S> &params, const Mat<S> &hidden);
// Adds the pooler's parameter gradients and returns d h_cls.
template <typename S>
RowVec<S> PoolBackward(const Params<S> &params, const Mat<S> &hidden,
                       const RowVec<S> &pooled, const RowVec<S> &d_pooled,
                       FlatVec<S> *grads);

template <typename S>
struct ForwardOutput {
  std::vector<Mat<S>> mlm_logits;  // per item: positions x vocab
  Mat<S> nsp_logits;               // batch x 2
  Mat<S> pooled;                   // batch x hidden
};

// Full forward pass over padded examples. Throws DataError for ids outside
// the vocabulary or sequences longer than max_positions.
template <typename S>
ForwardOutput<S> Forward(const Params<S> &params,
                         std::span<const PretrainExample> batch);

struct Losses {
  double mlm_loss = 0.0;
  double nsp_loss = 0.0;
  double total = 0.0;
  size_t masked_positions = 0;
  // Set when the batch holds no MLM label; mlm_loss is then 0.
  bool mlm_empty = false;
  size_t nsp_correct = 0;
  size_t mlm_correct = 0;
};

// Mean MLM cross-entropy over labeled positions plus mean NSP cross-entropy.
template <typename S>
Losses ComputeLosses(const ForwardOutput<S> &outputs,
                     std::span<const PretrainExample> batch);

// Losses of the pre-training objective and, when grads is non-null, their
// gradients (grads is resized and overwritten). Padding positions are
// skipped and MLM logits are only formed at labeled positions.
template <typename S>
Losses LossAndGradients(const Params<S> &params,
                        std::span<const PretrainExample> batch,
                        FlatVec<S> *grads, Rng *dropout_rng = nullptr);

struct GradCheckResult {
  double max_relative_error = 0.0;
  size_t worst_index = 0;
  std::vector<double> analytic;
  std::vector<double> numeric;
};

// Central differences of the total loss at the given flat indices. Throws
// DataError when the loss is not finite.
GradCheckResult FiniteDifferenceCheck(const Params<double> &params,
                                      std::span<const PretrainExample> batch,
                                      std::span<const size_t> indices,
                                      double h);

struct OptimizerConfig {
  double beta1 = 0.9;
  double beta2 = 0.98;
  double learning_rate = 1e-4;
  double epsilon = 1e-8;
  size_t batch_size = 32;
  size_t max_steps = 1000;
  // Linear warmup length; 0 starts at the full rate.
  size_t warmup_steps = 0;
  // After warmup, decay linearly to zero at max_steps instead of holding.
  bool linear_decay = false;

  void Validate() const;
  double RateAt(uint64_t step) const;
};

template <typename S>
struct AdamState {
  FlatVec<S> m;
  FlatVec<S> v;
  uint64_t t = 0;

  static AdamState Zeros(size_t n) {
    return AdamState{FlatVec<S>::Zero(static_cast<Eigen::Index>(n)),
                     FlatVec<S>::Zero(static_cast<Eigen::Index>(n)), 0};
  }
};

// Adam with bias correction at step t (1-based) and learning rate lr.
template <typename S>
void AdamStep(FlatVec<S> *params, const FlatVec<S> &grads, AdamState<S> *state,
              const OptimizerConfig &config, uint64_t t, double lr);

}  // namespace persianlm

#endif  // PERSIANLM_MODEL_H_
