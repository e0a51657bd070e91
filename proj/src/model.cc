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

#include "persianlm/model.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "persianlm/errors.h"

namespace persianlm {
namespace {

constexpr double kLayerNormEps = 1e-12;

template <typename S>
using ConstMap = Eigen::Map<const Mat<S>>;
template <typename S>
using MutMap = Eigen::Map<Mat<S>>;
template <typename S>
using ConstRowMap = Eigen::Map<const RowVec<S>>;
template <typename S>
using MutRowMap = Eigen::Map<RowVec<S>>;

template <typename S>
ConstMap<S> W(const Params<S> &p, size_t offset, size_t rows, size_t cols) {
  return ConstMap<S>(p.values.data() + offset, static_cast<Eigen::Index>(rows),
                     static_cast<Eigen::Index>(cols));
}

template <typename S>
ConstRowMap<S> B(const Params<S> &p, size_t offset, size_t n) {
  return ConstRowMap<S>(p.values.data() + offset, static_cast<Eigen::Index>(n));
}

template <typename S>
MutMap<S> GW(FlatVec<S> *g, size_t offset, size_t rows, size_t cols) {
  return MutMap<S>(g->data() + offset, static_cast<Eigen::Index>(rows),
                   static_cast<Eigen::Index>(cols));
}

template <typename S>
MutRowMap<S> GB(FlatVec<S> *g, size_t offset, size_t n) {
  return MutRowMap<S>(g->data() + offset, static_cast<Eigen::Index>(n));
}

// Exact (erf) GELU.
template <typename S>
S Gelu(S x) {
  return S(0.5) * x * (S(1) + std::erf(x * S(std::numbers::sqrt2 / 2)));
}

template <typename S>
S GeluGrad(S x) {
  const S cdf = S(0.5) * (S(1) + std::erf(x * S(std::numbers::sqrt2 / 2)));
  const S pdf = std::exp(S(-0.5) * x * x) * S(0.5 * std::numbers::inv_sqrtpi *
                                               std::numbers::sqrt2);
  return cdf + x * pdf;
}

template <typename S>
Mat<S> Affine(const Mat<S> &x, const Params<S> &p, size_t w, size_t b,
              size_t in, size_t out) {
  Mat<S> y = x * W(p, w, in, out);
  y.rowwise() += B(p, b, out);
  return y;
}

template <typename S>
void LayerNormForward(const Mat<S> &x, const Params<S> &p, size_t g, size_t b,
                      Mat<S> *xhat, RowVec<S> *rstd, Mat<S> *out) {
  const Eigen::Index n = x.cols();
  xhat->resize(x.rows(), n);
  rstd->resize(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const S mean = x.row(r).mean();
    const S var = (x.row(r).array() - mean).square().mean();
    const S rs = S(1) / std::sqrt(var + S(kLayerNormEps));
    (*rstd)(r) = rs;
    xhat->row(r) = (x.row(r).array() - mean) * rs;
  }
  *out = xhat->array().rowwise() * B(p, g, n).array();
  out->rowwise() += B(p, b, n);
}

template <typename S>
Mat<S> LayerNormBackward(const Mat<S> &dy, const Mat<S> &xhat,
                         const RowVec<S> &rstd, const Params<S> &p, size_t g,
                         size_t b, FlatVec<S> *grads) {
  const Eigen::Index n = dy.cols();
  GB(grads, g, n) += (dy.array() * xhat.array()).colwise().sum().matrix();
  GB(grads, b, n) += dy.colwise().sum();
  Mat<S> dxhat = dy.array().rowwise() * B(p, g, n).array();
  Mat<S> dx(dy.rows(), n);
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const S mean_d = dxhat.row(r).mean();
    const S mean_dx = (dxhat.row(r).array() * xhat.row(r).array()).mean();
    dx.row(r) = rstd(r) * (dxhat.row(r).array() - mean_d -
                           xhat.row(r).array() * mean_dx);
  }
  return dx;
}

template <typename S>
Mat<S> DropoutMask(Eigen::Index rows, Eigen::Index cols, double rate,
                   Rng *rng) {
  Mat<S> m(rows, cols);
  const S keep = S(1.0 / (1.0 - rate));
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = rng->Uniform() < rate ? S(0) : keep;
  }
  return m;
}

// Returns log-sum-exp of a row and fills probabilities.
template <typename S>
double SoftmaxRow(const Eigen::Ref<const RowVec<S>> &logits, RowVec<S> *probs) {
  const double m = static_cast<double>(logits.maxCoeff());
  double sum = 0.0;
  probs->resize(logits.size());
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    const double e = std::exp(static_cast<double>(logits(i)) - m);
    (*probs)(i) = static_cast<S>(e);
    sum += e;
  }
  *probs /= static_cast<S>(sum);
  return m + std::log(sum);
}

template <typename S>
Eigen::Index ArgMax(const Eigen::Ref<const RowVec<S>> &row) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < row.size(); ++i) {
    if (row(i) > row(best)) best = i;
  }
  return best;
}

void ValidateExample(const PretrainExample &ex, const ModelConfig &config) {
  if (ex.input_ids.size() > config.max_positions) {
    throw DataError("sequence length " + std::to_string(ex.input_ids.size()) +
                    " exceeds max_positions " +
                    std::to_string(config.max_positions));
  }
  if (ex.segment_ids.size() != ex.input_ids.size() ||
      ex.attention_mask.size() != ex.input_ids.size() ||
      ex.mlm_labels.size() != ex.input_ids.size()) {
    throw DataError("example vectors differ in length");
  }
  for (size_t i = 0; i < ex.input_ids.size(); ++i) {
    const int32_t id = ex.input_ids[i];
    if (id < 0 || static_cast<size_t>(id) >= config.vocab_size) {
      throw DataError("token id " + std::to_string(id) + " out of range");
    }
    if (ex.segment_ids[i] >= config.type_vocab) {
      throw DataError("segment id out of range");
    }
    const int32_t label = ex.mlm_labels[i];
    if (label != kIgnoreLabel &&
        (label < 0 || static_cast<size_t>(label) >= config.vocab_size)) {
      throw DataError("MLM label " + std::to_string(label) + " out of range");
    }
  }
}

// Positions after the last attended one never influence a loss term.
size_t ActiveLength(const PretrainExample &ex) {
  size_t n = ex.attention_mask.size();
  while (n > 0 && ex.attention_mask[n - 1] == 0) --n;
  return std::max<size_t>(n, 1);
}

}  // namespace

ModelConfig ModelConfig::DeskScale(size_t vocab_size) {
  ModelConfig c;
  c.layers = 2;
  c.heads = 2;
  c.hidden = 64;
  c.intermediate = 256;
  c.vocab_size = vocab_size;
  c.max_positions = 128;
  c.dropout = 0.0;
  return c;
}

ModelConfig ModelConfig::SmallScale(size_t vocab_size) {
  ModelConfig c = DeskScale(vocab_size);
  c.heads = 4;
  c.hidden = 128;
  c.intermediate = 512;
  c.init_std = 1.0 / std::sqrt(128.0);
  return c;
}

void ModelConfig::Validate() const {
  if (layers == 0 || heads == 0 || hidden == 0 || intermediate == 0 ||
      vocab_size == 0 || max_positions == 0 || type_vocab == 0) {
    throw ConfigError("model dimensions must be positive");
  }
  if (hidden % heads != 0) {
    throw ConfigError("hidden size " + std::to_string(hidden) +
                      " is not divisible by " + std::to_string(heads) +
                      " heads");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw ConfigError("dropout must lie in [0, 1)");
  }
  if (!(init_std > 0.0)) throw ConfigError("init stddev must be positive");
}

const char *HeadKindName(HeadKind kind) {
  switch (kind) {
    case HeadKind::kPretraining:
      return "pretraining";
    case HeadKind::kSequenceClassifier:
      return "sequence-classifier";
    case HeadKind::kTokenTagger:
      return "token-tagger";
  }
  return "?";
}

size_t ParamLayout::Add(std::string name, size_t rows, size_t cols) {
  const size_t offset = total_;
  tensors_.push_back({std::move(name), rows, cols, offset});
  total_ += rows * cols;
  return offset;
}

ParamLayout::ParamLayout(const ModelConfig &config, HeadKind head,
                         size_t num_labels)
    : config_(config), head_(head), num_labels_(num_labels) {
  config.Validate();
  if (head != HeadKind::kPretraining && num_labels == 0) {
    throw ConfigError("task head needs at least one label");
  }
  const size_t h = config.hidden;
  const size_t inter = config.intermediate;
  word_emb = Add("embeddings/word", config.vocab_size, h);
  pos_emb = Add("embeddings/position", config.max_positions, h);
  type_emb = Add("embeddings/token_type", config.type_vocab, h);
  emb_ln_g = Add("embeddings/ln/gamma", 1, h);
  emb_ln_b = Add("embeddings/ln/beta", 1, h);
  for (size_t l = 0; l < config.layers; ++l) {
    const std::string p = "layer_" + std::to_string(l) + "/";
    Layer layer;
    layer.q_w = Add(p + "attention/query/w", h, h);
    layer.q_b = Add(p + "attention/query/b", 1, h);
    layer.k_w = Add(p + "attention/key/w", h, h);
    layer.k_b = Add(p + "attention/key/b", 1, h);
    layer.v_w = Add(p + "attention/value/w", h, h);
    layer.v_b = Add(p + "attention/value/b", 1, h);
    layer.o_w = Add(p + "attention/output/w", h, h);
    layer.o_b = Add(p + "attention/output/b", 1, h);
    layer.attn_ln_g = Add(p + "attention/ln/gamma", 1, h);
    layer.attn_ln_b = Add(p + "attention/ln/beta", 1, h);
    layer.ffn_in_w = Add(p + "ffn/in/w", h, inter);
    layer.ffn_in_b = Add(p + "ffn/in/b", 1, inter);
    layer.ffn_out_w = Add(p + "ffn/out/w", inter, h);
    layer.ffn_out_b = Add(p + "ffn/out/b", 1, h);
    layer.ffn_ln_g = Add(p + "ffn/ln/gamma", 1, h);
    layer.ffn_ln_b = Add(p + "ffn/ln/beta", 1, h);
    layers.push_back(layer);
  }
  pooler_w = Add("pooler/w", h, h);
  pooler_b = Add("pooler/b", 1, h);
  switch (head) {
    case HeadKind::kPretraining:
      mlm_w = Add("mlm/transform/w", h, h);
      mlm_b = Add("mlm/transform/b", 1, h);
      mlm_ln_g = Add("mlm/ln/gamma", 1, h);
      mlm_ln_b = Add("mlm/ln/beta", 1, h);
      mlm_bias = Add("mlm/output_bias", 1, config.vocab_size);
      nsp_w = Add("nsp/w", h, 2);
      nsp_b = Add("nsp/b", 1, 2);
      break;
    case HeadKind::kSequenceClassifier:
      head_w = Add("classifier/w", h, num_labels);
      head_b = Add("classifier/b", 1, num_labels);
      break;
    case HeadKind::kTokenTagger:
      head_w = Add("tagger/w", h, num_labels);
      head_b = Add("tagger/b", 1, num_labels);
      break;
  }
}

bool ParamLayout::Has(std::string_view name) const {
  return std::any_of(tensors_.begin(), tensors_.end(),
                     [&](const TensorSpec &t) { return t.name == name; });
}

const TensorSpec &ParamLayout::Get(std::string_view name) const {
  for (const auto &t : tensors_) {
    if (t.name == name) return t;
  }
  throw ConfigError("no parameter tensor named " + std::string(name));
}

size_t AnalyticParamCount(const ModelConfig &c, HeadKind head,
                          size_t num_labels) {
  const size_t h = c.hidden, inter = c.intermediate, v = c.vocab_size;
  const size_t embeddings = (v + c.max_positions + c.type_vocab) * h + 2 * h;
  const size_t attention = 4 * (h * h + h) + 2 * h;
  const size_t ffn = (h * inter + inter) + (inter * h + h) + 2 * h;
  const size_t pooler = h * h + h;
  size_t heads = 0;
  if (head == HeadKind::kPretraining) {
    heads = (h * h + h) + 2 * h + v + (2 * h + 2);
  } else {
    heads = h * num_labels + num_labels;
  }
  return embeddings + c.layers * (attention + ffn) + pooler + heads;
}

template <typename S>
Params<S> InitParams(const ModelConfig &config, uint64_t seed, HeadKind head,
                     size_t num_labels) {
  Params<S> p;
  p.layout = ParamLayout(config, head, num_labels);
  p.values = FlatVec<S>::Zero(static_cast<Eigen::Index>(p.layout.total()));
  Rng rng(seed);
  for (const auto &t : p.layout.tensors()) {
    const std::string &n = t.name;
    const bool is_gamma = n.size() >= 6 && n.compare(n.size() - 6, 6, "/gamma") == 0;
    const bool is_bias = (n.size() >= 2 && n.compare(n.size() - 2, 2, "/b") == 0) ||
                         n == "mlm/output_bias" ||
                         (n.size() >= 5 && n.compare(n.size() - 5, 5, "/beta") == 0);
    S *data = p.values.data() + t.offset;
    if (is_gamma) {
      std::fill(data, data + t.size(), S(1));
    } else if (!is_bias) {
      for (size_t i = 0; i < t.size(); ++i) {
        data[i] = static_cast<S>(rng.TruncatedNormal(config.init_std));
      }
    }
  }
  return p;
}

template <typename S>
void EncoderPass<S>::Forward(const Params<S> &params,
                             std::span<const int32_t> ids,
                             std::span<const uint8_t> segments,
                             std::span<const uint8_t> attention, size_t length,
                             Rng *dropout_rng) {
  const ParamLayout &lay = params.layout;
  const ModelConfig &c = lay.config();
  const size_t h = c.hidden;
  const size_t heads = c.heads;
  const size_t d = h / heads;
  const auto n = static_cast<Eigen::Index>(length);
  if (length == 0 || length > ids.size() || length > c.max_positions) {
    throw DataError("sequence length " + std::to_string(length) +
                    " outside [1, max_positions]");
  }
  ids_.assign(ids.begin(), ids.begin() + n);
  segments_.assign(segments.begin(), segments.begin() + n);
  key_valid_.assign(attention.begin(), attention.begin() + n);
  dropout_ = dropout_rng != nullptr && c.dropout > 0.0;

  Mat<S> x(n, static_cast<Eigen::Index>(h));
  const auto word = W(params, lay.word_emb, c.vocab_size, h);
  const auto pos = W(params, lay.pos_emb, c.max_positions, h);
  const auto type = W(params, lay.type_emb, c.type_vocab, h);
  for (Eigen::Index t = 0; t < n; ++t) {
    const int32_t id = ids_[t];
    if (id < 0 || static_cast<size_t>(id) >= c.vocab_size) {
      throw DataError("token id " + std::to_string(id) + " out of range");
    }
    if (segments_[t] >= c.type_vocab) throw DataError("segment id out of range");
    x.row(t) = word.row(id) + pos.row(t) + type.row(segments_[t]);
  }
  LayerNormForward(x, params, lay.emb_ln_g, lay.emb_ln_b, &emb_xhat_,
                   &emb_rstd_, &emb_out_);
  if (dropout_) {
    emb_drop_ = DropoutMask<S>(n, static_cast<Eigen::Index>(h), c.dropout,
                               dropout_rng);
    emb_out_ = emb_out_.cwiseProduct(emb_drop_);
  }

  const S scale = S(1) / std::sqrt(static_cast<S>(d));
  layers_.resize(c.layers);
  const Mat<S> *input = &emb_out_;
  for (size_t l = 0; l < c.layers; ++l) {
    const ParamLayout::Layer &L = lay.layers[l];
    LayerCache &lc = layers_[l];
    lc.in = *input;
    lc.q = Affine(lc.in, params, L.q_w, L.q_b, h, h);
    lc.k = Affine(lc.in, params, L.k_w, L.k_b, h, h);
    lc.v = Affine(lc.in, params, L.v_w, L.v_b, h, h);
    lc.ctx.resize(n, static_cast<Eigen::Index>(h));
    lc.probs.resize(heads);
    for (size_t hd = 0; hd < heads; ++hd) {
      const auto off = static_cast<Eigen::Index>(hd * d);
      const auto dd = static_cast<Eigen::Index>(d);
      Mat<S> scores = lc.q.middleCols(off, dd) *
                      lc.k.middleCols(off, dd).transpose() * scale;
      Mat<S> &probs = lc.probs[hd];
      probs.setZero(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        S mx = std::numeric_limits<S>::lowest();
        for (Eigen::Index j = 0; j < n; ++j) {
          if (key_valid_[j]) mx = std::max(mx, scores(i, j));
        }
        S sum = 0;
        for (Eigen::Index j = 0; j < n; ++j) {
          if (key_valid_[j]) {
            probs(i, j) = std::exp(scores(i, j) - mx);
            sum += probs(i, j);
          }
        }
        if (sum > 0) probs.row(i) /= sum;
      }
      lc.ctx.middleCols(off, dd).noalias() = probs * lc.v.middleCols(off, dd);
    }
    Mat<S> attn = Affine(lc.ctx, params, L.o_w, L.o_b, h, h);
    if (dropout_) {
      lc.attn_drop = DropoutMask<S>(n, static_cast<Eigen::Index>(h), c.dropout,
                                    dropout_rng);
      attn = attn.cwiseProduct(lc.attn_drop);
    }
    Mat<S> r1 = lc.in + attn;
    LayerNormForward(r1, params, L.attn_ln_g, L.attn_ln_b, &lc.attn_xhat,
                     &lc.attn_rstd, &lc.h1);
    lc.ffn_pre = Affine(lc.h1, params, L.ffn_in_w, L.ffn_in_b, h,
                        c.intermediate);
    lc.ffn_act = lc.ffn_pre.unaryExpr([](S v) { return Gelu(v); });
    Mat<S> f = Affine(lc.ffn_act, params, L.ffn_out_w, L.ffn_out_b,
                      c.intermediate, h);
    if (dropout_) {
      lc.ffn_drop = DropoutMask<S>(n, static_cast<Eigen::Index>(h), c.dropout,
                                   dropout_rng);
      f = f.cwiseProduct(lc.ffn_drop);
    }
    Mat<S> r2 = lc.h1 + f;
    LayerNormForward(r2, params, L.ffn_ln_g, L.ffn_ln_b, &lc.ffn_xhat,
                     &lc.ffn_rstd, &lc.out);
    input = &lc.out;
  }
}

template <typename S>
void EncoderPass<S>::Backward(const Params<S> &params, const Mat<S> &d_hidden,
                              FlatVec<S> *grads) const {
  const ParamLayout &lay = params.layout;
  const ModelConfig &c = lay.config();
  const size_t h = c.hidden;
  const size_t heads = c.heads;
  const size_t d = h / heads;
  const auto n = static_cast<Eigen::Index>(ids_.size());
  const S scale = S(1) / std::sqrt(static_cast<S>(d));

  Mat<S> dh = d_hidden;
  for (size_t li = c.layers; li-- > 0;) {
    const ParamLayout::Layer &L = lay.layers[li];
    const LayerCache &lc = layers_[li];
    // Feed-forward block.
    Mat<S> d_r2 = LayerNormBackward(dh, lc.ffn_xhat, lc.ffn_rstd, params,
                                    L.ffn_ln_g, L.ffn_ln_b, grads);
    Mat<S> d_f = dropout_ ? Mat<S>(d_r2.cwiseProduct(lc.ffn_drop)) : d_r2;
    GW(grads, L.ffn_out_w, c.intermediate, h).noalias() +=
        lc.ffn_act.transpose() * d_f;
    GB(grads, L.ffn_out_b, h) += d_f.colwise().sum();
    Mat<S> d_act = d_f * W(params, L.ffn_out_w, c.intermediate, h).transpose();
    Mat<S> d_pre = d_act.cwiseProduct(
        lc.ffn_pre.unaryExpr([](S v) { return GeluGrad(v); }));
    GW(grads, L.ffn_in_w, h, c.intermediate).noalias() +=
        lc.h1.transpose() * d_pre;
    GB(grads, L.ffn_in_b, c.intermediate) += d_pre.colwise().sum();
    Mat<S> d_h1 = d_r2;
    d_h1.noalias() += d_pre * W(params, L.ffn_in_w, h, c.intermediate).transpose();

    // Attention block.
    Mat<S> d_r1 = LayerNormBackward(d_h1, lc.attn_xhat, lc.attn_rstd, params,
                                    L.attn_ln_g, L.attn_ln_b, grads);
    Mat<S> d_attn = dropout_ ? Mat<S>(d_r1.cwiseProduct(lc.attn_drop)) : d_r1;
    GW(grads, L.o_w, h, h).noalias() += lc.ctx.transpose() * d_attn;
    GB(grads, L.o_b, h) += d_attn.colwise().sum();
    Mat<S> d_ctx = d_attn * W(params, L.o_w, h, h).transpose();
    Mat<S> dq(n, static_cast<Eigen::Index>(h)), dk(n, static_cast<Eigen::Index>(h)),
        dv(n, static_cast<Eigen::Index>(h));
    for (size_t hd = 0; hd < heads; ++hd) {
      const auto off = static_cast<Eigen::Index>(hd * d);
      const auto dd = static_cast<Eigen::Index>(d);
      const Mat<S> &probs = lc.probs[hd];
      const Mat<S> d_ctx_h = d_ctx.middleCols(off, dd);
      dv.middleCols(off, dd).noalias() = probs.transpose() * d_ctx_h;
      Mat<S> d_probs = d_ctx_h * lc.v.middleCols(off, dd).transpose();
      Mat<S> d_scores(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const S dot = probs.row(i).dot(d_probs.row(i));
        d_scores.row(i) =
            probs.row(i).array() * (d_probs.row(i).array() - dot) * scale;
      }
      dq.middleCols(off, dd).noalias() = d_scores * lc.k.middleCols(off, dd);
      dk.middleCols(off, dd).noalias() =
          d_scores.transpose() * lc.q.middleCols(off, dd);
    }
    GW(grads, L.q_w, h, h).noalias() += lc.in.transpose() * dq;
    GB(grads, L.q_b, h) += dq.colwise().sum();
    GW(grads, L.k_w, h, h).noalias() += lc.in.transpose() * dk;
    GB(grads, L.k_b, h) += dk.colwise().sum();
    GW(grads, L.v_w, h, h).noalias() += lc.in.transpose() * dv;
    GB(grads, L.v_b, h) += dv.colwise().sum();
    dh = d_r1;
    dh.noalias() += dq * W(params, L.q_w, h, h).transpose();
    dh.noalias() += dk * W(params, L.k_w, h, h).transpose();
    dh.noalias() += dv * W(params, L.v_w, h, h).transpose();
  }

  if (dropout_) dh = dh.cwiseProduct(emb_drop_);
  Mat<S> dx = LayerNormBackward(dh, emb_xhat_, emb_rstd_, params, lay.emb_ln_g,
                                lay.emb_ln_b, grads);
  auto g_word = GW(grads, lay.word_emb, c.vocab_size, h);
  auto g_pos = GW(grads, lay.pos_emb, c.max_positions, h);
  auto g_type = GW(grads, lay.type_emb, c.type_vocab, h);
  for (Eigen::Index t = 0; t < n; ++t) {
    g_word.row(ids_[t]) += dx.row(t);
    g_pos.row(t) += dx.row(t);
    g_type.row(segments_[t]) += dx.row(t);
  }
}

template <typename S>
RowVec<S> Pool(const Params<S> &params, const Mat<S> &hidden) {
  const ParamLayout &lay = params.layout;
  const size_t h = lay.config().hidden;
  RowVec<S> pre = hidden.row(0) * W(params, lay.pooler_w, h, h);
  pre += B(params, lay.pooler_b, h);
  return pre.unaryExpr([](S v) { return std::tanh(v); });
}

template <typename S>
RowVec<S> PoolBackward(const Params<S> &params, const Mat<S> &hidden,
                       const RowVec<S> &pooled, const RowVec<S> &d_pooled,
                       FlatVec<S> *grads) {
  const ParamLayout &lay = params.layout;
  const size_t h = lay.config().hidden;
  RowVec<S> d_pre =
      d_pooled.array() * (S(1) - pooled.array().square());
  GW(grads, lay.pooler_w, h, h).noalias() += hidden.row(0).transpose() * d_pre;
  GB(grads, lay.pooler_b, h) += d_pre;
  return d_pre * W(params, lay.pooler_w, h, h).transpose();
}

namespace {

// MLM head on selected rows: GELU transform, layer norm, tied decoder.
template <typename S>
struct MlmHead {
  Mat<S> in, pre, act, xhat, normed, logits;
  RowVec<S> rstd;

  void Forward(const Params<S> &p, Mat<S> rows) {
    const ParamLayout &lay = p.layout;
    const ModelConfig &c = lay.config();
    in = std::move(rows);
    pre = Affine(in, p, lay.mlm_w, lay.mlm_b, c.hidden, c.hidden);
    act = pre.unaryExpr([](S v) { return Gelu(v); });
    LayerNormForward(act, p, lay.mlm_ln_g, lay.mlm_ln_b, &xhat, &rstd, &normed);
    logits = normed * W(p, lay.word_emb, c.vocab_size, c.hidden).transpose();
    logits.rowwise() += B(p, lay.mlm_bias, c.vocab_size);
  }

  // Returns d(in) given d(logits).
  Mat<S> Backward(const Params<S> &p, const Mat<S> &d_logits,
                  FlatVec<S> *g) const {
    const ParamLayout &lay = p.layout;
    const ModelConfig &c = lay.config();
    GB(g, lay.mlm_bias, c.vocab_size) += d_logits.colwise().sum();
    GW(g, lay.word_emb, c.vocab_size, c.hidden).noalias() +=
        d_logits.transpose() * normed;
    Mat<S> d_normed = d_logits * W(p, lay.word_emb, c.vocab_size, c.hidden);
    Mat<S> d_act = LayerNormBackward(d_normed, xhat, rstd, p, lay.mlm_ln_g,
                                     lay.mlm_ln_b, g);
    Mat<S> d_pre =
        d_act.cwiseProduct(pre.unaryExpr([](S v) { return GeluGrad(v); }));
    GW(g, lay.mlm_w, c.hidden, c.hidden).noalias() += in.transpose() * d_pre;
    GB(g, lay.mlm_b, c.hidden) += d_pre.colwise().sum();
    return d_pre * W(p, lay.mlm_w, c.hidden, c.hidden).transpose();
  }
};

template <typename S>
RowVec<S> NspLogits(const Params<S> &p, const RowVec<S> &pooled) {
  const ParamLayout &lay = p.layout;
  RowVec<S> out = pooled * W(p, lay.nsp_w, lay.config().hidden, 2);
  out += B(p, lay.nsp_b, 2);
  return out;
}

void RequirePretrainingHead(const ParamLayout &lay) {
  if (lay.head() != HeadKind::kPretraining) {
    throw ConfigError("parameters carry a " +
                      std::string(HeadKindName(lay.head())) +
                      " head, not MLM+NSP heads");
  }
}

}  // namespace

template <typename S>
ForwardOutput<S> Forward(const Params<S> &params,
                         std::span<const PretrainExample> batch) {
  const ParamLayout &lay = params.layout;
  RequirePretrainingHead(lay);
  const ModelConfig &c = lay.config();
  ForwardOutput<S> out;
  out.nsp_logits.resize(static_cast<Eigen::Index>(batch.size()), 2);
  out.pooled.resize(static_cast<Eigen::Index>(batch.size()),
                    static_cast<Eigen::Index>(c.hidden));
  EncoderPass<S> pass;
  for (size_t b = 0; b < batch.size(); ++b) {
    const PretrainExample &ex = batch[b];
    ValidateExample(ex, c);
    pass.Forward(params, ex.input_ids, ex.segment_ids, ex.attention_mask,
                 ex.input_ids.size());
    MlmHead<S> head;
    head.Forward(params, pass.hidden());
    out.mlm_logits.push_back(std::move(head.logits));
    const RowVec<S> pooled = Pool(params, pass.hidden());
    out.pooled.row(static_cast<Eigen::Index>(b)) = pooled;
    out.nsp_logits.row(static_cast<Eigen::Index>(b)) = NspLogits(params, pooled);
  }
  return out;
}

template <typename S>
Losses ComputeLosses(const ForwardOutput<S> &outputs,
                     std::span<const PretrainExample> batch) {
  Losses losses;
  double mlm_sum = 0.0, nsp_sum = 0.0;
  RowVec<S> probs;
  for (size_t b = 0; b < batch.size(); ++b) {
    const PretrainExample &ex = batch[b];
    const Mat<S> &logits = outputs.mlm_logits[b];
    for (size_t i = 0; i < ex.mlm_labels.size(); ++i) {
      const int32_t label = ex.mlm_labels[i];
      if (label == kIgnoreLabel) continue;
      const auto row = logits.row(static_cast<Eigen::Index>(i));
      const double lse = SoftmaxRow<S>(row, &probs);
      mlm_sum += lse - static_cast<double>(row(label));
      if (ArgMax<S>(row) == label) ++losses.mlm_correct;
      ++losses.masked_positions;
    }
    const auto nsp = outputs.nsp_logits.row(static_cast<Eigen::Index>(b));
    const int target = static_cast<int>(ex.nsp_label);
    nsp_sum += SoftmaxRow<S>(nsp, &probs) - static_cast<double>(nsp(target));
    if (ArgMax<S>(nsp) == target) ++losses.nsp_correct;
  }
  losses.mlm_empty = losses.masked_positions == 0;
  losses.mlm_loss = losses.mlm_empty ? 0.0 : mlm_sum / losses.masked_positions;
  losses.nsp_loss = batch.empty() ? 0.0 : nsp_sum / batch.size();
  losses.total = losses.mlm_loss + losses.nsp_loss;
  return losses;
}

template <typename S>
Losses LossAndGradients(const Params<S> &params,
                        std::span<const PretrainExample> batch,
                        FlatVec<S> *grads, Rng *dropout_rng) {
  const ParamLayout &lay = params.layout;
  RequirePretrainingHead(lay);
  const ModelConfig &c = lay.config();
  if (grads != nullptr) {
    grads->setZero(static_cast<Eigen::Index>(lay.total()));
  }
  Losses losses;
  for (const auto &ex : batch) {
    ValidateExample(ex, c);
    for (int32_t label : ex.mlm_labels) {
      if (label != kIgnoreLabel) ++losses.masked_positions;
    }
  }
  losses.mlm_empty = losses.masked_positions == 0;
  const S mlm_scale =
      losses.mlm_empty ? S(0) : S(1) / static_cast<S>(losses.masked_positions);
  const S nsp_scale = batch.empty() ? S(0) : S(1) / static_cast<S>(batch.size());

  double mlm_sum = 0.0, nsp_sum = 0.0;
  EncoderPass<S> pass;
  RowVec<S> probs;
  for (const auto &ex : batch) {
    const size_t length = ActiveLength(ex);
    pass.Forward(params, ex.input_ids, ex.segment_ids, ex.attention_mask,
                 length, dropout_rng);
    const Mat<S> &hidden = pass.hidden();
    Mat<S> d_hidden;
    if (grads != nullptr) d_hidden.setZero(hidden.rows(), hidden.cols());

    std::vector<Eigen::Index> rows;
    for (size_t i = 0; i < length; ++i) {
      if (ex.mlm_labels[i] != kIgnoreLabel) rows.push_back(static_cast<Eigen::Index>(i));
    }
    if (!rows.empty()) {
      Mat<S> gathered(static_cast<Eigen::Index>(rows.size()), hidden.cols());
      for (size_t r = 0; r < rows.size(); ++r) {
        gathered.row(static_cast<Eigen::Index>(r)) = hidden.row(rows[r]);
      }
      MlmHead<S> head;
      head.Forward(params, std::move(gathered));
      Mat<S> d_logits(head.logits.rows(), head.logits.cols());
      for (size_t r = 0; r < rows.size(); ++r) {
        const auto ri = static_cast<Eigen::Index>(r);
        const int32_t label = ex.mlm_labels[rows[r]];
        const double lse = SoftmaxRow<S>(head.logits.row(ri), &probs);
        mlm_sum += lse - static_cast<double>(head.logits(ri, label));
        if (ArgMax<S>(head.logits.row(ri)) == label) ++losses.mlm_correct;
        probs(label) -= S(1);
        d_logits.row(ri) = probs * mlm_scale;
      }
      if (grads != nullptr) {
        const Mat<S> d_rows = head.Backward(params, d_logits, grads);
        for (size_t r = 0; r < rows.size(); ++r) {
          d_hidden.row(rows[r]) += d_rows.row(static_cast<Eigen::Index>(r));
        }
      }
    }

    const RowVec<S> pooled = Pool(params, hidden);
    const RowVec<S> nsp = NspLogits(params, pooled);
    const int target = static_cast<int>(ex.nsp_label);
    nsp_sum += SoftmaxRow<S>(nsp, &probs) - static_cast<double>(nsp(target));
    if (ArgMax<S>(nsp) == target) ++losses.nsp_correct;
    if (grads != nullptr) {
      probs(target) -= S(1);
      const RowVec<S> d_nsp = probs * nsp_scale;
      GW(grads, lay.nsp_w, c.hidden, 2).noalias() += pooled.transpose() * d_nsp;
      GB(grads, lay.nsp_b, 2) += d_nsp;
      const RowVec<S> d_pooled = d_nsp * W(params, lay.nsp_w, c.hidden, 2).transpose();
      d_hidden.row(0) += PoolBackward(params, hidden, pooled, d_pooled, grads);
      pass.Backward(params, d_hidden, grads);
    }
  }
  losses.mlm_loss = losses.mlm_empty ? 0.0 : mlm_sum / losses.masked_positions;
  losses.nsp_loss = batch.empty() ? 0.0 : nsp_sum / batch.size();
  losses.total = losses.mlm_loss + losses.nsp_loss;
  return losses;
}

GradCheckResult FiniteDifferenceCheck(const Params<double> &params,
                                      std::span<const PretrainExample> batch,
                                      std::span<const size_t> indices,
                                      double h) {
  FlatVec<double> grads;
  const Losses base = LossAndGradients(params, batch, &grads);
  if (!std::isfinite(base.total)) {
    throw DataError("loss is not finite; refusing to difference");
  }
  GradCheckResult result;
  Params<double> probe = params;
  for (size_t k = 0; k < indices.size(); ++k) {
    const size_t idx = indices[k];
    if (idx >= params.layout.total()) throw ConfigError("index out of range");
    const double saved = probe.values(static_cast<Eigen::Index>(idx));
    probe.values(static_cast<Eigen::Index>(idx)) = saved + h;
    const double up = LossAndGradients<double>(probe, batch, nullptr).total;
    probe.values(static_cast<Eigen::Index>(idx)) = saved - h;
    const double down = LossAndGradients<double>(probe, batch, nullptr).total;
    probe.values(static_cast<Eigen::Index>(idx)) = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double analytic = grads(static_cast<Eigen::Index>(idx));
    const double denom =
        std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    const double rel = std::abs(analytic - numeric) / denom;
    result.analytic.push_back(analytic);
    result.numeric.push_back(numeric);
    if (k == 0 || rel > result.max_relative_error) {
      result.max_relative_error = rel;
      result.worst_index = idx;
    }
  }
  return result;
}

void OptimizerConfig::Validate() const {
  if (!(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in (0, 1)");
  }
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  if (linear_decay && warmup_steps >= max_steps) {
    throw ConfigError("linear decay needs warmup_steps < max_steps");
  }
}

double OptimizerConfig::RateAt(uint64_t step) const {
  if (step < warmup_steps) {
    return learning_rate * static_cast<double>(step + 1) /
           static_cast<double>(warmup_steps);
  }
  if (!linear_decay || step >= max_steps) {
    return linear_decay ? 0.0 : learning_rate;
  }
  return learning_rate * static_cast<double>(max_steps - step) /
         static_cast<double>(max_steps - warmup_steps);
}

template <typename S>
void AdamStep(FlatVec<S> *params, const FlatVec<S> &grads, AdamState<S> *state,
              const OptimizerConfig &config, uint64_t t, double lr) {
  if (t == 0) throw ConfigError("Adam step index is 1-based");
  if (state->m.size() != params->size()) {
    *state = AdamState<S>::Zeros(static_cast<size_t>(params->size()));
  }
  const S b1 = static_cast<S>(config.beta1);
  const S b2 = static_cast<S>(config.beta2);
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));
  const S step = static_cast<S>(lr / c1);
  const S inv_c2 = static_cast<S>(1.0 / c2);
  const S eps = static_cast<S>(config.epsilon);
  state->m = b1 * state->m + (S(1) - b1) * grads;
  state->v = b2 * state->v + (S(1) - b2) * grads.cwiseProduct(grads);
  params->array() -=
      step * state->m.array() / ((state->v.array() * inv_c2).sqrt() + eps);
  state->t = t;
}

#define PERSIANLM_INSTANTIATE(S)                                              \
  template Params<S> InitParams<S>(const ModelConfig &, uint64_t, HeadKind,   \
                                   size_t);                                   \
  template class EncoderPass<S>;                                              \
  template RowVec<S> Pool<S>(const Params<S> &, const Mat<S> &);              \
  template RowVec<S> PoolBackward<S>(const Params<S> &, const Mat<S> &,       \
                                     const RowVec<S> &, const RowVec<S> &,    \
                                     FlatVec<S> *);                           \
  template ForwardOutput<S> Forward<S>(const Params<S> &,                     \
                                       std::span<const PretrainExample>);     \
  template Losses ComputeLosses<S>(const ForwardOutput<S> &,                  \
                                   std::span<const PretrainExample>);         \
  template Losses LossAndGradients<S>(const Params<S> &,                      \
                                      std::span<const PretrainExample>,       \
                                      FlatVec<S> *, Rng *);                   \
  template void AdamStep<S>(FlatVec<S> *, const FlatVec<S> &, AdamState<S> *, \
                            const OptimizerConfig &, uint64_t, double);

PERSIANLM_INSTANTIATE(float)
PERSIANLM_INSTANTIATE(double)

#undef PERSIANLM_INSTANTIATE

}  // namespace persianlm
