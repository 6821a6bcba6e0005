//
// Project molgrep - Copyright 2026 The molgrep Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLGREP_SEQ_SEQ_HPP_
#define MOLGREP_SEQ_SEQ_HPP_

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "molgrep/chem/vocab.hpp"
#include "molgrep/common.hpp"
#include "molgrep/img/raster.hpp"
#include "molgrep/nn/adam.hpp"
#include "molgrep/nn/gridlstm.hpp"
#include "molgrep/nn/ops.hpp"
#include "molgrep/nn/tape.hpp"

namespace molgrep::seq {

using img::RasterImage;

// Image-to-string model: a convolutional encoder produces a state vector and
// an L x D feature-grid memory; a GridLSTM decoder with soft attention emits
// one character token per step.

struct EncoderStage {
  int channels = 0;
  bool pool = false;
};

// Early stages keep full resolution (no pooling) so thin strokes survive;
// the state vector width must match the decoder hidden width because the
// state is fed through the decoder's input projection to seed its state.
struct EncoderConfig {
  std::vector<EncoderStage> stages = {{16, false}, {16, false}, {32, true},
                                      {32, true},  {64, true},  {64, true}};
  int state_dim = 128;
};

struct DecoderConfig {
  int hidden = 128;
  int layers = 3;
  int vocab = 65;
  int max_len = 100;
  double confidence_threshold = 0.01;
};

enum class PredictStatus { Ok, InvalidSmiles, LowConfidence };
const char* status_name(PredictStatus s);

struct Prediction {
  std::string smiles;
  std::vector<int> tokens;                   // chosen token per decode step
  std::vector<double> step_probs;            // chosen-token probability per step
  double confidence = 1.0;                   // product of step_probs
  std::vector<nn::Tensor<float>> attention;  // L-vector per decode step
  int grid_h = 0;
  int grid_w = 0;
  PredictStatus status = PredictStatus::Ok;
};

void validate_configs(const EncoderConfig& enc, const DecoderConfig& dec);
std::vector<std::pair<std::string, std::vector<int>>> seq_param_shapes(const EncoderConfig& enc,
                                                                       const DecoderConfig& dec);
long long seq_param_count(const EncoderConfig& enc, const DecoderConfig& dec);
std::string seq_config_echo(const EncoderConfig& enc, const DecoderConfig& dec);

// Conv kernels He-normal, dense and recurrent weights 1/sqrt(fan-in), biases
// zero except forget gates at one, PReLU slopes 0.25.
template <typename T>
void init_seq(nn::ParamStore<T>& store, const EncoderConfig& enc, const DecoderConfig& dec,
              uint64_t seed) {
  validate_configs(enc, dec);
  Rng rng(derive_seed(seed, "seq-init"));
  for (const auto& [name, shape] : seq_param_shapes(enc, dec)) {
    bool is_weight = name.size() > 2 && name.compare(name.size() - 2, 2, ".w") == 0;
    bool is_bias = name.size() > 2 && name.compare(name.size() - 2, 2, ".b") == 0;
    if (name.find("alpha") != std::string::npos) {
      store.add(name, nn::Tensor<T>(shape, T(0.25)));
    } else if (is_bias) {
      nn::Tensor<T> b(shape);
      if (name.find(".f.") != std::string::npos)
        std::fill(b.data.begin(), b.data.end(), T(1));
      store.add(name, std::move(b));
    } else if (is_weight || name.find("embed") != std::string::npos) {
      size_t fan_in = 1;
      for (size_t i = 0; i + 1 < shape.size(); ++i) fan_in *= static_cast<size_t>(shape[i]);
      if (shape.size() == 4) {
        fan_in = static_cast<size_t>(shape[1]) * shape[2] * shape[3];
        store.add(name, nn::randn<T>(shape, rng, std::sqrt(2.0 / static_cast<double>(fan_in))));
      } else {
        fan_in = static_cast<size_t>(shape[0]);
        store.add(name, nn::randn<T>(shape, rng, std::sqrt(1.0 / static_cast<double>(fan_in))));
      }
    } else {
      fail(Err::BadConfig, "unrecognized parameter kind " + name);
    }
  }
}

template <typename T>
struct EncoderOut {
  int state = -1;   // N x state_dim
  int memory = -1;  // N x L x D
  int grid_h = 0;
  int grid_w = 0;
};

// Records the encoder over white-high pages; the graph works on inverted
// ink-high values. Pooling stages require even spatial dims.
template <typename T>
EncoderOut<T> encoder_graph(nn::Tape<T>& tape, nn::Binder<T>& bind, const nn::Tensor<T>& images,
                            const EncoderConfig& enc) {
  if (images.rank() != 4 || images.dim(1) != 1)
    fail(Err::ShapeMismatch, "encoder expects Nx1xHxW pages");

  nn::Tensor<T> inv = images;
  for (size_t i = 0; i < inv.numel(); ++i) inv[i] = T(1) - inv[i];
  int x = tape.push(std::move(inv));

  int h = images.dim(2), w = images.dim(3);
  for (size_t i = 0; i < enc.stages.size(); ++i) {
    std::string stem = "enc.stage" + std::to_string(i);
    int cw = bind.leaf(tape, stem + ".w");
    int cb = bind.leaf(tape, stem + ".b");
    int ca = bind.leaf(tape, stem + ".alpha");
    x = nn::prelu(tape, nn::conv2d(tape, x, cw, cb), ca);
    if (enc.stages[i].pool) {
      x = nn::maxpool2x2(tape, x);
      h /= 2;
      w /= 2;
    }
  }

  EncoderOut<T> out;
  out.grid_h = h;
  out.grid_w = w;
  out.memory = nn::nchw_to_nlc(tape, x);
  int sw = bind.leaf(tape, "enc.state.w");
  int sb = bind.leaf(tape, "enc.state.b");
  out.state = nn::tanh_op(tape, nn::linear(tape, nn::spatial_mean(tape, x), sw, sb));
  return out;
}

template <typename T>
struct DecoderVars {
  int embed = -1;
  int inproj_w = -1, inproj_b = -1;
  int att_w = -1;
  int out_w = -1, out_b = -1;
  std::vector<nn::GridLstmLayer> layers;
};

template <typename T>
DecoderVars<T> bind_decoder(nn::Tape<T>& tape, nn::Binder<T>& bind, const DecoderConfig& dec) {
  DecoderVars<T> v;
  v.embed = bind.leaf(tape, "dec.embed");
  v.inproj_w = bind.leaf(tape, "dec.inproj.w");
  v.inproj_b = bind.leaf(tape, "dec.inproj.b");
  v.att_w = bind.leaf(tape, "dec.att.w");
  v.out_w = bind.leaf(tape, "dec.out.w");
  v.out_b = bind.leaf(tape, "dec.out.b");
  for (int l = 0; l < dec.layers; ++l) {
    std::string stem = "dec.grid" + std::to_string(l) + ".";
    nn::GridLstmLayer p;
    p.wi_time = bind.leaf(tape, stem + "t.i.w");
    p.wf_time = bind.leaf(tape, stem + "t.f.w");
    p.wo_time = bind.leaf(tape, stem + "t.o.w");
    p.wg_time = bind.leaf(tape, stem + "t.g.w");
    p.bi_time = bind.leaf(tape, stem + "t.i.b");
    p.bf_time = bind.leaf(tape, stem + "t.f.b");
    p.bo_time = bind.leaf(tape, stem + "t.o.b");
    p.bg_time = bind.leaf(tape, stem + "t.g.b");
    p.wi_depth = bind.leaf(tape, stem + "d.i.w");
    p.wf_depth = bind.leaf(tape, stem + "d.f.w");
    p.wo_depth = bind.leaf(tape, stem + "d.o.w");
    p.wg_depth = bind.leaf(tape, stem + "d.g.w");
    p.bi_depth = bind.leaf(tape, stem + "d.i.b");
    p.bf_depth = bind.leaf(tape, stem + "d.f.b");
    p.bo_depth = bind.leaf(tape, stem + "d.o.b");
    p.bg_depth = bind.leaf(tape, stem + "d.g.b");
    v.layers.push_back(p);
  }
  return v;
}

// Zeroed per-layer states advanced once with the projected state vector, so
// the encoder output conditions every later step.
template <typename T>
std::vector<nn::GridLstmState> seed_decoder(nn::Tape<T>& tape, const DecoderVars<T>& v, int state,
                                            const DecoderConfig& dec) {
  const int n = tape.value(state).dim(0);
  std::vector<nn::GridLstmState> states(static_cast<size_t>(dec.layers));
  for (auto& s : states) {
    s.h = tape.push(nn::Tensor<T>({n, dec.hidden}));
    s.c = tape.push(nn::Tensor<T>({n, dec.hidden}));
  }
  int x = nn::linear(tape, state, v.inproj_w, v.inproj_b);
  nn::gridlstm_step(tape, x, states, v.layers);
  return states;
}

template <typename T>
struct StepOut {
  int logits = -1;               // N x vocab
  nn::Tensor<T> att_weights;     // N x L snapshot
};

template <typename T>
StepOut<T> decoder_step(nn::Tape<T>& tape, const DecoderVars<T>& v,
                        std::vector<nn::GridLstmState>& states, const std::vector<int>& prev,
                        int memory, const DecoderConfig& dec) {
  int x = nn::linear(tape, nn::embed(tape, v.embed, prev), v.inproj_w, v.inproj_b);
  int top = nn::gridlstm_step(tape, x, states, v.layers);
  nn::Attention<T> att = nn::attention(tape, top, memory, v.att_w);
  int joined = nn::concat_channels(tape, top, att.context);
  StepOut<T> out;
  out.logits = nn::linear(tape, joined, v.out_w, v.out_b);
  out.att_weights = std::move(att.weights);
  (void)dec;
  return out;
}

// Teacher-forced loss: mean cross entropy per non-PAD target token. Target
// rows are tokenized to exactly max_len entries starting with START.
template <typename T>
int seq_loss(nn::Tape<T>& tape, nn::Binder<T>& bind, const nn::Tensor<T>& images,
             const std::vector<std::vector<int>>& targets, const EncoderConfig& enc,
             const DecoderConfig& dec) {
  validate_configs(enc, dec);
  const int n = images.dim(0);
  if (static_cast<int>(targets.size()) != n)
    fail(Err::ShapeMismatch, "one target row per image");
  int steps = 0;
  long long total = 0;
  for (const std::vector<int>& row : targets) {
    if (static_cast<int>(row.size()) != dec.max_len || row[0] != chem::Vocabulary::kStart)
      fail(Err::ShapeMismatch, "target rows must be tokenized to max_len");
    int last = 0;
    for (int t = 0; t < dec.max_len; ++t)
      if (row[static_cast<size_t>(t)] != chem::Vocabulary::kPad) last = t;
    steps = std::max(steps, last);
    total += last;
  }
  if (total == 0) fail(Err::ShapeMismatch, "all target rows are empty");

  EncoderOut<T> eo = encoder_graph(tape, bind, images, enc);
  DecoderVars<T> v = bind_decoder(tape, bind, dec);
  std::vector<nn::GridLstmState> states = seed_decoder(tape, v, eo.state, dec);

  int loss = -1;
  std::vector<int> prev(static_cast<size_t>(n)), tgt(static_cast<size_t>(n));
  for (int t = 0; t < steps; ++t) {
    int live = 0;
    for (int i = 0; i < n; ++i) {
      prev[static_cast<size_t>(i)] = targets[static_cast<size_t>(i)][static_cast<size_t>(t)];
      tgt[static_cast<size_t>(i)] = targets[static_cast<size_t>(i)][static_cast<size_t>(t) + 1];
      live += tgt[static_cast<size_t>(i)] != chem::Vocabulary::kPad ? 1 : 0;
    }
    StepOut<T> so = decoder_step(tape, v, states, prev, eo.memory, dec);
    int ce = nn::softmax_cross_entropy(tape, so.logits, tgt, chem::Vocabulary::kPad);
    int part = nn::scale(tape, ce, static_cast<T>(live) / static_cast<T>(total));
    loss = loss < 0 ? part : nn::add(tape, loss, part);
  }
  return loss;
}

// One Adam update over a teacher-forced batch; returns the loss.
template <typename T>
double seq_train_step(nn::ParamStore<T>& store, const nn::Tensor<T>& images,
                      const std::vector<std::vector<int>>& targets, const EncoderConfig& enc,
                      const DecoderConfig& dec, const nn::AdamConfig& opt) {
  nn::Tape<T> tape;
  nn::Binder<T> bind(store);
  int loss = seq_loss(tape, bind, images, targets, enc, dec);
  double value = static_cast<double>(tape.value(loss)[0]);
  tape.backward(loss);
  adam_step(store, bind.grads(tape), opt);
  return value;
}

template <typename T>
struct EncodedT {
  nn::Tensor<T> state;   // state_dim
  nn::Tensor<T> memory;  // L x D
  int grid_h = 0;
  int grid_w = 0;
};
using Encoded = EncodedT<float>;

template <typename T>
EncodedT<T> encode(const RasterImage& image, nn::ParamStore<T>& store, const EncoderConfig& enc);
template <typename T>
Prediction decode_greedy(const EncodedT<T>& encoded, nn::ParamStore<T>& store,
                         const DecoderConfig& dec);
template <typename T>
Prediction predict_structure(const RasterImage& image, nn::ParamStore<T>& store,
                             const EncoderConfig& enc, const DecoderConfig& dec);

// Inverse of seq_config_echo; the confidence threshold keeps its default.
std::pair<EncoderConfig, DecoderConfig> seq_config_parse(const std::string& echo);

// One heat map per character of the prediction, bilinearly upscaled from the
// encoder grid to out_w x out_h.
std::vector<RasterImage> attention_maps(const Prediction& pred, int out_w, int out_h);

// Writes the maps as `<stem>_att<index>_<char>.pgm` under dir and returns the
// paths. Non-alphanumeric characters become a two-digit hex code.
std::vector<std::string> write_attention_maps(const Prediction& pred, int out_w, int out_h,
                                              const std::string& dir, const std::string& stem);

}  // namespace molgrep::seq

#endif  // MOLGREP_SEQ_SEQ_HPP_
