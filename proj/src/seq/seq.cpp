//
// Project molgrep - Copyright 2026 The molgrep Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "molgrep/chem/smiles.hpp"
#include "molgrep/seq/seq.hpp"

namespace molgrep::seq {

const char* status_name(PredictStatus s) {
  switch (s) {
    case PredictStatus::Ok: return "ok";
    case PredictStatus::InvalidSmiles: return "invalid_smiles";
    case PredictStatus::LowConfidence: return "low_confidence";
  }
  return "ok";
}

void validate_configs(const EncoderConfig& enc, const DecoderConfig& dec) {
  if (enc.stages.empty()) fail(Err::BadConfig, "encoder needs at least one stage");
  for (const EncoderStage& s : enc.stages)
    if (s.channels < 1) fail(Err::BadConfig, "encoder stage channels must be positive");
  if (enc.state_dim != dec.hidden)
    fail(Err::BadConfig, "state width must match the decoder hidden width");
  if (dec.hidden < 1 || dec.layers < 1) fail(Err::BadConfig, "decoder needs layers and width");
  if (dec.max_len < 3) fail(Err::BadConfig, "max decode length too small");
  if (dec.vocab != chem::Vocabulary().size())
    fail(Err::BadConfig, "vocabulary size is fixed by the token inventory");
  if (dec.confidence_threshold < 0.0 || dec.confidence_threshold > 1.0)
    fail(Err::BadConfig, "confidence threshold must lie in [0, 1]");
}

std::vector<std::pair<std::string, std::vector<int>>> seq_param_shapes(const EncoderConfig& enc,
                                                                       const DecoderConfig& dec) {
  validate_configs(enc, dec);
  std::vector<std::pair<std::string, std::vector<int>>> out;
  int cin = 1;
  for (size_t i = 0; i < enc.stages.size(); ++i) {
    std::string stem = "enc.stage" + std::to_string(i);
    int ch = enc.stages[i].channels;
    out.push_back({stem + ".w", {ch, cin, 5, 5}});
    out.push_back({stem + ".b", {ch}});
    out.push_back({stem + ".alpha", {ch}});
    cin = ch;
  }
  out.push_back({"enc.state.w", {cin, enc.state_dim}});
  out.push_back({"enc.state.b", {enc.state_dim}});

  out.push_back({"dec.embed", {dec.vocab, dec.hidden}});
  out.push_back({"dec.inproj.w", {dec.hidden, dec.hidden}});
  out.push_back({"dec.inproj.b", {dec.hidden}});
  for (int l = 0; l < dec.layers; ++l)
    for (const char* axis : {"t", "d"})
      for (const char* gate : {"i", "f", "o", "g"}) {
        std::string stem =
            "dec.grid" + std::to_string(l) + "." + axis + "." + gate;
        out.push_back({stem + ".w", {2 * dec.hidden, dec.hidden}});
        out.push_back({stem + ".b", {dec.hidden}});
      }
  out.push_back({"dec.att.w", {dec.hidden, cin}});
  out.push_back({"dec.out.w", {dec.hidden + cin, dec.vocab}});
  out.push_back({"dec.out.b", {dec.vocab}});
  return out;
}

long long seq_param_count(const EncoderConfig& enc, const DecoderConfig& dec) {
  long long n = 0;
  for (const auto& [name, shape] : seq_param_shapes(enc, dec)) {
    (void)name;
    long long k = 1;
    for (int d : shape) k *= d;
    n += k;
  }
  return n;
}

std::string seq_config_echo(const EncoderConfig& enc, const DecoderConfig& dec) {
  std::string s = "seq stages=";
  for (size_t i = 0; i < enc.stages.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(enc.stages[i].channels);
    s += enc.stages[i].pool ? "p" : "n";
  }
  s += " state=" + std::to_string(enc.state_dim);
  s += " hidden=" + std::to_string(dec.hidden);
  s += " layers=" + std::to_string(dec.layers);
  s += " vocab=" + std::to_string(dec.vocab);
  s += " maxlen=" + std::to_string(dec.max_len);
  return s;
}

template <typename T>
EncodedT<T> encode(const RasterImage& image, nn::ParamStore<T>& store, const EncoderConfig& enc) {
  if (image.width < 1 || image.height < 1) fail(Err::ShapeMismatch, "empty image");
  nn::Tensor<T> input({1, 1, image.height, image.width});
  for (size_t i = 0; i < input.numel(); ++i) input[i] = static_cast<T>(image.pixels[i]);

  nn::Tape<T> tape;
  nn::Binder<T> bind(store);
  EncoderOut<T> eo = encoder_graph(tape, bind, input, enc);

  EncodedT<T> out;
  out.grid_h = eo.grid_h;
  out.grid_w = eo.grid_w;
  const nn::Tensor<T>& sv = tape.value(eo.state);
  out.state = nn::Tensor<T>({sv.dim(1)});
  std::copy(sv.data.begin(), sv.data.end(), out.state.data.begin());
  const nn::Tensor<T>& mv = tape.value(eo.memory);
  out.memory = nn::Tensor<T>({mv.dim(1), mv.dim(2)});
  std::copy(mv.data.begin(), mv.data.end(), out.memory.data.begin());
  return out;
}

template <typename T>
Prediction decode_greedy(const EncodedT<T>& encoded, nn::ParamStore<T>& store,
                         const DecoderConfig& dec) {
  if (static_cast<int>(encoded.state.numel()) != dec.hidden)
    fail(Err::ShapeMismatch, "state width must match the decoder hidden width");
  if (encoded.memory.rank() != 2) fail(Err::ShapeMismatch, "memory must be LxD");
  const int L = encoded.memory.dim(0);
  if (encoded.grid_h * encoded.grid_w != L)
    fail(Err::ShapeMismatch, "grid dims must multiply to the memory rows");

  chem::Vocabulary vocab;
  if (dec.vocab != vocab.size())
    fail(Err::BadConfig, "vocabulary size is fixed by the token inventory");

  nn::Tape<T> tape;
  nn::Binder<T> bind(store);
  DecoderVars<T> v = bind_decoder(tape, bind, dec);

  nn::Tensor<T> st({1, dec.hidden});
  st.data = encoded.state.data;
  int state = tape.push(std::move(st));
  nn::Tensor<T> mem({1, L, encoded.memory.dim(1)});
  mem.data = encoded.memory.data;
  int memory = tape.push(std::move(mem));

  std::vector<nn::GridLstmState> states = seed_decoder(tape, v, state, dec);

  Prediction pred;
  pred.grid_h = encoded.grid_h;
  pred.grid_w = encoded.grid_w;
  int prev = chem::Vocabulary::kStart;
  for (int t = 0; t < dec.max_len; ++t) {
    StepOut<T> so = decoder_step(tape, v, states, {prev}, memory, dec);
    const nn::Tensor<T>& lv = tape.value(so.logits);
    double m = static_cast<double>(lv[0]);
    for (size_t j = 1; j < lv.numel(); ++j) m = std::max(m, static_cast<double>(lv[j]));
    double sum = 0.0;
    std::vector<double> p(lv.numel());
    for (size_t j = 0; j < lv.numel(); ++j) {
      p[j] = std::exp(static_cast<double>(lv[j]) - m);
      sum += p[j];
    }
    int best = 0;
    for (size_t j = 1; j < p.size(); ++j)
      if (p[j] > p[static_cast<size_t>(best)]) best = static_cast<int>(j);
    double prob = p[static_cast<size_t>(best)] / sum;

    pred.tokens.push_back(best);
    pred.step_probs.push_back(prob);
    pred.confidence *= prob;
    nn::Tensor<float> w({L});
    for (size_t j = 0; j < so.att_weights.numel(); ++j)
      w[j] = static_cast<float>(so.att_weights[j]);
    pred.attention.push_back(std::move(w));

    if (best == chem::Vocabulary::kEnd) break;
    prev = best;
  }
  pred.smiles = vocab.decode(pred.tokens);
  return pred;
}

template <typename T>
Prediction predict_structure(const RasterImage& image, nn::ParamStore<T>& store,
                             const EncoderConfig& enc, const DecoderConfig& dec) {
  validate_configs(enc, dec);
  Prediction pred = decode_greedy(encode(image, store, enc), store, dec);
  bool valid = true;
  try {
    chem::parse_smiles(pred.smiles);
  } catch (const Error&) {
    valid = false;
  }
  if (!valid)
    pred.status = PredictStatus::InvalidSmiles;
  else if (pred.confidence < dec.confidence_threshold)
    pred.status = PredictStatus::LowConfidence;
  else
    pred.status = PredictStatus::Ok;
  return pred;
}

std::vector<RasterImage> attention_maps(const Prediction& pred, int out_w, int out_h) {
  if (pred.grid_h < 1 || pred.grid_w < 1) fail(Err::ShapeMismatch, "prediction carries no grid");
  const size_t L = static_cast<size_t>(pred.grid_h) * pred.grid_w;
  if (pred.attention.size() < pred.tokens.size())
    fail(Err::ShapeMismatch, "prediction lacks per-step attention");
  chem::Vocabulary vocab;
  std::vector<RasterImage> maps;
  for (size_t t = 0; t < pred.tokens.size(); ++t) {
    int tok = pred.tokens[t];
    if (tok == chem::Vocabulary::kEnd) break;
    if (vocab.char_of(tok) == '\0' && tok != chem::Vocabulary::kUnk) continue;
    if (pred.attention[t].numel() != L) fail(Err::ShapeMismatch, "attention row width mismatch");
    RasterImage grid(pred.grid_w, pred.grid_h);
    for (size_t i = 0; i < L; ++i) grid.pixels[i] = pred.attention[t][i];
    maps.push_back(img::resize_bilinear(grid, out_w, out_h));
  }
  return maps;
}

std::vector<std::string> write_attention_maps(const Prediction& pred, int out_w, int out_h,
                                              const std::string& dir, const std::string& stem) {
  std::vector<RasterImage> maps = attention_maps(pred, out_w, out_h);
  if (maps.size() != pred.smiles.size()) fail(Err::ShapeMismatch, "one map per character");
  std::filesystem::create_directories(dir);
  std::vector<std::string> paths;
  for (size_t i = 0; i < maps.size(); ++i) {
    char c = pred.smiles[i];
    std::string tag;
    if (std::isalnum(static_cast<unsigned char>(c))) {
      tag = std::string(1, c);
    } else {
      char buf[8];
      std::snprintf(buf, sizeof(buf), "x%02x", static_cast<unsigned>(c) & 0xff);
      tag = buf;
    }
    std::string path = dir + "/" + stem + "_att" + std::to_string(i) + "_" + tag + ".pgm";
    img::write_pgm(path, maps[i]);
    paths.push_back(path);
  }
  return paths;
}

std::pair<EncoderConfig, DecoderConfig> seq_config_parse(const std::string& echo) {
  std::vector<std::string> parts = split(strip(echo), ' ');
  if (parts.empty() || parts[0] != "seq") fail(Err::BadConfig, "not a seq config echo: " + echo);
  EncoderConfig enc;
  enc.stages.clear();
  DecoderConfig dec;
  for (size_t i = 1; i < parts.size(); ++i) {
    if (parts[i].empty()) continue;
    std::vector<std::string> kv = split(parts[i], '=');
    if (kv.size() != 2) fail(Err::BadConfig, "malformed echo field: " + parts[i]);
    const std::string& key = kv[0];
    const std::string& val = kv[1];
    if (key == "stages") {
      for (const std::string& st : split(val, ',')) {
        if (st.size() < 2 || (st.back() != 'p' && st.back() != 'n'))
          fail(Err::BadConfig, "bad stage spec: " + st);
        EncoderStage stage;
        stage.channels = std::stoi(st.substr(0, st.size() - 1));
        stage.pool = st.back() == 'p';
        enc.stages.push_back(stage);
      }
    } else if (key == "state") {
      enc.state_dim = std::stoi(val);
    } else if (key == "hidden") {
      dec.hidden = std::stoi(val);
    } else if (key == "layers") {
      dec.layers = std::stoi(val);
    } else if (key == "vocab") {
      dec.vocab = std::stoi(val);
    } else if (key == "maxlen") {
      dec.max_len = std::stoi(val);
    } else {
      fail(Err::BadConfig, "unknown echo field: " + key);
    }
  }
  validate_configs(enc, dec);
  return {enc, dec};
}

template EncodedT<float> encode(const RasterImage&, nn::ParamStore<float>&, const EncoderConfig&);
template EncodedT<double> encode(const RasterImage&, nn::ParamStore<double>&,
                                 const EncoderConfig&);
template Prediction decode_greedy(const EncodedT<float>&, nn::ParamStore<float>&,
                                  const DecoderConfig&);
template Prediction decode_greedy(const EncodedT<double>&, nn::ParamStore<double>&,
                                  const DecoderConfig&);
template Prediction predict_structure(const RasterImage&, nn::ParamStore<float>&,
                                      const EncoderConfig&, const DecoderConfig&);
template Prediction predict_structure(const RasterImage&, nn::ParamStore<double>&,
                                      const EncoderConfig&, const DecoderConfig&);

}  // namespace molgrep::seq
