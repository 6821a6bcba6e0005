//
// Project molgrep - Copyright 2026 The molgrep Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "molgrep/chem/vocab.hpp"
#include "molgrep/cli/cli.hpp"
#include "molgrep/common.hpp"
#include "molgrep/nn/checkpoint.hpp"
#include "molgrep/seg/seg.hpp"
#include "molgrep/seq/seq.hpp"

namespace molgrep::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt_metric(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

// Appends step/metric/value rows so a resumed run extends the same log.
class TrainLog {
 public:
  explicit TrainLog(const std::string& out_dir) {
    std::string path = out_dir + "/logs.tsv";
    bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
    os_.open(path, std::ios::app);
    if (!os_) fail(Err::Io, "cannot write " + path);
    if (fresh) os_ << "step\tmetric\tvalue\n";
  }

  void row(long long step, const std::string& metric, double value) {
    os_ << step << '\t' << metric << '\t' << fmt_metric(value) << '\n';
    os_.flush();
  }

 private:
  std::ofstream os_;
};

std::string checkpoint_path(const std::string& out_dir, long long step) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "step%06lld.ckpt", step);
  return out_dir + "/checkpoints/" + buf;
}

template <typename T>
void save_both(const std::string& out_dir, const nn::ParamStore<T>& store,
               const std::string& echo) {
  fs::create_directories(out_dir + "/checkpoints");
  save_checkpoint(checkpoint_path(out_dir, store.step), store, echo);
  save_checkpoint(out_dir + "/checkpoints/last.ckpt", store, echo);
}

// Restores the store from `resume` after verifying the architecture matches.
template <typename T>
void resume_from(const std::string& resume, nn::ParamStore<T>& store, const std::string& echo) {
  std::string stored = nn::load_checkpoint(resume, store);
  if (stored != echo)
    fail(Err::BadConfig,
         "checkpoint " + resume + " holds \"" + stored + "\" but this run needs \"" + echo + "\"");
}

template <typename T>
void train_seg_impl(const RunConfig& cfg) {
  write_resolved(cfg);
  const std::string data = cfg.gets("data");
  if (data.empty()) fail(Err::BadConfig, "train-seg needs data = <dataset directory>");
  std::vector<data::SegSample> train = load_seg_manifest(data + "/train.tsv");
  std::vector<data::SegSample> val;
  if (fs::exists(data + "/val.tsv")) val = load_seg_manifest(data + "/val.tsv");
  if (train.empty()) fail(Err::BadManifest, data + "/train.tsv has no samples");
  const int h = train[0].crop.height;
  const int w = train[0].crop.width;
  for (const data::SegSample& s : train)
    if (s.crop.width != w || s.crop.height != h || s.mask.width != w || s.mask.height != h)
      fail(Err::ShapeMismatch, "training crops must share one size");
  for (const data::SegSample& s : val)
    if (s.crop.width != w || s.crop.height != h || s.mask.width != w || s.mask.height != h)
      fail(Err::ShapeMismatch, "validation crops must share one size");

  seg::UNetConfig net;
  net.depth = cfg.geti("depth");
  net.base_channels = cfg.geti("base_channels");
  net.multiplier = cfg.geti("multiplier");
  const std::string echo = seg::unet_config_echo(net);

  const long long steps = cfg.getll("steps");
  const int batch = cfg.geti("batch");
  const int val_every = cfg.geti("val_every");
  const int val_max = cfg.geti("val_max");
  const int ckpt_every = cfg.geti("checkpoint_every");
  if (steps < 0) fail(Err::BadConfig, "steps must be non-negative");
  if (batch < 1) fail(Err::BadConfig, "batch must be positive");
  if (val_max < 1) fail(Err::BadConfig, "val_max must be positive");
  nn::AdamConfig opt;
  opt.lr = cfg.getd("lr");

  nn::ParamStore<T> store;
  const std::string resume = cfg.gets("resume");
  if (!resume.empty())
    resume_from(resume, store, echo);
  else
    seg::init_unet(store, net, cfg.seed());

  TrainLog log(cfg.out_dir);
  const std::vector<data::SegSample>& pool = val.empty() ? train : val;
  const int vn = std::min<int>(val_max, static_cast<int>(pool.size()));

  while (store.step < steps) {
    Rng rng(derive_seed(cfg.seed(), "batch", static_cast<uint64_t>(store.step)));
    nn::Tensor<T> images({batch, 1, h, w});
    std::vector<int> labels(static_cast<size_t>(batch) * h * w);
    for (int b = 0; b < batch; ++b) {
      const data::SegSample& s = train[rng.uniform_int(static_cast<int>(train.size()))];
      size_t base = static_cast<size_t>(b) * h * w;
      for (int i = 0; i < h * w; ++i) {
        images[base + i] = static_cast<T>(s.crop.pixels[i]);
        labels[base + i] = s.mask.pixels[i] >= 0.5f ? 1 : 0;
      }
    }
    nn::Tape<T> tape;
    nn::Binder<T> bind(store);
    int loss = seg::unet_loss(tape, bind, images, labels, net);
    double lv = static_cast<double>(tape.value(loss)[0]);
    tape.backward(loss);
    nn::adam_step(store, bind.grads(tape), opt);
    log.row(store.step, "train_loss", lv);

    bool last = store.step == steps;
    if (val_every > 0 && (store.step % val_every == 0 || last)) {
      long long right = 0;
      long long total = 0;
      for (int i = 0; i < vn; ++i) {
        seg::ProbMask m = seg::unet_forward_t(pool[i].crop, store, net);
        for (int p = 0; p < h * w; ++p) {
          int want = pool[i].mask.pixels[p] >= 0.5f ? 1 : 0;
          int got = m.prob.pixels[p] >= 0.5f ? 1 : 0;
          right += want == got;
          ++total;
        }
      }
      double acc = total > 0 ? static_cast<double>(right) / static_cast<double>(total) : 0.0;
      log.row(store.step, "val_pixel_acc", acc);
      std::printf("step %lld train_loss %.6f val_pixel_acc %.4f\n", store.step, lv, acc);
    }
    if (ckpt_every > 0 && (store.step % ckpt_every == 0 || last)) save_both(cfg.out_dir, store, echo);
  }
  save_both(cfg.out_dir, store, echo);
  std::printf("trained %s to step %lld\n", echo.c_str(), store.step);
}

// Per-sample augmentation: affine, brightness, and binarize each join the op
// list with probability 1/3.
img::RasterImage augment_sample(const img::RasterImage& src, uint64_t seed) {
  Rng rng(seed);
  std::vector<img::AugmentOp> ops;
  if (rng.bernoulli(1.0 / 3.0)) ops.push_back(img::AugmentOp::Affine);
  if (rng.bernoulli(1.0 / 3.0)) ops.push_back(img::AugmentOp::Brightness);
  if (rng.bernoulli(1.0 / 3.0)) ops.push_back(img::AugmentOp::Binarize);
  if (ops.empty()) return src;
  return img::augment(src, rng.next(), ops);
}

template <typename T>
void train_seq_impl(const RunConfig& cfg) {
  write_resolved(cfg);
  const std::string data = cfg.gets("data");
  if (data.empty()) fail(Err::BadConfig, "train-seq needs data = <dataset directory>");
  std::vector<data::MolSample> train = data::load_mol_manifest(data + "/train.tsv");
  std::vector<data::MolSample> val;
  if (fs::exists(data + "/val.tsv")) val = data::load_mol_manifest(data + "/val.tsv");
  if (train.empty()) fail(Err::BadManifest, data + "/train.tsv has no samples");
  const int h = train[0].image.height;
  const int w = train[0].image.width;
  for (const data::MolSample& s : train)
    if (s.image.width != w || s.image.height != h)
      fail(Err::ShapeMismatch, "training images must share one size");
  for (const data::MolSample& s : val)
    if (s.image.width != w || s.image.height != h)
      fail(Err::ShapeMismatch, "validation images must share one size");

  std::string stages = cfg.gets("stages");
  std::erase(stages, ' ');
  const chem::Vocabulary vocab;
  const std::string echo = "seq stages=" + stages +
                           " state=" + std::to_string(cfg.geti("state_dim")) +
                           " hidden=" + std::to_string(cfg.geti("hidden")) +
                           " layers=" + std::to_string(cfg.geti("layers")) +
                           " vocab=" + std::to_string(vocab.size()) +
                           " maxlen=" + std::to_string(cfg.geti("max_len"));
  auto [enc, dec] = seq::seq_config_parse(echo);

  auto tokenize_pool = [&](const std::vector<data::MolSample>& pool) {
    std::vector<std::vector<int>> rows;
    rows.reserve(pool.size());
    for (const data::MolSample& s : pool) {
      if (static_cast<int>(s.smiles.size()) + 2 > dec.max_len)
        fail(Err::BadConfig, "label of length " + std::to_string(s.smiles.size()) +
                                 " needs max_len >= " + std::to_string(s.smiles.size() + 2));
      rows.push_back(chem::tokenize(vocab, s.smiles, dec.max_len));
    }
    return rows;
  };
  const std::vector<std::vector<int>> train_rows = tokenize_pool(train);
  const std::vector<std::vector<int>> val_rows = tokenize_pool(val);

  const long long steps = cfg.getll("steps");
  const int batch = cfg.geti("batch");
  const int val_every = cfg.geti("val_every");
  const int val_max = cfg.geti("val_max");
  const int ckpt_every = cfg.geti("checkpoint_every");
  const bool augment = cfg.getb("augment");
  if (steps < 0) fail(Err::BadConfig, "steps must be non-negative");
  if (batch < 1) fail(Err::BadConfig, "batch must be positive");
  if (val_max < 1) fail(Err::BadConfig, "val_max must be positive");
  nn::AdamConfig opt;
  opt.lr = cfg.getd("lr");

  nn::ParamStore<T> store;
  const std::string resume = cfg.gets("resume");
  if (!resume.empty())
    resume_from(resume, store, echo);
  else
    seq::init_seq(store, enc, dec, cfg.seed());

  TrainLog log(cfg.out_dir);
  const std::vector<data::MolSample>& pool = val.empty() ? train : val;
  const std::vector<std::vector<int>>& pool_rows = val.empty() ? train_rows : val_rows;
  const int vn = std::min<int>(val_max, static_cast<int>(pool.size()));

  while (store.step < steps) {
    Rng rng(derive_seed(cfg.seed(), "batch", static_cast<uint64_t>(store.step)));
    nn::Tensor<T> images({batch, 1, h, w});
    std::vector<std::vector<int>> targets(batch);
    for (int b = 0; b < batch; ++b) {
      int idx = rng.uniform_int(static_cast<int>(train.size()));
      targets[b] = train_rows[idx];
      const img::RasterImage& src =
          augment ? augment_sample(train[idx].image, rng.next()) : train[idx].image;
      size_t base = static_cast<size_t>(b) * h * w;
      for (int i = 0; i < h * w; ++i) images[base + i] = static_cast<T>(src.pixels[i]);
    }
    double lv = seq::seq_train_step(store, images, targets, enc, dec, opt);
    log.row(store.step, "train_loss", lv);

    bool last = store.step == steps;
    if (val_every > 0 && (store.step % val_every == 0 || last)) {
      nn::Tensor<T> vim({vn, 1, h, w});
      std::vector<std::vector<int>> vt(pool_rows.begin(), pool_rows.begin() + vn);
      for (int i = 0; i < vn; ++i) {
        size_t base = static_cast<size_t>(i) * h * w;
        for (int p = 0; p < h * w; ++p) vim[base + p] = static_cast<T>(pool[i].image.pixels[p]);
      }
      nn::Tape<T> tape;
      nn::Binder<T> bind(store);
      double vl = static_cast<double>(tape.value(seq::seq_loss(tape, bind, vim, vt, enc, dec))[0]);
      log.row(store.step, "val_loss", vl);
      std::printf("step %lld train_loss %.6f val_loss %.6f\n", store.step, lv, vl);
    }
    if (ckpt_every > 0 && (store.step % ckpt_every == 0 || last)) save_both(cfg.out_dir, store, echo);
  }
  save_both(cfg.out_dir, store, echo);
  std::printf("trained %s to step %lld\n", echo.c_str(), store.step);
}

}  // namespace

void cmd_train_seg(const RunConfig& cfg) {
  if (cfg.f64)
    train_seg_impl<double>(cfg);
  else
    train_seg_impl<float>(cfg);
}

void cmd_train_seq(const RunConfig& cfg) {
  if (cfg.f64)
    train_seq_impl<double>(cfg);
  else
    train_seq_impl<float>(cfg);
}

}  // namespace molgrep::cli
