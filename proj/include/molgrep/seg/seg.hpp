//
// Project molgrep - Copyright 2026 The molgrep Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLGREP_SEG_SEG_HPP_
#define MOLGREP_SEG_SEG_HPP_

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "molgrep/common.hpp"
#include "molgrep/img/raster.hpp"
#include "molgrep/nn/adam.hpp"
#include "molgrep/nn/ops.hpp"
#include "molgrep/nn/tape.hpp"

namespace molgrep::seg {

using img::RasterImage;

// Encoder-decoder page segmenter: `depth` pooling stages, 5x5 convolutions,
// channel widths base * multiplier^stage, skip connections into the decoder,
// two output classes (background, structure).
struct UNetConfig {
  int depth = 3;
  int base_channels = 8;
  int multiplier = 2;
};

// Per-pixel probability that ink belongs to a drawn structure. `scale` is the
// factor the source page was shrunk by before the net ran; the mask dims match
// the shrunk page, not the original.
struct ProbMask {
  RasterImage prob;
  double scale = 1.0;
};

// Inclusive page-pixel bounds of one detected structure region. `area` counts
// the mask pixels of the component that produced the box.
struct CropBox {
  int left = 0;
  int top = 0;
  int right = 0;
  int bottom = 0;
  int area = 0;
};

struct Crop {
  CropBox box;
  RasterImage image;
};

// Parameter names and shapes in network order.
std::vector<std::pair<std::string, std::vector<int>>> unet_param_shapes(const UNetConfig& cfg);
long long unet_param_count(const UNetConfig& cfg);
std::string unet_config_echo(const UNetConfig& cfg);

// Inverse of unet_config_echo.
UNetConfig unet_config_parse(const std::string& echo);

// The 11 working scales for page inference, 0.10 through 0.20.
std::vector<double> default_scales();

// He-normal weights, zero biases, 0.25 PReLU slopes.
template <typename T>
void init_unet(nn::ParamStore<T>& store, const UNetConfig& cfg, uint64_t seed) {
  Rng rng(derive_seed(seed, "unet-init"));
  for (const auto& [name, shape] : unet_param_shapes(cfg)) {
    char kind = name.back();
    if (kind == 'w' || kind == 't') {
      size_t fan_in = 1;
      for (size_t i = 1; i < shape.size(); ++i) fan_in *= static_cast<size_t>(shape[i]);
      store.add(name, nn::randn<T>(shape, rng, std::sqrt(2.0 / static_cast<double>(fan_in))));
    } else if (kind == 'b') {
      store.add(name, nn::Tensor<T>(shape));
    } else {
      store.add(name, nn::Tensor<T>(shape, T(0.25)));
    }
  }
}

// Records the segmenter graph over a batch of pages and returns the logits
// variable, shaped N x 2 x H x W. Pages arrive white-high in [0, 1] as
// N x 1 x H x W; the graph works on inverted ink-high values. H and W must be
// divisible by 2^depth.
template <typename T>
int unet_logits(nn::Tape<T>& tape, nn::Binder<T>& bind, const nn::Tensor<T>& images,
                const UNetConfig& cfg) {
  if (images.rank() != 4 || images.dim(1) != 1)
    fail(Err::ShapeMismatch, "segmenter expects Nx1xHxW pages");
  int div = 1 << cfg.depth;
  if (images.dim(2) % div != 0 || images.dim(3) % div != 0)
    fail(Err::ShapeMismatch, "page dims must divide by 2^depth");

  nn::Tensor<T> inv = images;
  for (size_t i = 0; i < inv.numel(); ++i) inv[i] = T(1) - inv[i];
  int x = tape.push(std::move(inv));

  auto block = [&](int in, const std::string& stem) {
    int w = bind.leaf(tape, stem + ".w");
    int b = bind.leaf(tape, stem + ".b");
    int a = bind.leaf(tape, stem + ".alpha");
    return nn::prelu(tape, nn::conv2d(tape, in, w, b), a);
  };

  std::vector<int> skips;
  for (int i = 0; i < cfg.depth; ++i) {
    x = block(x, "down" + std::to_string(i));
    skips.push_back(x);
    x = nn::maxpool2x2(tape, x);
  }
  x = block(x, "bottom");
  for (int i = cfg.depth - 1; i >= 0; --i) {
    std::string stem = "up" + std::to_string(i);
    int t = bind.leaf(tape, stem + ".t");
    x = nn::tconv2d(tape, x, t);
    x = nn::concat_channels(tape, x, skips[i]);
    x = block(x, stem);
  }
  int hw = bind.leaf(tape, "head.w");
  int hb = bind.leaf(tape, "head.b");
  return nn::conv2d(tape, x, hw, hb);
}

// Mean per-pixel cross entropy against {0 background, 1 structure} labels in
// row-major N*H*W order.
template <typename T>
int unet_loss(nn::Tape<T>& tape, nn::Binder<T>& bind, const nn::Tensor<T>& images,
              const std::vector<int>& labels, const UNetConfig& cfg) {
  int logits = unet_logits(tape, bind, images, cfg);
  const nn::Tensor<T>& lv = tape.value(logits);
  int rows = lv.dim(0) * lv.dim(2) * lv.dim(3);
  if (static_cast<int>(labels.size()) != rows)
    fail(Err::ShapeMismatch, "one label per page pixel required");
  int flat = nn::reshape(tape, nn::nchw_to_nlc(tape, logits), {rows, 2});
  return nn::softmax_cross_entropy(tape, flat, labels, -1);
}

// Single-page inference. Pads the page to the next 2^depth multiple with
// white, runs the net, crops the mask back to the page dims.
template <typename T>
ProbMask unet_forward_t(const RasterImage& page, nn::ParamStore<T>& store, const UNetConfig& cfg) {
  int div = 1 << cfg.depth;
  int hp = (page.height + div - 1) / div * div;
  int wp = (page.width + div - 1) / div * div;
  nn::Tensor<T> input({1, 1, hp, wp}, T(1));
  for (int y = 0; y < page.height; ++y)
    for (int x = 0; x < page.width; ++x)
      input[static_cast<size_t>(y) * wp + x] = static_cast<T>(page.at(x, y));

  nn::Tape<T> tape;
  nn::Binder<T> bind(store);
  int logits = unet_logits(tape, bind, input, cfg);
  const nn::Tensor<T>& lv = tape.value(logits);

  ProbMask out;
  out.prob = RasterImage(page.width, page.height);
  out.scale = 1.0;
  size_t plane = static_cast<size_t>(hp) * wp;
  for (int y = 0; y < page.height; ++y)
    for (int x = 0; x < page.width; ++x) {
      size_t i = static_cast<size_t>(y) * wp + x;
      double e = static_cast<double>(lv[plane + i]) - static_cast<double>(lv[i]);
      double p = e >= 0.0 ? 1.0 / (1.0 + std::exp(-e)) : std::exp(e) / (1.0 + std::exp(e));
      out.prob.at(x, y) = static_cast<float>(p);
    }
  return out;
}

inline ProbMask unet_forward(const RasterImage& page, nn::ParamStore<float>& store,
                             const UNetConfig& cfg) {
  return unet_forward_t(page, store, cfg);
}

// Runs the net on the page shrunk to each scale, resizes every mask to the
// largest scale's dims, and averages. Scales must be non-empty and in (0, 1].
template <typename T>
ProbMask multires_mask_t(const RasterImage& page, nn::ParamStore<T>& store, const UNetConfig& cfg,
                         const std::vector<double>& scales) {
  if (scales.empty()) fail(Err::EmptyScaleList, "multires needs at least one scale");
  double ref = 0.0;
  for (double s : scales) {
    if (!(s > 0.0) || s > 1.0) fail(Err::BadConfig, "scales must lie in (0, 1]");
    ref = std::max(ref, s);
  }

  RasterImage ref_page = img::downsample(page, ref);
  std::vector<double> acc(static_cast<size_t>(ref_page.width) * ref_page.height, 0.0);
  for (double s : scales) {
    RasterImage small = img::downsample(page, s);
    ProbMask m = unet_forward_t(small, store, cfg);
    RasterImage r = (m.prob.width == ref_page.width && m.prob.height == ref_page.height)
                        ? std::move(m.prob)
                        : img::resize_bilinear(m.prob, ref_page.width, ref_page.height);
    for (size_t i = 0; i < acc.size(); ++i) acc[i] += static_cast<double>(r.pixels[i]);
  }

  ProbMask out;
  out.prob = RasterImage(ref_page.width, ref_page.height);
  out.scale = ref;
  for (size_t i = 0; i < acc.size(); ++i)
    out.prob.pixels[i] = static_cast<float>(acc[i] / static_cast<double>(scales.size()));
  return out;
}

inline ProbMask multires_mask(const RasterImage& page, nn::ParamStore<float>& store,
                              const UNetConfig& cfg, const std::vector<double>& scales) {
  return multires_mask_t(page, store, cfg, scales);
}

// Thresholds the mask to {0, 1} and erases 8-connected components smaller
// than min_area pixels. Idempotent at fixed arguments.
ProbMask refine_mask(const ProbMask& mask, float threshold = 0.5f, int min_area = 100);

// Erases long straight rules near 0 and 90 degrees. A rule must run at least
// half the short page side (and at least 16 px) with only small gaps; matched
// runs are painted white across the stroke width plus one pixel of fringe.
// Never adds ink.
RasterImage remove_lines(const RasterImage& page);

// One crop per 8-connected component of the thresholded mask. Boxes are
// mapped to page coords by the dims ratio, padded by 4 px, clamped, and the
// pixels are copied from the original page.
std::vector<Crop> extract_crops(const RasterImage& page, const ProbMask& mask);

}  // namespace molgrep::seg

#endif  // MOLGREP_SEG_SEG_HPP_
