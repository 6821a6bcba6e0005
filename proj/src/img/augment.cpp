//
// Project molgrep - Copyright 2026 The molgrep Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cmath>

#include "molgrep/img/raster.hpp"

namespace molgrep::img {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Inverse-mapped affine warp about the image center, white outside.
RasterImage affine_warp(const RasterImage& src, Rng& rng) {
  double angle = rng.uniform(-10.0, 10.0) * kPi / 180.0;
  double scale = rng.uniform(0.9, 1.1);
  double shear = std::tan(rng.uniform(-5.0, 5.0) * kPi / 180.0);
  double tx = rng.uniform(-0.05, 0.05) * src.width;
  double ty = rng.uniform(-0.05, 0.05) * src.height;

  // Forward map: p' = S * R * Shear * p + t. Sample via the inverse.
  double ca = std::cos(angle) * scale, sa = std::sin(angle) * scale;
  // columns of the forward matrix
  double m00 = ca, m01 = ca * shear - sa;
  double m10 = sa, m11 = sa * shear + ca;
  double det = m00 * m11 - m01 * m10;
  double i00 = m11 / det, i01 = -m01 / det;
  double i10 = -m10 / det, i11 = m00 / det;

  double cx = 0.5 * (src.width - 1), cy = 0.5 * (src.height - 1);
  RasterImage out(src.width, src.height, 1.0f);
  for (int y = 0; y < src.height; ++y) {
    for (int x = 0; x < src.width; ++x) {
      double dx = x - cx - tx, dy = y - cy - ty;
      double sxf = i00 * dx + i01 * dy + cx;
      double syf = i10 * dx + i11 * dy + cy;
      if (sxf < -0.5 || syf < -0.5 || sxf > src.width - 0.5 || syf > src.height - 0.5) continue;
      double fx = std::clamp(sxf, 0.0, static_cast<double>(src.width - 1));
      double fy = std::clamp(syf, 0.0, static_cast<double>(src.height - 1));
      int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
      int x1 = std::min(x0 + 1, src.width - 1), y1 = std::min(y0 + 1, src.height - 1);
      double wx = fx - x0, wy = fy - y0;
      double top = src.at(x0, y0) * (1.0 - wx) + src.at(x1, y0) * wx;
      double bot = src.at(x0, y1) * (1.0 - wx) + src.at(x1, y1) * wx;
      out.at(x, y) = static_cast<float>(top * (1.0 - wy) + bot * wy);
    }
  }
  return out;
}

}  // namespace

RasterImage augment(const RasterImage& src, uint64_t seed, const std::vector<AugmentOp>& ops) {
  RasterImage img = src;
  Rng master(derive_seed(seed, "augment"));
  for (size_t i = 0; i < ops.size(); ++i) {
    Rng rng = master.fork("op", i);
    switch (ops[i]) {
      case AugmentOp::Affine:
        img = affine_warp(img, rng);
        break;
      case AugmentOp::Brightness: {
        float f = static_cast<float>(rng.uniform(0.7, 1.3));
        for (float& v : img.pixels) v = std::clamp(v * f, 0.0f, 1.0f);
        break;
      }
      case AugmentOp::Binarize:
        for (float& v : img.pixels) v = v >= 0.5f ? 1.0f : 0.0f;
        break;
      case AugmentOp::Perforate: {
        double rate = rng.uniform(0.0, 0.05);
        for (float& v : img.pixels) {
          if (rng.uniform() < rate) v = 1.0f;
        }
        break;
      }
    }
  }
  return img;
}

}  // namespace molgrep::img
