//
// Project molgrep - Copyright 2026 The molgrep Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLGREP_IMG_RASTER_HPP_
#define MOLGREP_IMG_RASTER_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "molgrep/common.hpp"

namespace molgrep::img {

// Single-channel grayscale image, row-major, values in [0,1].
// 0 is black ink, 1 is white background.
struct RasterImage {
  int width = 0;
  int height = 0;
  std::vector<float> pixels;

  RasterImage() = default;
  RasterImage(int w, int h, float fill = 1.0f)
      : width(w), height(h), pixels(static_cast<size_t>(w) * h, fill) {}

  float& at(int x, int y) { return pixels[static_cast<size_t>(y) * width + x]; }
  float at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }

  bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }

  size_t size() const { return pixels.size(); }
};

// Bilinear resampling to the exact output dimensions. Output pixel centers
// map onto source pixel centers; samples are clamped at the border.
// When out dims equal the source dims the result is bit-identical input.
RasterImage resize_bilinear(const RasterImage& src, int out_w, int out_h);

// Output dims are round(dims * factor), factor in (0,1].
RasterImage downsample(const RasterImage& src, double factor);

// Binary PGM (P5, 8-bit). Stored value = round(pixel * 255).
void write_pgm(const std::string& path, const RasterImage& img);
RasterImage read_pgm(const std::string& path);

std::string encode_pgm(const RasterImage& img);
RasterImage decode_pgm(const std::string& bytes, const std::string& origin);

enum class AugmentOp : uint8_t { Affine, Brightness, Binarize, Perforate };

// Applies the requested ops in the given order. Parameter draws come from
// a stream seeded only by `seed`, so equal seeds give bit-identical output.
// Dimensions never change.
RasterImage augment(const RasterImage& src, uint64_t seed, const std::vector<AugmentOp>& ops);

}  // namespace molgrep::img

#endif  // MOLGREP_IMG_RASTER_HPP_
