//
// Project molgrep - Copyright 2026 The molgrep Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cmath>

#include "molgrep/data/data.hpp"

namespace molgrep::data {

namespace {

void stamp(RasterImage& img, int x0, int y0, int x1, int y1, float shade) {
  x0 = std::max(x0, 0);
  y0 = std::max(y0, 0);
  x1 = std::min(x1, img.width - 1);
  y1 = std::min(y1, img.height - 1);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) img.at(x, y) = std::min(img.at(x, y), shade);
}

void text_block(RasterImage& img, Rng& rng) {
  int w = img.width, h = img.height;
  int x0 = 8 + rng.uniform_int(std::max(1, w / 3));
  int bw = w / 4 + rng.uniform_int(std::max(1, w / 2));
  int x1 = std::min(x0 + bw, w - 9);
  int y0 = 8 + rng.uniform_int(std::max(1, h - 80));
  int lines = 3 + rng.uniform_int(8);
  int lh = 9 + rng.uniform_int(6);
  for (int li = 0; li < lines; ++li) {
    int y = y0 + li * lh;
    if (y + 2 > h - 9) break;
    int cursor = x0;
    while (cursor < x1) {
      int wl = 8 + rng.uniform_int(32);
      int gap = 5 + rng.uniform_int(5);
      int thick = 1 + rng.uniform_int(2);
      float shade = static_cast<float>(0.05 + 0.25 * rng.uniform());
      stamp(img, cursor, y, std::min(cursor + wl - 1, x1), y + thick - 1, shade);
      cursor += wl + gap;
    }
  }
}

void table_grid(RasterImage& img, Rng& rng) {
  int w = img.width, h = img.height;
  int rules_h = 2 + rng.uniform_int(3);
  for (int i = 0; i < rules_h; ++i) {
    int y = 8 + rng.uniform_int(h - 16);
    int thick = 1 + (rng.uniform() < 0.3 ? 1 : 0);
    float shade = static_cast<float>(0.1 + 0.2 * rng.uniform());
    stamp(img, 0, y, w - 1, std::min(y + thick - 1, h - 1), shade);
  }
  int rules_v = 2 + rng.uniform_int(3);
  for (int i = 0; i < rules_v; ++i) {
    int x = 8 + rng.uniform_int(w - 16);
    int thick = 1 + (rng.uniform() < 0.3 ? 1 : 0);
    float shade = static_cast<float>(0.1 + 0.2 * rng.uniform());
    stamp(img, x, 0, std::min(x + thick - 1, w - 1), h - 1, shade);
  }
}

}  // namespace

RasterImage synth_page(uint64_t seed, int width, int height, const PageStyle& style) {
  if (width < 256 || height < 256) fail(Err::BadConfig, "page sides must be at least 256");
  RasterImage page(width, height, 1.0f);
  if (style.density <= 0.0) return page;

  Rng rng(derive_seed(seed, "page"));
  int blocks = std::max(1, static_cast<int>(std::lround(style.density * (2 + rng.uniform_int(4)))));
  for (int b = 0; b < blocks; ++b) text_block(page, rng);
  if (style.table) table_grid(page, rng);

  int specks = static_cast<int>(std::lround(
      style.density * static_cast<double>(width) * static_cast<double>(height) / 15000.0));
  for (int s = 0; s < specks; ++s) {
    int x = rng.uniform_int(width);
    int y = rng.uniform_int(height);
    int r = rng.uniform_int(2);
    float shade = static_cast<float>(0.4 * rng.uniform());
    stamp(page, x, y, x + r, y + r, shade);
  }
  return page;
}

}  // namespace molgrep::data
