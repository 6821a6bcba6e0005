//
// Project molgrep - Copyright 2026 The molgrep Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cmath>
#include <string>

#include "molgrep/data/data.hpp"

namespace molgrep::data {

namespace {

constexpr float kMaskInk = 0.9f;
constexpr int kMargin = 6;  // white clearance checked around a candidate box

bool region_white(const RasterImage& page, int x0, int y0, int x1, int y1) {
  x0 = std::max(x0, 0);
  y0 = std::max(y0, 0);
  x1 = std::min(x1, page.width - 1);
  y1 = std::min(y1, page.height - 1);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if (page.at(x, y) < 0.999f) return false;
  return true;
}

bool boxes_overlap(const Placement& a, const Placement& b) {
  return a.left <= b.right && b.left <= a.right && a.top <= b.bottom && b.top <= a.bottom;
}

void draw_box_lines(RasterImage& page, const Placement& p, Rng& rng) {
  int off = 2 + rng.uniform_int(3);
  float shade = static_cast<float>(0.1 + 0.25 * rng.uniform());
  int x0 = std::max(p.left - off, 0);
  int y0 = std::max(p.top - off, 0);
  int x1 = std::min(p.right + off, page.width - 1);
  int y1 = std::min(p.bottom + off, page.height - 1);
  for (int x = x0; x <= x1; ++x) {
    page.at(x, y0) = std::min(page.at(x, y0), shade);
    page.at(x, y1) = std::min(page.at(x, y1), shade);
  }
  for (int y = y0; y <= y1; ++y) {
    page.at(x0, y) = std::min(page.at(x0, y), shade);
    page.at(x1, y) = std::min(page.at(x1, y), shade);
  }
}

}  // namespace

ComposedPage compose_page(const RasterImage& page, const std::vector<chem::MolGraph>& molecules,
                          uint64_t seed, const ComposeOptions& opt) {
  if (opt.min_canvas < 32 || opt.max_canvas < opt.min_canvas || opt.max_tries < 1)
    fail(Err::BadConfig, "bad compose options");

  ComposedPage out;
  out.page = page;
  out.mask = RasterImage(page.width, page.height, 0.0f);

  Rng rng(derive_seed(seed, "compose"));
  for (size_t mi = 0; mi < molecules.size(); ++mi) {
    Rng mrng = rng.fork("mol", mi);

    int cap = std::min(page.width, page.height) - 2 * kMargin;
    int side = opt.min_canvas + mrng.uniform_int(opt.max_canvas - opt.min_canvas + 1);
    side = std::clamp(side, 32, std::max(cap, 32));
    if (cap < 32) {
      ++out.skipped;
      continue;
    }

    render::RenderStyle style;
    style.bond_length = mrng.uniform(10.0, 18.0);
    style.line_width = mrng.uniform(1.0, 2.0);
    style.font_scale = 1;
    style.wedge = mrng.bernoulli(0.5) ? render::WedgeStyle::Hash : render::WedgeStyle::Triangle;
    style.superatom_prob = 0.2;

    uint64_t layout_seed = mrng.next();
    uint64_t raster_seed = mrng.next();
    uint64_t warp_seed = mrng.next();
    RasterImage canvas;
    try {
      render::Layout2D layout = render::generate_layout(molecules[mi], layout_seed);
      canvas = render::rasterize_fit(molecules[mi], layout, style, side, side, raster_seed).image;
    } catch (const Error&) {
      ++out.skipped;
      continue;
    }

    if (mrng.bernoulli(opt.affine_prob))
      canvas = img::augment(canvas, warp_seed, {img::AugmentOp::Affine});
    if (mrng.bernoulli(opt.shade_prob)) {
      float g = static_cast<float>(mrng.uniform(0.92, 0.98));
      for (float& v : canvas.pixels) v = std::min(v, g);
    }
    bool lines = mrng.bernoulli(opt.line_prob);

    bool placed = false;
    Placement box;
    for (int t = 0; t < opt.max_tries && !placed; ++t) {
      if (page.width - side < 1 || page.height - side < 1) break;
      box.left = mrng.uniform_int(out.page.width - side + 1);
      box.top = mrng.uniform_int(out.page.height - side + 1);
      box.right = box.left + side - 1;
      box.bottom = box.top + side - 1;
      bool clear = region_white(out.page, box.left - kMargin, box.top - kMargin,
                                box.right + kMargin, box.bottom + kMargin);
      for (const Placement& prev : out.placements)
        if (boxes_overlap(box, prev)) clear = false;
      placed = clear;
    }
    if (!placed) {
      ++out.skipped;
      continue;
    }

    for (int y = 0; y < side; ++y) {
      for (int x = 0; x < side; ++x) {
        float v = canvas.at(x, y);
        int px = box.left + x, py = box.top + y;
        out.page.at(px, py) = std::min(out.page.at(px, py), v);
        if (v < kMaskInk) out.mask.at(px, py) = 1.0f;
      }
    }
    if (lines) draw_box_lines(out.page, box, mrng);
    out.placements.push_back(box);
  }

  if (!molecules.empty() && out.placements.empty())
    fail(Err::PlacementFailure, "no structure could be placed on the page");
  return out;
}

std::vector<SegSample> crop_page(const ComposedPage& composed, uint64_t seed, int count) {
  if (count < 0) fail(Err::BadConfig, "crop count must be non-negative");
  const RasterImage& page = composed.page;
  if (page.width < 128 || page.height < 128)
    fail(Err::ShapeMismatch, "page smaller than the 128 px crop window");

  Rng rng(derive_seed(seed, "crop"));
  std::vector<SegSample> out;
  out.reserve(static_cast<size_t>(count));
  for (int k = 0; k < count; ++k) {
    int ox, oy;
    bool centered = !composed.placements.empty() && rng.bernoulli(0.5);
    if (centered) {
      const Placement& p =
          composed.placements[rng.uniform_int(static_cast<int>(composed.placements.size()))];
      int cx = p.left + rng.uniform_int(p.right - p.left + 1);
      int cy = p.top + rng.uniform_int(p.bottom - p.top + 1);
      ox = std::clamp(cx - 64, 0, page.width - 128);
      oy = std::clamp(cy - 64, 0, page.height - 128);
    } else {
      ox = rng.uniform_int(page.width - 127);
      oy = rng.uniform_int(page.height - 127);
      ox = std::min(ox, page.width - 128);
      oy = std::min(oy, page.height - 128);
    }
    SegSample s;
    s.crop = RasterImage(128, 128);
    s.mask = RasterImage(128, 128, 0.0f);
    for (int y = 0; y < 128; ++y) {
      for (int x = 0; x < 128; ++x) {
        s.crop.at(x, y) = page.at(ox + x, oy + y);
        s.mask.at(x, y) = composed.mask.at(ox + x, oy + y);
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<SegSample> make_seg_samples(const RasterImage& page,
                                        const std::vector<chem::MolGraph>& molecules,
                                        uint64_t seed, int crops_per_page,
                                        const ComposeOptions& opt) {
  ComposedPage composed = compose_page(page, molecules, derive_seed(seed, "place"), opt);
  return crop_page(composed, derive_seed(seed, "window"), crops_per_page);
}

}  // namespace molgrep::data
