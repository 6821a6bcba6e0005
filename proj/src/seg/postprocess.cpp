//
// Project molgrep - Copyright 2026 The molgrep Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "molgrep/seg/seg.hpp"

namespace molgrep::seg {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Component {
  int area = 0;
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

// 8-connected components of `on`, in row-major first-encounter order.
std::vector<Component> label_components(const std::vector<char>& on, int w, int h,
                                        std::vector<int>& labels) {
  labels.assign(on.size(), -1);
  std::vector<Component> comps;
  std::vector<int> stack;
  for (int sy = 0; sy < h; ++sy)
    for (int sx = 0; sx < w; ++sx) {
      size_t start = static_cast<size_t>(sy) * w + sx;
      if (!on[start] || labels[start] >= 0) continue;
      int id = static_cast<int>(comps.size());
      Component c{0, sx, sy, sx, sy};
      labels[start] = id;
      stack.assign(1, static_cast<int>(start));
      while (!stack.empty()) {
        int i = stack.back();
        stack.pop_back();
        int x = i % w, y = i / w;
        c.area += 1;
        c.x0 = std::min(c.x0, x);
        c.y0 = std::min(c.y0, y);
        c.x1 = std::max(c.x1, x);
        c.y1 = std::max(c.y1, y);
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            int nx = x + dx, ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            size_t ni = static_cast<size_t>(ny) * w + nx;
            if (on[ni] && labels[ni] < 0) {
              labels[ni] = id;
              stack.push_back(static_cast<int>(ni));
            }
          }
      }
      comps.push_back(c);
    }
  return comps;
}

}  // namespace

ProbMask refine_mask(const ProbMask& mask, float threshold, int min_area) {
  int w = mask.prob.width, h = mask.prob.height;
  std::vector<char> on(mask.prob.size());
  for (size_t i = 0; i < on.size(); ++i) on[i] = mask.prob.pixels[i] >= threshold;

  std::vector<int> labels;
  std::vector<Component> comps = label_components(on, w, h, labels);

  ProbMask out;
  out.prob = RasterImage(w, h);
  out.scale = mask.scale;
  for (size_t i = 0; i < on.size(); ++i) {
    bool keep = on[i] && comps[labels[i]].area >= min_area;
    out.prob.pixels[i] = keep ? 1.0f : 0.0f;
  }
  return out;
}

namespace {

struct LineAngle {
  double dx, dy;  // along the line
  double nx, ny;  // unit normal
};

void erase_run(RasterImage& img, const LineAngle& a, double px, double py, int t0, int t1) {
  auto paint = [&](int cx, int cy, int o) {
    int x = cx + static_cast<int>(std::lround(o * a.nx));
    int y = cy + static_cast<int>(std::lround(o * a.ny));
    if (img.in_bounds(x, y)) img.at(x, y) = 1.0f;
  };
  auto dark_at = [&](int cx, int cy, int o) {
    int x = cx + static_cast<int>(std::lround(o * a.nx));
    int y = cy + static_cast<int>(std::lround(o * a.ny));
    return img.in_bounds(x, y) && img.at(x, y) < 0.5f;
  };
  for (int t = t0; t <= t1; ++t) {
    int cx = static_cast<int>(std::lround(px + t * a.dx));
    int cy = static_cast<int>(std::lround(py + t * a.dy));
    for (int o = 3; o <= 4 && dark_at(cx, cy, o); ++o) paint(cx, cy, o);
    for (int o = -3; o >= -4 && dark_at(cx, cy, o); --o) paint(cx, cy, o);
    for (int o = -2; o <= 2; ++o) paint(cx, cy, o);
  }
}

}  // namespace

RasterImage remove_lines(const RasterImage& page) {
  RasterImage out = page;
  int w = out.width, h = out.height;
  if (w < 2 || h < 2) return out;
  double need = std::max(0.5 * std::min(w, h), 16.0);

  std::vector<LineAngle> angles;
  for (int fam = 0; fam < 2; ++fam)
    for (int dd = -2; dd <= 2; ++dd) {
      double rad = ((fam == 0 ? 0.0 : 90.0) + dd) * kPi / 180.0;
      angles.push_back({std::cos(rad), std::sin(rad), -std::sin(rad), std::cos(rad)});
    }

  for (const LineAngle& a : angles) {
    int off = w + h + 2;
    std::vector<int> votes(2 * static_cast<size_t>(off) + 1, 0);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (out.at(x, y) < 0.5f)
          votes[static_cast<size_t>(std::lround(x * a.nx + y * a.ny) + off)] += 1;

    for (size_t bin = 0; bin < votes.size(); ++bin) {
      if (votes[bin] < static_cast<int>(0.8 * need)) continue;
      double rho = static_cast<double>(bin) - off;
      double px = rho * a.nx, py = rho * a.ny;

      double tmin = std::numeric_limits<double>::max(), tmax = -tmin;
      for (int cy = 0; cy <= 1; ++cy)
        for (int cx = 0; cx <= 1; ++cx) {
          double t = (cx * (w - 1) - px) * a.dx + (cy * (h - 1) - py) * a.dy;
          tmin = std::min(tmin, t);
          tmax = std::max(tmax, t);
        }

      auto dark_off = [&](int cx, int cy, int o) {
        int x = cx + static_cast<int>(std::lround(o * a.nx));
        int y = cy + static_cast<int>(std::lround(o * a.ny));
        return out.in_bounds(x, y) && out.at(x, y) < 0.5f;
      };

      int run_start = std::numeric_limits<int>::min();
      int last_hit = run_start;
      auto flush = [&]() {
        if (run_start != std::numeric_limits<int>::min() &&
            last_hit - run_start + 1 >= static_cast<int>(need))
          erase_run(out, a, px, py, run_start, last_hit);
        run_start = std::numeric_limits<int>::min();
      };
      for (int t = static_cast<int>(std::floor(tmin)); t <= static_cast<int>(std::ceil(tmax));
           ++t) {
        int cx = static_cast<int>(std::lround(px + t * a.dx));
        int cy = static_cast<int>(std::lround(py + t * a.dy));
        bool hit = dark_off(cx, cy, 0) || dark_off(cx, cy, 1) || dark_off(cx, cy, -1);
        if (hit) {
          if (run_start == std::numeric_limits<int>::min()) run_start = t;
          last_hit = t;
        } else if (run_start != std::numeric_limits<int>::min() && t - last_hit > 2) {
          flush();
        }
      }
      flush();
    }
  }
  return out;
}

std::vector<Crop> extract_crops(const RasterImage& page, const ProbMask& mask) {
  const RasterImage& m = mask.prob;
  std::vector<Crop> crops;
  if (m.size() == 0 || page.size() == 0) return crops;

  std::vector<char> on(m.size());
  for (size_t i = 0; i < on.size(); ++i) on[i] = m.pixels[i] >= 0.5f;
  std::vector<int> labels;
  std::vector<Component> comps = label_components(on, m.width, m.height, labels);

  double sx = static_cast<double>(page.width) / m.width;
  double sy = static_cast<double>(page.height) / m.height;
  for (const Component& c : comps) {
    CropBox box;
    box.left = std::max(0, static_cast<int>(std::floor(c.x0 * sx)) - 4);
    box.top = std::max(0, static_cast<int>(std::floor(c.y0 * sy)) - 4);
    box.right = std::min(page.width - 1, static_cast<int>(std::ceil((c.x1 + 1) * sx)) + 3);
    box.bottom = std::min(page.height - 1, static_cast<int>(std::ceil((c.y1 + 1) * sy)) + 3);
    box.area = c.area;

    Crop crop;
    crop.box = box;
    crop.image = RasterImage(box.right - box.left + 1, box.bottom - box.top + 1);
    for (int y = box.top; y <= box.bottom; ++y)
      for (int x = box.left; x <= box.right; ++x)
        crop.image.at(x - box.left, y - box.top) = page.at(x, y);
    crops.push_back(std::move(crop));
  }
  return crops;
}

}  // namespace molgrep::seg
