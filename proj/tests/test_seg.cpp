//
// Project molgrep - Copyright 2026 The molgrep Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "molgrep/chem/smiles.hpp"
#include "molgrep/nn/gradcheck.hpp"
#include "molgrep/render/render.hpp"
#include "molgrep/seg/seg.hpp"

using namespace molgrep;
using namespace molgrep::seg;

namespace {

RasterImage molecule_image(const std::string& smiles, int w, int h, uint64_t seed) {
  chem::MolGraph mol = chem::parse_smiles(smiles);
  render::Layout2D lay = render::generate_layout(mol, seed);
  return render::rasterize_fit(mol, lay, render::RenderStyle{}, w, h, seed).image;
}

void blit_min(RasterImage& page, const RasterImage& src, int left, int top) {
  for (int y = 0; y < src.height; ++y)
    for (int x = 0; x < src.width; ++x)
      if (page.in_bounds(left + x, top + y))
        page.at(left + x, top + y) = std::min(page.at(left + x, top + y), src.at(x, y));
}

int dark_count(const RasterImage& img) {
  int n = 0;
  for (float p : img.pixels) n += p < 0.5f ? 1 : 0;
  return n;
}

int dark_in(const RasterImage& img, int x0, int y0, int x1, int y1) {
  int n = 0;
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) n += img.at(x, y) < 0.5f ? 1 : 0;
  return n;
}

double mask_variance(const std::vector<float>& p) {
  double mean = 0.0;
  for (float v : p) mean += v;
  mean /= static_cast<double>(p.size());
  double var = 0.0;
  for (float v : p) var += (v - mean) * (v - mean);
  return var / static_cast<double>(p.size());
}

ProbMask make_mask(int w, int h, float fill = 0.0f) {
  ProbMask m;
  m.prob = RasterImage(w, h);
  std::fill(m.prob.pixels.begin(), m.prob.pixels.end(), fill);
  return m;
}

}  // namespace

TEST_CASE("reshape op preserves data and routes gradients") {
  nn::Tape<double> tape;
  nn::Tensor<double> x({2, 3});
  for (int i = 0; i < 6; ++i) x[static_cast<size_t>(i)] = i + 1;
  int v = tape.push(x);
  int r = nn::reshape(tape, v, {3, 2});
  CHECK(tape.value(r).dim(0) == 3);
  CHECK(tape.value(r).dim(1) == 2);
  for (int i = 0; i < 6; ++i) CHECK(tape.value(r)[static_cast<size_t>(i)] == double(i + 1));

  double err = nn::grad_check(
      [](nn::Tape<double>& t, const std::vector<int>& leaves) {
        int a = nn::reshape(t, leaves[0], {6, 1});
        int b = nn::mul(t, a, a);
        return nn::sum_all(t, b);
      },
      {x});
  CHECK(err < 1e-6);

  nn::Tape<double> bad;
  int w = bad.push(x);
  CHECK_THROWS_AS(nn::reshape(bad, w, {4, 2}), Error);
}

TEST_CASE("unet parameter inventory matches the closed-form count") {
  UNetConfig cfg;
  CHECK(unet_param_count(cfg) == 178362);

  nn::ParamStore<float> store;
  init_unet(store, cfg, 7);
  long long total = 0;
  for (const auto& [name, p] : store.params) {
    (void)name;
    total += static_cast<long long>(p.value.numel());
  }
  CHECK(total == 178362);

  CHECK(store.has("down0.w"));
  CHECK(store.has("down2.alpha"));
  CHECK(store.has("bottom.w"));
  CHECK(store.has("up0.t"));
  CHECK(store.has("head.b"));
  CHECK(store.at("down0.w").shape == std::vector<int>{8, 1, 5, 5});
  CHECK(store.at("up2.t").shape == std::vector<int>{64, 32, 4, 4});
  CHECK(store.at("head.w").shape == std::vector<int>{2, 8, 5, 5});
  for (float a : store.at("down1.alpha").data) CHECK(a == 0.25f);
  for (float b : store.at("bottom.b").data) CHECK(b == 0.0f);

  UNetConfig tiny{1, 2, 2};
  CHECK(unet_param_count(tiny) == (2 * 25 + 4) + (4 * 2 * 25 + 8) + (4 * 2 * 16) +
                                      (2 * 4 * 25 + 4) + (2 * 2 * 25 + 2));
}

TEST_CASE("unet config echo round-trips") {
  seg::UNetConfig cfg;
  cfg.depth = 2;
  cfg.base_channels = 4;
  cfg.multiplier = 3;
  seg::UNetConfig back = seg::unet_config_parse(seg::unet_config_echo(cfg));
  CHECK(back.depth == 2);
  CHECK(back.base_channels == 4);
  CHECK(back.multiplier == 3);
  CHECK_THROWS_AS(seg::unet_config_parse("seq stages=8p"), Error);
  CHECK_THROWS_AS(seg::unet_config_parse("unet depth=2 rank=4"), Error);
}

TEST_CASE("unet_forward keeps page dims and emits probabilities") {
  UNetConfig cfg;
  nn::ParamStore<float> store;
  init_unet(store, cfg, 11);

  for (auto [w, h] : {std::pair{128, 128}, std::pair{256, 192}, std::pair{90, 100}}) {
    RasterImage page(w, h);
    std::fill(page.pixels.begin(), page.pixels.end(), 1.0f);
    blit_min(page, molecule_image("C1=CC=C(C=C1)C(=O)O", 64, 64, 3), w / 4, h / 4);
    ProbMask m = unet_forward(page, store, cfg);
    CHECK(m.prob.width == w);
    CHECK(m.prob.height == h);
    CHECK(m.scale == 1.0);
    for (float p : m.prob.pixels) {
      CHECK(p >= 0.0f);
      CHECK(p <= 1.0f);
    }
    ProbMask again = unet_forward(page, store, cfg);
    CHECK(again.prob.pixels == m.prob.pixels);
  }
}

TEST_CASE("single-scale multires matches direct inference bit for bit") {
  UNetConfig cfg;
  nn::ParamStore<float> store;
  init_unet(store, cfg, 23);

  RasterImage page(160, 120);
  std::fill(page.pixels.begin(), page.pixels.end(), 1.0f);
  blit_min(page, molecule_image("CC(=O)OC1=CC=CC=C1C(=O)O", 90, 90, 5), 30, 15);

  ProbMask direct = unet_forward(page, store, cfg);
  ProbMask via = multires_mask(page, store, cfg, {1.0});
  CHECK(via.scale == 1.0);
  CHECK(via.prob.width == direct.prob.width);
  CHECK(via.prob.pixels == direct.prob.pixels);
}

TEST_CASE("constant network averages to a constant multires mask") {
  std::vector<double> scales = default_scales();
  REQUIRE(scales.size() == 11);
  CHECK(scales.front() == doctest::Approx(0.10));
  CHECK(scales.back() == doctest::Approx(0.20));

  UNetConfig cfg;
  nn::ParamStore<float> store;
  init_unet(store, cfg, 1);
  for (auto& [name, p] : store.params) {
    (void)name;
    std::fill(p.value.data.begin(), p.value.data.end(), 0.0f);
  }

  RasterImage page(300, 240);
  std::fill(page.pixels.begin(), page.pixels.end(), 1.0f);
  blit_min(page, molecule_image("C1CCCCC1", 60, 60, 2), 100, 90);

  ProbMask m = multires_mask(page, store, cfg, scales);
  CHECK(m.scale == doctest::Approx(0.20));
  CHECK(m.prob.width == img::downsample(page, 0.20).width);
  for (float p : m.prob.pixels) CHECK(p == 0.5f);
}

TEST_CASE("multires averaging never exceeds the worst single-scale variance") {
  UNetConfig cfg;
  nn::ParamStore<float> store;
  init_unet(store, cfg, 29);

  RasterImage page(320, 260);
  std::fill(page.pixels.begin(), page.pixels.end(), 1.0f);
  blit_min(page, molecule_image("CC1=CC=C(C=C1)S(=O)(=O)N", 120, 120, 9), 60, 60);

  std::vector<double> scales{0.10, 0.15, 0.20};
  ProbMask avg = multires_mask(page, store, cfg, scales);

  double worst = 0.0;
  for (double s : scales) {
    ProbMask one = multires_mask(page, store, cfg, {s});
    RasterImage r = img::resize_bilinear(one.prob, avg.prob.width, avg.prob.height);
    worst = std::max(worst, mask_variance(r.pixels));
  }
  CHECK(mask_variance(avg.prob.pixels) <= worst + 1e-9);
}

TEST_CASE("multires rejects bad scale lists") {
  UNetConfig cfg;
  nn::ParamStore<float> store;
  init_unet(store, cfg, 4);
  RasterImage page(64, 64);
  std::fill(page.pixels.begin(), page.pixels.end(), 1.0f);

  CHECK_THROWS_WITH_AS(multires_mask(page, store, cfg, {}), doctest::Contains("EmptyScaleList"),
                       Error);
  CHECK_THROWS_WITH_AS(multires_mask(page, store, cfg, {0.0}), doctest::Contains("BadConfig"),
                       Error);
  CHECK_THROWS_WITH_AS(multires_mask(page, store, cfg, {1.5}), doctest::Contains("BadConfig"),
                       Error);
  CHECK_THROWS_WITH_AS(multires_mask(page, store, cfg, {0.5, -0.1}),
                       doctest::Contains("BadConfig"), Error);
}

TEST_CASE("refine_mask erases small components and keeps large ones") {
  ProbMask m = make_mask(64, 64);
  m.scale = 0.2;
  m.prob.at(5, 5) = 0.9f;
  m.prob.at(6, 5) = 0.9f;
  m.prob.at(5, 6) = 0.9f;
  for (int y = 20; y < 40; ++y)
    for (int x = 20; x < 45; ++x) m.prob.at(x, y) = 0.7f;
  m.prob.at(50, 50) = 0.4f;

  ProbMask r = refine_mask(m, 0.5f, 100);
  CHECK(r.scale == 0.2);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) {
      bool in_big = x >= 20 && x < 45 && y >= 20 && y < 40;
      CHECK(r.prob.at(x, y) == (in_big ? 1.0f : 0.0f));
    }
}

TEST_CASE("refine_mask is idempotent and monotone in the threshold") {
  Rng rng(99);
  ProbMask m = make_mask(48, 48);
  for (float& p : m.prob.pixels) p = static_cast<float>(rng.uniform());

  ProbMask r1 = refine_mask(m, 0.5f, 30);
  ProbMask r2 = refine_mask(r1, 0.5f, 30);
  CHECK(r2.prob.pixels == r1.prob.pixels);

  ProbMask lo = refine_mask(m, 0.3f, 0);
  ProbMask hi = refine_mask(m, 0.7f, 0);
  for (size_t i = 0; i < lo.prob.pixels.size(); ++i)
    if (hi.prob.pixels[i] == 1.0f) CHECK(lo.prob.pixels[i] == 1.0f);
}

TEST_CASE("refine_mask joins diagonal chains into one component") {
  ProbMask m = make_mask(80, 80);
  for (int i = 0; i < 60; ++i) m.prob.at(i, i) = 1.0f;
  ProbMask r = refine_mask(m, 0.5f, 50);
  int kept = 0;
  for (float p : r.prob.pixels) kept += p == 1.0f ? 1 : 0;
  CHECK(kept == 60);
}

TEST_CASE("remove_lines strips page rules and keeps the structure") {
  RasterImage page(400, 400);
  std::fill(page.pixels.begin(), page.pixels.end(), 1.0f);
  RasterImage mol = molecule_image("CC(=O)OC1=CC=CC=C1C(=O)O", 150, 150, 7);
  blit_min(page, mol, 40, 30);
  for (int x = 0; x < 400; ++x) {
    page.at(x, 250) = 0.0f;
    page.at(x, 251) = 0.0f;
  }
  for (int y = 0; y < 400; ++y) page.at(300, y) = 0.0f;

  int before_total = dark_count(page);
  int mol_before = dark_in(page, 30, 20, 200, 190);
  REQUIRE(mol_before > 100);

  RasterImage clean = remove_lines(page);

  int rule_h = dark_in(clean, 0, 245, 399, 256);
  int rule_v = dark_in(clean, 295, 0, 305, 240);
  CHECK(rule_h <= 8);
  CHECK(rule_v <= 4);
  int mol_after = dark_in(clean, 30, 20, 200, 190);
  CHECK(mol_after >= static_cast<int>(0.95 * mol_before));
  CHECK(dark_count(clean) <= before_total);

  RasterImage again = remove_lines(page);
  CHECK(again.pixels == clean.pixels);
}

TEST_CASE("remove_lines leaves blank pages, short strokes, and text rows alone") {
  RasterImage blank(300, 300);
  std::fill(blank.pixels.begin(), blank.pixels.end(), 1.0f);
  CHECK(remove_lines(blank).pixels == blank.pixels);

  RasterImage page(300, 300);
  std::fill(page.pixels.begin(), page.pixels.end(), 1.0f);
  for (int x = 100; x < 115; ++x) page.at(x, 80) = 0.0f;
  for (int i = 0; i < 200; ++i) page.at(40 + i, 40 + i) = 0.0f;
  for (int x = 0; x < 300; x += 17) {
    for (int k = 0; k < 12 && x + k < 300; ++k) {
      page.at(x + k, 200) = 0.0f;
      page.at(x + k, 201) = 0.0f;
    }
  }
  RasterImage clean = remove_lines(page);
  CHECK(clean.pixels == page.pixels);

  RasterImage noise(300, 300);
  std::fill(noise.pixels.begin(), noise.pixels.end(), 1.0f);
  Rng rng(5);
  for (int i = 0; i < 4500; ++i)
    noise.at(rng.uniform_int(300), rng.uniform_int(300)) = 0.0f;
  CHECK(dark_count(remove_lines(noise)) <= dark_count(noise));
}

TEST_CASE("extract_crops maps mask components to padded page boxes") {
  RasterImage page(200, 100);
  for (int y = 0; y < 100; ++y)
    for (int x = 0; x < 200; ++x) page.at(x, y) = static_cast<float>((x + y) % 7) / 10.0f;

  ProbMask m = make_mask(100, 50);
  m.scale = 0.5;
  for (int y = 10; y < 15; ++y)
    for (int x = 10; x < 20; ++x) m.prob.at(x, y) = 1.0f;
  m.prob.at(70, 30) = 1.0f;
  m.prob.at(99, 49) = 1.0f;

  std::vector<Crop> crops = extract_crops(page, m);
  REQUIRE(crops.size() == 3);

  CHECK(crops[0].box.left == 16);
  CHECK(crops[0].box.top == 16);
  CHECK(crops[0].box.right == 43);
  CHECK(crops[0].box.bottom == 33);
  CHECK(crops[0].box.area == 50);
  CHECK(crops[1].box.left == 136);
  CHECK(crops[1].box.top == 56);
  CHECK(crops[1].box.right == 145);
  CHECK(crops[1].box.bottom == 65);
  CHECK(crops[1].box.area == 1);
  CHECK(crops[2].box.right == 199);
  CHECK(crops[2].box.bottom == 99);

  for (const Crop& c : crops) {
    CHECK(c.image.width == c.box.right - c.box.left + 1);
    CHECK(c.image.height == c.box.bottom - c.box.top + 1);
    for (int y = 0; y < c.image.height; ++y)
      for (int x = 0; x < c.image.width; ++x)
        CHECK(c.image.at(x, y) == page.at(c.box.left + x, c.box.top + y));
  }

  ProbMask empty = make_mask(100, 50);
  CHECK(extract_crops(page, empty).empty());
}

TEST_CASE("unet loss gradients match finite differences on a tiny config") {
  UNetConfig cfg{1, 2, 2};
  nn::ParamStore<double> store;
  init_unet(store, cfg, 13);

  Rng rng(31);
  nn::Tensor<double> image({1, 1, 8, 8});
  for (double& v : image.data) v = 0.5 + 0.4 * rng.uniform();
  std::vector<int> labels(64);
  for (int& l : labels) l = rng.bernoulli(0.4) ? 1 : 0;

  auto loss_value = [&]() {
    nn::Tape<double> tape;
    nn::Binder<double> bind(store);
    int loss = unet_loss(tape, bind, image, labels, cfg);
    return tape.value(loss)[0];
  };

  nn::Tape<double> tape;
  nn::Binder<double> bind(store);
  int loss = unet_loss(tape, bind, image, labels, cfg);
  tape.backward(loss);
  std::map<std::string, nn::Tensor<double>> grads = bind.grads(tape);

  double h = 1e-5;
  double worst = 0.0;
  for (auto& [name, g] : grads) {
    nn::Tensor<double>& value = store.at(name);
    for (size_t i = 0; i < value.numel(); ++i) {
      double keep = value[i];
      value[i] = keep + h;
      double up = loss_value();
      value[i] = keep - h;
      double down = loss_value();
      value[i] = keep;
      double numeric = (up - down) / (2.0 * h);
      double err = std::abs(g[i] - numeric) / std::max({1.0, std::abs(g[i]), std::abs(numeric)});
      worst = std::max(worst, err);
    }
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("segmenter overfits a small synthetic batch") {
  UNetConfig cfg;
  nn::ParamStore<float> store;
  init_unet(store, cfg, 77);

  const int n = 6, side = 32;
  Rng rng(55);
  nn::Tensor<float> images({n, 1, side, side}, 1.0f);
  std::vector<int> labels(static_cast<size_t>(n) * side * side, 0);
  for (int k = 0; k < n; ++k) {
    for (int s = 0; s < 3; ++s) {
      int x0 = 2 + rng.uniform_int(20);
      int y0 = 2 + rng.uniform_int(28);
      int len = 6 + rng.uniform_int(8);
      bool horiz = rng.bernoulli(0.5);
      for (int i = 0; i < len; ++i) {
        int x = horiz ? x0 + i : x0;
        int y = horiz ? y0 : std::min(side - 1, y0 + i);
        if (x >= side) break;
        size_t pix = (static_cast<size_t>(k) * side + y) * side + x;
        images[pix] = 0.0f;
        labels[pix] = 1;
      }
    }
  }

  nn::AdamConfig opt;
  opt.lr = 3e-3;
  double first = 0.0, last = 0.0;
  for (int step = 0; step < 160; ++step) {
    nn::Tape<float> tape;
    nn::Binder<float> bind(store);
    int loss = unet_loss(tape, bind, images, labels, cfg);
    last = tape.value(loss)[0];
    if (step == 0) {
      first = last;
      CHECK(first == doctest::Approx(std::log(2.0)).epsilon(0.20));
    }
    tape.backward(loss);
    adam_step(store, bind.grads(tape), opt);
  }
  CHECK(last < 0.5 * first);

  int correct = 0, total = 0;
  for (int k = 0; k < n; ++k) {
    RasterImage crop(side, side);
    for (int i = 0; i < side * side; ++i)
      crop.pixels[static_cast<size_t>(i)] = images[static_cast<size_t>(k) * side * side + i];
    ProbMask m = unet_forward(crop, store, cfg);
    for (int i = 0; i < side * side; ++i) {
      int pred = m.prob.pixels[static_cast<size_t>(i)] >= 0.5f ? 1 : 0;
      correct += pred == labels[static_cast<size_t>(k) * side * side + i] ? 1 : 0;
      total += 1;
    }
  }
  CHECK(static_cast<double>(correct) / total >= 0.98);
}
