//
// Project molgrep - Copyright 2026 The molgrep Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "doctest.h"
#include "molgrep/nn/adam.hpp"
#include "molgrep/nn/checkpoint.hpp"
#include "molgrep/nn/gradcheck.hpp"
#include "molgrep/nn/gridlstm.hpp"
#include "molgrep/nn/ops.hpp"

using namespace molgrep;
using namespace molgrep::nn;

namespace {

Tensor<double> rand_tensor(std::vector<int> shape, Rng& rng, double stddev = 1.0) {
  return randn<double>(std::move(shape), rng, stddev);
}

// Loss builders close over a fixed projection vector so every output element
// contributes a distinct gradient.
Tensor<double> projection_for(const std::vector<int>& shape, Rng& rng) {
  return randn<double>(shape, rng, 1.0);
}

}  // namespace

TEST_CASE("conv2d identity kernel reproduces the input per channel") {
  Rng rng(11);
  Tensor<double> x = rand_tensor({2, 3, 6, 6}, rng);
  Tensor<double> w({3, 3, 5, 5});
  for (int k = 0; k < 3; ++k) w.data[((static_cast<size_t>(k) * 3 + k) * 5 + 2) * 5 + 2] = 1.0;
  Tensor<double> b({3});
  Tape<double> tape;
  int out = conv2d(tape, tape.push(x), tape.push(w), tape.push(b));
  const Tensor<double>& ov = tape.value(out);
  REQUIRE(ov.shape == x.shape);
  for (size_t i = 0; i < x.numel(); ++i) CHECK(ov[i] == doctest::Approx(x[i]).epsilon(1e-12));
}

TEST_CASE("conv2d zero weights give a constant bias output") {
  Rng rng(12);
  Tensor<double> x = rand_tensor({1, 2, 4, 4}, rng);
  Tensor<double> w({3, 2, 5, 5});
  Tensor<double> b({3});
  b[0] = 0.5;
  b[1] = -1.25;
  b[2] = 2.0;
  Tape<double> tape;
  int out = conv2d(tape, tape.push(x), tape.push(w), tape.push(b));
  const Tensor<double>& ov = tape.value(out);
  for (int k = 0; k < 3; ++k)
    for (int y = 0; y < 4; ++y)
      for (int xx = 0; xx < 4; ++xx) CHECK(ov.at4(0, k, y, xx) == doctest::Approx(b[k]));
}

TEST_CASE("conv2d gradient matches finite differences") {
  for (uint64_t seed : {1u, 2u, 3u}) {
    Rng rng(seed);
    Tensor<double> x = rand_tensor({1, 1, 8, 8}, rng);
    Tensor<double> w = rand_tensor({2, 1, 5, 5}, rng, 0.3);
    Tensor<double> b = rand_tensor({2}, rng, 0.3);
    Tensor<double> r = projection_for({1, 2, 8, 8}, rng);
    double err = grad_check(
        [r](Tape<double>& t, const std::vector<int>& v) {
          return project(t, conv2d(t, v[0], v[1], v[2]), r);
        },
        {x, w, b});
    CHECK(err < 1e-4);
  }
}

TEST_CASE("maxpool basics and gradient") {
  Tape<double> tape;
  Tensor<double> block({1, 1, 2, 2});
  block.data = {1, 2, 3, 4};
  CHECK(tape.value(maxpool2x2(tape, tape.push(block)))[0] == 4.0);

  Tensor<double> flat({1, 2, 4, 4}, 0.75);
  Tape<double> t2;
  const Tensor<double>& pooled = t2.value(maxpool2x2(t2, t2.push(flat)));
  for (double v : pooled.data) CHECK(v == 0.75);

  Tensor<double> odd({1, 1, 3, 4});
  Tape<double> t3;
  CHECK_THROWS_AS(maxpool2x2(t3, t3.push(odd)), Error);

  for (uint64_t seed : {21u, 22u, 23u}) {
    Rng rng(seed);
    Tensor<double> x = rand_tensor({1, 2, 6, 6}, rng);
    Tensor<double> r = projection_for({1, 2, 3, 3}, rng);
    double err = grad_check(
        [r](Tape<double>& t, const std::vector<int>& v) {
          return project(t, maxpool2x2(t, v[0]), r);
        },
        {x});
    CHECK(err < 1e-4);
  }
}

TEST_CASE("prelu limits and gradient") {
  Rng rng(31);
  Tensor<double> x = rand_tensor({1, 2, 3, 3}, rng);

  Tensor<double> zero_alpha({2});
  Tape<double> t1;
  const Tensor<double>& relu = t1.value(prelu(t1, t1.push(x), t1.push(zero_alpha)));
  for (size_t i = 0; i < x.numel(); ++i) CHECK(relu[i] == (x[i] > 0 ? x[i] : 0.0));

  Tensor<double> one_alpha({2}, 1.0);
  Tape<double> t2;
  const Tensor<double>& ident = t2.value(prelu(t2, t2.push(x), t2.push(one_alpha)));
  for (size_t i = 0; i < x.numel(); ++i) CHECK(ident[i] == x[i]);

  for (uint64_t seed : {41u, 42u, 43u}) {
    Rng rng2(seed);
    Tensor<double> xx = rand_tensor({2, 3, 4, 4}, rng2);
    Tensor<double> alpha = rand_tensor({3}, rng2, 0.25);
    Tensor<double> r = projection_for({2, 3, 4, 4}, rng2);
    double err = grad_check(
        [r](Tape<double>& t, const std::vector<int>& v) {
          return project(t, prelu(t, v[0], v[1]), r);
        },
        {xx, alpha});
    CHECK(err < 1e-4);
  }
}

TEST_CASE("transposed conv doubles spatial dims") {
  Rng rng(51);
  Tensor<double> x = rand_tensor({1, 3, 8, 8}, rng);
  Tensor<double> w = rand_tensor({3, 2, 4, 4}, rng, 0.3);
  Tape<double> tape;
  const Tensor<double>& out = tape.value(tconv2d(tape, tape.push(x), tape.push(w)));
  CHECK(out.shape == std::vector<int>{1, 2, 16, 16});
}

TEST_CASE("conv and transposed conv form an adjoint pair") {
  // <tconv(x; w), y> must equal <x, conv_s2(y; w)>, where conv_s2 is the
  // stride-2 4x4 convolution realized by tconv's input gradient.
  for (uint64_t seed : {61u, 62u, 63u, 64u}) {
    Rng rng(seed);
    int C = 2 + static_cast<int>(rng.uniform_int(3));
    int K = 1 + static_cast<int>(rng.uniform_int(3));
    int h = 3 + static_cast<int>(rng.uniform_int(4));
    int w_in = 3 + static_cast<int>(rng.uniform_int(4));
    Tensor<double> x = rand_tensor({1, C, h, w_in}, rng);
    Tensor<double> w = rand_tensor({C, K, 4, 4}, rng, 0.5);
    Tensor<double> y = rand_tensor({1, K, 2 * h, 2 * w_in}, rng);

    Tape<double> tape;
    int xv = tape.push(x);
    int out = tconv2d(tape, xv, tape.push(w));
    double lhs = 0.0;
    const Tensor<double>& ov = tape.value(out);
    for (size_t i = 0; i < y.numel(); ++i) lhs += ov[i] * y[i];

    // Pipe y through the backward pass to obtain conv_s2(y; w).
    int loss = project(tape, out, y);
    tape.backward(loss);
    const Tensor<double>& gx = tape.grad(xv);
    double rhs = 0.0;
    for (size_t i = 0; i < x.numel(); ++i) rhs += gx[i] * x[i];
    CHECK(std::abs(lhs - rhs) < 1e-6);
  }
}

TEST_CASE("transposed conv gradient matches finite differences") {
  for (uint64_t seed : {71u, 72u, 73u}) {
    Rng rng(seed);
    Tensor<double> x = rand_tensor({1, 2, 4, 4}, rng);
    Tensor<double> w = rand_tensor({2, 2, 4, 4}, rng, 0.4);
    Tensor<double> r = projection_for({1, 2, 8, 8}, rng);
    double err = grad_check(
        [r](Tape<double>& t, const std::vector<int>& v) {
          return project(t, tconv2d(t, v[0], v[1]), r);
        },
        {x, w});
    CHECK(err < 1e-4);
  }
}

TEST_CASE("channel concat stacks and splits") {
  Rng rng(81);
  Tensor<double> a = rand_tensor({2, 3, 4, 4}, rng);
  Tensor<double> b = rand_tensor({2, 2, 4, 4}, rng);
  Tape<double> tape;
  int av = tape.push(a);
  int bv = tape.push(b);
  int cat = concat_channels(tape, av, bv);
  const Tensor<double>& cv = tape.value(cat);
  REQUIRE(cv.shape == std::vector<int>{2, 5, 4, 4});
  for (int n = 0; n < 2; ++n)
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 4; ++x) {
        CHECK(cv.at4(n, 0, y, x) == a.at4(n, 0, y, x));
        CHECK(cv.at4(n, 3, y, x) == b.at4(n, 0, y, x));
      }

  int loss = sum_all(tape, cat);
  tape.backward(loss);
  CHECK(tape.grad(av).shape == a.shape);
  CHECK(tape.grad(bv).shape == b.shape);

  for (uint64_t seed : {82u, 83u, 84u}) {
    Rng rng2(seed);
    Tensor<double> aa = rand_tensor({1, 2, 3, 3}, rng2);
    Tensor<double> bb = rand_tensor({1, 3, 3, 3}, rng2);
    Tensor<double> r = projection_for({1, 5, 3, 3}, rng2);
    double err = grad_check(
        [r](Tape<double>& t, const std::vector<int>& v) {
          return project(t, concat_channels(t, v[0], v[1]), r);
        },
        {aa, bb});
    CHECK(err < 1e-4);
  }
}

TEST_CASE("linear layer identity, bias broadcast, and gradient") {
  Tensor<double> eye({3, 3});
  for (int i = 0; i < 3; ++i) eye.at2(i, i) = 1.0;
  Tensor<double> zero_b({3});
  Rng rng(91);
  Tensor<double> x = rand_tensor({4, 3}, rng);
  Tape<double> tape;
  const Tensor<double>& out = tape.value(linear(tape, tape.push(x), tape.push(eye), tape.push(zero_b)));
  for (size_t i = 0; i < x.numel(); ++i) CHECK(out[i] == doctest::Approx(x[i]).epsilon(1e-12));

  Tensor<double> zx({2, 3});
  Tensor<double> w = rand_tensor({3, 5}, rng);
  Tensor<double> b = rand_tensor({5}, rng);
  Tape<double> t2;
  const Tensor<double>& out2 = t2.value(linear(t2, t2.push(zx), t2.push(w), t2.push(b)));
  for (int n = 0; n < 2; ++n)
    for (int j = 0; j < 5; ++j) CHECK(out2.at2(n, j) == doctest::Approx(b[j]));

  for (uint64_t seed : {92u, 93u, 94u, 95u, 96u}) {
    Rng rng2(seed);
    Tensor<double> xx = rand_tensor({3, 4}, rng2);
    Tensor<double> ww = rand_tensor({4, 2}, rng2);
    Tensor<double> bb = rand_tensor({2}, rng2);
    Tensor<double> r = projection_for({3, 2}, rng2);
    double err = grad_check(
        [r](Tape<double>& t, const std::vector<int>& v) {
          return project(t, linear(t, v[0], v[1], v[2]), r);
        },
        {xx, ww, bb});
    CHECK(err < 1e-6);
  }
}

TEST_CASE("softmax cross entropy closed forms") {
  const int V = 65;
  Tensor<double> logits({4, V});
  std::vector<int> targets = {0, 7, 64, 3};
  Tape<double> tape;
  double loss = tape.value(softmax_cross_entropy(tape, tape.push(logits), targets, 3 + V))[0];
  CHECK(loss == doctest::Approx(std::log(static_cast<double>(V))).epsilon(1e-9));

  Tensor<double> margin({2, 5});
  margin.at2(0, 2) = 30.0;
  margin.at2(1, 4) = 30.0;
  Tape<double> t2;
  double tiny = t2.value(softmax_cross_entropy(t2, t2.push(margin), {2, 4}, -1))[0];
  CHECK(tiny < 1e-9);
}

TEST_CASE("softmax cross entropy ignores PAD rows exactly") {
  Rng rng(101);
  Tensor<double> logits = rand_tensor({4, 6}, rng);
  std::vector<int> targets = {1, -1, 4, -1};
  Tape<double> tape;
  int lv = tape.push(logits);
  int loss = softmax_cross_entropy(tape, lv, targets, -1);
  tape.backward(loss);
  const Tensor<double>& g = tape.grad(lv);
  for (int j = 0; j < 6; ++j) {
    CHECK(g.at2(1, j) == 0.0);
    CHECK(g.at2(3, j) == 0.0);
  }

  for (uint64_t seed : {102u, 103u, 104u}) {
    Rng rng2(seed);
    Tensor<double> ll = rand_tensor({5, 7}, rng2);
    std::vector<int> tg = {0, 6, -1, 3, 2};
    double err = grad_check(
        [tg](Tape<double>& t, const std::vector<int>& v) {
          return softmax_cross_entropy(t, v[0], tg, -1);
        },
        {ll});
    CHECK(err < 1e-4);
  }
}

TEST_CASE("embedding lookup and scatter gradient") {
  Rng rng(111);
  Tensor<double> table = rand_tensor({5, 3}, rng);
  std::vector<int> idx = {4, 0, 4, 2};
  Tape<double> tape;
  int tv = tape.push(table);
  int out = embed(tape, tv, idx);
  const Tensor<double>& ov = tape.value(out);
  REQUIRE(ov.shape == std::vector<int>{4, 3});
  for (int j = 0; j < 3; ++j) {
    CHECK(ov.at2(0, j) == table.at2(4, j));
    CHECK(ov.at2(1, j) == table.at2(0, j));
  }

  Tape<double> t3;
  CHECK_THROWS_AS(embed(t3, t3.push(table), std::vector<int>{5}), Error);

  Tensor<double> r = projection_for({4, 3}, rng);
  double err = grad_check(
      [idx, r](Tape<double>& t, const std::vector<int>& v) {
        return project(t, embed(t, v[0], idx), r);
      },
      {table});
  CHECK(err < 1e-6);
}

TEST_CASE("attention degenerate cases") {
  // Identical memory rows: every score equal, weights uniform.
  Tensor<double> q({1, 4}, 0.3);
  Tensor<double> m({1, 6, 3});
  for (int l = 0; l < 6; ++l)
    for (int j = 0; j < 3; ++j) m[static_cast<size_t>(l) * 3 + j] = 0.5 * j - 0.2;
  Rng rng(121);
  Tensor<double> w = rand_tensor({4, 3}, rng);
  Tape<double> tape;
  Attention<double> att = attention(tape, tape.push(q), tape.push(m), tape.push(w));
  for (int l = 0; l < 6; ++l) CHECK(att.weights.at2(0, l) == doctest::Approx(1.0 / 6).epsilon(1e-9));

  // Single location: weight one, context is that vector.
  Tensor<double> m1({1, 1, 3});
  m1.data = {0.1, -0.7, 2.5};
  Tape<double> t2;
  Attention<double> a1 = attention(t2, t2.push(q), t2.push(m1), t2.push(w));
  CHECK(a1.weights[0] == doctest::Approx(1.0));
  const Tensor<double>& ctx = t2.value(a1.context);
  for (int j = 0; j < 3; ++j) CHECK(ctx[j] == doctest::Approx(m1[j]));
}

TEST_CASE("attention weights sum to one and gradient checks") {
  for (uint64_t seed : {131u, 132u, 133u}) {
    Rng rng(seed);
    Tensor<double> q = rand_tensor({2, 4}, rng);
    Tensor<double> m = rand_tensor({2, 5, 3}, rng);
    Tensor<double> w = rand_tensor({4, 3}, rng, 0.5);

    Tape<double> tape;
    Attention<double> att = attention(tape, tape.push(q), tape.push(m), tape.push(w));
    for (int n = 0; n < 2; ++n) {
      double s = 0.0;
      for (int l = 0; l < 5; ++l) {
        CHECK(att.weights.at2(n, l) >= 0.0);
        s += att.weights.at2(n, l);
      }
      CHECK(s == doctest::Approx(1.0).epsilon(1e-6));
    }

    Tensor<double> r = projection_for({2, 3}, rng);
    double err = grad_check(
        [r](Tape<double>& t, const std::vector<int>& v) {
          return project(t, attention(t, v[0], v[1], v[2]).context, r);
        },
        {q, m, w});
    CHECK(err < 1e-4);
  }
}

namespace {

std::vector<Tensor<double>> gridlstm_param_tensors(int d, Rng& rng) {
  std::vector<Tensor<double>> out;
  for (int layer = 0; layer < 3; ++layer) {
    for (int axis = 0; axis < 2; ++axis) {
      for (int gate = 0; gate < 4; ++gate) out.push_back(randn<double>({2 * d, d}, rng, 0.4));
      for (int gate = 0; gate < 4; ++gate) out.push_back(randn<double>({d}, rng, 0.2));
    }
  }
  return out;
}

// Leaf layout: [x0, x1, x2, h0..h2, c0..c2, params...].
int build_gridlstm_loss(Tape<double>& t, const std::vector<int>& v, int d,
                        const std::vector<Tensor<double>>& projections) {
  std::vector<GridLstmState> states;
  for (int l = 0; l < 3; ++l) states.push_back({v[3 + l], v[6 + l]});
  std::vector<GridLstmLayer> layers;
  size_t p = 9;
  for (int l = 0; l < 3; ++l) {
    GridLstmLayer lay{};
    int* slots[16] = {&lay.wi_time,  &lay.wf_time,  &lay.wo_time,  &lay.wg_time,
                      &lay.bi_time,  &lay.bf_time,  &lay.bo_time,  &lay.bg_time,
                      &lay.wi_depth, &lay.wf_depth, &lay.wo_depth, &lay.wg_depth,
                      &lay.bi_depth, &lay.bf_depth, &lay.bo_depth, &lay.bg_depth};
    for (int s = 0; s < 16; ++s) *slots[s] = v[p++];
    layers.push_back(lay);
  }
  int loss = -1;
  for (int step = 0; step < 3; ++step) {
    int y = gridlstm_step(t, v[step], states, layers);
    int term = project(t, y, projections[static_cast<size_t>(step)]);
    loss = step == 0 ? term : add(t, loss, term);
  }
  return loss;
}

}  // namespace

TEST_CASE("gridlstm zero everything gives zero output") {
  const int d = 4;
  Tape<double> tape;
  std::vector<GridLstmState> states;
  for (int l = 0; l < 3; ++l)
    states.push_back({tape.push(Tensor<double>({2, d})), tape.push(Tensor<double>({2, d}))});
  std::vector<GridLstmLayer> layers;
  for (int l = 0; l < 3; ++l) {
    GridLstmLayer lay{};
    int w = tape.push(Tensor<double>({2 * d, d}));
    int b = tape.push(Tensor<double>({d}));
    lay.wi_time = lay.wf_time = lay.wo_time = lay.wg_time = w;
    lay.wi_depth = lay.wf_depth = lay.wo_depth = lay.wg_depth = w;
    lay.bi_time = lay.bf_time = lay.bo_time = lay.bg_time = b;
    lay.bi_depth = lay.bf_depth = lay.bo_depth = lay.bg_depth = b;
    layers.push_back(lay);
  }
  int x = tape.push(Tensor<double>({2, d}));
  int y = gridlstm_step(tape, x, states, layers);
  for (double v : tape.value(y).data) CHECK(v == 0.0);
}

TEST_CASE("gridlstm hidden activations stay inside (-1,1)") {
  const int d = 6;
  Rng rng(141);
  Tape<double> tape;
  std::vector<GridLstmState> states;
  for (int l = 0; l < 3; ++l)
    states.push_back({tape.push(randn<double>({3, d}, rng, 0.8)),
                      tape.push(randn<double>({3, d}, rng, 0.8))});
  std::vector<GridLstmLayer> layers;
  for (int l = 0; l < 3; ++l) {
    GridLstmLayer lay{};
    int* slots[16] = {&lay.wi_time,  &lay.wf_time,  &lay.wo_time,  &lay.wg_time,
                      &lay.bi_time,  &lay.bf_time,  &lay.bo_time,  &lay.bg_time,
                      &lay.wi_depth, &lay.wf_depth, &lay.wo_depth, &lay.wg_depth,
                      &lay.bi_depth, &lay.bf_depth, &lay.bo_depth, &lay.bg_depth};
    for (int s = 0; s < 16; ++s)
      *slots[s] = tape.push(randn<double>(s % 8 < 4 ? std::vector<int>{2 * d, d}
                                                    : std::vector<int>{d},
                                          rng, 1.5));
    layers.push_back(lay);
  }
  int y = -1;
  for (int step = 0; step < 4; ++step)
    y = gridlstm_step(tape, tape.push(randn<double>({3, d}, rng, 2.0)), states, layers);
  for (double v : tape.value(y).data) {
    CHECK(v > -1.0);
    CHECK(v < 1.0);
  }
  for (int l = 0; l < 3; ++l)
    for (double v : tape.value(states[l].h).data) {
      CHECK(v > -1.0);
      CHECK(v < 1.0);
    }
}

TEST_CASE("gridlstm gradient through three unrolled steps") {
  const int d = 3;
  for (uint64_t seed : {151u, 152u}) {
    Rng rng(seed);
    std::vector<Tensor<double>> inputs;
    for (int s = 0; s < 3; ++s) inputs.push_back(rand_tensor({2, d}, rng, 0.7));
    for (int l = 0; l < 3; ++l) inputs.push_back(rand_tensor({2, d}, rng, 0.5));
    for (int l = 0; l < 3; ++l) inputs.push_back(rand_tensor({2, d}, rng, 0.5));
    std::vector<Tensor<double>> params = gridlstm_param_tensors(d, rng);
    inputs.insert(inputs.end(), params.begin(), params.end());

    std::vector<Tensor<double>> projections;
    for (int s = 0; s < 3; ++s) projections.push_back(projection_for({2, d}, rng));

    double err = grad_check(
        [d, projections](Tape<double>& t, const std::vector<int>& v) {
          return build_gridlstm_loss(t, v, d, projections);
        },
        inputs);
    CHECK(err < 1e-4);
  }
}

TEST_CASE("adam first step moves by about lr in the gradient direction") {
  ParamStore<double> store;
  Tensor<double>& w = store.add("w", Tensor<double>({4}));
  w.data = {1.0, -2.0, 3.0, -4.0};
  Tensor<double> g({4});
  g.data = {0.5, -0.25, 1.5, -2.0};
  AdamConfig cfg;
  cfg.lr = 0.01;
  adam_step(store, {{"w", g}}, cfg);
  const Tensor<double>& after = store.at("w");
  std::vector<double> before = {1.0, -2.0, 3.0, -4.0};
  for (int i = 0; i < 4; ++i) {
    double moved = before[static_cast<size_t>(i)] - after[static_cast<size_t>(i)];
    CHECK(std::abs(moved - cfg.lr * (g[static_cast<size_t>(i)] > 0 ? 1.0 : -1.0)) <
          cfg.lr * 1e-3);
  }
  CHECK(store.step == 1);
}

TEST_CASE("adam leaves parameters alone on zero gradient") {
  ParamStore<double> store;
  store.add("w", Tensor<double>({3}, 2.5));
  adam_step(store, {{"w", Tensor<double>({3})}}, AdamConfig{});
  for (double v : store.at("w").data) CHECK(v == 2.5);
}

TEST_CASE("adam drives a quadratic to near zero") {
  ParamStore<double> store;
  Rng rng(161);
  store.add("w", randn<double>({8}, rng, 1.0));
  AdamConfig cfg;
  cfg.lr = 0.1;
  for (int step = 0; step < 200; ++step) {
    Tensor<double> g({8});
    const Tensor<double>& w = store.at("w");
    for (int i = 0; i < 8; ++i) g[static_cast<size_t>(i)] = 2.0 * w[static_cast<size_t>(i)];
    adam_step(store, {{"w", g}}, cfg);
  }
  double norm = 0.0;
  for (double v : store.at("w").data) norm += v * v;
  CHECK(std::sqrt(norm) < 1e-2);
}

TEST_CASE("checkpoint round trip preserves values, moments, and step") {
  ParamStore<double> store;
  Rng rng(171);
  store.add("layer.w", randn<double>({3, 4}, rng, 1.0));
  store.add("layer.b", randn<double>({4}, rng, 1.0));
  Tensor<double> g = randn<double>({3, 4}, rng, 1.0);
  adam_step(store, {{"layer.w", g}}, AdamConfig{});

  std::filesystem::path p = std::filesystem::temp_directory_path() / "molgrep_ckpt_test.bin";
  save_checkpoint(p.string(), store, "toy config");

  ParamStore<double> loaded;
  std::string echo = load_checkpoint(p.string(), loaded);
  CHECK(echo == "toy config");
  CHECK(loaded.step == 1);
  REQUIRE(loaded.params.size() == 2);
  for (const auto& [name, param] : store.params) {
    const auto& other = loaded.params.at(name);
    CHECK(param.value.data == other.value.data);
    CHECK(param.m.data == other.m.data);
    CHECK(param.v.data == other.v.data);
  }

  // A second save of the loaded store is byte-identical.
  std::filesystem::path p2 = std::filesystem::temp_directory_path() / "molgrep_ckpt_test2.bin";
  save_checkpoint(p2.string(), loaded, "toy config");
  std::ifstream f1(p, std::ios::binary), f2(p2, std::ios::binary);
  std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(s1 == s2);
  std::filesystem::remove(p);
  std::filesystem::remove(p2);
}

TEST_CASE("checkpoint rejects scalar width mismatch") {
  ParamStore<float> store;
  store.add("w", Tensor<float>({2}, 1.0f));
  std::filesystem::path p = std::filesystem::temp_directory_path() / "molgrep_ckpt_f32.bin";
  save_checkpoint(p.string(), store, "");
  ParamStore<double> wide;
  CHECK_THROWS_AS(load_checkpoint(p.string(), wide), Error);
  std::filesystem::remove(p);
}

TEST_CASE("identical seeds give identical training bytes") {
  auto run = [](uint64_t seed) {
    Rng rng(seed);
    ParamStore<double> store;
    store.add("w", randn<double>({4, 2}, rng, 0.5));
    store.add("b", randn<double>({2}, rng, 0.5));
    AdamConfig cfg;
    cfg.lr = 1e-2;
    for (int step = 0; step < 5; ++step) {
      Tensor<double> x = randn<double>({3, 4}, rng, 1.0);
      Tape<double> tape;
      Binder<double> binder(store);
      int w = binder.leaf(tape, "w");
      int b = binder.leaf(tape, "b");
      int out = linear(tape, tape.push(x), w, b);
      int loss = sum_all(tape, mul(tape, out, out));
      tape.backward(loss);
      adam_step(store, binder.grads(tape), cfg);
    }
    std::filesystem::path p = std::filesystem::temp_directory_path() /
                              ("molgrep_det_" + std::to_string(seed) + ".bin");
    save_checkpoint(p.string(), store, "det");
    std::ifstream f(p, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    std::filesystem::remove(p);
    return bytes;
  };
  CHECK(run(7) == run(7));
  CHECK(run(7) != run(8));
}

TEST_CASE("unused leaves report zero gradients through the binder") {
  ParamStore<double> store;
  store.add("used", Tensor<double>({2}, 1.0));
  store.add("unused", Tensor<double>({2}, 1.0));
  Tape<double> tape;
  Binder<double> binder(store);
  int used = binder.leaf(tape, "used");
  binder.leaf(tape, "unused");
  int loss = sum_all(tape, used);
  tape.backward(loss);
  auto grads = binder.grads(tape);
  CHECK(grads.at("used").data == std::vector<double>{1.0, 1.0});
  CHECK(grads.at("unused").data == std::vector<double>{0.0, 0.0});
}
