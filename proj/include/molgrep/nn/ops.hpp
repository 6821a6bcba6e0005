//
// Project molgrep - Copyright 2026 The molgrep Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLGREP_NN_OPS_HPP_
#define MOLGREP_NN_OPS_HPP_

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "molgrep/nn/tape.hpp"
#include "molgrep/nn/tensor.hpp"

namespace molgrep::nn {

namespace detail {

// Unrolls conv patches into a (C*kh*kw) x (Ho*Wo) column matrix.
template <typename T>
void im2col(const T* x, int C, int H, int W, int kh, int kw, int stride, int pad, int Ho, int Wo,
            T* cols) {
  for (int c = 0; c < C; ++c) {
    for (int ky = 0; ky < kh; ++ky) {
      for (int kx = 0; kx < kw; ++kx) {
        T* dst = cols + (static_cast<size_t>(c) * kh * kw + ky * kw + kx) *
                            (static_cast<size_t>(Ho) * Wo);
        for (int oy = 0; oy < Ho; ++oy) {
          int iy = oy * stride + ky - pad;
          for (int ox = 0; ox < Wo; ++ox) {
            int ix = ox * stride + kx - pad;
            dst[static_cast<size_t>(oy) * Wo + ox] =
                (iy >= 0 && iy < H && ix >= 0 && ix < W)
                    ? x[(static_cast<size_t>(c) * H + iy) * W + ix]
                    : T(0);
          }
        }
      }
    }
  }
}

// Scatter-add inverse of im2col.
template <typename T>
void col2im_add(const T* cols, int C, int H, int W, int kh, int kw, int stride, int pad, int Ho,
                int Wo, T* x) {
  for (int c = 0; c < C; ++c) {
    for (int ky = 0; ky < kh; ++ky) {
      for (int kx = 0; kx < kw; ++kx) {
        const T* src = cols + (static_cast<size_t>(c) * kh * kw + ky * kw + kx) *
                                  (static_cast<size_t>(Ho) * Wo);
        for (int oy = 0; oy < Ho; ++oy) {
          int iy = oy * stride + ky - pad;
          if (iy < 0 || iy >= H) continue;
          for (int ox = 0; ox < Wo; ++ox) {
            int ix = ox * stride + kx - pad;
            if (ix < 0 || ix >= W) continue;
            x[(static_cast<size_t>(c) * H + iy) * W + ix] +=
                src[static_cast<size_t>(oy) * Wo + ox];
          }
        }
      }
    }
  }
}

inline void expect(bool cond, const char* what) {
  if (!cond) fail(Err::ShapeMismatch, what);
}

template <typename T>
T stable_sigmoid(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  T e = std::exp(x);
  return e / (T(1) + e);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Elementwise ops.
// ---------------------------------------------------------------------------

template <typename T>
int add(Tape<T>& tape, int a, int b) {
  detail::expect(same_shape(tape.value(a), tape.value(b)), "add operands differ in shape");
  int self = tape.size();
  Tensor<T> out = tape.value(a);
  const Tensor<T>& bv = tape.value(b);
  for (size_t i = 0; i < out.numel(); ++i) out[i] += bv[i];
  return tape.push(std::move(out), [self, a, b](Tape<T>& t) {
    const Tensor<T>& g = t.grad(self);
    Tensor<T>& ga = t.grad(a);
    Tensor<T>& gb = t.grad(b);
    for (size_t i = 0; i < g.numel(); ++i) {
      ga[i] += g[i];
      gb[i] += g[i];
    }
  });
}

template <typename T>
int mul(Tape<T>& tape, int a, int b) {
  detail::expect(same_shape(tape.value(a), tape.value(b)), "mul operands differ in shape");
  int self = tape.size();
  Tensor<T> out = tape.value(a);
  const Tensor<T>& bv = tape.value(b);
  for (size_t i = 0; i < out.numel(); ++i) out[i] *= bv[i];
  return tape.push(std::move(out), [self, a, b](Tape<T>& t) {
    const Tensor<T>& g = t.grad(self);
    const Tensor<T>& av = t.value(a);
    const Tensor<T>& bv2 = t.value(b);
    Tensor<T>& ga = t.grad(a);
    Tensor<T>& gb = t.grad(b);
    for (size_t i = 0; i < g.numel(); ++i) {
      ga[i] += g[i] * bv2[i];
      gb[i] += g[i] * av[i];
    }
  });
}

template <typename T>
int scale(Tape<T>& tape, int a, T s) {
  int self = tape.size();
  Tensor<T> out = tape.value(a);
  for (T& v : out.data) v *= s;
  return tape.push(std::move(out), [self, a, s](Tape<T>& t) {
    const Tensor<T>& g = t.grad(self);
    Tensor<T>& ga = t.grad(a);
    for (size_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * s;
  });
}

template <typename T>
int sigmoid(Tape<T>& tape, int a) {
  int self = tape.size();
  Tensor<T> out = tape.value(a);
  for (T& v : out.data) v = detail::stable_sigmoid(v);
  return tape.push(std::move(out), [self, a](Tape<T>& t) {
    const Tensor<T>& g = t.grad(self);
    const Tensor<T>& y = t.value(self);
    Tensor<T>& ga = t.grad(a);
    for (size_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * y[i] * (T(1) - y[i]);
  });
}

template <typename T>
int tanh_op(Tape<T>& tape, int a) {
  int self = tape.size();
  Tensor<T> out = tape.value(a);
  for (T& v : out.data) v = std::tanh(v);
  return tape.push(std::move(out), [self, a](Tape<T>& t) {
    const Tensor<T>& g = t.grad(self);
    const Tensor<T>& y = t.value(self);
    Tensor<T>& ga = t.grad(a);
    for (size_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * (T(1) - y[i] * y[i]);
  });
}

// ---------------------------------------------------------------------------
// Shape ops.
// ---------------------------------------------------------------------------

// Concatenates along dim 1, the channel dim of NCHW tensors and the feature
// dim of NxD matrices. All other dims must agree.
template <typename T>
int concat_channels(Tape<T>& tape, int a, int b) {
  const Tensor<T>& av = tape.value(a);
  const Tensor<T>& bv = tape.value(b);
  detail::expect(av.rank() == bv.rank() && av.rank() >= 2, "concat needs equal ranks >= 2");
  for (int i = 0; i < av.rank(); ++i)
    if (i != 1) detail::expect(av.dim(i) == bv.dim(i), "concat dims differ outside dim 1");
  int outer = av.dim(0);
  size_t inner = 1;
  for (int i = 2; i < av.rank(); ++i) inner *= static_cast<size_t>(av.dim(i));
  int ca = av.dim(1), cb = bv.dim(1);

  std::vector<int> shape = av.shape;
  shape[1] = ca + cb;
  Tensor<T> out(shape);
  for (int n = 0; n < outer; ++n) {
    std::copy_n(av.data.data() + static_cast<size_t>(n) * ca * inner, static_cast<size_t>(ca) * inner,
                out.data.data() + static_cast<size_t>(n) * (ca + cb) * inner);
    std::copy_n(bv.data.data() + static_cast<size_t>(n) * cb * inner, static_cast<size_t>(cb) * inner,
                out.data.data() + static_cast<size_t>(n) * (ca + cb) * inner +
                    static_cast<size_t>(ca) * inner);
  }
  int self = tape.size();
  return tape.push(std::move(out), [self, a, b, outer, inner, ca, cb](Tape<T>& t) {
    const Tensor<T>& g = t.grad(self);
    Tensor<T>& ga = t.grad(a);
    Tensor<T>& gb = t.grad(b);
    for (int n = 0; n < outer; ++n) {
      const T* gn = g.data.data() + static_cast<size_t>(n) * (ca + cb) * inner;
      T* gan = ga.data.data() + static_cast<size_t>(n) * ca * inner;
      T* gbn = gb.data.data() + static_cast<size_t>(n) * cb * inner;
      for (size_t i = 0; i < static_cast<size_t>(ca) * inner; ++i) gan[i] += gn[i];
      for (size_t i = 0; i < static_cast<size_t>(cb) * inner; ++i)
        gbn[i] += gn[static_cast<size_t>(ca) * inner + i];
    }
  });
}

// NxCxHxW feature grid -> Nx(H*W)xC rows of location vectors.
template <typename T>
int nchw_to_nlc(Tape<T>& tape, int x) {
  const Tensor<T>& xv = tape.value(x);
  detail::expect(xv.rank() == 4, "grid flatten expects NCHW");
  int N = xv.dim(0), C = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
  int L = H * W;
  Tensor<T> out({N, L, C});
  for (int n = 0; n < N; ++n)
    for (int c = 0; c < C; ++c)
      for (int l = 0; l < L; ++l)
        out[(static_cast<size_t>(n) * L + l) * C + c] =
            xv[(static_cast<size_t>(n) * C + c) * L + l];
  int self = tape.size();
  return tape.push(std::move(out), [self, x, N, C, L](Tape<T>& t) {
    const Tensor<T>& g = t.grad(self);
    Tensor<T>& gx = t.grad(x);
    for (int n = 0; n < N; ++n)
      for (int c = 0; c < C; ++c)
        for (int l = 0; l < L; ++l)
          gx[(static_cast<size_t>(n) * C + c) * L + l] +=
              g[(static_cast<size_t>(n) * L + l) * C + c];
  });
}

// Reinterprets the value under a new shape with the same element count.
template <typename T>
int reshape(Tape<T>& tape, int x, std::vector<int> shape) {
  const Tensor<T>& xv = tape.value(x);
  size_t n = 1;
  for (int d : shape) {
    detail::expect(d > 0, "reshape dims must be positive");
    n *= static_cast<size_t>(d);
  }
  detail::expect(n == xv.numel(), "reshape must keep the element count");
  Tensor<T> out(shape);
  out.data = xv.data;
  int self = tape.size();
  return tape.push(std::move(out), [self, x](Tape<T>& t) {
    const Tensor<T>& g = t.grad(self);
    Tensor<T>& gx = t.grad(x);
    for (size_t i = 0; i < g.numel(); ++i) gx[i] += g[i];
  });
}

// NxCxHxW -> NxC spatial mean.
template <typename T>
int spatial_mean(Tape<T>& tape, int x) {
  const Tensor<T>& xv = tape.value(x);
  detail::expect(xv.rank() == 4, "spatial mean expects NCHW");
  int N = xv.dim(0), C = xv.dim(1);
  size_t hw = static_cast<size_t>(xv.dim(2)) * xv.dim(3);
  Tensor<T> out({N, C});
  for (int n = 0; n < N; ++n)
    for (int c = 0; c < C; ++c) {
      const T* src = xv.data.data() + (static_cast<size_t>(n) * C + c) * hw;
      T acc = T(0);
      for (size_t i = 0; i < hw; ++i) acc += src[i];
      out.at2(n, c) = acc / static_cast<T>(hw);
    }
  int self = tape.size();
  return tape.push(std::move(out), [self, x, N, C, hw](Tape<T>& t) {
    const Tensor<T>& g = t.grad(self);
    Tensor<T>& gx = t.grad(x);
    for (int n = 0; n < N; ++n)
      for (int c = 0; c < C; ++c) {
        T gv = g.at2(n, c) / static_cast<T>(hw);
        T* dst = gx.data.data() + (static_cast<size_t>(n) * C + c) * hw;
        for (size_t i = 0; i < hw; ++i) dst[i] += gv;
      }
  });
}

// ---------------------------------------------------------------------------
// Dense and convolutional layers.
// ---------------------------------------------------------------------------

template <typename T>
int linear(Tape<T>& tape, int x, int w, int b) {
  const Tensor<T>& xv = tape.value(x);
  const Tensor<T>& wv = tape.value(w);
  const Tensor<T>& bv = tape.value(b);
  detail::expect(xv.rank() == 2 && wv.rank() == 2, "linear expects rank-2 input and weights");
  detail::expect(xv.dim(1) == wv.dim(0), "linear input width mismatches weights");
  detail::expect(bv.rank() == 1 && bv.dim(0) == wv.dim(1), "linear bias width mismatch");
  int N = xv.dim(0), din = xv.dim(1), dout = wv.dim(1);
  Tensor<T> out({N, dout});
  as_matrix(out, N, dout).noalias() = as_matrix(xv, N, din) * as_matrix(wv, din, dout);
  for (int n = 0; n < N; ++n)
    for (int j = 0; j < dout; ++j) out.at2(n, j) += bv[static_cast<size_t>(j)];
  int self = tape.size();
  return tape.push(std::move(out), [self, x, w, b, N, din, dout](Tape<T>& t) {
    MatMap<T> g = as_matrix(t.grad(self), N, dout);
    MatMap<T> xm = as_matrix(t.value(x), N, din);
    MatMap<T> wm = as_matrix(t.value(w), din, dout);
    as_matrix(t.grad(x), N, din).noalias() += g * wm.transpose();
    as_matrix(t.grad(w), din, dout).noalias() += xm.transpose() * g;
    Tensor<T>& gb = t.grad(b);
    for (int n = 0; n < N; ++n)
      for (int j = 0; j < dout; ++j) gb[static_cast<size_t>(j)] += g(n, j);
  });
}

// 5x5 same-size convolution, stride 1, zero padding 2.
template <typename T>
int conv2d(Tape<T>& tape, int x, int w, int b) {
  const Tensor<T>& xv = tape.value(x);
  const Tensor<T>& wv = tape.value(w);
  const Tensor<T>& bv = tape.value(b);
  detail::expect(xv.rank() == 4 && wv.rank() == 4, "conv expects NCHW input and KC55 weights");
  detail::expect(wv.dim(2) == 5 && wv.dim(3) == 5, "conv kernel must be 5x5");
  detail::expect(wv.dim(1) == xv.dim(1), "conv channel mismatch");
  detail::expect(bv.rank() == 1 && bv.dim(0) == wv.dim(0), "conv bias width mismatch");
  const int N = xv.dim(0), C = xv.dim(1), H = xv.dim(2), W = xv.dim(3), K = wv.dim(0);
  const int kk = 25, pad = 2;
  const size_t plane = static_cast<size_t>(H) * W;

  Tensor<T> out({N, K, H, W});
  std::vector<T> cols(static_cast<size_t>(C) * kk * plane);
  ConstMatMap<T> wm(wv.data.data(), K, C * kk);
  for (int n = 0; n < N; ++n) {
    detail::im2col(xv.data.data() + static_cast<size_t>(n) * C * plane, C, H, W, 5, 5, 1, pad, H,
                   W, cols.data());
    ConstMatMap<T> cm(cols.data(), C * kk, static_cast<int>(plane));
    MatMap<T> om(out.data.data() + static_cast<size_t>(n) * K * plane, K,
                 static_cast<int>(plane));
    om.noalias() = wm * cm;
    for (int k = 0; k < K; ++k) om.row(k).array() += bv[static_cast<size_t>(k)];
  }
  int self = tape.size();
  return tape.push(std::move(out), [self, x, w, b, N, C, H, W, K](Tape<T>& t) {
    const int kk2 = 25, pad2 = 2;
    const size_t plane = static_cast<size_t>(H) * W;
    const Tensor<T>& g = t.grad(self);
    const Tensor<T>& xv2 = t.value(x);
    const Tensor<T>& wv2 = t.value(w);
    Tensor<T>& gx = t.grad(x);
    Tensor<T>& gw = t.grad(w);
    Tensor<T>& gb = t.grad(b);
    std::vector<T> cols(static_cast<size_t>(C) * kk2 * plane);
    std::vector<T> dcols(cols.size());
    ConstMatMap<T> wm(wv2.data.data(), K, C * kk2);
    MatMap<T> gwm(gw.data.data(), K, C * kk2);
    for (int n = 0; n < N; ++n) {
      ConstMatMap<T> gm(g.data.data() + static_cast<size_t>(n) * K * plane, K,
                        static_cast<int>(plane));
      detail::im2col(xv2.data.data() + static_cast<size_t>(n) * C * plane, C, H, W, 5, 5, 1, pad2,
                     H, W, cols.data());
      ConstMatMap<T> cm(cols.data(), C * kk2, static_cast<int>(plane));
      gwm.noalias() += gm * cm.transpose();
      MatMap<T> dcm(dcols.data(), C * kk2, static_cast<int>(plane));
      dcm.noalias() = wm.transpose() * gm;
      detail::col2im_add(dcols.data(), C, H, W, 5, 5, 1, pad2, H, W,
                         gx.data.data() + static_cast<size_t>(n) * C * plane);
      for (int k = 0; k < K; ++k) gb[static_cast<size_t>(k)] += gm.row(k).sum();
    }
  });
}

// Fractionally strided 4x4 convolution doubling spatial dims (stride 2,
// padding 1). Weights are shaped C x K x 4 x 4 with C the input channels.
// The forward pass is by construction the adjoint of a stride-2 4x4
// convolution with the same weights.
template <typename T>
int tconv2d(Tape<T>& tape, int x, int w) {
  const Tensor<T>& xv = tape.value(x);
  const Tensor<T>& wv = tape.value(w);
  detail::expect(xv.rank() == 4 && wv.rank() == 4, "tconv expects NCHW input and CK44 weights");
  detail::expect(wv.dim(2) == 4 && wv.dim(3) == 4, "tconv kernel must be 4x4");
  detail::expect(wv.dim(0) == xv.dim(1), "tconv channel mismatch");
  const int N = xv.dim(0), C = xv.dim(1), h = xv.dim(2), w_in = xv.dim(3), K = wv.dim(1);
  const int H = 2 * h, W = 2 * w_in, kk = 16, pad = 1, stride = 2;
  const size_t in_plane = static_cast<size_t>(h) * w_in;
  const size_t out_plane = static_cast<size_t>(H) * W;

  Tensor<T> out({N, K, H, W});
  std::vector<T> cols(static_cast<size_t>(K) * kk * in_plane);
  ConstMatMap<T> wm(wv.data.data(), C, K * kk);
  for (int n = 0; n < N; ++n) {
    ConstMatMap<T> xm(xv.data.data() + static_cast<size_t>(n) * C * in_plane, C,
                      static_cast<int>(in_plane));
    MatMap<T> cm(cols.data(), K * kk, static_cast<int>(in_plane));
    cm.noalias() = wm.transpose() * xm;
    detail::col2im_add(cols.data(), K, H, W, 4, 4, stride, pad, h, w_in,
                       out.data.data() + static_cast<size_t>(n) * K * out_plane);
  }
  int self = tape.size();
  return tape.push(std::move(out), [self, x, w, N, C, h, w_in, K](Tape<T>& t) {
    const int H = 2 * h, W = 2 * w_in, kk2 = 16, pad2 = 1, stride2 = 2;
    const size_t in_plane = static_cast<size_t>(h) * w_in;
    const size_t out_plane = static_cast<size_t>(H) * W;
    const Tensor<T>& g = t.grad(self);
    const Tensor<T>& xv2 = t.value(x);
    const Tensor<T>& wv2 = t.value(w);
    Tensor<T>& gx = t.grad(x);
    Tensor<T>& gw = t.grad(w);
    std::vector<T> cols(static_cast<size_t>(K) * kk2 * in_plane);
    ConstMatMap<T> wm(wv2.data.data(), C, K * kk2);
    MatMap<T> gwm(gw.data.data(), C, K * kk2);
    for (int n = 0; n < N; ++n) {
      detail::im2col(g.data.data() + static_cast<size_t>(n) * K * out_plane, K, H, W, 4, 4,
                     stride2, pad2, h, w_in, cols.data());
      ConstMatMap<T> cm(cols.data(), K * kk2, static_cast<int>(in_plane));
      MatMap<T> gxm(gx.data.data() + static_cast<size_t>(n) * C * in_plane, C,
                    static_cast<int>(in_plane));
      gxm.noalias() += wm * cm;
      ConstMatMap<T> xm(xv2.data.data() + static_cast<size_t>(n) * C * in_plane, C,
                        static_cast<int>(in_plane));
      gwm.noalias() += xm * cm.transpose();
    }
  });
}

template <typename T>
int maxpool2x2(Tape<T>& tape, int x) {
  const Tensor<T>& xv = tape.value(x);
  detail::expect(xv.rank() == 4, "maxpool expects NCHW");
  const int N = xv.dim(0), C = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
  if (H % 2 != 0 || W % 2 != 0) fail(Err::OddDimension, "maxpool needs even spatial dims");
  const int Ho = H / 2, Wo = W / 2;
  Tensor<T> out({N, C, Ho, Wo});
  auto arg = std::make_shared<std::vector<size_t>>(out.numel());
  size_t o = 0;
  for (int n = 0; n < N; ++n)
    for (int c = 0; c < C; ++c)
      for (int oy = 0; oy < Ho; ++oy)
        for (int ox = 0; ox < Wo; ++ox, ++o) {
          size_t best = 0;
          T bestv = T(0);
          bool first = true;
          for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx) {
              size_t idx = ((static_cast<size_t>(n) * C + c) * H + (2 * oy + dy)) * W +
                           (2 * ox + dx);
              if (first || xv[idx] > bestv) {
                best = idx;
                bestv = xv[idx];
                first = false;
              }
            }
          out[o] = bestv;
          (*arg)[o] = best;
        }
  int self = tape.size();
  return tape.push(std::move(out), [self, x, arg](Tape<T>& t) {
    const Tensor<T>& g = t.grad(self);
    Tensor<T>& gx = t.grad(x);
    for (size_t i = 0; i < g.numel(); ++i) gx[(*arg)[i]] += g[i];
  });
}

// x when positive, alpha*x otherwise; alpha is per-channel (dim 1).
template <typename T>
int prelu(Tape<T>& tape, int x, int alpha) {
  const Tensor<T>& xv = tape.value(x);
  const Tensor<T>& av = tape.value(alpha);
  detail::expect(xv.rank() >= 2, "prelu expects rank >= 2");
  detail::expect(av.rank() == 1 && av.dim(0) == xv.dim(1), "prelu alpha must match channels");
  const int N = xv.dim(0), C = xv.dim(1);
  size_t inner = 1;
  for (int i = 2; i < xv.rank(); ++i) inner *= static_cast<size_t>(xv.dim(i));
  Tensor<T> out = xv;
  for (int n = 0; n < N; ++n)
    for (int c = 0; c < C; ++c) {
      T a = av[static_cast<size_t>(c)];
      T* p = out.data.data() + (static_cast<size_t>(n) * C + c) * inner;
      for (size_t i = 0; i < inner; ++i)
        if (p[i] <= T(0)) p[i] *= a;
    }
  int self = tape.size();
  return tape.push(std::move(out), [self, x, alpha, N, C, inner](Tape<T>& t) {
    const Tensor<T>& g = t.grad(self);
    const Tensor<T>& xv2 = t.value(x);
    const Tensor<T>& av2 = t.value(alpha);
    Tensor<T>& gx = t.grad(x);
    Tensor<T>& ga = t.grad(alpha);
    for (int n = 0; n < N; ++n)
      for (int c = 0; c < C; ++c) {
        T a = av2[static_cast<size_t>(c)];
        size_t base = (static_cast<size_t>(n) * C + c) * inner;
        T acc = T(0);
        for (size_t i = 0; i < inner; ++i) {
          T xval = xv2[base + i];
          T gval = g[base + i];
          if (xval > T(0)) {
            gx[base + i] += gval;
          } else {
            gx[base + i] += gval * a;
            acc += gval * xval;
          }
        }
        ga[static_cast<size_t>(c)] += acc;
      }
  });
}

// ---------------------------------------------------------------------------
// Losses, embeddings, attention.
// ---------------------------------------------------------------------------

// Mean over non-ignored rows of -log softmax(logits)[target]. Gradients on
// ignored rows are exactly zero.
template <typename T>
int softmax_cross_entropy(Tape<T>& tape, int logits, const std::vector<int>& targets,
                          int ignore_index) {
  const Tensor<T>& lv = tape.value(logits);
  detail::expect(lv.rank() == 2, "cross entropy expects NxV logits");
  const int N = lv.dim(0), V = lv.dim(1);
  detail::expect(static_cast<int>(targets.size()) == N, "one target per logits row");
  int count = 0;
  for (int t : targets) {
    if (t == ignore_index) continue;
    if (t < 0 || t >= V) fail(Err::IndexOutOfRange, "target index outside vocabulary");
    ++count;
  }

  auto probs = std::make_shared<Tensor<T>>(std::vector<int>{N, V});
  T loss = T(0);
  for (int n = 0; n < N; ++n) {
    const T* row = lv.data.data() + static_cast<size_t>(n) * V;
    T m = row[0];
    for (int j = 1; j < V; ++j) m = std::max(m, row[j]);
    T sum = T(0);
    for (int j = 0; j < V; ++j) {
      T e = std::exp(row[j] - m);
      probs->at2(n, j) = e;
      sum += e;
    }
    for (int j = 0; j < V; ++j) probs->at2(n, j) /= sum;
    if (targets[static_cast<size_t>(n)] != ignore_index)
      loss -= std::log(probs->at2(n, targets[static_cast<size_t>(n)]));
  }
  if (count > 0) loss /= static_cast<T>(count);

  Tensor<T> out({1});
  out[0] = loss;
  int self = tape.size();
  auto tgt = std::make_shared<std::vector<int>>(targets);
  return tape.push(std::move(out), [self, logits, probs, tgt, ignore_index, N, V,
                                    count](Tape<T>& t) {
    if (count == 0) return;
    T g0 = t.grad(self)[0];
    Tensor<T>& gl = t.grad(logits);
    T inv = g0 / static_cast<T>(count);
    for (int n = 0; n < N; ++n) {
      int target = (*tgt)[static_cast<size_t>(n)];
      if (target == ignore_index) continue;
      for (int j = 0; j < V; ++j) {
        T p = probs->at2(n, j);
        gl.at2(n, j) += inv * (j == target ? p - T(1) : p);
      }
    }
  });
}

// Row lookup: out row r = table row indices[r].
template <typename T>
int embed(Tape<T>& tape, int table, const std::vector<int>& indices) {
  const Tensor<T>& tv = tape.value(table);
  detail::expect(tv.rank() == 2, "embedding table must be rank 2");
  const int V = tv.dim(0), D = tv.dim(1);
  for (int i : indices)
    if (i < 0 || i >= V) fail(Err::IndexOutOfRange, "embedding index outside table");
  const int N = static_cast<int>(indices.size());
  Tensor<T> out({N, D});
  for (int n = 0; n < N; ++n)
    std::copy_n(tv.data.data() + static_cast<size_t>(indices[static_cast<size_t>(n)]) * D, D,
                out.data.data() + static_cast<size_t>(n) * D);
  int self = tape.size();
  auto idx = std::make_shared<std::vector<int>>(indices);
  return tape.push(std::move(out), [self, table, idx, N, D](Tape<T>& t) {
    const Tensor<T>& g = t.grad(self);
    Tensor<T>& gt = t.grad(table);
    for (int n = 0; n < N; ++n) {
      T* dst = gt.data.data() + static_cast<size_t>((*idx)[static_cast<size_t>(n)]) * D;
      const T* src = g.data.data() + static_cast<size_t>(n) * D;
      for (int j = 0; j < D; ++j) dst[j] += src[j];
    }
  });
}

// Bilinear attention: scores_l = (query . W) . memory_l, weights = softmax,
// context = sum_l weights_l * memory_l. The context is differentiable; the
// returned weights are a read-only snapshot for maps and diagnostics.
template <typename T>
struct Attention {
  int context = -1;
  Tensor<T> weights;
};

template <typename T>
Attention<T> attention(Tape<T>& tape, int query, int memory, int w) {
  const Tensor<T>& qv = tape.value(query);
  const Tensor<T>& mv = tape.value(memory);
  const Tensor<T>& wv = tape.value(w);
  detail::expect(qv.rank() == 2 && mv.rank() == 3 && wv.rank() == 2,
                 "attention expects NxDq query, NxLxD memory, DqxD weights");
  const int N = qv.dim(0), Dq = qv.dim(1), L = mv.dim(1), D = mv.dim(2);
  detail::expect(mv.dim(0) == N, "attention batch mismatch");
  detail::expect(wv.dim(0) == Dq && wv.dim(1) == D, "attention projection shape mismatch");

  auto probs = std::make_shared<Tensor<T>>(std::vector<int>{N, L});
  Tensor<T> ctx({N, D});
  ConstMatMap<T> wm(wv.data.data(), Dq, D);
  for (int n = 0; n < N; ++n) {
    ConstMatMap<T> mn(mv.data.data() + static_cast<size_t>(n) * L * D, L, D);
    Eigen::Matrix<T, Eigen::Dynamic, 1> q =
        ConstMatMap<T>(qv.data.data() + static_cast<size_t>(n) * Dq, 1, Dq).transpose();
    Eigen::Matrix<T, Eigen::Dynamic, 1> qp = wm.transpose() * q;
    Eigen::Matrix<T, Eigen::Dynamic, 1> s = mn * qp;
    T m = s.maxCoeff();
    Eigen::Array<T, Eigen::Dynamic, 1> e = (s.array() - m).exp();
    e /= e.sum();
    for (int l = 0; l < L; ++l) probs->at2(n, l) = e[l];
    MatMap<T> cn(ctx.data.data() + static_cast<size_t>(n) * D, 1, D);
    cn.noalias() = e.matrix().transpose() * mn;
  }

  int self = tape.size();
  int ctx_var = tape.push(std::move(ctx), [self, query, memory, w, probs, N, Dq, L,
                                           D](Tape<T>& t) {
    const Tensor<T>& g = t.grad(self);
    const Tensor<T>& qv2 = t.value(query);
    const Tensor<T>& mv2 = t.value(memory);
    const Tensor<T>& wv2 = t.value(w);
    Tensor<T>& gq = t.grad(query);
    Tensor<T>& gm = t.grad(memory);
    Tensor<T>& gw = t.grad(w);
    ConstMatMap<T> wm(wv2.data.data(), Dq, D);
    MatMap<T> gwm(gw.data.data(), Dq, D);
    for (int n = 0; n < N; ++n) {
      ConstMatMap<T> mn(mv2.data.data() + static_cast<size_t>(n) * L * D, L, D);
      MatMap<T> gmn(gm.data.data() + static_cast<size_t>(n) * L * D, L, D);
      Eigen::Matrix<T, Eigen::Dynamic, 1> q =
          ConstMatMap<T>(qv2.data.data() + static_cast<size_t>(n) * Dq, 1, Dq).transpose();
      Eigen::Matrix<T, Eigen::Dynamic, 1> qp = wm.transpose() * q;
      Eigen::Matrix<T, Eigen::Dynamic, 1> a(L);
      for (int l = 0; l < L; ++l) a[l] = probs->at2(n, l);
      Eigen::Matrix<T, Eigen::Dynamic, 1> gctx =
          ConstMatMap<T>(g.data.data() + static_cast<size_t>(n) * D, 1, D).transpose();
      Eigen::Matrix<T, Eigen::Dynamic, 1> ga = mn * gctx;
      T dot = a.dot(ga);
      Eigen::Matrix<T, Eigen::Dynamic, 1> gs = a.array() * (ga.array() - dot);
      Eigen::Matrix<T, Eigen::Dynamic, 1> gqp = mn.transpose() * gs;
      gmn.noalias() += gs * qp.transpose() + a * gctx.transpose();
      Eigen::Matrix<T, Eigen::Dynamic, 1> gqn = wm * gqp;
      for (int j = 0; j < Dq; ++j) gq[static_cast<size_t>(n) * Dq + j] += gqn[j];
      gwm.noalias() += q * gqp.transpose();
    }
  });
  Attention<T> result;
  result.context = ctx_var;
  result.weights = *probs;
  return result;
}

// ---------------------------------------------------------------------------
// Scalar reductions.
// ---------------------------------------------------------------------------

template <typename T>
int sum_all(Tape<T>& tape, int x) {
  const Tensor<T>& xv = tape.value(x);
  Tensor<T> out({1});
  T acc = T(0);
  for (T v : xv.data) acc += v;
  out[0] = acc;
  int self = tape.size();
  return tape.push(std::move(out), [self, x](Tape<T>& t) {
    T g0 = t.grad(self)[0];
    Tensor<T>& gx = t.grad(x);
    for (T& v : gx.data) v += g0;
  });
}

// Dot product with a fixed vector; gives gradient checks a loss whose
// gradient varies per element.
template <typename T>
int project(Tape<T>& tape, int x, const Tensor<T>& r) {
  const Tensor<T>& xv = tape.value(x);
  detail::expect(xv.numel() == r.numel(), "projection vector size mismatch");
  Tensor<T> out({1});
  T acc = T(0);
  for (size_t i = 0; i < xv.numel(); ++i) acc += xv[i] * r[i];
  out[0] = acc;
  int self = tape.size();
  auto rv = std::make_shared<Tensor<T>>(r);
  return tape.push(std::move(out), [self, x, rv](Tape<T>& t) {
    T g0 = t.grad(self)[0];
    Tensor<T>& gx = t.grad(x);
    for (size_t i = 0; i < gx.numel(); ++i) gx[i] += g0 * (*rv)[i];
  });
}

}  // namespace molgrep::nn

#endif  // MOLGREP_NN_OPS_HPP_
