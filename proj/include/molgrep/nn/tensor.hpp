//
// Project molgrep - Copyright 2026 The molgrep Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLGREP_NN_TENSOR_HPP_
#define MOLGREP_NN_TENSOR_HPP_

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "molgrep/common.hpp"

namespace molgrep::nn {

// Dense row-major tensor. Scalar type is float in normal runs and double in
// gradient-checking mode.
template <typename T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s, T fill = T(0)) : shape(std::move(s)) {
    data.assign(numel_of(shape), fill);
  }

  static size_t numel_of(const std::vector<int>& s) {
    size_t n = 1;
    for (int d : s) {
      if (d <= 0) fail(Err::ShapeMismatch, "tensor dims must be positive");
      n *= static_cast<size_t>(d);
    }
    return n;
  }

  size_t numel() const { return data.size(); }
  int rank() const { return static_cast<int>(shape.size()); }
  int dim(int i) const { return shape[static_cast<size_t>(i)]; }

  T& operator[](size_t i) { return data[i]; }
  T operator[](size_t i) const { return data[i]; }

  T& at2(int r, int c) { return data[static_cast<size_t>(r) * dim(1) + c]; }
  T at2(int r, int c) const { return data[static_cast<size_t>(r) * dim(1) + c]; }

  T& at4(int n, int c, int y, int x) {
    return data[((static_cast<size_t>(n) * dim(1) + c) * dim(2) + y) * dim(3) + x];
  }
  T at4(int n, int c, int y, int x) const {
    return data[((static_cast<size_t>(n) * dim(1) + c) * dim(2) + y) * dim(3) + x];
  }
};

template <typename T>
using MatMap = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <typename T>
using ConstMatMap =
    Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

template <typename T>
MatMap<T> as_matrix(Tensor<T>& t, int rows, int cols) {
  if (static_cast<size_t>(rows) * cols != t.numel())
    fail(Err::ShapeMismatch, "matrix view does not cover the tensor");
  return MatMap<T>(t.data.data(), rows, cols);
}

template <typename T>
ConstMatMap<T> as_matrix(const Tensor<T>& t, int rows, int cols) {
  if (static_cast<size_t>(rows) * cols != t.numel())
    fail(Err::ShapeMismatch, "matrix view does not cover the tensor");
  return ConstMatMap<T>(t.data.data(), rows, cols);
}

template <typename T>
bool same_shape(const Tensor<T>& a, const Tensor<T>& b) {
  return a.shape == b.shape;
}

template <typename T>
bool all_finite(const Tensor<T>& t) {
  for (T v : t.data)
    if (!std::isfinite(static_cast<double>(v))) return false;
  return true;
}

template <typename T>
Tensor<T> randn(std::vector<int> shape, Rng& rng, double stddev) {
  Tensor<T> out(std::move(shape));
  for (T& v : out.data) v = static_cast<T>(rng.gaussian() * stddev);
  return out;
}

inline std::string shape_text(const std::vector<int>& shape) {
  std::string s = "(";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + ")";
}

}  // namespace molgrep::nn

#endif  // MOLGREP_NN_TENSOR_HPP_
