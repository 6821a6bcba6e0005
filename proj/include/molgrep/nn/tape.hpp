//
// Project molgrep - Copyright 2026 The molgrep Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLGREP_NN_TAPE_HPP_
#define MOLGREP_NN_TAPE_HPP_

#include <functional>
#include <utility>
#include <vector>

#include "molgrep/nn/tensor.hpp"

namespace molgrep::nn {

// Reverse-mode tape. Each recorded node owns its output tensor, a lazily
// allocated gradient of the same shape, and a closure that scatters the
// node's gradient into its inputs' gradients. Nodes only ever reference
// earlier nodes, so a single reverse sweep visits each node once.
//
// backward(root) seeds every element of the root's gradient with 1, which
// differentiates sum(root); losses are scalar nodes so this is d(loss).
template <typename T>
class Tape {
 public:
  using BackFn = std::function<void(Tape<T>&)>;

  int push(Tensor<T> value, BackFn back = nullptr) {
    nodes_.push_back(Node{std::move(value), Tensor<T>(), std::move(back)});
    return static_cast<int>(nodes_.size()) - 1;
  }

  Tensor<T>& value(int v) { return at(v).value; }
  const Tensor<T>& value(int v) const { return at(v).value; }

  // Allocates the gradient on first touch.
  Tensor<T>& grad(int v) {
    Node& n = at(v);
    if (n.grad.data.empty()) n.grad = Tensor<T>(n.value.shape);
    return n.grad;
  }

  // True when some consumer (or the seed) has touched this gradient.
  bool grad_live(int v) const { return !at(v).grad.data.empty(); }

  void backward(int root) {
    Tensor<T>& seed = grad(root);
    std::fill(seed.data.begin(), seed.data.end(), T(1));
    for (int i = root; i >= 0; --i) {
      Node& n = nodes_[static_cast<size_t>(i)];
      if (n.back && !n.grad.data.empty()) n.back(*this);
    }
  }

  int size() const { return static_cast<int>(nodes_.size()); }

 private:
  struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    BackFn back;
  };

  Node& at(int v) {
    if (v < 0 || v >= size()) fail(Err::IndexOutOfRange, "tape variable out of range");
    return nodes_[static_cast<size_t>(v)];
  }
  const Node& at(int v) const {
    if (v < 0 || v >= size()) fail(Err::IndexOutOfRange, "tape variable out of range");
    return nodes_[static_cast<size_t>(v)];
  }

  std::vector<Node> nodes_;
};

}  // namespace molgrep::nn

#endif  // MOLGREP_NN_TAPE_HPP_
