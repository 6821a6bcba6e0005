//
// Project molgrep - Copyright 2026 The molgrep Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLGREP_NN_ADAM_HPP_
#define MOLGREP_NN_ADAM_HPP_

#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "molgrep/nn/tape.hpp"
#include "molgrep/nn/tensor.hpp"

namespace molgrep::nn {

// Named parameters with per-parameter Adam moments and one shared step
// counter. std::map keeps iteration order deterministic, which keeps
// checkpoint bytes and update order reproducible.
template <typename T>
struct ParamStore {
  struct Param {
    Tensor<T> value;
    Tensor<T> m;
    Tensor<T> v;
  };

  std::map<std::string, Param> params;
  long long step = 0;

  Tensor<T>& add(const std::string& name, Tensor<T> init) {
    if (params.count(name)) fail(Err::BadConfig, "duplicate parameter " + name);
    Param p;
    p.m = Tensor<T>(init.shape);
    p.v = Tensor<T>(init.shape);
    p.value = std::move(init);
    return params.emplace(name, std::move(p)).first->second.value;
  }

  Tensor<T>& at(const std::string& name) {
    auto it = params.find(name);
    if (it == params.end()) fail(Err::BadConfig, "unknown parameter " + name);
    return it->second.value;
  }

  bool has(const std::string& name) const { return params.count(name) != 0; }
};

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One Adam update with bias correction. The shared step counter advances
// once per call; parameters without a gradient entry keep their moments.
template <typename T>
void adam_step(ParamStore<T>& store, const std::map<std::string, Tensor<T>>& grads,
               const AdamConfig& cfg) {
  store.step += 1;
  const double corr1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(store.step));
  const double corr2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(store.step));
  for (const auto& [name, g] : grads) {
    auto it = store.params.find(name);
    if (it == store.params.end()) fail(Err::BadConfig, "gradient for unknown parameter " + name);
    typename ParamStore<T>::Param& p = it->second;
    if (!same_shape(p.value, g)) fail(Err::ShapeMismatch, "gradient shape mismatch on " + name);
    for (size_t i = 0; i < g.numel(); ++i) {
      double gi = static_cast<double>(g[i]);
      double m = cfg.beta1 * static_cast<double>(p.m[i]) + (1.0 - cfg.beta1) * gi;
      double v = cfg.beta2 * static_cast<double>(p.v[i]) + (1.0 - cfg.beta2) * gi * gi;
      p.m[i] = static_cast<T>(m);
      p.v[i] = static_cast<T>(v);
      double update = cfg.lr * (m / corr1) / (std::sqrt(v / corr2) + cfg.eps);
      p.value[i] = static_cast<T>(static_cast<double>(p.value[i]) - update);
    }
  }
}

// Ties a ParamStore to tape leaves for one forward/backward pass.
template <typename T>
class Binder {
 public:
  explicit Binder(ParamStore<T>& store) : store_(&store) {}

  int leaf(Tape<T>& tape, const std::string& name) {
    int var = tape.push(store_->at(name));
    bound_.push_back({name, var});
    return var;
  }

  std::map<std::string, Tensor<T>> grads(Tape<T>& tape) const {
    std::map<std::string, Tensor<T>> out;
    for (const auto& [name, var] : bound_) {
      Tensor<T> g = tape.grad_live(var) ? tape.grad(var) : Tensor<T>(tape.value(var).shape);
      auto [it, fresh] = out.emplace(name, std::move(g));
      if (!fresh) {
        Tensor<T>& acc = it->second;
        const Tensor<T>& extra =
            tape.grad_live(var) ? tape.grad(var) : Tensor<T>(tape.value(var).shape);
        for (size_t i = 0; i < acc.numel(); ++i) acc[i] += extra[i];
      }
    }
    return out;
  }

 private:
  ParamStore<T>* store_;
  std::vector<std::pair<std::string, int>> bound_;
};

}  // namespace molgrep::nn

#endif  // MOLGREP_NN_ADAM_HPP_
