//
// Project molgrep - Copyright 2026 The molgrep Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLGREP_NN_GRADCHECK_HPP_
#define MOLGREP_NN_GRADCHECK_HPP_

#include <cmath>
#include <functional>
#include <vector>

#include "molgrep/nn/tape.hpp"

namespace molgrep::nn {

// Compares recorded backward gradients against central finite differences in
// double precision. `build` records the graph on a fresh tape over leaf
// variables made from `inputs` (in order) and returns a scalar variable.
// Reports the worst relative error |analytic - numeric| over
// max(1, |analytic|, |numeric|) across every input element.
inline double grad_check(
    const std::function<int(Tape<double>&, const std::vector<int>&)>& build,
    std::vector<Tensor<double>> inputs, double h = 1e-5) {
  Tape<double> tape;
  std::vector<int> leaves;
  leaves.reserve(inputs.size());
  for (const Tensor<double>& t : inputs) leaves.push_back(tape.push(t));
  int loss = build(tape, leaves);
  if (tape.value(loss).numel() != 1) fail(Err::ShapeMismatch, "gradient check needs scalar loss");
  tape.backward(loss);

  auto eval = [&](const std::vector<Tensor<double>>& pts) {
    Tape<double> t2;
    std::vector<int> l2;
    l2.reserve(pts.size());
    for (const Tensor<double>& t : pts) l2.push_back(t2.push(t));
    int out = build(t2, l2);
    return t2.value(out)[0];
  };

  double worst = 0.0;
  for (size_t i = 0; i < inputs.size(); ++i) {
    const Tensor<double>* g = tape.grad_live(leaves[i]) ? &tape.grad(leaves[i]) : nullptr;
    for (size_t j = 0; j < inputs[i].numel(); ++j) {
      double keep = inputs[i][j];
      inputs[i][j] = keep + h;
      double up = eval(inputs);
      inputs[i][j] = keep - h;
      double down = eval(inputs);
      inputs[i][j] = keep;
      double numeric = (up - down) / (2.0 * h);
      double analytic = g ? (*g)[j] : 0.0;
      double err = std::abs(analytic - numeric) /
                   std::max({1.0, std::abs(analytic), std::abs(numeric)});
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace molgrep::nn

#endif  // MOLGREP_NN_GRADCHECK_HPP_
