//
// Project molgrep - Copyright 2026 The molgrep Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLGREP_NN_GRIDLSTM_HPP_
#define MOLGREP_NN_GRIDLSTM_HPP_

#include <vector>

#include "molgrep/nn/ops.hpp"

namespace molgrep::nn {

// Two-dimensional grid LSTM over the time and depth axes, untied weights.
//
// Each layer l keeps a recurrent (time) state pair (h_t[l], c_t[l]) of width
// d. Within one step, a depth state pair (h_d, c_d) travels upward through
// the layers, starting from (x, 0) at the bottom; the top h_d is the step
// output. Every layer evaluates two LSTM transforms over the shared
// concatenated hidden vector H = [h_t[l] ; h_d_in] (width 2d), one per axis,
// each with its own weights:
//
//   i = sigmoid(H Wi + bi)        f = sigmoid(H Wf + bf)
//   o = sigmoid(H Wo + bo)        g = tanh(H Wg + bg)
//   time axis:  c_t[l]' = f_t*c_t[l] + i_t*g_t     h_t[l]' = o_t*tanh(c_t[l]')
//   depth axis: c_d'    = f_d*c_d_in + i_d*g_d     h_d'    = o_d*tanh(c_d')
//
// All-zero input, states, weights, and biases give an all-zero output,
// because g = tanh(0) = 0 makes both cell updates vanish.

// Tape variables for one layer's parameters. Weight matrices are 2d x d,
// biases are d.
struct GridLstmLayer {
  int wi_time, wf_time, wo_time, wg_time;
  int bi_time, bf_time, bo_time, bg_time;
  int wi_depth, wf_depth, wo_depth, wg_depth;
  int bi_depth, bf_depth, bo_depth, bg_depth;
};

struct GridLstmState {
  int h = -1;
  int c = -1;
};

namespace detail {

// One LSTM transform over the concatenated hidden vector.
template <typename T>
GridLstmState lstm_axis(Tape<T>& tape, int hcat, int c_in, int wi, int wf, int wo, int wg, int bi,
                        int bf, int bo, int bg) {
  int i = sigmoid(tape, linear(tape, hcat, wi, bi));
  int f = sigmoid(tape, linear(tape, hcat, wf, bf));
  int o = sigmoid(tape, linear(tape, hcat, wo, bo));
  int g = tanh_op(tape, linear(tape, hcat, wg, bg));
  int c_new = add(tape, mul(tape, f, c_in), mul(tape, i, g));
  int h_new = mul(tape, o, tanh_op(tape, c_new));
  return {h_new, c_new};
}

}  // namespace detail

// Advances all layers by one time step. states[l] is replaced with the new
// time state of layer l. Returns the top-of-stack depth hidden vector.
template <typename T>
int gridlstm_step(Tape<T>& tape, int x, std::vector<GridLstmState>& states,
                  const std::vector<GridLstmLayer>& layers) {
  if (states.size() != layers.size()) fail(Err::ShapeMismatch, "one state pair per layer");
  // Copy the shape: pushes below may reallocate the tape's node storage.
  const std::vector<int> xshape = tape.value(x).shape;
  detail::expect(xshape.size() == 2, "grid lstm input must be NxD");

  int h_depth = x;
  int c_depth = tape.push(Tensor<T>(xshape));
  for (size_t l = 0; l < layers.size(); ++l) {
    const GridLstmLayer& p = layers[l];
    detail::expect(tape.value(states[l].h).shape == xshape, "state width mismatch");
    int hcat = concat_channels(tape, states[l].h, h_depth);
    GridLstmState time = detail::lstm_axis(tape, hcat, states[l].c, p.wi_time, p.wf_time,
                                           p.wo_time, p.wg_time, p.bi_time, p.bf_time, p.bo_time,
                                           p.bg_time);
    GridLstmState depth = detail::lstm_axis(tape, hcat, c_depth, p.wi_depth, p.wf_depth,
                                            p.wo_depth, p.wg_depth, p.bi_depth, p.bf_depth,
                                            p.bo_depth, p.bg_depth);
    states[l] = time;
    h_depth = depth.h;
    c_depth = depth.c;
  }
  return h_depth;
}

}  // namespace molgrep::nn

#endif  // MOLGREP_NN_GRIDLSTM_HPP_
