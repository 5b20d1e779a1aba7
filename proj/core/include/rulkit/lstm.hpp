#pragma once

#include <string>
#include <utility>

#include "rulkit/layers.hpp"
#include "rulkit/tensor.hpp"

namespace rulkit::nn {

// Gate weights over the concatenated [h_prev, x] vector; each matrix is
// (hidden, hidden + input).
struct LstmParams {
  Tensor w_i, w_f, w_c, w_o;
  Tensor b_i, b_f, b_c, b_o;
  std::size_t input = 0, hidden = 0;

  LstmParams() = default;
  LstmParams(std::size_t input, std::size_t hidden, Rng& rng);
  void collect(const std::string& prefix, NamedParams& out) const;
};

// One step: gates i/f/o through sigmoid, candidate through tanh,
// c_t = f*c_prev + i*c~, h_t = o*tanh(c_t). Batched over rank-2 inputs
// x (N, input), h_prev/c_prev (N, hidden).
std::pair<Tensor, Tensor> lstm_cell(const Tensor& x, const Tensor& h_prev,
                                    const Tensor& c_prev, const LstmParams& params);

// Unidirectional scan over (N, T, input) -> hidden sequence (N, T, hidden).
Tensor lstm_scan(const Tensor& x, const LstmParams& params, bool reverse = false);

// y_t = W_fy * h_fwd_t + W_by * h_bwd_t + b_y over (N, T, input) -> (N, T, out).
struct BiLstm {
  LstmParams fwd, bwd;
  Tensor w_fy, w_by;  // (out, hidden)
  Tensor b_y;         // (out)
  std::size_t out_dim = 0;

  BiLstm() = default;
  BiLstm(std::size_t input, std::size_t hidden, std::size_t out, Rng& rng);
  Tensor forward(const Tensor& x) const;
  void collect(const std::string& prefix, NamedParams& out) const;
};

}  // namespace rulkit::nn
