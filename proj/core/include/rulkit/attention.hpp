#pragma once

#include <string>
#include <vector>

#include "rulkit/layers.hpp"
#include "rulkit/tensor.hpp"

namespace rulkit::nn {

// Multi-head scaled dot-product self-attention. Per head i:
//   H_i = softmax(Q_i K_i^T / sqrt(d_k)) V_i,  Q_i = X Wq_i^T, etc.
// Heads are concatenated and projected by W^O back to d_model.
struct MultiHeadAttention {
  std::vector<Tensor> w_q, w_k, w_v;  // each (d_k, d_model)
  Tensor w_o;                         // (d_model, heads*d_k)
  std::size_t heads = 1, d_model = 0, d_k = 0;

  MultiHeadAttention() = default;
  MultiHeadAttention(std::size_t d_model, std::size_t heads, Rng& rng);

  Tensor forward_seq(const Tensor& x) const;  // (T, d_model) -> (T, d_model)
  Tensor forward(const Tensor& x) const;      // (N, T, d_model), per-sample attention
  void collect(const std::string& prefix, NamedParams& out) const;
};

}  // namespace rulkit::nn
