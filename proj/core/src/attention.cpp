#include "rulkit/attention.hpp"

#include <cmath>

#include "rulkit/errors.hpp"
#include "rulkit/ops.hpp"

namespace rulkit::nn {

MultiHeadAttention::MultiHeadAttention(std::size_t d_model_, std::size_t heads_, Rng& rng)
    : heads(heads_), d_model(d_model_) {
  if (heads == 0) throw ConfigError("attention: head count must be positive");
  if (d_model % heads != 0)
    throw ConfigError("attention: model dim " + std::to_string(d_model) +
                      " is not divisible by " + std::to_string(heads) + " heads");
  d_k = d_model / heads;
  auto init = [&](std::size_t rows, std::size_t cols) {
    double bound = 1.0 / std::sqrt(static_cast<double>(cols));
    std::vector<double> v(rows * cols);
    for (double& x : v) x = rng.uniform(-bound, bound);
    Tensor t = Tensor::from_data(std::move(v), {rows, cols});
    t.set_requires_grad(true);
    return t;
  };
  w_q.reserve(heads);
  w_k.reserve(heads);
  w_v.reserve(heads);
  for (std::size_t i = 0; i < heads; ++i) {
    w_q.push_back(init(d_k, d_model));
    w_k.push_back(init(d_k, d_model));
    w_v.push_back(init(d_k, d_model));
  }
  w_o = init(d_model, heads * d_k);
}

Tensor MultiHeadAttention::forward_seq(const Tensor& x) const {
  if (x.rank() != 2 || x.dim(1) != d_model)
    throw ShapeError("attention: expected (T, " + std::to_string(d_model) + "), got " +
                     shape_str(x.shape()));
  double scale = 1.0 / std::sqrt(static_cast<double>(d_k));
  std::vector<Tensor> outs;
  outs.reserve(heads);
  for (std::size_t i = 0; i < heads; ++i) {
    Tensor q = matmul_bt(x, w_q[i]);  // (T, d_k)
    Tensor k = matmul_bt(x, w_k[i]);
    Tensor v = matmul_bt(x, w_v[i]);
    Tensor attn = softmax_rows(mul_scalar(matmul_bt(q, k), scale));  // (T, T)
    outs.push_back(matmul(attn, v));
  }
  return matmul_bt(concat_cols(outs), w_o);
}

Tensor MultiHeadAttention::forward(const Tensor& x) const {
  if (x.rank() != 3)
    throw ShapeError("attention: expected (N, T, d_model), got " + shape_str(x.shape()));
  std::size_t n = x.dim(0), t = x.dim(1);
  Tensor flat = reshape(x, {n * t, x.dim(2)});
  std::vector<Tensor> per_sample;
  per_sample.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    per_sample.push_back(forward_seq(slice_rows(flat, i * t, t)));
  return reshape(concat_rows(per_sample), {n, t, d_model});
}

void MultiHeadAttention::collect(const std::string& prefix, NamedParams& out) const {
  for (std::size_t i = 0; i < heads; ++i) {
    std::string h = prefix + ".h" + std::to_string(i);
    out.emplace_back(h + ".w_q", w_q[i]);
    out.emplace_back(h + ".w_k", w_k[i]);
    out.emplace_back(h + ".w_v", w_v[i]);
  }
  out.emplace_back(prefix + ".w_o", w_o);
}

}  // namespace rulkit::nn
