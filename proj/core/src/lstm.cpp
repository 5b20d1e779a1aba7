#include "rulkit/lstm.hpp"

#include <cmath>

#include "rulkit/errors.hpp"
#include "rulkit/ops.hpp"

namespace rulkit::nn {

namespace {

Tensor gate_weight(std::size_t hidden, std::size_t input, Rng& rng) {
  double bound = 1.0 / std::sqrt(static_cast<double>(hidden + input));
  std::vector<double> v(hidden * (hidden + input));
  for (double& x : v) x = rng.uniform(-bound, bound);
  Tensor t = Tensor::from_data(std::move(v), {hidden, hidden + input});
  t.set_requires_grad(true);
  return t;
}

Tensor zero_bias(std::size_t hidden) {
  Tensor t = Tensor::zeros({hidden});
  t.set_requires_grad(true);
  return t;
}

}  // namespace

LstmParams::LstmParams(std::size_t input_, std::size_t hidden_, Rng& rng)
    : input(input_), hidden(hidden_) {
  w_i = gate_weight(hidden, input, rng);
  w_f = gate_weight(hidden, input, rng);
  w_c = gate_weight(hidden, input, rng);
  w_o = gate_weight(hidden, input, rng);
  b_i = zero_bias(hidden);
  b_f = zero_bias(hidden);
  b_c = zero_bias(hidden);
  b_o = zero_bias(hidden);
}

void LstmParams::collect(const std::string& prefix, NamedParams& out) const {
  out.emplace_back(prefix + ".w_i", w_i);
  out.emplace_back(prefix + ".w_f", w_f);
  out.emplace_back(prefix + ".w_c", w_c);
  out.emplace_back(prefix + ".w_o", w_o);
  out.emplace_back(prefix + ".b_i", b_i);
  out.emplace_back(prefix + ".b_f", b_f);
  out.emplace_back(prefix + ".b_c", b_c);
  out.emplace_back(prefix + ".b_o", b_o);
}

std::pair<Tensor, Tensor> lstm_cell(const Tensor& x, const Tensor& h_prev,
                                    const Tensor& c_prev, const LstmParams& params) {
  if (x.rank() != 2 || h_prev.rank() != 2 || c_prev.rank() != 2)
    throw ShapeError("lstm_cell: expected rank-2 x/h/c");
  if (x.dim(1) != params.input || h_prev.dim(1) != params.hidden ||
      c_prev.dim(1) != params.hidden)
    throw ShapeError("lstm_cell: widths do not match params (input " +
                     std::to_string(params.input) + ", hidden " +
                     std::to_string(params.hidden) + "), got x " + shape_str(x.shape()) +
                     ", h " + shape_str(h_prev.shape()));
  Tensor z = concat_cols({h_prev, x});  // (N, hidden+input)
  Tensor i = sigmoid(add_rowvec(matmul_bt(z, params.w_i), params.b_i));
  Tensor f = sigmoid(add_rowvec(matmul_bt(z, params.w_f), params.b_f));
  Tensor o = sigmoid(add_rowvec(matmul_bt(z, params.w_o), params.b_o));
  Tensor cand = tanh_op(add_rowvec(matmul_bt(z, params.w_c), params.b_c));
  Tensor c = add(mul(f, c_prev), mul(i, cand));
  Tensor h = mul(o, tanh_op(c));
  return {h, c};
}

Tensor lstm_scan(const Tensor& x, const LstmParams& params, bool reverse) {
  if (x.rank() != 3)
    throw ShapeError("lstm_scan: expected (N,T,F), got " + shape_str(x.shape()));
  std::size_t n = x.dim(0), t = x.dim(1);
  Tensor h = Tensor::zeros({n, params.hidden});
  Tensor c = Tensor::zeros({n, params.hidden});
  std::vector<Tensor> steps(t);
  for (std::size_t k = 0; k < t; ++k) {
    std::size_t idx = reverse ? t - 1 - k : k;
    auto [h2, c2] = lstm_cell(select_step(x, idx), h, c, params);
    h = h2;
    c = c2;
    steps[idx] = h;
  }
  return stack_steps(steps);
}

BiLstm::BiLstm(std::size_t input, std::size_t hidden, std::size_t out, Rng& rng)
    : fwd(input, hidden, rng), bwd(input, hidden, rng), out_dim(out) {
  double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  auto proj = [&] {
    std::vector<double> v(out * hidden);
    for (double& x : v) x = rng.uniform(-bound, bound);
    Tensor t = Tensor::from_data(std::move(v), {out, hidden});
    t.set_requires_grad(true);
    return t;
  };
  w_fy = proj();
  w_by = proj();
  b_y = Tensor::zeros({out});
  b_y.set_requires_grad(true);
}

Tensor BiLstm::forward(const Tensor& x) const {
  if (x.rank() != 3)
    throw ShapeError("bilstm: expected (N,T,F), got " + shape_str(x.shape()));
  std::size_t t = x.dim(1);
  if (t == 0) throw ShapeError("bilstm: empty sequence");
  Tensor hf = lstm_scan(x, fwd, false);  // (N,T,H)
  Tensor hb = lstm_scan(x, bwd, true);
  std::vector<Tensor> ys(t);
  for (std::size_t k = 0; k < t; ++k) {
    Tensor yf = matmul_bt(select_step(hf, k), w_fy);
    Tensor yb = matmul_bt(select_step(hb, k), w_by);
    ys[k] = add_rowvec(add(yf, yb), b_y);
  }
  return stack_steps(ys);
}

void BiLstm::collect(const std::string& prefix, NamedParams& out) const {
  fwd.collect(prefix + ".fwd", out);
  bwd.collect(prefix + ".bwd", out);
  out.emplace_back(prefix + ".w_fy", w_fy);
  out.emplace_back(prefix + ".w_by", w_by);
  out.emplace_back(prefix + ".b_y", b_y);
}

}  // namespace rulkit::nn
