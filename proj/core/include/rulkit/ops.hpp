#pragma once

#include <vector>

#include "rulkit/tensor.hpp"

namespace rulkit::nn {

// Elementwise (shapes must match exactly; no implicit broadcasting).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor add_scalar(const Tensor& a, double s);
Tensor mul_scalar(const Tensor& a, double s);
Tensor square(const Tensor& a);

// Activations. softmax_rows is row-wise over the last axis of a rank-2
// tensor, max-subtracted for stability.
Tensor relu(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor tanh_op(const Tensor& a);
Tensor softmax_rows(const Tensor& a);
Tensor log1p_op(const Tensor& a);
// log(max(x, lo)); gradient is zero where the clamp is active.
Tensor log_clamped(const Tensor& a, double lo);

// Matrix products on rank-2 tensors (Eigen-backed).
Tensor matmul(const Tensor& a, const Tensor& b);      // (m,k) x (k,n) -> (m,n)
Tensor matmul_bt(const Tensor& a, const Tensor& b);   // (m,k) x (n,k)^T -> (m,n)
Tensor transpose(const Tensor& a);

// Shape plumbing.
Tensor reshape(const Tensor& a, Shape shape);
Tensor concat_cols(const std::vector<Tensor>& parts);           // rank-2, same rows
Tensor concat_rows(const std::vector<Tensor>& parts);           // rank-2, same cols
Tensor slice_rows(const Tensor& a, std::size_t start, std::size_t len);
Tensor select_step(const Tensor& a, std::size_t t);             // (N,T,F) -> (N,F)
Tensor stack_steps(const std::vector<Tensor>& steps);           // T x (N,F) -> (N,T,F)
Tensor add_rowvec(const Tensor& a, const Tensor& b);            // (R,C) + (C,)
Tensor permute_nc_l(const Tensor& a);                           // (N,C,L) -> (N,L,C)

// Reductions to a scalar.
Tensor sum_all(const Tensor& a);
Tensor mean_all(const Tensor& a);

}  // namespace rulkit::nn
