#pragma once

// Finite-difference gradient checking for the autodiff graph. A check takes a
// closure that rebuilds the scalar loss from the current parameter values,
// runs one analytic backward pass, then perturbs every element of every
// listed tensor by +/-h and compares the central difference against the
// recorded gradient.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "rulkit/tensor.hpp"

namespace gradcheck {

struct Report {
  double max_rel_err = 0.0;
  std::string worst;  // "tensor#k[i]" of the worst element
  std::size_t checked = 0;
};

// Relative error with a floored denominator: tiny true gradients are compared
// absolutely (against the floor) instead of amplifying FD round-off.
inline double rel_err(double analytic, double numeric, double floor_den = 1e-3) {
  double den = std::max({std::abs(analytic), std::abs(numeric), floor_den});
  return std::abs(analytic - numeric) / den;
}

// `loss` must rebuild the graph from scratch on every call, reading the live
// values of `params`. Central differences use step h; elements are restored
// after each probe.
inline Report check(const std::function<rulkit::nn::Tensor()>& loss,
                    std::vector<rulkit::nn::Tensor> params, double h = 1e-5) {
  using rulkit::nn::Tensor;
  for (Tensor& p : params) {
    p.set_requires_grad(true);
    p.zero_grad();
  }
  Tensor l = loss();
  l.backward();
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (Tensor& p : params) analytic.push_back(p.grad());

  Report rep;
  for (std::size_t k = 0; k < params.size(); ++k) {
    std::vector<double>& v = params[k].values();
    for (std::size_t i = 0; i < v.size(); ++i) {
      double keep = v[i];
      v[i] = keep + h;
      double up = loss().item();
      v[i] = keep - h;
      double down = loss().item();
      v[i] = keep;
      double fd = (up - down) / (2.0 * h);
      double e = rel_err(analytic[k][i], fd);
      if (e > rep.max_rel_err) {
        rep.max_rel_err = e;
        rep.worst = "tensor#" + std::to_string(k) + "[" + std::to_string(i) + "]";
      }
      ++rep.checked;
    }
  }
  return rep;
}

}  // namespace gradcheck
