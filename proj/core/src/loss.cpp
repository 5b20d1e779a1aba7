#include "rulkit/loss.hpp"

#include <cmath>

#include "rulkit/errors.hpp"
#include "rulkit/ops.hpp"

namespace rulkit::nn {

Tensor sum_squared_error(const Tensor& pred, const Tensor& target) {
  return sum_all(square(sub(pred, target)));
}

Tensor mse(const Tensor& pred, const Tensor& target) {
  return mean_all(square(sub(pred, target)));
}

Tensor msle_masked(const Tensor& pred, const Tensor& target, const Tensor& mask) {
  if (pred.shape() != target.shape() || pred.shape() != mask.shape())
    throw ShapeError("msle: pred " + shape_str(pred.shape()) + ", target " +
                     shape_str(target.shape()) + ", mask " + shape_str(mask.shape()) +
                     " must agree");
  double count = 0.0;
  for (double m : mask.values()) count += m;
  if (count <= 0.0) throw NumericError("msle: mask selects no items");
  Tensor diff = sub(log1p_op(target), log1p_op(pred));
  return mul_scalar(sum_all(mul(square(diff), mask)), 1.0 / count);
}

Tensor cross_entropy(const Tensor& probs, const Tensor& one_hot) {
  if (probs.rank() != 2 || probs.shape() != one_hot.shape())
    throw ShapeError("cross_entropy: probs " + shape_str(probs.shape()) + " vs one_hot " +
                     shape_str(one_hot.shape()));
  std::size_t rows = one_hot.dim(0), cols = one_hot.dim(1);
  const double* oh = one_hot.data();
  for (std::size_t r = 0; r < rows; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      double v = oh[r * cols + c];
      if (v != 0.0 && v != 1.0)
        throw NumericError("cross_entropy: labels must be one-hot, row " + std::to_string(r) +
                           " has entry " + std::to_string(v));
      sum += v;
    }
    if (sum != 1.0)
      throw NumericError("cross_entropy: row " + std::to_string(r) +
                         " does not encode exactly one class");
  }
  Tensor picked = mul(log_clamped(probs, 1e-12), one_hot);
  return mul_scalar(sum_all(picked), -1.0 / static_cast<double>(rows));
}

Tensor total_loss(const Tensor& loss_oc, const Tensor& loss_rul, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw ConfigError("loss: lambda must lie in [0, 1], got " + std::to_string(lambda));
  return add(mul_scalar(loss_oc, lambda), mul_scalar(loss_rul, 1.0 - lambda));
}

}  // namespace rulkit::nn
