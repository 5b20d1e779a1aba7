#pragma once

#include "rulkit/tensor.hpp"

namespace rulkit::nn {

// Plain sum of squared errors over all elements.
Tensor sum_squared_error(const Tensor& pred, const Tensor& target);

// Mean squared error over all elements.
Tensor mse(const Tensor& pred, const Tensor& target);

// Mean over masked items of [log(target+1) - log(pred+1)]^2. `mask` holds
// 0/1 weights and must select at least one item.
Tensor msle_masked(const Tensor& pred, const Tensor& target, const Tensor& mask);

// Categorical cross-entropy, mean over batch rows; log clamped at 1e-12.
// `one_hot` rows must contain exactly one 1 and zeros elsewhere.
Tensor cross_entropy(const Tensor& probs, const Tensor& one_hot);

// lambda * loss_oc + (1 - lambda) * loss_rul, lambda in [0, 1].
Tensor total_loss(const Tensor& loss_oc, const Tensor& loss_rul, double lambda);

}  // namespace rulkit::nn
