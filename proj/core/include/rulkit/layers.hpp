#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rulkit/rng.hpp"
#include "rulkit/tensor.hpp"

namespace rulkit::nn {

// Forward-pass context: training toggles dropout/batch-norm behaviour, and
// (seed, step) key the counter-based dropout streams.
struct Mode {
  bool train = false;
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
};

using NamedParams = std::vector<std::pair<std::string, Tensor>>;

// y = x W^T + b over rank-2 input (N, in) -> (N, out).
struct Linear {
  Tensor w;  // (out, in)
  Tensor b;  // (out)

  Linear() = default;
  Linear(std::size_t in, std::size_t out, Rng& rng);
  Tensor forward(const Tensor& x) const;
  void collect(const std::string& prefix, NamedParams& out) const;
};

// Cross-correlation over (N, C, L) -> (N, out_ch, L_out),
// L_out = floor((L + 2*padding - kernel) / stride) + 1.
struct Conv1d {
  Tensor w;  // (out_ch, in_ch, kernel)
  Tensor b;  // (out_ch)
  std::size_t in_ch = 0, out_ch = 0, kernel = 1, stride = 1, padding = 0;

  Conv1d() = default;
  Conv1d(std::size_t in_ch, std::size_t out_ch, std::size_t kernel, std::size_t stride,
         std::size_t padding, Rng& rng);
  Tensor forward(const Tensor& x) const;
  void collect(const std::string& prefix, NamedParams& out) const;
};

// Cross-correlation over (N, C, H, W) with a square kernel.
struct Conv2d {
  Tensor w;  // (out_ch, in_ch, kernel, kernel)
  Tensor b;  // (out_ch)
  std::size_t in_ch = 0, out_ch = 0, kernel = 1, stride = 1, padding = 0;

  Conv2d() = default;
  Conv2d(std::size_t in_ch, std::size_t out_ch, std::size_t kernel, std::size_t stride,
         std::size_t padding, Rng& rng);
  Tensor forward(const Tensor& x) const;
  void collect(const std::string& prefix, NamedParams& out) const;
};

// Normalizes over all dims except the channel axis (axis 1 for rank 3/4,
// axis 1 == features for rank 2). Train mode uses biased batch statistics
// and updates running stats in place; eval mode reads the running stats.
struct BatchNorm {
  Tensor gamma, beta;               // (C), learnable
  Tensor running_mean, running_var;  // (C), state only
  double eps = 1e-5;
  double momentum = 0.9;

  BatchNorm() = default;
  explicit BatchNorm(std::size_t channels);
  Tensor forward(const Tensor& x, const Mode& mode);
  void collect(const std::string& prefix, NamedParams& out) const;
  void collect_state(const std::string& prefix, NamedParams& out) const;
};

// Inverted dropout with a counter-based mask keyed by
// (mode.seed, layer_id, mode.step); identity in eval mode.
struct Dropout {
  double rate = 0.0;
  std::uint64_t layer_id = 0;

  Dropout() = default;
  Dropout(double rate, std::uint64_t layer_id);
  Tensor forward(const Tensor& x, const Mode& mode) const;
};

// Mean over sliding windows, no padding. Window must fit inside the input.
struct AvgPool1d {
  std::size_t window = 1, stride = 1;
  Tensor forward(const Tensor& x) const;  // (N,C,L) -> (N,C,L_out)
};

struct AvgPool2d {
  std::size_t window = 1, stride = 1;
  Tensor forward(const Tensor& x) const;  // (N,C,H,W) -> (N,C,H',W')
};

// Mean over every spatial dim: (N,C,L) or (N,C,H,W) -> (N,C).
Tensor global_avg_pool(const Tensor& x);

}  // namespace rulkit::nn
