#include "rulkit/layers.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <memory>

#include "rulkit/errors.hpp"
#include "rulkit/ops.hpp"

namespace rulkit::nn {

namespace {

using MatRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<MatRM>;
using MapCM = Eigen::Map<const MatRM>;

Tensor uniform_tensor(Shape shape, double bound, Rng& rng) {
  std::vector<double> v(numel(shape));
  for (double& x : v) x = rng.uniform(-bound, bound);
  Tensor t = Tensor::from_data(std::move(v), std::move(shape));
  t.set_requires_grad(true);
  return t;
}

std::size_t out_extent(std::size_t n, std::size_t k, std::size_t s, std::size_t p,
                       const char* op) {
  if (n + 2 * p < k)
    throw ShapeError(std::string(op) + ": kernel " + std::to_string(k) +
                     " exceeds padded extent " + std::to_string(n + 2 * p));
  return (n + 2 * p - k) / s + 1;
}

}  // namespace

// ---------------------------------------------------------------------------
// Linear

Linear::Linear(std::size_t in, std::size_t out, Rng& rng) {
  double bound = 1.0 / std::sqrt(static_cast<double>(in));
  w = uniform_tensor({out, in}, bound, rng);
  b = Tensor::zeros({out});
  b.set_requires_grad(true);
}

Tensor Linear::forward(const Tensor& x) const {
  return add_rowvec(matmul_bt(x, w), b);
}

void Linear::collect(const std::string& prefix, NamedParams& out) const {
  out.emplace_back(prefix + ".w", w);
  out.emplace_back(prefix + ".b", b);
}

// ---------------------------------------------------------------------------
// Conv1d

Conv1d::Conv1d(std::size_t in_ch_, std::size_t out_ch_, std::size_t kernel_,
               std::size_t stride_, std::size_t padding_, Rng& rng)
    : in_ch(in_ch_), out_ch(out_ch_), kernel(kernel_), stride(stride_), padding(padding_) {
  if (stride == 0) throw ShapeError("conv1d: stride must be positive");
  double bound = 1.0 / std::sqrt(static_cast<double>(in_ch * kernel));
  w = uniform_tensor({out_ch, in_ch, kernel}, bound, rng);
  b = Tensor::zeros({out_ch});
  b.set_requires_grad(true);
}

Tensor Conv1d::forward(const Tensor& x) const {
  if (x.rank() != 3)
    throw ShapeError("conv1d: expected input (N,C,L), got " + shape_str(x.shape()));
  std::size_t n = x.dim(0), c = x.dim(1), l = x.dim(2);
  if (c != in_ch)
    throw ShapeError("conv1d: expected " + std::to_string(in_ch) + " channels, got " +
                     std::to_string(c));
  std::size_t lo = out_extent(l, kernel, stride, padding, "conv1d");
  std::size_t patch = c * kernel;

  // im2col: one row per (sample, output position), one column per patch slot.
  auto cols = std::make_shared<std::vector<double>>(n * lo * patch, 0.0);
  const double* px = x.data();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t o = 0; o < lo; ++o) {
      double* row = cols->data() + (i * lo + o) * patch;
      for (std::size_t ch = 0; ch < c; ++ch)
        for (std::size_t kk = 0; kk < kernel; ++kk) {
          std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(o * stride + kk) -
                               static_cast<std::ptrdiff_t>(padding);
          if (pos >= 0 && pos < static_cast<std::ptrdiff_t>(l))
            row[ch * kernel + kk] = px[(i * c + ch) * l + pos];
        }
    }

  std::vector<double> out(n * out_ch * lo);
  {
    MapCM Cols(cols->data(), n * lo, patch);
    MapCM W(w.data(), out_ch, patch);
    MatRM prod = Cols * W.transpose();  // (n*lo, out_ch)
    const double* pb = b.data();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t oc = 0; oc < out_ch; ++oc)
        for (std::size_t o = 0; o < lo; ++o)
          out[(i * out_ch + oc) * lo + o] = prod(i * lo + o, oc) + pb[oc];
  }

  std::size_t ns = n, cs = c, ls = l, ks = kernel, ss = stride, ps = padding, ocs = out_ch;
  return make_op({n, out_ch, lo}, std::move(out), {x, w, b},
                 [cols, ns, cs, ls, ks, ss, ps, ocs, lo, patch](detail::Node& out) {
                   auto& px = *out.parents[0];
                   auto& pw = *out.parents[1];
                   auto& pb = *out.parents[2];
                   px.ensure_grad();
                   pw.ensure_grad();
                   pb.ensure_grad();

                   // Regroup upstream grad as (n*lo, out_ch).
                   std::vector<double> gmat(ns * lo * ocs);
                   for (std::size_t i = 0; i < ns; ++i)
                     for (std::size_t oc = 0; oc < ocs; ++oc)
                       for (std::size_t o = 0; o < lo; ++o) {
                         double g = out.grad[(i * ocs + oc) * lo + o];
                         gmat[(i * lo + o) * ocs + oc] = g;
                         pb.grad[oc] += g;
                       }

                   MapCM G(gmat.data(), ns * lo, ocs);
                   MapCM Cols(cols->data(), ns * lo, patch);
                   MapM dW(pw.grad.data(), ocs, patch);
                   dW.noalias() += G.transpose() * Cols;

                   MapCM W(pw.value.data(), ocs, patch);
                   MatRM dCols = G * W;  // (n*lo, patch)
                   for (std::size_t i = 0; i < ns; ++i)
                     for (std::size_t o = 0; o < lo; ++o)
                       for (std::size_t ch = 0; ch < cs; ++ch)
                         for (std::size_t kk = 0; kk < ks; ++kk) {
                           std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(o * ss + kk) -
                                                static_cast<std::ptrdiff_t>(ps);
                           if (pos >= 0 && pos < static_cast<std::ptrdiff_t>(ls))
                             px.grad[(i * cs + ch) * ls + pos] +=
                                 dCols(i * lo + o, ch * ks + kk);
                         }
                 });
}

void Conv1d::collect(const std::string& prefix, NamedParams& out) const {
  out.emplace_back(prefix + ".w", w);
  out.emplace_back(prefix + ".b", b);
}

// ---------------------------------------------------------------------------
// Conv2d

Conv2d::Conv2d(std::size_t in_ch_, std::size_t out_ch_, std::size_t kernel_,
               std::size_t stride_, std::size_t padding_, Rng& rng)
    : in_ch(in_ch_), out_ch(out_ch_), kernel(kernel_), stride(stride_), padding(padding_) {
  if (stride == 0) throw ShapeError("conv2d: stride must be positive");
  double bound = 1.0 / std::sqrt(static_cast<double>(in_ch * kernel * kernel));
  w = uniform_tensor({out_ch, in_ch, kernel, kernel}, bound, rng);
  b = Tensor::zeros({out_ch});
  b.set_requires_grad(true);
}

Tensor Conv2d::forward(const Tensor& x) const {
  if (x.rank() != 4)
    throw ShapeError("conv2d: expected input (N,C,H,W), got " + shape_str(x.shape()));
  std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), wd = x.dim(3);
  if (c != in_ch)
    throw ShapeError("conv2d: expected " + std::to_string(in_ch) + " channels, got " +
                     std::to_string(c));
  std::size_t ho = out_extent(h, kernel, stride, padding, "conv2d");
  std::size_t wo = out_extent(wd, kernel, stride, padding, "conv2d");
  std::size_t patch = c * kernel * kernel;
  std::size_t opix = ho * wo;

  auto cols = std::make_shared<std::vector<double>>(n * opix * patch, 0.0);
  const double* px = x.data();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t oy = 0; oy < ho; ++oy)
      for (std::size_t ox = 0; ox < wo; ++ox) {
        double* row = cols->data() + (i * opix + oy * wo + ox) * patch;
        for (std::size_t ch = 0; ch < c; ++ch)
          for (std::size_t ky = 0; ky < kernel; ++ky) {
            std::ptrdiff_t y = static_cast<std::ptrdiff_t>(oy * stride + ky) -
                               static_cast<std::ptrdiff_t>(padding);
            if (y < 0 || y >= static_cast<std::ptrdiff_t>(h)) continue;
            for (std::size_t kx = 0; kx < kernel; ++kx) {
              std::ptrdiff_t xx = static_cast<std::ptrdiff_t>(ox * stride + kx) -
                                  static_cast<std::ptrdiff_t>(padding);
              if (xx < 0 || xx >= static_cast<std::ptrdiff_t>(wd)) continue;
              row[(ch * kernel + ky) * kernel + kx] = px[((i * c + ch) * h + y) * wd + xx];
            }
          }
      }

  std::vector<double> out(n * out_ch * opix);
  {
    MapCM Cols(cols->data(), n * opix, patch);
    MapCM W(w.data(), out_ch, patch);
    MatRM prod = Cols * W.transpose();
    const double* pb = b.data();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t oc = 0; oc < out_ch; ++oc)
        for (std::size_t o = 0; o < opix; ++o)
          out[(i * out_ch + oc) * opix + o] = prod(i * opix + o, oc) + pb[oc];
  }

  std::size_t ns = n, cs = c, hs = h, ws = wd, ks = kernel, ss = stride, ps = padding,
              ocs = out_ch;
  return make_op({n, out_ch, ho, wo}, std::move(out), {x, w, b},
                 [cols, ns, cs, hs, ws, ks, ss, ps, ocs, ho, wo, opix,
                  patch](detail::Node& out) {
                   auto& px = *out.parents[0];
                   auto& pw = *out.parents[1];
                   auto& pb = *out.parents[2];
                   px.ensure_grad();
                   pw.ensure_grad();
                   pb.ensure_grad();

                   std::vector<double> gmat(ns * opix * ocs);
                   for (std::size_t i = 0; i < ns; ++i)
                     for (std::size_t oc = 0; oc < ocs; ++oc)
                       for (std::size_t o = 0; o < opix; ++o) {
                         double g = out.grad[(i * ocs + oc) * opix + o];
                         gmat[(i * opix + o) * ocs + oc] = g;
                         pb.grad[oc] += g;
                       }

                   MapCM G(gmat.data(), ns * opix, ocs);
                   MapCM Cols(cols->data(), ns * opix, patch);
                   MapM dW(pw.grad.data(), ocs, patch);
                   dW.noalias() += G.transpose() * Cols;

                   MapCM W(pw.value.data(), ocs, patch);
                   MatRM dCols = G * W;
                   for (std::size_t i = 0; i < ns; ++i)
                     for (std::size_t oy = 0; oy < ho; ++oy)
                       for (std::size_t ox = 0; ox < wo; ++ox) {
                         std::size_t row = i * opix + oy * wo + ox;
                         for (std::size_t ch = 0; ch < cs; ++ch)
                           for (std::size_t ky = 0; ky < ks; ++ky) {
                             std::ptrdiff_t y = static_cast<std::ptrdiff_t>(oy * ss + ky) -
                                                static_cast<std::ptrdiff_t>(ps);
                             if (y < 0 || y >= static_cast<std::ptrdiff_t>(hs)) continue;
                             for (std::size_t kx = 0; kx < ks; ++kx) {
                               std::ptrdiff_t xx =
                                   static_cast<std::ptrdiff_t>(ox * ss + kx) -
                                   static_cast<std::ptrdiff_t>(ps);
                               if (xx < 0 || xx >= static_cast<std::ptrdiff_t>(ws)) continue;
                               px.grad[((i * cs + ch) * hs + y) * ws + xx] +=
                                   dCols(row, (ch * ks + ky) * ks + kx);
                             }
                           }
                       }
                 });
}

void Conv2d::collect(const std::string& prefix, NamedParams& out) const {
  out.emplace_back(prefix + ".w", w);
  out.emplace_back(prefix + ".b", b);
}

// ---------------------------------------------------------------------------
// BatchNorm

BatchNorm::BatchNorm(std::size_t channels) {
  gamma = Tensor::full({channels}, 1.0);
  gamma.set_requires_grad(true);
  beta = Tensor::zeros({channels});
  beta.set_requires_grad(true);
  running_mean = Tensor::zeros({channels});
  running_var = Tensor::full({channels}, 1.0);
}

namespace {

// Channel-indexed view of a rank 2/3/4 tensor: element k belongs to channel
// chan(k), and each channel covers `per_channel` elements.
struct ChannelLayout {
  std::size_t channels, spatial, per_channel;
  std::size_t chan(std::size_t flat) const {
    return (flat / spatial) % channels;
  }
};

ChannelLayout channel_layout(const Tensor& x) {
  if (x.rank() == 2) return {x.dim(1), 1, x.dim(0)};
  if (x.rank() == 3) return {x.dim(1), x.dim(2), x.dim(0) * x.dim(2)};
  if (x.rank() == 4)
    return {x.dim(1), x.dim(2) * x.dim(3), x.dim(0) * x.dim(2) * x.dim(3)};
  throw ShapeError("batch_norm: unsupported rank " + std::to_string(x.rank()));
}

}  // namespace

Tensor BatchNorm::forward(const Tensor& x, const Mode& mode) {
  ChannelLayout lay = channel_layout(x);
  std::size_t c = lay.channels;
  if (c != gamma.dim(0))
    throw ShapeError("batch_norm: expected " + std::to_string(gamma.dim(0)) +
                     " channels, got " + std::to_string(c));
  const double* px = x.data();
  std::size_t total = x.size();

  std::vector<double> mean(c), var(c);
  if (mode.train) {
    if (x.dim(0) < 2)
      throw NumericError("batch_norm: training requires batch size >= 2, got " +
                         std::to_string(x.dim(0)));
    std::vector<double> sum(c, 0.0), sumsq(c, 0.0);
    for (std::size_t k = 0; k < total; ++k) {
      std::size_t ch = lay.chan(k);
      sum[ch] += px[k];
      sumsq[ch] += px[k] * px[k];
    }
    double inv_m = 1.0 / static_cast<double>(lay.per_channel);
    for (std::size_t ch = 0; ch < c; ++ch) {
      mean[ch] = sum[ch] * inv_m;
      var[ch] = sumsq[ch] * inv_m - mean[ch] * mean[ch];
      if (var[ch] < 0.0) var[ch] = 0.0;  // guard fp cancellation
      running_mean.values()[ch] = momentum * running_mean.values()[ch] +
                                  (1.0 - momentum) * mean[ch];
      running_var.values()[ch] = momentum * running_var.values()[ch] +
                                 (1.0 - momentum) * var[ch];
    }
  } else {
    mean = running_mean.values();
    var = running_var.values();
  }

  std::vector<double> inv_std(c);
  for (std::size_t ch = 0; ch < c; ++ch) inv_std[ch] = 1.0 / std::sqrt(var[ch] + eps);

  auto xhat = std::make_shared<std::vector<double>>(total);
  std::vector<double> out(total);
  const double* pg = gamma.data();
  const double* pbeta = beta.data();
  for (std::size_t k = 0; k < total; ++k) {
    std::size_t ch = lay.chan(k);
    double xh = (px[k] - mean[ch]) * inv_std[ch];
    (*xhat)[k] = xh;
    out[k] = pg[ch] * xh + pbeta[ch];
  }

  bool train = mode.train;
  return make_op(
      x.shape(), std::move(out), {x, gamma, beta},
      [lay, xhat, inv_std, train](detail::Node& out) {
        auto& px = *out.parents[0];
        auto& pg = *out.parents[1];
        auto& pb = *out.parents[2];
        px.ensure_grad();
        pg.ensure_grad();
        pb.ensure_grad();
        std::size_t c = lay.channels;
        std::size_t total = out.grad.size();

        std::vector<double> gsum(c, 0.0), gxsum(c, 0.0);
        for (std::size_t k = 0; k < total; ++k) {
          std::size_t ch = lay.chan(k);
          gsum[ch] += out.grad[k];
          gxsum[ch] += out.grad[k] * (*xhat)[k];
        }
        for (std::size_t ch = 0; ch < c; ++ch) {
          pb.grad[ch] += gsum[ch];
          pg.grad[ch] += gxsum[ch];
        }
        if (train) {
          // Batch statistics depend on x: full backprop through mean/var.
          double inv_m = 1.0 / static_cast<double>(lay.per_channel);
          for (std::size_t k = 0; k < total; ++k) {
            std::size_t ch = lay.chan(k);
            double g = out.grad[k];
            px.grad[k] += pg.value[ch] * inv_std[ch] *
                          (g - inv_m * gsum[ch] - (*xhat)[k] * inv_m * gxsum[ch]);
          }
        } else {
          for (std::size_t k = 0; k < total; ++k) {
            std::size_t ch = lay.chan(k);
            px.grad[k] += out.grad[k] * pg.value[ch] * inv_std[ch];
          }
        }
      });
}

void BatchNorm::collect(const std::string& prefix, NamedParams& out) const {
  out.emplace_back(prefix + ".gamma", gamma);
  out.emplace_back(prefix + ".beta", beta);
}

void BatchNorm::collect_state(const std::string& prefix, NamedParams& out) const {
  out.emplace_back(prefix + ".running_mean", running_mean);
  out.emplace_back(prefix + ".running_var", running_var);
}

// ---------------------------------------------------------------------------
// Dropout

Dropout::Dropout(double rate_, std::uint64_t layer_id_) : rate(rate_), layer_id(layer_id_) {
  if (rate < 0.0 || rate >= 1.0)
    throw ConfigError("dropout: rate must be in [0, 1), got " + std::to_string(rate));
}

Tensor Dropout::forward(const Tensor& x, const Mode& mode) const {
  if (!mode.train || rate == 0.0) return x;
  std::uint64_t key = dropout_key(mode.seed, layer_id, mode.step);
  double scale = 1.0 / (1.0 - rate);
  auto mask = std::make_shared<std::vector<double>>(x.size());
  std::vector<double> out(x.size());
  const double* px = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    double keep = counter_uniform(key, i) < rate ? 0.0 : scale;
    (*mask)[i] = keep;
    out[i] = px[i] * keep;
  }
  return make_op(x.shape(), std::move(out), {x}, [mask](detail::Node& out) {
    auto& p = *out.parents[0];
    p.ensure_grad();
    for (std::size_t i = 0; i < out.grad.size(); ++i)
      p.grad[i] += out.grad[i] * (*mask)[i];
  });
}

// ---------------------------------------------------------------------------
// Pooling

Tensor AvgPool1d::forward(const Tensor& x) const {
  if (x.rank() != 3)
    throw ShapeError("avg_pool1d: expected input (N,C,L), got " + shape_str(x.shape()));
  std::size_t n = x.dim(0), c = x.dim(1), l = x.dim(2);
  std::size_t lo = out_extent(l, window, stride, 0, "avg_pool1d");
  std::vector<double> out(n * c * lo);
  const double* px = x.data();
  double inv = 1.0 / static_cast<double>(window);
  for (std::size_t i = 0; i < n * c; ++i)
    for (std::size_t o = 0; o < lo; ++o) {
      double s = 0.0;
      for (std::size_t k = 0; k < window; ++k) s += px[i * l + o * stride + k];
      out[i * lo + o] = s * inv;
    }
  std::size_t w = window, st = stride;
  return make_op({n, c, lo}, std::move(out), {x}, [n, c, l, lo, w, st, inv](detail::Node& out) {
    auto& p = *out.parents[0];
    p.ensure_grad();
    for (std::size_t i = 0; i < n * c; ++i)
      for (std::size_t o = 0; o < lo; ++o) {
        double g = out.grad[i * lo + o] * inv;
        for (std::size_t k = 0; k < w; ++k) p.grad[i * l + o * st + k] += g;
      }
  });
}

Tensor AvgPool2d::forward(const Tensor& x) const {
  if (x.rank() != 4)
    throw ShapeError("avg_pool2d: expected input (N,C,H,W), got " + shape_str(x.shape()));
  std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), wd = x.dim(3);
  std::size_t ho = out_extent(h, window, stride, 0, "avg_pool2d");
  std::size_t wo = out_extent(wd, window, stride, 0, "avg_pool2d");
  std::vector<double> out(n * c * ho * wo);
  const double* px = x.data();
  double inv = 1.0 / static_cast<double>(window * window);
  for (std::size_t i = 0; i < n * c; ++i)
    for (std::size_t oy = 0; oy < ho; ++oy)
      for (std::size_t ox = 0; ox < wo; ++ox) {
        double s = 0.0;
        for (std::size_t ky = 0; ky < window; ++ky)
          for (std::size_t kx = 0; kx < window; ++kx)
            s += px[(i * h + oy * stride + ky) * wd + ox * stride + kx];
        out[(i * ho + oy) * wo + ox] = s * inv;
      }
  std::size_t w = window, st = stride;
  return make_op({n, c, ho, wo}, std::move(out), {x},
                 [n, c, h, wd, ho, wo, w, st, inv](detail::Node& out) {
                   auto& p = *out.parents[0];
                   p.ensure_grad();
                   for (std::size_t i = 0; i < n * c; ++i)
                     for (std::size_t oy = 0; oy < ho; ++oy)
                       for (std::size_t ox = 0; ox < wo; ++ox) {
                         double g = out.grad[(i * ho + oy) * wo + ox] * inv;
                         for (std::size_t ky = 0; ky < w; ++ky)
                           for (std::size_t kx = 0; kx < w; ++kx)
                             p.grad[(i * h + oy * st + ky) * wd + ox * st + kx] += g;
                       }
                 });
}

Tensor global_avg_pool(const Tensor& x) {
  if (x.rank() != 3 && x.rank() != 4)
    throw ShapeError("global_avg_pool: expected rank 3 or 4, got " + shape_str(x.shape()));
  std::size_t n = x.dim(0), c = x.dim(1);
  std::size_t spatial = x.rank() == 3 ? x.dim(2) : x.dim(2) * x.dim(3);
  std::vector<double> out(n * c);
  const double* px = x.data();
  double inv = 1.0 / static_cast<double>(spatial);
  for (std::size_t i = 0; i < n * c; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < spatial; ++k) s += px[i * spatial + k];
    out[i] = s * inv;
  }
  return make_op({n, c}, std::move(out), {x}, [n, c, spatial, inv](detail::Node& out) {
    auto& p = *out.parents[0];
    p.ensure_grad();
    for (std::size_t i = 0; i < n * c; ++i) {
      double g = out.grad[i] * inv;
      for (std::size_t k = 0; k < spatial; ++k) p.grad[i * spatial + k] += g;
    }
  });
}

}  // namespace rulkit::nn
