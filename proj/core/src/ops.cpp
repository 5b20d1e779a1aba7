#include "rulkit/ops.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "rulkit/errors.hpp"

namespace rulkit::nn {

namespace {

using MatRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<MatRM>;
using MapCM = Eigen::Map<const MatRM>;

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape())
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
}

void require_rank2(const Tensor& a, const char* op) {
  if (a.rank() != 2)
    throw ShapeError(std::string(op) + ": expected rank-2 tensor, got " + shape_str(a.shape()));
}

// Accumulates `src` into parent i's grad buffer element-wise.
void accumulate(detail::Node& out, std::size_t i, const std::vector<double>& src) {
  auto& p = *out.parents[i];
  p.ensure_grad();
  for (std::size_t k = 0; k < src.size(); ++k) p.grad[k] += src[k];
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> v(a.size());
  const double* pa = a.data();
  const double* pb = b.data();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = pa[i] + pb[i];
  return make_op(a.shape(), std::move(v), {a, b}, [](detail::Node& out) {
    accumulate(out, 0, out.grad);
    accumulate(out, 1, out.grad);
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<double> v(a.size());
  const double* pa = a.data();
  const double* pb = b.data();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = pa[i] - pb[i];
  return make_op(a.shape(), std::move(v), {a, b}, [](detail::Node& out) {
    auto& pa = *out.parents[0];
    auto& pb = *out.parents[1];
    pa.ensure_grad();
    pb.ensure_grad();
    for (std::size_t i = 0; i < out.grad.size(); ++i) {
      pa.grad[i] += out.grad[i];
      pb.grad[i] -= out.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> v(a.size());
  const double* pa = a.data();
  const double* pb = b.data();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = pa[i] * pb[i];
  return make_op(a.shape(), std::move(v), {a, b}, [](detail::Node& out) {
    auto& pa = *out.parents[0];
    auto& pb = *out.parents[1];
    pa.ensure_grad();
    pb.ensure_grad();
    for (std::size_t i = 0; i < out.grad.size(); ++i) {
      pa.grad[i] += out.grad[i] * pb.value[i];
      pb.grad[i] += out.grad[i] * pa.value[i];
    }
  });
}

Tensor add_scalar(const Tensor& a, double s) {
  std::vector<double> v(a.size());
  const double* pa = a.data();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = pa[i] + s;
  return make_op(a.shape(), std::move(v), {a},
                 [](detail::Node& out) { accumulate(out, 0, out.grad); });
}

Tensor mul_scalar(const Tensor& a, double s) {
  std::vector<double> v(a.size());
  const double* pa = a.data();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = pa[i] * s;
  return make_op(a.shape(), std::move(v), {a}, [s](detail::Node& out) {
    auto& p = *out.parents[0];
    p.ensure_grad();
    for (std::size_t i = 0; i < out.grad.size(); ++i) p.grad[i] += out.grad[i] * s;
  });
}

Tensor square(const Tensor& a) {
  std::vector<double> v(a.size());
  const double* pa = a.data();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = pa[i] * pa[i];
  return make_op(a.shape(), std::move(v), {a}, [](detail::Node& out) {
    auto& p = *out.parents[0];
    p.ensure_grad();
    for (std::size_t i = 0; i < out.grad.size(); ++i)
      p.grad[i] += 2.0 * p.value[i] * out.grad[i];
  });
}

Tensor relu(const Tensor& a) {
  std::vector<double> v(a.size());
  const double* pa = a.data();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = pa[i] > 0.0 ? pa[i] : 0.0;
  return make_op(a.shape(), std::move(v), {a}, [](detail::Node& out) {
    auto& p = *out.parents[0];
    p.ensure_grad();
    for (std::size_t i = 0; i < out.grad.size(); ++i)
      if (p.value[i] > 0.0) p.grad[i] += out.grad[i];
  });
}

Tensor sigmoid(const Tensor& a) {
  std::vector<double> v(a.size());
  const double* pa = a.data();
  for (std::size_t i = 0; i < v.size(); ++i) {
    double x = pa[i];
    v[i] = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  }
  return make_op(a.shape(), std::move(v), {a}, [](detail::Node& out) {
    auto& p = *out.parents[0];
    p.ensure_grad();
    for (std::size_t i = 0; i < out.grad.size(); ++i) {
      double s = out.value[i];
      p.grad[i] += out.grad[i] * s * (1.0 - s);
    }
  });
}

Tensor tanh_op(const Tensor& a) {
  std::vector<double> v(a.size());
  const double* pa = a.data();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::tanh(pa[i]);
  return make_op(a.shape(), std::move(v), {a}, [](detail::Node& out) {
    auto& p = *out.parents[0];
    p.ensure_grad();
    for (std::size_t i = 0; i < out.grad.size(); ++i) {
      double y = out.value[i];
      p.grad[i] += out.grad[i] * (1.0 - y * y);
    }
  });
}

Tensor softmax_rows(const Tensor& a) {
  require_rank2(a, "softmax_rows");
  std::size_t rows = a.dim(0), cols = a.dim(1);
  std::vector<double> v(a.size());
  const double* pa = a.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = pa + r * cols;
    double mx = row[0];
    for (std::size_t c = 1; c < cols; ++c) mx = std::max(mx, row[c]);
    double sum = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      double e = std::exp(row[c] - mx);
      v[r * cols + c] = e;
      sum += e;
    }
    for (std::size_t c = 0; c < cols; ++c) v[r * cols + c] /= sum;
  }
  return make_op(a.shape(), std::move(v), {a}, [rows, cols](detail::Node& out) {
    auto& p = *out.parents[0];
    p.ensure_grad();
    for (std::size_t r = 0; r < rows; ++r) {
      const double* s = out.value.data() + r * cols;
      const double* g = out.grad.data() + r * cols;
      double dot = 0.0;
      for (std::size_t c = 0; c < cols; ++c) dot += g[c] * s[c];
      double* dst = p.grad.data() + r * cols;
      for (std::size_t c = 0; c < cols; ++c) dst[c] += s[c] * (g[c] - dot);
    }
  });
}

Tensor log1p_op(const Tensor& a) {
  std::vector<double> v(a.size());
  const double* pa = a.data();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::log1p(pa[i]);
  return make_op(a.shape(), std::move(v), {a}, [](detail::Node& out) {
    auto& p = *out.parents[0];
    p.ensure_grad();
    for (std::size_t i = 0; i < out.grad.size(); ++i)
      p.grad[i] += out.grad[i] / (1.0 + p.value[i]);
  });
}

Tensor log_clamped(const Tensor& a, double lo) {
  std::vector<double> v(a.size());
  const double* pa = a.data();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::log(std::max(pa[i], lo));
  return make_op(a.shape(), std::move(v), {a}, [lo](detail::Node& out) {
    auto& p = *out.parents[0];
    p.ensure_grad();
    for (std::size_t i = 0; i < out.grad.size(); ++i)
      if (p.value[i] > lo) p.grad[i] += out.grad[i] / p.value[i];
  });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  std::size_t m = a.dim(0), k = a.dim(1), k2 = b.dim(0), n = b.dim(1);
  if (k != k2)
    throw ShapeError("matmul: inner dimensions disagree, " + shape_str(a.shape()) + " x " +
                     shape_str(b.shape()));
  std::vector<double> v(m * n);
  {
    MapCM A(a.data(), m, k), B(b.data(), k, n);
    MapM C(v.data(), m, n);
    C.noalias() = A * B;
  }
  return make_op({m, n}, std::move(v), {a, b}, [m, k, n](detail::Node& out) {
    auto& pa = *out.parents[0];
    auto& pb = *out.parents[1];
    pa.ensure_grad();
    pb.ensure_grad();
    MapCM G(out.grad.data(), m, n);
    MapCM A(pa.value.data(), m, k), B(pb.value.data(), k, n);
    MapM dA(pa.grad.data(), m, k), dB(pb.grad.data(), k, n);
    dA.noalias() += G * B.transpose();
    dB.noalias() += A.transpose() * G;
  });
}

Tensor matmul_bt(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul_bt");
  require_rank2(b, "matmul_bt");
  std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(0);
  if (k != b.dim(1))
    throw ShapeError("matmul_bt: inner dimensions disagree, " + shape_str(a.shape()) + " x " +
                     shape_str(b.shape()) + "^T");
  std::vector<double> v(m * n);
  {
    MapCM A(a.data(), m, k), B(b.data(), n, k);
    MapM C(v.data(), m, n);
    C.noalias() = A * B.transpose();
  }
  return make_op({m, n}, std::move(v), {a, b}, [m, k, n](detail::Node& out) {
    auto& pa = *out.parents[0];
    auto& pb = *out.parents[1];
    pa.ensure_grad();
    pb.ensure_grad();
    MapCM G(out.grad.data(), m, n);
    MapCM A(pa.value.data(), m, k), B(pb.value.data(), n, k);
    MapM dA(pa.grad.data(), m, k), dB(pb.grad.data(), n, k);
    dA.noalias() += G * B;
    dB.noalias() += G.transpose() * A;
  });
}

Tensor transpose(const Tensor& a) {
  require_rank2(a, "transpose");
  std::size_t r = a.dim(0), c = a.dim(1);
  std::vector<double> v(a.size());
  const double* pa = a.data();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) v[j * r + i] = pa[i * c + j];
  return make_op({c, r}, std::move(v), {a}, [r, c](detail::Node& out) {
    auto& p = *out.parents[0];
    p.ensure_grad();
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) p.grad[i * c + j] += out.grad[j * r + i];
  });
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (numel(shape) != a.size())
    throw ShapeError("reshape: cannot view " + shape_str(a.shape()) + " as " + shape_str(shape));
  std::vector<double> v = a.values();
  return make_op(std::move(shape), std::move(v), {a},
                 [](detail::Node& out) { accumulate(out, 0, out.grad); });
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  std::size_t rows = parts[0].dim(0);
  std::size_t total = 0;
  for (const auto& p : parts) {
    require_rank2(p, "concat_cols");
    if (p.dim(0) != rows)
      throw ShapeError("concat_cols: row counts disagree, " + shape_str(parts[0].shape()) +
                       " vs " + shape_str(p.shape()));
    total += p.dim(1);
  }
  std::vector<double> v(rows * total);
  std::vector<std::size_t> widths;
  widths.reserve(parts.size());
  std::size_t off = 0;
  for (const auto& p : parts) {
    std::size_t w = p.dim(1);
    widths.push_back(w);
    const double* src = p.data();
    for (std::size_t r = 0; r < rows; ++r)
      std::copy(src + r * w, src + (r + 1) * w, v.data() + r * total + off);
    off += w;
  }
  return make_op({rows, total}, std::move(v), parts,
                 [rows, total, widths](detail::Node& out) {
                   std::size_t off = 0;
                   for (std::size_t i = 0; i < widths.size(); ++i) {
                     auto& p = *out.parents[i];
                     p.ensure_grad();
                     std::size_t w = widths[i];
                     for (std::size_t r = 0; r < rows; ++r)
                       for (std::size_t c = 0; c < w; ++c)
                         p.grad[r * w + c] += out.grad[r * total + off + c];
                     off += w;
                   }
                 });
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  std::size_t cols = parts[0].dim(1);
  std::size_t total = 0;
  for (const auto& p : parts) {
    require_rank2(p, "concat_rows");
    if (p.dim(1) != cols)
      throw ShapeError("concat_rows: column counts disagree, " + shape_str(parts[0].shape()) +
                       " vs " + shape_str(p.shape()));
    total += p.dim(0);
  }
  std::vector<double> v;
  v.reserve(total * cols);
  std::vector<std::size_t> heights;
  heights.reserve(parts.size());
  for (const auto& p : parts) {
    heights.push_back(p.dim(0));
    v.insert(v.end(), p.values().begin(), p.values().end());
  }
  return make_op({total, cols}, std::move(v), parts, [cols, heights](detail::Node& out) {
    std::size_t off = 0;
    for (std::size_t i = 0; i < heights.size(); ++i) {
      auto& p = *out.parents[i];
      p.ensure_grad();
      std::size_t count = heights[i] * cols;
      for (std::size_t k = 0; k < count; ++k) p.grad[k] += out.grad[off + k];
      off += count;
    }
  });
}

Tensor slice_rows(const Tensor& a, std::size_t start, std::size_t len) {
  require_rank2(a, "slice_rows");
  std::size_t rows = a.dim(0), cols = a.dim(1);
  if (start + len > rows)
    throw ShapeError("slice_rows: [" + std::to_string(start) + ", " +
                     std::to_string(start + len) + ") out of range for " + shape_str(a.shape()));
  std::vector<double> v(len * cols);
  std::copy(a.data() + start * cols, a.data() + (start + len) * cols, v.data());
  return make_op({len, cols}, std::move(v), {a}, [start, cols](detail::Node& out) {
    auto& p = *out.parents[0];
    p.ensure_grad();
    for (std::size_t i = 0; i < out.grad.size(); ++i)
      p.grad[start * cols + i] += out.grad[i];
  });
}

Tensor select_step(const Tensor& a, std::size_t t) {
  if (a.rank() != 3)
    throw ShapeError("select_step: expected rank-3 tensor, got " + shape_str(a.shape()));
  std::size_t n = a.dim(0), steps = a.dim(1), f = a.dim(2);
  if (t >= steps) throw ShapeError("select_step: step index out of range");
  std::vector<double> v(n * f);
  const double* pa = a.data();
  for (std::size_t i = 0; i < n; ++i)
    std::copy(pa + (i * steps + t) * f, pa + (i * steps + t + 1) * f, v.data() + i * f);
  return make_op({n, f}, std::move(v), {a}, [n, steps, f, t](detail::Node& out) {
    auto& p = *out.parents[0];
    p.ensure_grad();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < f; ++j)
        p.grad[(i * steps + t) * f + j] += out.grad[i * f + j];
  });
}

Tensor stack_steps(const std::vector<Tensor>& steps) {
  if (steps.empty()) throw ShapeError("stack_steps: no inputs");
  std::size_t n = steps[0].dim(0), f = steps[0].dim(1);
  for (const auto& s : steps) {
    require_rank2(s, "stack_steps");
    if (s.dim(0) != n || s.dim(1) != f)
      throw ShapeError("stack_steps: step shapes disagree, " + shape_str(steps[0].shape()) +
                       " vs " + shape_str(s.shape()));
  }
  std::size_t t = steps.size();
  std::vector<double> v(n * t * f);
  for (std::size_t s = 0; s < t; ++s) {
    const double* src = steps[s].data();
    for (std::size_t i = 0; i < n; ++i)
      std::copy(src + i * f, src + (i + 1) * f, v.data() + (i * t + s) * f);
  }
  return make_op({n, t, f}, std::move(v), steps, [n, t, f](detail::Node& out) {
    for (std::size_t s = 0; s < t; ++s) {
      auto& p = *out.parents[s];
      p.ensure_grad();
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < f; ++j)
          p.grad[i * f + j] += out.grad[(i * t + s) * f + j];
    }
  });
}

Tensor add_rowvec(const Tensor& a, const Tensor& b) {
  require_rank2(a, "add_rowvec");
  std::size_t rows = a.dim(0), cols = a.dim(1);
  if (b.rank() != 1 || b.dim(0) != cols)
    throw ShapeError("add_rowvec: bias " + shape_str(b.shape()) + " does not match " +
                     shape_str(a.shape()));
  std::vector<double> v(a.size());
  const double* pa = a.data();
  const double* pb = b.data();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) v[r * cols + c] = pa[r * cols + c] + pb[c];
  return make_op(a.shape(), std::move(v), {a, b}, [rows, cols](detail::Node& out) {
    auto& pa = *out.parents[0];
    auto& pb = *out.parents[1];
    pa.ensure_grad();
    pb.ensure_grad();
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) {
        pa.grad[r * cols + c] += out.grad[r * cols + c];
        pb.grad[c] += out.grad[r * cols + c];
      }
  });
}

Tensor permute_nc_l(const Tensor& a) {
  if (a.rank() != 3)
    throw ShapeError("permute_nc_l: expected rank-3 tensor, got " + shape_str(a.shape()));
  std::size_t n = a.dim(0), c = a.dim(1), l = a.dim(2);
  std::vector<double> v(a.size());
  const double* pa = a.data();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j)
      for (std::size_t k = 0; k < l; ++k)
        v[(i * l + k) * c + j] = pa[(i * c + j) * l + k];
  return make_op({n, l, c}, std::move(v), {a}, [n, c, l](detail::Node& out) {
    auto& p = *out.parents[0];
    p.ensure_grad();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < c; ++j)
        for (std::size_t k = 0; k < l; ++k)
          p.grad[(i * c + j) * l + k] += out.grad[(i * l + k) * c + j];
  });
}

Tensor sum_all(const Tensor& a) {
  double s = 0.0;
  for (double x : a.values()) s += x;
  return make_op({1}, {s}, {a}, [](detail::Node& out) {
    auto& p = *out.parents[0];
    p.ensure_grad();
    for (double& g : p.grad) g += out.grad[0];
  });
}

Tensor mean_all(const Tensor& a) {
  if (a.size() == 0) throw ShapeError("mean_all: empty tensor");
  double s = 0.0;
  for (double x : a.values()) s += x;
  double inv = 1.0 / static_cast<double>(a.size());
  return make_op({1}, {s * inv}, {a}, [inv](detail::Node& out) {
    auto& p = *out.parents[0];
    p.ensure_grad();
    for (double& g : p.grad) g += out.grad[0] * inv;
  });
}

}  // namespace rulkit::nn
