#include "rulkit/labeling.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "rulkit/errors.hpp"

namespace rulkit::label {

FptResult detect_fpt(const std::vector<double>& indicator, std::size_t window_begin,
                     std::size_t window_end) {
  std::size_t n = indicator.size();
  if (window_begin >= window_end || window_end > n)
    throw ShapeError("detect_fpt: healthy window [" + std::to_string(window_begin) + ", " +
                     std::to_string(window_end) + ") invalid for " + std::to_string(n) +
                     " snapshots");
  double mu = 0.0;
  std::size_t m = window_end - window_begin;
  for (std::size_t i = window_begin; i < window_end; ++i) mu += indicator[i];
  mu /= static_cast<double>(m);
  double var = 0.0;
  for (std::size_t i = window_begin; i < window_end; ++i) {
    double d = indicator[i] - mu;
    var += d * d;
  }
  double sigma = std::sqrt(var / static_cast<double>(m));

  double band = 3.0 * sigma;
  auto outside = [&](std::size_t i) { return std::abs(indicator[i] - mu) > band; };
  for (std::size_t i = 1; i < n; ++i) {
    if (outside(i - 1) && outside(i)) {
      return {i, mu, sigma, window_begin, window_end};
    }
  }
  throw NumericError("detect_fpt: no degradation detected (no two consecutive points leave "
                     "the 3-sigma band)");
}

FptResult detect_fpt(const std::vector<double>& indicator) {
  std::size_t n = indicator.size();
  std::size_t window = std::max<std::size_t>(2, n / 10);
  return detect_fpt(indicator, 0, std::min(window, n));
}

std::vector<double> indicator_rms_horizontal(const data::VibrationRecord& rec) {
  std::vector<double> out;
  out.reserve(rec.snapshots.size());
  for (const auto& b : rec.snapshots) {
    double s = 0.0;
    for (double v : b.horizontal) s += v * v;
    out.push_back(std::sqrt(s / static_cast<double>(b.horizontal.size())));
  }
  return out;
}

RulLabel label_hi_fpt(std::size_t fpt_index, std::size_t t_n) {
  if (fpt_index >= t_n)
    throw ShapeError("label_hi_fpt: fpt " + std::to_string(fpt_index) +
                     " must precede lifetime " + std::to_string(t_n));
  RulLabel label;
  label.fpt_index = fpt_index;
  label.method = "hi_fpt";
  label.values.resize(t_n - fpt_index + 1);
  double denom = static_cast<double>(t_n - fpt_index);
  for (std::size_t i = 0; i < label.values.size(); ++i)
    label.values[i] = static_cast<double>(t_n - (fpt_index + i)) / denom;
  return label;
}

std::vector<double> neighbor_distance_profile(const std::vector<double>& v, std::size_t rows,
                                              std::size_t k) {
  if (rows * k != v.size()) throw ShapeError("neighbor_distance_profile: bad dimensions");
  if (rows < 2) throw ShapeError("neighbor_distance_profile: need at least 2 rows");
  auto dist = [&](std::size_t a, std::size_t b) {
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      double d = v[a * k + j] - v[b * k + j];
      s += d * d;
    }
    return std::sqrt(s);
  };
  std::vector<double> out(rows);
  for (std::size_t t = 0; t < rows; ++t) {
    if (t == 0)
      out[t] = dist(0, 1);
    else if (t + 1 == rows)
      out[t] = dist(t, t - 1);
    else
      out[t] = 0.5 * (dist(t, t + 1) + dist(t, t - 1));
  }
  return out;
}

RulLabel label_hi_pca(const std::vector<double>& feature_matrix, std::size_t snapshots,
                      std::size_t features) {
  if (snapshots * features != feature_matrix.size())
    throw ShapeError("label_hi_pca: matrix size does not match dimensions");
  if (snapshots < 3) throw ShapeError("label_hi_pca: need at least 3 snapshots");

  // Standardize columns; zero-variance columns carry no information and are
  // zeroed. If every column is flat the record degenerates to all-zeros.
  std::vector<double> std_mat(feature_matrix.size());
  bool any_variance = false;
  double inv_n = 1.0 / static_cast<double>(snapshots);
  for (std::size_t j = 0; j < features; ++j) {
    double mean = 0.0;
    for (std::size_t t = 0; t < snapshots; ++t) mean += feature_matrix[t * features + j];
    mean *= inv_n;
    double var = 0.0;
    for (std::size_t t = 0; t < snapshots; ++t) {
      double d = feature_matrix[t * features + j] - mean;
      var += d * d;
    }
    var *= inv_n;
    if (var > 0.0) {
      any_variance = true;
      double inv_std = 1.0 / std::sqrt(var);
      for (std::size_t t = 0; t < snapshots; ++t)
        std_mat[t * features + j] = (feature_matrix[t * features + j] - mean) * inv_std;
    } else {
      for (std::size_t t = 0; t < snapshots; ++t) std_mat[t * features + j] = 0.0;
    }
  }

  RulLabel label;
  label.fpt_index = 0;
  label.method = "hi_pca";
  if (!any_variance) {
    label.values.assign(snapshots, 0.0);
    label.degenerate = true;
    return label;
  }

  constexpr std::size_t kComponents = 2;
  std::size_t k = std::min<std::size_t>(kComponents, features);
  using MatRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const MatRM> X(std_mat.data(), static_cast<Eigen::Index>(snapshots),
                            static_cast<Eigen::Index>(features));
  Eigen::MatrixXd cov = (X.transpose() * X) * inv_n;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success)
    throw NumericError("label_hi_pca: eigendecomposition failed");
  // Eigenvalues ascend; the top-k components are the trailing columns.
  Eigen::MatrixXd basis = solver.eigenvectors().rightCols(static_cast<Eigen::Index>(k));
  MatRM proj = X * basis;  // (snapshots, k)

  std::vector<double> flat(proj.data(), proj.data() + snapshots * k);
  std::vector<double> raw = neighbor_distance_profile(flat, snapshots, k);

  double mn = raw[0], mx = raw[0];
  for (double d : raw) {
    mn = std::min(mn, d);
    mx = std::max(mx, d);
  }
  label.values.resize(snapshots);
  if (mx > mn) {
    double inv = 1.0 / (mx - mn);
    for (std::size_t t = 0; t < snapshots; ++t) label.values[t] = (raw[t] - mn) * inv;
  } else {
    std::fill(label.values.begin(), label.values.end(), 0.0);
    label.degenerate = true;
  }
  return label;
}

}  // namespace rulkit::label
