#include "rulkit/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rulkit/errors.hpp"
#include "rulkit/fft.hpp"

namespace rulkit::feat {

TimeFeatures time_features(const std::vector<double>& x) {
  std::size_t n = x.size();
  if (n < 2) throw ShapeError("time_features: need at least 2 samples");
  double inv_n = 1.0 / static_cast<double>(n);

  double sum = 0, sumsq = 0, sum_abs = 0, sum_sqrt_abs = 0;
  double mx = x[0], mn = x[0], peak = 0, li = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double v = x[i];
    sum += v;
    sumsq += v * v;
    sum_abs += std::abs(v);
    sum_sqrt_abs += std::sqrt(std::abs(v));
    mx = std::max(mx, v);
    mn = std::min(mn, v);
    peak = std::max(peak, std::abs(v));
    if (i + 1 < n) li += std::abs(x[i + 1] - x[i]);
  }
  double mean = sum * inv_n;
  double m2 = 0, m3 = 0, m4 = 0;
  for (double v : x) {
    double d = v - mean;
    double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 *= inv_n;
  m3 *= inv_n;
  m4 *= inv_n;

  TimeFeatures f;
  f.rms = std::sqrt(sumsq * inv_n);
  f.variance = m2;
  f.peak_value = peak;
  f.line_integral = li;
  f.peak_to_peak = mx - mn;
  double mean_abs = sum_abs * inv_n;
  double mean_sqrt_abs = sum_sqrt_abs * inv_n;
  if (m2 > 0.0) {
    f.kurtosis = m4 / (m2 * m2);
    f.skewness = m3 / (m2 * std::sqrt(m2));
  } else {
    f.degenerate = true;  // constant signal: 4th/3rd moments are 0/0
  }
  if (f.rms > 0.0) {
    f.crest_factor = f.peak_value / f.rms;
    f.clearance_factor = f.peak_value / (mean_sqrt_abs * mean_sqrt_abs);
    f.shape_factor = f.rms / mean_abs;
    f.impulse_factor = f.peak_value / mean_abs;
  } else {
    f.degenerate = true;  // all-zero signal: the ratio features are 0/0
  }
  return f;
}

FreqFeatures freq_features(const std::vector<double>& x) {
  if (x.size() < 2) throw ShapeError("freq_features: need at least 2 samples");
  std::vector<double> mag = fft_magnitudes(x);
  double mx = mag[0], mn = mag[0], energy = 0;
  for (double m : mag) {
    mx = std::max(mx, m);
    mn = std::min(mn, m);
    energy += m * m;
  }
  FreqFeatures f;
  f.fft_peak = mx - mn;
  f.fft_energy = energy;
  f.fft_psd = energy / static_cast<double>(mag.size());
  return f;
}

std::vector<double> cwt_scale_grid(const CwtConfig& config) {
  if (!(config.min_scale > 0.0) || !(config.max_scale > config.min_scale))
    throw ConfigError("cwt: scale grid needs 0 < min_scale < max_scale");
  if (config.n_scales < 2) throw ConfigError("cwt: need at least 2 scales");
  std::vector<double> scales(config.n_scales);
  double ratio = config.max_scale / config.min_scale;
  double denom = static_cast<double>(config.n_scales - 1);
  for (std::size_t j = 0; j < config.n_scales; ++j)
    scales[j] = config.min_scale * std::pow(ratio, static_cast<double>(j) / denom);
  return scales;
}

namespace {

// Average-pool `n` source slots into `out` nearly-equal contiguous bins;
// returns the bin edges (size out+1).
std::vector<std::size_t> pool_edges(std::size_t n, std::size_t out) {
  std::vector<std::size_t> edges(out + 1);
  for (std::size_t i = 0; i <= out; ++i) edges[i] = i * n / out;
  return edges;
}

}  // namespace

Scalogram cwt_scalogram(const std::vector<double>& x, const CwtConfig& config) {
  std::size_t len = x.size();
  if (len == 0) throw ShapeError("cwt: empty signal");
  if (config.out_rows == 0 || config.out_cols == 0 || config.out_rows > config.n_scales ||
      config.out_cols > len)
    throw ConfigError("cwt: output size must fit inside the raw scalogram");
  std::vector<double> scales = cwt_scale_grid(config);

  double beta = config.omega0 * config.omega0;
  double c_psi = std::sqrt(std::numbers::pi / beta);
  // Gaussian envelope support: beyond u_max the atom is below 1e-12.
  double u_max = std::sqrt(2.0 * std::log(1e12) / beta);
  std::size_t max_half = static_cast<std::size_t>(std::ceil(scales.back() * u_max));
  if (2 * max_half + 1 > len)
    throw ConfigError("cwt: max scale " + std::to_string(scales.back()) +
                      " needs support " + std::to_string(2 * max_half + 1) +
                      " samples but the signal has " + std::to_string(len));

  // One shared zero-padded FFT of the signal; each scale contributes a
  // kernel FFT and a pointwise product (linear convolution via padding).
  std::size_t pad = next_pow2(len + 2 * max_half);
  std::vector<cdouble> sig(pad, cdouble(0.0, 0.0));
  for (std::size_t i = 0; i < len; ++i) sig[i] = cdouble(x[i], 0.0);
  std::vector<cdouble> sig_f = fft(sig);

  std::size_t rows = config.n_scales;
  std::vector<double> raw(rows * len);
  std::vector<cdouble> kernel(pad);
  for (std::size_t j = 0; j < rows; ++j) {
    double a = scales[j];
    std::size_t half = static_cast<std::size_t>(std::ceil(a * u_max));
    double norm = 1.0 / std::sqrt(c_psi * a);
    // Cross-correlation with psi(m/a) == convolution with psi(-m/a); the
    // kernel is laid out so lag b lands at padded index b + half.
    std::fill(kernel.begin(), kernel.end(), cdouble(0.0, 0.0));
    for (std::size_t idx = 0; idx <= 2 * half; ++idx) {
      double u = (static_cast<double>(half) - static_cast<double>(idx)) / a;
      double env = std::exp(-0.5 * beta * u * u);
      kernel[idx] = cdouble(env * std::cos(config.omega0 * u),
                            env * std::sin(config.omega0 * u));
    }
    std::vector<cdouble> ker_f = fft(kernel);
    for (std::size_t i = 0; i < pad; ++i) ker_f[i] *= sig_f[i];
    std::vector<cdouble> conv = ifft(ker_f);
    for (std::size_t b = 0; b < len; ++b) raw[j * len + b] = norm * std::abs(conv[b + half]);
  }

  Scalogram out;
  out.rows = config.out_rows;
  out.cols = config.out_cols;
  out.scales = std::move(scales);
  out.omega0 = config.omega0;
  out.values.assign(out.rows * out.cols, 0.0);
  std::vector<std::size_t> row_edges = pool_edges(rows, out.rows);
  std::vector<std::size_t> col_edges = pool_edges(len, out.cols);
  for (std::size_t r = 0; r < out.rows; ++r)
    for (std::size_t c = 0; c < out.cols; ++c) {
      double s = 0.0;
      std::size_t count = 0;
      for (std::size_t j = row_edges[r]; j < row_edges[r + 1]; ++j)
        for (std::size_t b = col_edges[c]; b < col_edges[c + 1]; ++b) {
          s += raw[j * len + b];
          ++count;
        }
      out.values[r * out.cols + c] = s / static_cast<double>(count);
    }
  return out;
}

FeatureSet extract_all(const data::SampleBlock& denoised, const CwtConfig& config) {
  if (denoised.horizontal.size() != denoised.vertical.size())
    throw ShapeError("extract_all: channel lengths disagree");
  FeatureSet fs;
  fs.snapshot = denoised.index;
  fs.wave_h = denoised.horizontal;
  fs.wave_v = denoised.vertical;
  for (std::size_t ch = 0; ch < 2; ++ch) {
    const std::vector<double>& x = ch == 0 ? denoised.horizontal : denoised.vertical;
    TimeFeatures tf = time_features(x);
    FreqFeatures ff = freq_features(x);
    auto ta = tf.as_array();
    auto fa = ff.as_array();
    for (std::size_t i = 0; i < kTimeFeatureCount; ++i)
      fs.features[ch * kFeaturesPerChannel + i] = ta[i];
    for (std::size_t i = 0; i < kFreqFeatureCount; ++i)
      fs.features[ch * kFeaturesPerChannel + kTimeFeatureCount + i] = fa[i];
  }
  fs.scal_h = cwt_scalogram(denoised.horizontal, config);
  fs.scal_v = cwt_scalogram(denoised.vertical, config);
  return fs;
}

}  // namespace rulkit::feat
