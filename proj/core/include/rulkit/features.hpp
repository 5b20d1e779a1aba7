#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "rulkit/data.hpp"

namespace rulkit::feat {

inline constexpr std::size_t kTimeFeatureCount = 11;
inline constexpr std::size_t kFreqFeatureCount = 3;
inline constexpr std::size_t kFeaturesPerChannel = kTimeFeatureCount + kFreqFeatureCount;

// The 11 time-domain statistics, in feature-vector order. `degenerate` marks
// a constant input, where kurtosis/skewness are forced to 0 instead of 0/0.
struct TimeFeatures {
  double rms = 0, variance = 0, peak_value = 0, crest_factor = 0, kurtosis = 0,
         clearance_factor = 0, shape_factor = 0, line_integral = 0, peak_to_peak = 0,
         skewness = 0, impulse_factor = 0;
  bool degenerate = false;

  std::array<double, kTimeFeatureCount> as_array() const {
    return {rms,          variance,       peak_value, crest_factor,   kurtosis,
            clearance_factor, shape_factor, line_integral, peak_to_peak, skewness,
            impulse_factor};
  }
};

TimeFeatures time_features(const std::vector<double>& x);

// Magnitude-spectrum statistics over all n FFT bins:
// fft_peak = max|X_k| - min|X_k|, fft_energy = sum |X_k|^2, fft_psd = energy/n.
struct FreqFeatures {
  double fft_peak = 0, fft_energy = 0, fft_psd = 0;
  std::array<double, kFreqFeatureCount> as_array() const {
    return {fft_peak, fft_energy, fft_psd};
  }
};

FreqFeatures freq_features(const std::vector<double>& x);

// Morlet CWT image: geometric scale grid, magnitude taken, average-pooled
// down to (out_rows, out_cols).
struct CwtConfig {
  double omega0 = 6.0;
  double min_scale = 2.0;
  double max_scale = 512.0;
  std::size_t n_scales = 64;
  std::size_t out_rows = 64;
  std::size_t out_cols = 64;
};

struct Scalogram {
  std::size_t rows = 0, cols = 0;
  std::vector<double> values;  // row-major, rows = scales (fine to coarse)
  std::vector<double> scales;  // pre-pooling scale grid
  double omega0 = 6.0;

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

Scalogram cwt_scalogram(const std::vector<double>& x, const CwtConfig& config);

// Geometric grid of n scales from min_scale to max_scale inclusive.
std::vector<double> cwt_scale_grid(const CwtConfig& config);

// Center frequency (cycles/sample) of the Morlet atom at scale a.
inline double cwt_center_frequency(double omega0, double a) {
  return omega0 / (6.283185307179586476925286766559 * a);
}

// Everything the network consumes for one snapshot.
struct FeatureSet {
  std::string bearing_id;
  std::size_t snapshot = 0;
  int condition_id = 0;
  std::vector<double> wave_h, wave_v;                    // denoised waveform
  std::array<double, 2 * kFeaturesPerChannel> features;  // 2x14, row 0 = horizontal
  Scalogram scal_h, scal_v;
};

FeatureSet extract_all(const data::SampleBlock& denoised, const CwtConfig& config);

}  // namespace rulkit::feat
