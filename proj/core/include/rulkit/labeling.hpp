#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "rulkit/data.hpp"

namespace rulkit::label {

// 3-sigma first-prediction-time detection over a per-snapshot indicator.
struct FptResult {
  std::size_t fpt_index = 0;
  double mu = 0.0;
  double sigma = 0.0;
  std::size_t window_begin = 0, window_end = 0;  // healthy range [begin, end)
};

// mu/sigma learned on [window_begin, window_end); scanning forward, the
// first pair of consecutive points outside mu +/- 3 sigma yields the second
// point's index. Throws NumericError when no such pair exists.
FptResult detect_fpt(const std::vector<double>& indicator, std::size_t window_begin,
                     std::size_t window_end);

// Healthy window defaults to the first 10% of snapshots (at least 2).
FptResult detect_fpt(const std::vector<double>& indicator);

// Default FPT indicator: per-snapshot RMS of the horizontal channel.
std::vector<double> indicator_rms_horizontal(const data::VibrationRecord& rec);

// Normalized RUL targets. values[i] labels snapshot fpt_index + i; snapshots
// before fpt_index carry no RUL label.
struct RulLabel {
  std::size_t fpt_index = 0;
  std::vector<double> values;
  std::string method;  // "hi_fpt" or "hi_pca"
  bool degenerate = false;

  bool covers(std::size_t t) const {
    return t >= fpt_index && t < fpt_index + values.size();
  }
  double at(std::size_t t) const { return values[t - fpt_index]; }
};

// Linear labels RUL_t = (t_N - t) / (t_N - fpt) on [fpt, t_N].
RulLabel label_hi_fpt(std::size_t fpt_index, std::size_t t_n);

// Mean distance to the temporal neighbors of each projected snapshot;
// endpoints use their single neighbor. rows = snapshots, row stride = k.
std::vector<double> neighbor_distance_profile(const std::vector<double>& v,
                                              std::size_t rows, std::size_t k);

// PCA health indicator: standardize columns, project onto the top-2
// principal components, take the neighbor-distance profile, min-max
// normalize to [0,1]. Identical snapshots degenerate to all-zeros + flag.
RulLabel label_hi_pca(const std::vector<double>& feature_matrix, std::size_t snapshots,
                      std::size_t features);

}  // namespace rulkit::label
