#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace rulkit::metrics {

// One scored snapshot. RUL columns are only meaningful when has_rul is set
// (snapshots before the FPT carry no RUL label but still count for OC).
struct PredictionRow {
  std::string bearing_id;
  std::size_t snapshot = 0;
  bool has_rul = false;
  double true_rul = 0.0;
  double pred_rul = 0.0;
  int true_oc = 0;
  int pred_oc = 0;
};

struct BearingMetrics {
  std::string bearing_id;
  double rmse = 0.0;
  double mae = 0.0;
  double acc = 0.0;
  std::size_t rul_points = 0;
  std::size_t oc_points = 0;
};

// Groups rows per bearing. RMSE/MAE run over the labeled span with divisor
// t_N - FPT (one less than the labeled count); a bearing without at least
// two labeled snapshots cannot be scored and raises NumericError.
std::vector<BearingMetrics> compute_metrics(const std::vector<PredictionRow>& rows);

// CSV: bearing_id,snapshot,true_rul,pred_rul,true_oc,pred_oc with empty
// true_rul for unlabeled snapshots. Values print as %.17g so a re-read is
// bit-exact.
void write_predictions_csv(const std::filesystem::path& path,
                           const std::vector<PredictionRow>& rows);
std::vector<PredictionRow> read_predictions_csv(const std::filesystem::path& path);

// CSV: bearing_id,rmse,mae,acc — one row per bearing.
void write_metrics_csv(const std::filesystem::path& path,
                       const std::vector<BearingMetrics>& metrics);

}  // namespace rulkit::metrics
