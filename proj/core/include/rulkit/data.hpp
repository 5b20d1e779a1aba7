#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace rulkit::data {

// One snapshot: a fixed-length two-channel acceleration block. `index` is
// the snapshot ordinal t; formulas work in ordinals and convert to seconds
// only for display.
struct SampleBlock {
  std::vector<double> horizontal;
  std::vector<double> vertical;
  std::size_t index = 0;
};

// One bearing's run-to-failure recording.
struct VibrationRecord {
  std::string bearing_id;
  int condition_id = 0;  // operating condition, 1-based
  std::vector<SampleBlock> snapshots;
  double sample_rate_hz = 0.0;
  double snapshot_period_s = 0.0;

  std::size_t lifetime() const { return snapshots.empty() ? 0 : snapshots.size() - 1; }
};

// XJTU-SY: directory of per-minute CSVs named <n>.csv with two numeric
// columns (horizontal, vertical), 32768 data rows, optional header line.
// Bearing id and condition come from the directory name (Bearing<c>_<k>).
// The two-argument form reads the same layout with a different block length
// (synthetic recordings reuse it).
VibrationRecord parse_xjtu(const std::filesystem::path& dir);
VibrationRecord parse_xjtu(const std::filesystem::path& dir, std::size_t rows_per_block);

// PRONOSTIA: directory of acc_*.csv files with 6 comma-separated columns
// (hour, minute, second, microsecond, horizontal, vertical), 2560 rows.
VibrationRecord parse_pronostia(const std::filesystem::path& dir);

// Inverse writers; a written record re-parses to bit-exact sample values.
void write_xjtu(const VibrationRecord& rec, const std::filesystem::path& dir);
void write_pronostia(const VibrationRecord& rec, const std::filesystem::path& dir);

// Synthetic run-to-failure generator: stationary sinusoid + white noise,
// then impulsive bursts from `fault_onset` on, burst amplitude growing
// linearly with the post-onset snapshot count. The carrier frequency shifts
// with condition_id so operating conditions stay separable.
struct SynthConfig {
  std::size_t n_snapshots = 100;
  std::size_t block_len = 1024;
  double noise_std = 0.2;
  std::size_t fault_onset = 50;
  double growth_rate = 0.4;
  int condition_id = 1;
  std::string bearing_id = "Synth1_1";
  double sample_rate_hz = 25600.0;
  double snapshot_period_s = 10.0;
};

struct SynthResult {
  VibrationRecord record;
  std::size_t true_onset = 0;
};

SynthResult synthesize_degradation(const SynthConfig& config, std::uint64_t seed);

enum class SplitRule { OC_INDEPENDENT, OC_DEPENDENT };

struct SplitPlan {
  SplitRule rule = SplitRule::OC_INDEPENDENT;
  std::vector<std::string> train_bearings;
  std::vector<std::string> test_bearings;
};

// OC_INDEPENDENT: test = {held_out}, train = everything else.
// OC_DEPENDENT: per condition the 2 lexicographically-first bearings train,
// the rest test; held_out must be empty.
SplitPlan make_split(const std::vector<VibrationRecord>& records, SplitRule rule,
                     const std::string& held_out);

SplitRule parse_split_rule(const std::string& name);

}  // namespace rulkit::data
