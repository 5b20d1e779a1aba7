#include "rulkit/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>

#include "rulkit/errors.hpp"
#include "rulkit/rng.hpp"

namespace rulkit::data {

namespace fs = std::filesystem;

namespace {

bool parse_double(std::string_view s, double& out) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::vector<std::string_view> split_commas(std::string_view line,
                                           std::vector<std::string_view>& fields) {
  fields.clear();
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

// Reads a CSV of `cols` numeric columns; returns row-major values. A
// non-numeric first row is skipped when allow_header is set.
std::vector<double> read_numeric_csv(const fs::path& file, std::size_t cols,
                                     bool allow_header) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open " + file.string());
  std::vector<double> out;
  std::vector<std::string_view> fields;
  std::string line;
  long line_no = 0;
  bool first_data_row = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    split_commas(line, fields);
    if (fields.size() != cols) {
      if (first_data_row && allow_header) {
        first_data_row = false;
        continue;
      }
      throw ParseError(file.string(), line_no,
                       "expected " + std::to_string(cols) + " columns, got " +
                           std::to_string(fields.size()));
    }
    bool row_ok = true;
    std::size_t base = out.size();
    out.resize(base + cols);
    for (std::size_t c = 0; c < cols; ++c) {
      if (!parse_double(fields[c], out[base + c])) {
        row_ok = false;
        break;
      }
    }
    if (!row_ok) {
      out.resize(base);
      if (first_data_row && allow_header) {
        first_data_row = false;
        continue;
      }
      throw ParseError(file.string(), line_no, "malformed numeric field in '" + line + "'");
    }
    first_data_row = false;
  }
  return out;
}

void check_finite_block(const SampleBlock& b, const fs::path& file) {
  for (double v : b.horizontal)
    if (!std::isfinite(v)) throw ParseError(file.string(), 0, "non-finite horizontal sample");
  for (double v : b.vertical)
    if (!std::isfinite(v)) throw ParseError(file.string(), 0, "non-finite vertical sample");
}

// Bearing directories are named Bearing<condition>_<index>; the condition
// digit doubles as the operating-condition id.
std::pair<std::string, int> bearing_identity(const fs::path& dir) {
  std::string id = dir.filename().string();
  if (id.empty()) id = dir.parent_path().filename().string();
  int condition = 0;
  for (char ch : id) {
    if (ch >= '0' && ch <= '9') {
      condition = ch - '0';
      break;
    }
  }
  if (condition == 0)
    throw IoError("cannot infer condition id from bearing directory name '" + id + "'");
  return {id, condition};
}

long numeric_stem(const fs::path& p, std::string_view strip_prefix) {
  std::string stem = p.stem().string();
  std::string_view s = stem;
  if (!strip_prefix.empty() && s.size() > strip_prefix.size() &&
      s.compare(0, strip_prefix.size(), strip_prefix) == 0)
    s.remove_prefix(strip_prefix.size());
  long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return -1;
  return v;
}

std::vector<fs::path> ordered_csvs(const fs::path& dir, std::string_view strip_prefix) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<std::pair<long, fs::path>> found;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().extension() != ".csv") continue;
    long idx = numeric_stem(e.path(), strip_prefix);
    if (idx < 0)
      throw IoError("snapshot file name '" + e.path().filename().string() +
                    "' has no numeric index");
    found.emplace_back(idx, e.path());
  }
  if (found.empty()) throw IoError("no snapshot files in " + dir.string());
  std::sort(found.begin(), found.end());
  std::vector<fs::path> out;
  out.reserve(found.size());
  for (auto& [idx, p] : found) out.push_back(std::move(p));
  return out;
}

}  // namespace

VibrationRecord parse_xjtu(const fs::path& dir) { return parse_xjtu(dir, 32768); }

VibrationRecord parse_xjtu(const fs::path& dir, std::size_t rows_per_block) {
  const std::size_t kRows = rows_per_block;
  auto [id, condition] = bearing_identity(dir);
  VibrationRecord rec;
  rec.bearing_id = id;
  rec.condition_id = condition;
  rec.sample_rate_hz = 25600.0;
  rec.snapshot_period_s = 60.0;
  std::vector<fs::path> files = ordered_csvs(dir, "");
  rec.snapshots.reserve(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) {
    std::vector<double> vals = read_numeric_csv(files[i], 2, /*allow_header=*/true);
    std::size_t rows = vals.size() / 2;
    if (rows != kRows)
      throw ParseError(files[i].string(), 0,
                       "expected " + std::to_string(kRows) + " sample rows, got " +
                           std::to_string(rows));
    SampleBlock b;
    b.index = i;
    b.horizontal.resize(rows);
    b.vertical.resize(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      b.horizontal[r] = vals[2 * r];
      b.vertical[r] = vals[2 * r + 1];
    }
    check_finite_block(b, files[i]);
    rec.snapshots.push_back(std::move(b));
  }
  return rec;
}

VibrationRecord parse_pronostia(const fs::path& dir) {
  constexpr std::size_t kRows = 2560;
  auto [id, condition] = bearing_identity(dir);
  VibrationRecord rec;
  rec.bearing_id = id;
  rec.condition_id = condition;
  rec.sample_rate_hz = 25600.0;
  rec.snapshot_period_s = 10.0;
  std::vector<fs::path> files = ordered_csvs(dir, "acc_");
  rec.snapshots.reserve(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) {
    std::vector<double> vals = read_numeric_csv(files[i], 6, /*allow_header=*/false);
    std::size_t rows = vals.size() / 6;
    if (rows != kRows)
      throw ParseError(files[i].string(), 0,
                       "expected " + std::to_string(kRows) + " sample rows, got " +
                           std::to_string(rows));
    SampleBlock b;
    b.index = i;
    b.horizontal.resize(rows);
    b.vertical.resize(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      b.horizontal[r] = vals[6 * r + 4];
      b.vertical[r] = vals[6 * r + 5];
    }
    check_finite_block(b, files[i]);
    rec.snapshots.push_back(std::move(b));
  }
  return rec;
}

namespace {

// %.17g guarantees doubles survive the text round trip bit-exactly.
void append_g17(std::string& out, double v) {
  char buf[32];
  int n = std::snprintf(buf, sizeof(buf), "%.17g", v);
  out.append(buf, static_cast<std::size_t>(n));
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IoError("cannot create " + file.string());
  out << text;
  if (!out) throw IoError("write failed: " + file.string());
}

}  // namespace

void write_xjtu(const VibrationRecord& rec, const fs::path& dir) {
  fs::create_directories(dir);
  for (const SampleBlock& b : rec.snapshots) {
    std::string text = "Horizontal_vibration_signals,Vertical_vibration_signals\n";
    for (std::size_t r = 0; r < b.horizontal.size(); ++r) {
      append_g17(text, b.horizontal[r]);
      text += ',';
      append_g17(text, b.vertical[r]);
      text += '\n';
    }
    write_text(dir / (std::to_string(b.index + 1) + ".csv"), text);
  }
}

void write_pronostia(const VibrationRecord& rec, const fs::path& dir) {
  fs::create_directories(dir);
  for (const SampleBlock& b : rec.snapshots) {
    std::string text;
    double t0 = static_cast<double>(b.index) * rec.snapshot_period_s;
    for (std::size_t r = 0; r < b.horizontal.size(); ++r) {
      double t = t0 + static_cast<double>(r) / rec.sample_rate_hz;
      long whole = static_cast<long>(t);
      long micro = static_cast<long>(std::llround((t - static_cast<double>(whole)) * 1e6));
      if (micro >= 1000000) {
        micro -= 1000000;
        ++whole;
      }
      text += std::to_string(whole / 3600) + ',' + std::to_string((whole / 60) % 60) + ',' +
              std::to_string(whole % 60) + ',' + std::to_string(micro) + ',';
      append_g17(text, b.horizontal[r]);
      text += ',';
      append_g17(text, b.vertical[r]);
      text += '\n';
    }
    char name[32];
    std::snprintf(name, sizeof(name), "acc_%05zu.csv", b.index + 1);
    write_text(dir / name, text);
  }
}

SynthResult synthesize_degradation(const SynthConfig& config, std::uint64_t seed) {
  if (config.n_snapshots == 0 || config.block_len == 0)
    throw ConfigError("synthesize: n_snapshots and block_len must be positive");
  if (config.fault_onset >= config.n_snapshots)
    throw ConfigError("synthesize: fault_onset " + std::to_string(config.fault_onset) +
                      " must precede n_snapshots " + std::to_string(config.n_snapshots));
  if (config.condition_id < 1 || config.condition_id > 3)
    throw ConfigError("synthesize: condition_id must be 1..3");

  VibrationRecord rec;
  rec.bearing_id = config.bearing_id;
  rec.condition_id = config.condition_id;
  rec.sample_rate_hz = config.sample_rate_hz;
  rec.snapshot_period_s = config.snapshot_period_s;

  Rng rng(seed);
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  // Carrier shifts with condition so OC classes stay separable; 32 divides
  // block_len in every preset, giving whole carrier periods per block.
  double carrier_hz = config.sample_rate_hz / 32.0 * static_cast<double>(config.condition_id);
  double resonance_hz = config.sample_rate_hz / 8.0;
  double phase_h = rng.uniform(0.0, kTwoPi);
  double phase_v = rng.uniform(0.0, kTwoPi);
  double dt = 1.0 / config.sample_rate_hz;
  double tau = static_cast<double>(config.block_len) / 16.0;  // samples
  constexpr std::size_t kBursts = 12;

  rec.snapshots.reserve(config.n_snapshots);
  for (std::size_t k = 0; k < config.n_snapshots; ++k) {
    SampleBlock b;
    b.index = k;
    b.horizontal.resize(config.block_len);
    b.vertical.resize(config.block_len);
    for (std::size_t ch = 0; ch < 2; ++ch) {
      std::vector<double>& x = ch == 0 ? b.horizontal : b.vertical;
      double phase = ch == 0 ? phase_h : phase_v;
      for (std::size_t i = 0; i < config.block_len; ++i) {
        double t = static_cast<double>(i) * dt;
        x[i] = std::sin(kTwoPi * carrier_hz * t + phase) + config.noise_std * rng.normal();
      }
      if (k >= config.fault_onset) {
        double amp = config.growth_rate *
                     static_cast<double>(k - config.fault_onset + 1);
        for (std::size_t j = 0; j < kBursts; ++j) {
          std::size_t pos = rng.uniform_int(config.block_len);
          std::size_t reach = std::min(config.block_len, pos + static_cast<std::size_t>(6.0 * tau));
          for (std::size_t i = pos; i < reach; ++i) {
            double n = static_cast<double>(i - pos);
            x[i] += amp * std::exp(-n / tau) *
                    std::sin(kTwoPi * resonance_hz * n * dt);
          }
        }
      }
    }
    rec.snapshots.push_back(std::move(b));
  }
  return {std::move(rec), config.fault_onset};
}

SplitPlan make_split(const std::vector<VibrationRecord>& records, SplitRule rule,
                     const std::string& held_out) {
  if (records.empty()) throw ConfigError("make_split: no records");
  SplitPlan plan;
  plan.rule = rule;
  if (rule == SplitRule::OC_INDEPENDENT) {
    if (held_out.empty())
      throw ConfigError("make_split: OC_INDEPENDENT needs a held_out bearing id");
    bool found = false;
    for (const auto& r : records) {
      if (r.bearing_id == held_out) {
        plan.test_bearings.push_back(r.bearing_id);
        found = true;
      } else {
        plan.train_bearings.push_back(r.bearing_id);
      }
    }
    if (!found) throw ConfigError("make_split: held_out bearing '" + held_out + "' not found");
    if (plan.train_bearings.empty())
      throw ConfigError("make_split: no training bearings left after holding out '" +
                        held_out + "'");
  } else {
    if (!held_out.empty())
      throw ConfigError("make_split: OC_DEPENDENT does not take a held_out bearing");
    std::map<int, std::vector<std::string>> by_condition;
    for (const auto& r : records) by_condition[r.condition_id].push_back(r.bearing_id);
    for (auto& [cond, ids] : by_condition) {
      std::sort(ids.begin(), ids.end());
      if (ids.size() < 2)
        throw ConfigError("make_split: condition " + std::to_string(cond) + " has only " +
                          std::to_string(ids.size()) + " bearing(s); 2 are required to train");
      plan.train_bearings.push_back(ids[0]);
      plan.train_bearings.push_back(ids[1]);
      for (std::size_t i = 2; i < ids.size(); ++i) plan.test_bearings.push_back(ids[i]);
    }
    if (plan.test_bearings.empty())
      throw ConfigError("make_split: OC_DEPENDENT leaves no test bearings");
  }
  std::sort(plan.train_bearings.begin(), plan.train_bearings.end());
  std::sort(plan.test_bearings.begin(), plan.test_bearings.end());
  return plan;
}

SplitRule parse_split_rule(const std::string& name) {
  if (name == "oc_independent" || name == "OC_INDEPENDENT") return SplitRule::OC_INDEPENDENT;
  if (name == "oc_dependent" || name == "OC_DEPENDENT") return SplitRule::OC_DEPENDENT;
  throw ConfigError("unknown split rule '" + name +
                    "' (expected oc_independent or oc_dependent)");
}

}  // namespace rulkit::data
