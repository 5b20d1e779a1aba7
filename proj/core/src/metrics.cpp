#include "rulkit/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "rulkit/errors.hpp"

namespace rulkit::metrics {

std::vector<BearingMetrics> compute_metrics(const std::vector<PredictionRow>& rows) {
  if (rows.empty()) throw NumericError("metrics: no prediction rows");
  std::map<std::string, std::vector<const PredictionRow*>> grouped;
  for (const auto& r : rows) grouped[r.bearing_id].push_back(&r);

  std::vector<BearingMetrics> out;
  out.reserve(grouped.size());
  for (auto& [id, group] : grouped) {
    BearingMetrics m;
    m.bearing_id = id;
    double sq = 0.0, ab = 0.0;
    std::size_t correct = 0;
    for (const PredictionRow* r : group) {
      if (r->has_rul) {
        double d = r->true_rul - r->pred_rul;
        sq += d * d;
        ab += std::abs(d);
        ++m.rul_points;
      }
      if (r->pred_oc == r->true_oc) ++correct;
      ++m.oc_points;
    }
    if (m.rul_points < 2)
      throw NumericError("metrics: bearing '" + id + "' has " +
                         std::to_string(m.rul_points) +
                         " RUL-labeled snapshots; at least 2 are required");
    double denom = static_cast<double>(m.rul_points - 1);  // t_N - FPT
    m.rmse = std::sqrt(sq / denom);
    m.mae = ab / denom;
    m.acc = static_cast<double>(correct) / static_cast<double>(m.oc_points);
    out.push_back(std::move(m));
  }
  return out;
}

namespace {

void append_g17(std::string& out, double v) {
  char buf[32];
  int n = std::snprintf(buf, sizeof(buf), "%.17g", v);
  out.append(buf, static_cast<std::size_t>(n));
}

double parse_field(std::string_view s, const std::string& file, long line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError(file, line, "malformed numeric field '" + std::string(s) + "'");
  return v;
}

}  // namespace

void write_predictions_csv(const std::filesystem::path& path,
                           const std::vector<PredictionRow>& rows) {
  std::string text = "bearing_id,snapshot,true_rul,pred_rul,true_oc,pred_oc\n";
  for (const auto& r : rows) {
    text += r.bearing_id;
    text += ',';
    text += std::to_string(r.snapshot);
    text += ',';
    if (r.has_rul) append_g17(text, r.true_rul);
    text += ',';
    append_g17(text, r.pred_rul);
    text += ',';
    text += std::to_string(r.true_oc);
    text += ',';
    text += std::to_string(r.pred_oc);
    text += '\n';
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<PredictionRow> read_predictions_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<PredictionRow> rows;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;  // header
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string_view> fields;
    std::string_view sv = line;
    std::size_t start = 0;
    while (true) {
      std::size_t pos = sv.find(',', start);
      if (pos == std::string_view::npos) {
        fields.push_back(sv.substr(start));
        break;
      }
      fields.push_back(sv.substr(start, pos - start));
      start = pos + 1;
    }
    if (fields.size() != 6)
      throw ParseError(path.string(), line_no, "expected 6 columns");
    PredictionRow r;
    r.bearing_id = std::string(fields[0]);
    r.snapshot = static_cast<std::size_t>(parse_field(fields[1], path.string(), line_no));
    if (!fields[2].empty()) {
      r.has_rul = true;
      r.true_rul = parse_field(fields[2], path.string(), line_no);
    }
    r.pred_rul = parse_field(fields[3], path.string(), line_no);
    r.true_oc = static_cast<int>(parse_field(fields[4], path.string(), line_no));
    r.pred_oc = static_cast<int>(parse_field(fields[5], path.string(), line_no));
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_metrics_csv(const std::filesystem::path& path,
                       const std::vector<BearingMetrics>& metrics) {
  std::string text = "bearing_id,rmse,mae,acc\n";
  for (const auto& m : metrics) {
    text += m.bearing_id;
    text += ',';
    append_g17(text, m.rmse);
    text += ',';
    append_g17(text, m.mae);
    text += ',';
    append_g17(text, m.acc);
    text += '\n';
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace rulkit::metrics
