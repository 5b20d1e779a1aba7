#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <vector>

#include "rulkit/data.hpp"
#include "rulkit/errors.hpp"
#include "rulkit/rng.hpp"

using namespace rulkit;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::uint64_t tick = static_cast<std::uint64_t>(
        std::chrono::high_resolution_clock::now().time_since_epoch().count());
    path = fs::temp_directory_path() /
           ("rulkit_data_test_" + std::to_string(Rng(tick).next_u64() % 1000000000));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

data::VibrationRecord small_record(std::uint64_t seed, std::size_t snapshots,
                                   std::size_t block, int condition) {
  data::SynthConfig cfg;
  cfg.n_snapshots = snapshots;
  cfg.block_len = block;
  cfg.fault_onset = snapshots / 2;
  cfg.condition_id = condition;
  cfg.bearing_id = "Bearing" + std::to_string(condition) + "_1";
  return data::synthesize_degradation(cfg, seed).record;
}

double rms(const std::vector<double>& x) {
  double s = 0;
  for (double v : x) s += v * v;
  return std::sqrt(s / x.size());
}

}  // namespace

TEST_CASE("xjtu round trip is bit exact") {
  TempDir tmp;
  data::VibrationRecord rec = small_record(11, 4, 64, 2);
  fs::path dir = tmp.path / "Bearing2_1";
  data::write_xjtu(rec, dir);
  data::VibrationRecord back = data::parse_xjtu(dir, 64);
  REQUIRE(back.snapshots.size() == rec.snapshots.size());
  CHECK(back.bearing_id == "Bearing2_1");
  CHECK(back.condition_id == 2);
  for (std::size_t i = 0; i < rec.snapshots.size(); ++i) {
    CHECK(back.snapshots[i].horizontal == rec.snapshots[i].horizontal);
    CHECK(back.snapshots[i].vertical == rec.snapshots[i].vertical);
    CHECK(back.snapshots[i].index == i);
  }
}

TEST_CASE("xjtu parser skips the header row") {
  TempDir tmp;
  fs::path dir = tmp.path / "Bearing1_9";
  fs::create_directories(dir);
  std::ofstream(dir / "1.csv")
      << "Horizontal_vibration_signals,Vertical_vibration_signals\n"
      << "0.5,1.5\n-0.25,2.0\n";
  data::VibrationRecord rec = data::parse_xjtu(dir, 2);
  REQUIRE(rec.snapshots.size() == 1);
  CHECK(rec.snapshots[0].horizontal == std::vector<double>{0.5, -0.25});
  CHECK(rec.snapshots[0].vertical == std::vector<double>{1.5, 2.0});
}

TEST_CASE("xjtu parser rejects wrong row counts, bad fields, empty dirs") {
  TempDir tmp;
  fs::path dir = tmp.path / "Bearing1_1";
  fs::create_directories(dir);
  std::ofstream(dir / "1.csv") << "0.5,1.5\n-0.25,2.0\n";
  CHECK_THROWS_AS(data::parse_xjtu(dir, 3), ParseError);

  std::ofstream(dir / "2.csv") << "0.5,oops\n1.0,2.0\n";
  CHECK_THROWS_AS(data::parse_xjtu(dir, 2), ParseError);
  fs::remove(dir / "2.csv");

  std::ofstream(dir / "3.csv") << "0.5\n";
  CHECK_THROWS_AS(data::parse_xjtu(dir, 2), ParseError);
  fs::remove(dir / "3.csv");

  fs::path empty = tmp.path / "Bearing3_2";
  fs::create_directories(empty);
  CHECK_THROWS_WITH_AS(data::parse_xjtu(empty, 2),
                       doctest::Contains("no snapshot files"), IoError);
}

TEST_CASE("parse errors carry file and line") {
  TempDir tmp;
  fs::path dir = tmp.path / "Bearing1_4";
  fs::create_directories(dir);
  std::ofstream(dir / "1.csv") << "0.5,1.5\nnope,2.0\n";
  try {
    data::parse_xjtu(dir, 2);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    std::string msg = e.what();
    CHECK(msg.find("1.csv:2") != std::string::npos);
  }
}

TEST_CASE("pronostia round trip preserves both acceleration columns") {
  TempDir tmp;
  data::SynthConfig cfg;
  cfg.n_snapshots = 3;
  cfg.block_len = 2560;
  cfg.fault_onset = 1;
  cfg.bearing_id = "Bearing1_3";
  cfg.snapshot_period_s = 10.0;
  data::VibrationRecord rec = data::synthesize_degradation(cfg, 5).record;
  fs::path dir = tmp.path / "Bearing1_3";
  data::write_pronostia(rec, dir);
  data::VibrationRecord back = data::parse_pronostia(dir);
  REQUIRE(back.snapshots.size() == 3);
  CHECK(back.snapshot_period_s == 10.0);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.snapshots[i].horizontal == rec.snapshots[i].horizontal);
    CHECK(back.snapshots[i].vertical == rec.snapshots[i].vertical);
  }
}

TEST_CASE("pronostia parser rejects a 5-column file") {
  TempDir tmp;
  fs::path dir = tmp.path / "Bearing2_2";
  fs::create_directories(dir);
  std::ofstream(dir / "acc_00001.csv") << "0,0,0,0,1.5\n";
  CHECK_THROWS_AS(data::parse_pronostia(dir), ParseError);
}

TEST_CASE("synthesis is deterministic per seed") {
  data::SynthConfig cfg;
  cfg.n_snapshots = 6;
  cfg.block_len = 128;
  cfg.fault_onset = 3;
  data::SynthResult a = data::synthesize_degradation(cfg, 99);
  data::SynthResult b = data::synthesize_degradation(cfg, 99);
  data::SynthResult c = data::synthesize_degradation(cfg, 100);
  CHECK(a.true_onset == 3);
  bool same = true, diff = false;
  for (std::size_t i = 0; i < 6; ++i) {
    same = same && a.record.snapshots[i].horizontal == b.record.snapshots[i].horizontal &&
           a.record.snapshots[i].vertical == b.record.snapshots[i].vertical;
    diff = diff || a.record.snapshots[i].horizontal != c.record.snapshots[i].horizontal;
  }
  CHECK(same);
  CHECK(diff);
}

TEST_CASE("synthetic degradation lifts post-onset RMS above the healthy band") {
  data::SynthConfig cfg;  // defaults: 100 snapshots, onset 50
  data::VibrationRecord rec = data::synthesize_degradation(cfg, 7).record;
  std::vector<double> series(rec.snapshots.size());
  for (std::size_t i = 0; i < series.size(); ++i) series[i] = rms(rec.snapshots[i].horizontal);
  double mu = 0, sd = 0;
  for (std::size_t i = 0; i < 50; ++i) mu += series[i];
  mu /= 50;
  for (std::size_t i = 0; i < 50; ++i) sd += (series[i] - mu) * (series[i] - mu);
  sd = std::sqrt(sd / 50);
  double post_mean = 0;
  for (std::size_t i = 50; i < series.size(); ++i) {
    CHECK(series[i] > mu);  // strictly above the healthy mean
    post_mean += series[i];
  }
  post_mean /= static_cast<double>(series.size() - 50);
  CHECK(post_mean > mu + 3.0 * sd);
}

TEST_CASE("no noise and no growth give identical snapshots") {
  data::SynthConfig cfg;
  cfg.n_snapshots = 5;
  cfg.block_len = 96;
  cfg.noise_std = 0.0;
  cfg.growth_rate = 0.0;
  cfg.fault_onset = 2;
  data::VibrationRecord rec = data::synthesize_degradation(cfg, 1).record;
  for (std::size_t i = 1; i < 5; ++i) {
    CHECK(rec.snapshots[i].horizontal == rec.snapshots[0].horizontal);
    CHECK(rec.snapshots[i].vertical == rec.snapshots[0].vertical);
  }
}

TEST_CASE("synthesis validates the onset") {
  data::SynthConfig cfg;
  cfg.n_snapshots = 10;
  cfg.fault_onset = 10;
  CHECK_THROWS_AS(data::synthesize_degradation(cfg, 1), ConfigError);
}

namespace {

std::vector<data::VibrationRecord> xjtu_like_fleet() {
  // 15 bearings: Bearing<c>_<i> for c in 1..3, i in 1..5, no waveform needed.
  std::vector<data::VibrationRecord> recs;
  for (int c = 1; c <= 3; ++c)
    for (int i = 1; i <= 5; ++i) {
      data::VibrationRecord r;
      r.bearing_id = "Bearing" + std::to_string(c) + "_" + std::to_string(i);
      r.condition_id = c;
      recs.push_back(std::move(r));
    }
  return recs;
}

}  // namespace

TEST_CASE("oc-independent split holds out exactly one bearing") {
  auto recs = xjtu_like_fleet();
  data::SplitPlan plan = data::make_split(recs, data::SplitRule::OC_INDEPENDENT, "Bearing1_1");
  CHECK(plan.train_bearings.size() == 14);
  REQUIRE(plan.test_bearings.size() == 1);
  CHECK(plan.test_bearings[0] == "Bearing1_1");
  CHECK_THROWS_AS(data::make_split(recs, data::SplitRule::OC_INDEPENDENT, "Bearing9_9"),
                  ConfigError);
  CHECK_THROWS_AS(data::make_split(recs, data::SplitRule::OC_INDEPENDENT, ""), ConfigError);
}

TEST_CASE("oc-dependent split trains on the first two bearings per condition") {
  auto recs = xjtu_like_fleet();
  data::SplitPlan plan = data::make_split(recs, data::SplitRule::OC_DEPENDENT, "");
  CHECK(plan.train_bearings.size() == 6);
  CHECK(plan.test_bearings.size() == 9);
  for (int c = 1; c <= 3; ++c) {
    std::string p = "Bearing" + std::to_string(c) + "_";
    CHECK(std::count(plan.train_bearings.begin(), plan.train_bearings.end(), p + "1") == 1);
    CHECK(std::count(plan.train_bearings.begin(), plan.train_bearings.end(), p + "2") == 1);
  }
}

TEST_CASE("oc-dependent split needs two bearings per condition") {
  std::vector<data::VibrationRecord> recs;
  data::VibrationRecord r;
  r.bearing_id = "Bearing1_1";
  r.condition_id = 1;
  recs.push_back(r);
  CHECK_THROWS_AS(data::make_split(recs, data::SplitRule::OC_DEPENDENT, ""), ConfigError);
}

TEST_CASE("splits partition the fleet with no overlap") {
  auto recs = xjtu_like_fleet();
  for (const auto& rec : recs) {
    data::SplitPlan plan =
        data::make_split(recs, data::SplitRule::OC_INDEPENDENT, rec.bearing_id);
    std::set<std::string> seen;
    for (const auto& id : plan.train_bearings) CHECK(seen.insert(id).second);
    for (const auto& id : plan.test_bearings) CHECK(seen.insert(id).second);
    CHECK(seen.size() == recs.size());
  }
  data::SplitPlan dep = data::make_split(recs, data::SplitRule::OC_DEPENDENT, "");
  std::set<std::string> seen;
  for (const auto& id : dep.train_bearings) CHECK(seen.insert(id).second);
  for (const auto& id : dep.test_bearings) CHECK(seen.insert(id).second);
  CHECK(seen.size() == recs.size());
}

TEST_CASE("split rule names parse") {
  CHECK(data::parse_split_rule("oc_independent") == data::SplitRule::OC_INDEPENDENT);
  CHECK(data::parse_split_rule("OC_DEPENDENT") == data::SplitRule::OC_DEPENDENT);
  CHECK_THROWS_AS(data::parse_split_rule("random"), ConfigError);
}

TEST_CASE("lifetime is the last snapshot ordinal") {
  data::VibrationRecord rec = small_record(3, 7, 64, 1);
  CHECK(rec.lifetime() == 6);
  CHECK(data::VibrationRecord{}.lifetime() == 0);
}
