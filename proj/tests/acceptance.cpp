// Release gate. Each numbered check prints one PASS/FAIL/SKIP line; the
// process exits nonzero if any check fails. Check 8 needs the PRONOSTIA
// dataset (RULKIT_DATA_ROOT) and is skipped when the data is absent.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "rulkit/data.hpp"
#include "rulkit/denoiser.hpp"
#include "rulkit/errors.hpp"
#include "rulkit/features.hpp"
#include "rulkit/fft.hpp"
#include "rulkit/labeling.hpp"
#include "rulkit/model.hpp"
#include "rulkit/pipeline.hpp"
#include "rulkit/rng.hpp"

#include "support/layer_gradients.hpp"

using namespace rulkit;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kGradTol = 1e-4;         // max relative error, central differences
constexpr double kFeatureTol = 1e-9;      // feature vs brute-force reference
constexpr double kFftTol = 1e-9;          // FFT vs naive DFT
constexpr double kParsevalTol = 1e-6;     // energy identity
constexpr int kFptBand = 3;               // |detected - seeded onset| snapshots
constexpr int kFptMinHits = 18;           // out of 20 seeded records
constexpr double kDenoiseRatio = 0.5;     // held-out MSE vs noisy baseline
constexpr double kRulLossTarget = 0.01;   // training MSLE on the overfit set
constexpr std::size_t kOverfitEpochs = 500;
constexpr double kWindowSlack = 1.05;     // 20-epoch window means may rise 5%
constexpr double kSoftmaxTol = 1e-6;      // OC row sums
constexpr double kFptSecondsBand = 60.0;  // vs published first-prediction times
constexpr double kGradBudgetS = 300.0;    // wall-clock limits
constexpr double kDenoiseBudgetS = 300.0;

struct Outcome {
  bool pass = false;
  bool skip = false;
  std::string detail;
};

double now_s() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. gradient suite

Outcome check_gradients() {
  double t0 = now_s();
  auto results = gradsuite::run_all(5);
  double elapsed = now_s() - t0;
  double worst = 0;
  std::string worst_name = "-";
  std::size_t checked = 0;
  for (const auto& r : results) {
    checked += r.checked;
    if (r.max_rel_err > worst) {
      worst = r.max_rel_err;
      worst_name = r.name;
    }
  }
  Outcome o;
  o.pass = worst < kGradTol && elapsed < kGradBudgetS;
  o.detail = std::to_string(results.size()) + " layer cases, " + std::to_string(checked) +
             " partials, worst " + fmt(worst) + " (" + worst_name + ") in " +
             fmt(elapsed) + "s; limit " + fmt(kGradTol);
  return o;
}

// ---------------------------------------------------------------------------
// 2. feature + spectrum oracles
//
// References recompute everything from the definitions with plain loops.

std::array<double, 14> reference_features(const std::vector<double>& x) {
  std::size_t n = x.size();
  double mean = 0;
  for (double v : x) mean += v;
  mean /= n;
  double m2 = 0, m3 = 0, m4 = 0;
  for (double v : x) {
    double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  double sq = 0, abs_mean = 0, sqrt_abs = 0, peak = 0, line = 0;
  double lo = x[0], hi = x[0];
  for (std::size_t i = 0; i < n; ++i) {
    sq += x[i] * x[i];
    abs_mean += std::abs(x[i]);
    sqrt_abs += std::sqrt(std::abs(x[i]));
    peak = std::max(peak, std::abs(x[i]));
    lo = std::min(lo, x[i]);
    hi = std::max(hi, x[i]);
    if (i + 1 < n) line += std::abs(x[i + 1] - x[i]);
  }
  double rms = std::sqrt(sq / n);
  abs_mean /= n;
  sqrt_abs /= n;

  std::vector<std::complex<double>> spec(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc = 0;
    for (std::size_t t = 0; t < n; ++t)
      acc += x[t] * std::polar(1.0, -2.0 * std::numbers::pi *
                                        static_cast<double>(k * t % n) / n);
    spec[k] = acc;
  }
  double mag_lo = std::abs(spec[0]), mag_hi = std::abs(spec[0]), energy = 0;
  for (const auto& c : spec) {
    double m = std::abs(c);
    mag_lo = std::min(mag_lo, m);
    mag_hi = std::max(mag_hi, m);
    energy += m * m;
  }

  return {rms,
          m2,
          peak,
          peak / rms,
          m4 / (m2 * m2),
          peak / (sqrt_abs * sqrt_abs),
          rms / abs_mean,
          line,
          hi - lo,
          m3 / std::pow(m2, 1.5),
          peak / abs_mean,
          mag_hi - mag_lo,
          energy,
          energy / n};
}

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

Outcome check_features() {
  Rng rng(2024);
  double worst_feat = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = 24 + rng.uniform_int(80);
    std::vector<double> x(n);
    for (double& v : x) v = rng.uniform(-4.0, 4.0);
    auto want = reference_features(x);
    feat::TimeFeatures tf = feat::time_features(x);
    feat::FreqFeatures ff = feat::freq_features(x);
    auto ta = tf.as_array();
    auto fa = ff.as_array();
    std::array<double, 14> got{};
    std::copy(ta.begin(), ta.end(), got.begin());
    std::copy(fa.begin(), fa.end(), got.begin() + 11);
    for (std::size_t k = 0; k < 14; ++k)
      worst_feat = std::max(worst_feat, rel_err(got[k], want[k]));
  }

  double worst_fft = 0;
  for (std::size_t n : {2u, 3u, 5u, 8u, 12u, 67u, 128u, 257u, 500u, 512u}) {
    std::vector<std::complex<double>> x(n);
    for (auto& c : x) c = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    std::vector<std::complex<double>> got = fft(x);
    double scale = 0;
    std::vector<std::complex<double>> want(n);
    for (std::size_t k = 0; k < n; ++k) {
      std::complex<double> acc = 0;
      for (std::size_t t = 0; t < n; ++t)
        acc += x[t] * std::polar(1.0, -2.0 * std::numbers::pi *
                                          static_cast<double>(k) * static_cast<double>(t) / n);
      want[k] = acc;
      scale = std::max(scale, std::abs(acc));
    }
    for (std::size_t k = 0; k < n; ++k)
      worst_fft = std::max(worst_fft, std::abs(got[k] - want[k]) / std::max(1.0, scale));
  }

  double worst_parseval = 0;
  for (std::size_t n : {8u, 100u, 441u, 512u}) {
    std::vector<std::complex<double>> x(n);
    double time_energy = 0;
    for (auto& c : x) {
      c = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
      time_energy += std::norm(c);
    }
    std::vector<std::complex<double>> spec = fft(x);
    double freq_energy = 0;
    for (const auto& c : spec) freq_energy += std::norm(c);
    worst_parseval =
        std::max(worst_parseval, std::abs(freq_energy / n - time_energy) /
                                     std::max(1.0, time_energy));
  }

  Outcome o;
  o.pass = worst_feat < kFeatureTol && worst_fft < kFftTol && worst_parseval < kParsevalTol;
  o.detail = "14 features worst " + fmt(worst_feat) + " (100 vectors); fft worst " +
             fmt(worst_fft) + "; parseval worst " + fmt(worst_parseval);
  return o;
}

// ---------------------------------------------------------------------------
// 3. first-prediction-time detection

Outcome check_fpt() {
  int hits = 0;
  long long worst_err = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    data::SynthConfig sc;  // onset 50 of 100 snapshots
    data::SynthResult sr = data::synthesize_degradation(sc, 4000 + s);
    std::vector<double> ind = label::indicator_rms_horizontal(sr.record);
    label::FptResult fpt = label::detect_fpt(ind);
    long long err = static_cast<long long>(fpt.fpt_index) -
                    static_cast<long long>(sr.true_onset);
    worst_err = std::max(worst_err, std::llabs(err));
    if (std::llabs(err) <= kFptBand) ++hits;
  }

  bool noise_raises = false;
  std::string noise_msg;
  data::SynthConfig flat;
  flat.growth_rate = 0.0;  // bursts vanish: noise-only record
  data::SynthResult sr = data::synthesize_degradation(flat, 9999);
  try {
    label::detect_fpt(label::indicator_rms_horizontal(sr.record));
  } catch (const NumericError& e) {
    noise_msg = e.what();
    noise_raises = noise_msg.find("no degradation detected") != std::string::npos;
  }

  Outcome o;
  o.pass = hits >= kFptMinHits && noise_raises;
  o.detail = std::to_string(hits) + "/20 within " + std::to_string(kFptBand) +
             " snapshots of the seeded onset (worst " + std::to_string(worst_err) +
             "); noise-only record " +
             (noise_raises ? "raises 'no degradation detected'" : "DID NOT raise");
  return o;
}

// ---------------------------------------------------------------------------
// 4. label construction

Outcome check_labels() {
  label::RulLabel lin = label::label_hi_fpt(3, 17);
  bool ends = lin.at(3) == 1.0 && lin.at(17) == 0.0;
  double dd = 0;
  for (std::size_t t = 5; t <= 17; ++t)
    dd = std::max(dd, std::abs((lin.at(t) - lin.at(t - 1)) - (lin.at(t - 1) - lin.at(t - 2))));
  bool linear = dd < 1e-15;
  bool mid = label::label_hi_fpt(0, 10).at(5) == 0.5;

  std::vector<double> profile = label::neighbor_distance_profile({0.0, 1.0, 3.0}, 3, 1);
  bool pca_raw = profile.size() == 3 && std::abs(profile[0] - 1.0) < 1e-12 &&
                 std::abs(profile[1] - 1.5) < 1e-12 && std::abs(profile[2] - 2.0) < 1e-12;

  label::RulLabel pca = label::label_hi_pca({0.0, 1.0, 3.0}, 3, 1);
  bool pca_norm = pca.values.size() == 3 && std::abs(pca.values[0]) < 1e-12 &&
                  std::abs(pca.values[1] - 0.5) < 1e-12 &&
                  std::abs(pca.values[2] - 1.0) < 1e-12;

  Outcome o;
  o.pass = ends && linear && mid && pca_raw && pca_norm;
  o.detail = std::string("hi-fpt endpoints ") + (ends ? "exact" : "WRONG") +
             ", max 2nd diff " + fmt(dd) + "; neighbor profile {1,1.5,2} " +
             (pca_raw ? "exact" : "WRONG") + "; normalized {0,.5,1} " +
             (pca_norm ? "exact" : "WRONG");
  return o;
}

// ---------------------------------------------------------------------------
// 5. denoiser efficacy at 5 dB SNR

Outcome check_denoiser() {
  double t0 = now_s();
  double sigma = std::sqrt(0.5 / std::pow(10.0, 0.5));  // amp-1 tone at 5 dB
  std::size_t len = 512;
  std::vector<double> clean(len);
  for (std::size_t i = 0; i < len; ++i)
    clean[i] = std::sin(2.0 * std::numbers::pi * 3.0 * static_cast<double>(i) /
                        static_cast<double>(len));
  Rng rng(808);
  auto make_blocks = [&](std::size_t count) {
    std::vector<data::SampleBlock> blocks(count);
    for (std::size_t b = 0; b < count; ++b) {
      blocks[b].index = b;
      blocks[b].horizontal.resize(len);
      blocks[b].vertical.resize(len);
      for (std::size_t i = 0; i < len; ++i) {
        blocks[b].horizontal[i] = clean[i] + sigma * rng.normal();
        blocks[b].vertical[i] = clean[i] + sigma * rng.normal();
      }
    }
    return blocks;
  };
  auto train_blocks = make_blocks(32);
  auto held_out = make_blocks(8);

  dn::AutoencoderConfig cfg;  // desk sizing: window = block/4, 128->32 bottleneck
  cfg.window_len = 128;
  cfg.enc1_units = 128;
  cfg.latent_units = 32;
  cfg.dropout_rate = 0.05;
  dn::AeTrainParams params;
  params.epochs = 250;
  params.batch = 32;
  params.lr = 2e-3;
  params.seed = 6;
  dn::Autoencoder ae = dn::train_autoencoder(train_blocks, cfg, params);

  auto mse_to_clean = [&](const std::vector<double>& v) {
    double s = 0;
    for (std::size_t i = 0; i < len; ++i) s += (v[i] - clean[i]) * (v[i] - clean[i]);
    return s / static_cast<double>(len);
  };
  double noisy = 0, denoised = 0;
  for (const auto& block : held_out) {
    dn::DenoisedBlock out = ae.denoise(block);
    noisy += mse_to_clean(block.horizontal) + mse_to_clean(block.vertical);
    denoised += mse_to_clean(out.horizontal) + mse_to_clean(out.vertical);
  }
  double elapsed = now_s() - t0;

  Outcome o;
  o.pass = denoised <= kDenoiseRatio * noisy && elapsed < kDenoiseBudgetS;
  o.detail = "held-out MSE " + fmt(denoised / 16.0) + " vs noisy " + fmt(noisy / 16.0) +
             " (ratio " + fmt(denoised / noisy) + ", limit " + fmt(kDenoiseRatio) +
             ") in " + fmt(elapsed) + "s";
  return o;
}

// ---------------------------------------------------------------------------
// 6. overfit a small labeled set

Outcome check_overfit() {
  double t0 = now_s();
  feat::CwtConfig cwt;
  double u_max = std::sqrt(2.0 * std::log(1e12)) / cwt.omega0;
  cwt.max_scale = std::min(cwt.max_scale, std::floor((1024.0 / 2.0 - 1.0) / u_max));

  std::vector<feat::FeatureSet> sets;
  std::vector<net::LabeledItem> items;
  std::size_t takes[3] = {3, 3, 2};
  for (int cond = 1; cond <= 3; ++cond) {
    data::SynthConfig sc;
    sc.n_snapshots = 12;
    sc.block_len = 1024;
    sc.fault_onset = 4;
    sc.growth_rate = 1.0;
    sc.condition_id = cond;
    sc.bearing_id = "Synth" + std::to_string(cond) + "_1";
    data::SynthResult sr = data::synthesize_degradation(sc, 600 + cond);
    for (std::size_t k = 0; k < takes[cond - 1]; ++k) {
      const data::SampleBlock& blk = sr.record.snapshots[4 + 2 * k];
      feat::FeatureSet fs_i = feat::extract_all(blk, cwt);
      fs_i.bearing_id = sc.bearing_id;
      fs_i.condition_id = cond;
      sets.push_back(std::move(fs_i));
    }
  }
  for (std::size_t i = 0, k = 0; i < 3; ++i)
    for (std::size_t j = 0; j < takes[i]; ++j, ++k) {
      net::LabeledItem item;
      item.features = &sets[k];
      item.oc_class = static_cast<int>(i);
      item.has_rul = true;
      item.rul = 1.0 - static_cast<double>(j) / 3.0;
      items.push_back(item);
    }

  net::MultiBranchNet model(net::ModelConfig::desk(1024), 99);
  net::TrainOptions opt;
  opt.epochs = kOverfitEpochs;
  opt.batch = 8;
  opt.lr = 1e-3;
  opt.lambda = 0.6;
  opt.seed = 99;
  net::TrainHistory hist = net::train(model, items, opt);

  std::size_t success = hist.epochs.size();
  for (std::size_t e = 0; e < hist.epochs.size(); ++e)
    if (hist.epochs[e].loss_rul < kRulLossTarget && hist.epochs[e].oc_accuracy == 1.0) {
      success = e;
      break;
    }

  // disjoint 20-epoch window means of the total loss, up to the success epoch
  bool monotone = true;
  double prev = -1;
  double worst_rise = 0;
  std::size_t upto = std::min(hist.epochs.size(), success + 20);
  for (std::size_t w = 0; w + 20 <= upto; w += 20) {
    double mean = 0;
    for (std::size_t e = w; e < w + 20; ++e) mean += hist.epochs[e].loss_total;
    mean /= 20.0;
    if (prev >= 0) {
      worst_rise = std::max(worst_rise, mean / prev);
      if (mean > prev * kWindowSlack) monotone = false;
    }
    prev = mean;
  }
  double elapsed = now_s() - t0;

  Outcome o;
  o.pass = success < hist.epochs.size() && monotone;
  if (success < hist.epochs.size())
    o.detail = "rul loss < " + fmt(kRulLossTarget) + " and oc accuracy 1.0 at epoch " +
               std::to_string(success);
  else
    o.detail = "never converged in " + std::to_string(hist.epochs.size()) +
               " epochs (final rul loss " + fmt(hist.epochs.back().loss_rul) + ")";
  o.detail += "; 20-epoch window means " + std::string(monotone ? "non-rising" : "RISING") +
              " (worst ratio " + fmt(worst_rise) + ", slack " + fmt(kWindowSlack) + ") in " +
              fmt(elapsed) + "s";
  return o;
}

// ---------------------------------------------------------------------------
// 7. shape contracts

Outcome check_shapes() {
  nn::Mode eval;
  net::MultiBranchNet paper(net::ModelConfig::paper(1024), 321);
  nn::Shape feat_shape = paper.branch_feat(nn::Tensor::zeros({1, 2, 14}), eval).shape();
  bool feat_ok = feat_shape == nn::Shape{1, 2, 56};
  nn::Shape scal_shape =
      paper.branch_scal(nn::Tensor::full({1, 2, 64, 64}, 0.3), eval).shape();
  bool scal_ok = scal_shape == nn::Shape{1, 1, 512};

  net::ModelConfig desk = net::ModelConfig::desk(1024);
  net::MultiBranchNet small(desk, 11);
  std::vector<feat::FeatureSet> sets(3);
  Rng rng(55);
  for (std::size_t i = 0; i < sets.size(); ++i) {
    sets[i].bearing_id = "S";
    sets[i].snapshot = i;
    sets[i].condition_id = 1;
    for (double& v : sets[i].features) v = rng.uniform(-1.0, 1.0);
    sets[i].wave_h.resize(1024);
    sets[i].wave_v.resize(1024);
    for (double& v : sets[i].wave_h) v = rng.normal();
    for (double& v : sets[i].wave_v) v = rng.normal();
    sets[i].scal_h.rows = sets[i].scal_v.rows = 64;
    sets[i].scal_h.cols = sets[i].scal_v.cols = 64;
    sets[i].scal_h.values.assign(64 * 64, 0.0);
    sets[i].scal_v.values.assign(64 * 64, 0.0);
    for (double& v : sets[i].scal_h.values) v = rng.uniform();
    for (double& v : sets[i].scal_v.values) v = rng.uniform();
  }
  std::vector<const feat::FeatureSet*> ptrs = {&sets[0], &sets[1], &sets[2]};
  net::NetOutput out = small.forward(net::make_batch(ptrs, desk), eval);
  double worst_row = 0;
  for (std::size_t r = 0; r < 3; ++r) {
    double sum = 0;
    for (std::size_t c = 0; c < 3; ++c) sum += out.oc.values()[r * 3 + c];
    worst_row = std::max(worst_row, std::abs(sum - 1.0));
  }
  bool softmax_ok = worst_row < kSoftmaxTol;

  Outcome o;
  o.pass = feat_ok && scal_ok && softmax_ok;
  o.detail = std::string("1d branch (1,2,14)->(1,2,56) ") + (feat_ok ? "ok" : "WRONG") +
             "; 2d branch 64x64 through groups {3,3,5,2} -> (1,1,512) " +
             (scal_ok ? "ok" : "WRONG") + "; oc row-sum error " + fmt(worst_row);
  return o;
}

// ---------------------------------------------------------------------------
// 8. published first-prediction times (needs PRONOSTIA data)

Outcome check_real_fpt() {
  // Reference first-prediction times, in seconds, for the FEMTO/PRONOSTIA
  // run-to-failure bearings whose onset is documented.
  const std::map<std::string, double> published = {
      {"Bearing1_3", 5730.0}, {"Bearing1_4", 339.0},  {"Bearing1_5", 1610.0},
      {"Bearing1_6", 1460.0}, {"Bearing1_7", 7570.0}, {"Bearing2_3", 7530.0},
      {"Bearing2_4", 1390.0}, {"Bearing2_5", 3090.0}, {"Bearing2_6", 1290.0},
      {"Bearing2_7", 580.0},  {"Bearing3_3", 820.0}};

  Outcome o;
  const char* root = std::getenv("RULKIT_DATA_ROOT");
  if (!root) {
    o.skip = true;
    o.detail = "RULKIT_DATA_ROOT not set; PRONOSTIA comparison skipped";
    return o;
  }
  std::map<std::string, fs::path> found;
  std::error_code ec;
  for (auto it = fs::recursive_directory_iterator(root, ec);
       !ec && it != fs::recursive_directory_iterator(); it.increment(ec)) {
    if (!it->is_directory()) continue;
    std::string name = it->path().filename().string();
    if (published.count(name) && !found.count(name)) found[name] = it->path();
  }
  if (found.empty()) {
    o.skip = true;
    o.detail = std::string("no documented bearings under ") + root + "; skipped";
    return o;
  }

  std::size_t ok = 0;
  double worst = 0;
  std::string failures;
  for (const auto& [name, dir] : found) {
    data::VibrationRecord rec = data::parse_pronostia(dir);
    std::vector<double> ind = label::indicator_rms_horizontal(rec);
    double est_s = 0;
    try {
      est_s = static_cast<double>(label::detect_fpt(ind).fpt_index) * 10.0;
    } catch (const NumericError&) {
      est_s = -1e9;  // no detection counts as out of band
    }
    double err = std::abs(est_s - published.at(name));
    worst = std::max(worst, err);
    if (err <= kFptSecondsBand) {
      ++ok;
    } else {
      failures += " " + name + " est " + fmt(est_s) + "s vs " +
                  fmt(published.at(name)) + "s";
    }
  }
  o.pass = ok == found.size();
  o.detail = std::to_string(ok) + "/" + std::to_string(found.size()) +
             " bearings within " + fmt(kFptSecondsBand) + "s (worst " + fmt(worst) + "s)" +
             failures;
  return o;
}

// ---------------------------------------------------------------------------
// 9. determinism of the full pipeline

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

Outcome check_determinism() {
  double t0 = now_s();
  fs::path base = fs::temp_directory_path() /
                  ("rulkit_acceptance_" +
                   std::to_string(Rng(static_cast<std::uint64_t>(t0 * 1e6)).next_u64() %
                                  1000000000));
  auto run_once = [&](const fs::path& ws) {
    pipe::KvConfig kv;
    kv.set("seed", "77");
    kv.set("workspace", ws.string());
    kv.set("held_out", "Synth3_1");
    kv.set("synth_bearings", "1");
    kv.set("synth_snapshots", "8");
    kv.set("synth_block", "1024");
    kv.set("synth_onset", "4");
    kv.set("synth_growth", "1.0");
    kv.set("synth_noise", "0.1");
    kv.set("fpt_window", "4");
    kv.set("ae_epochs", "1");
    kv.set("epochs", "2");
    kv.set("batch", "8");
    pipe::RunConfig cfg = pipe::RunConfig::from_kv(kv);
    pipe::stage_ingest(cfg);
    pipe::stage_denoise_train(cfg);
    pipe::stage_extract(cfg);
    pipe::stage_label(cfg);
    pipe::stage_train(cfg);
    pipe::stage_evaluate(cfg);
    return std::pair<std::string, std::string>{slurp(ws / "metrics.csv"),
                                               slurp(ws / "predictions.csv")};
  };

  Outcome o;
  try {
    auto a = run_once(base / "a");
    auto b = run_once(base / "b");
    bool metrics_same = !a.first.empty() && a.first == b.first;
    bool preds_same = !a.second.empty() && a.second == b.second;
    o.pass = metrics_same && preds_same;
    o.detail = std::string("two seed-77 runs: metrics.csv ") +
               (metrics_same ? "byte-identical" : "DIFFER") + ", predictions.csv " +
               (preds_same ? "byte-identical" : "DIFFER") + " in " + fmt(now_s() - t0) +
               "s (full-scale result tables are out of reach at desk sizes; "
               "reproducibility stands in)";
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("pipeline run failed: ") + e.what();
  }
  std::error_code ec;
  fs::remove_all(base, ec);
  return o;
}

}  // namespace

int main() {
  struct Check {
    const char* name;
    Outcome (*run)();
  };
  const Check checks[] = {
      {"gradient suite", check_gradients},
      {"feature + spectrum oracles", check_features},
      {"fpt detection", check_fpt},
      {"rul labels", check_labels},
      {"denoiser efficacy", check_denoiser},
      {"overfit", check_overfit},
      {"shape contracts", check_shapes},
      {"published fpt comparison", check_real_fpt},
      {"pipeline determinism", check_determinism},
  };

  int failed = 0;
  for (std::size_t i = 0; i < std::size(checks); ++i) {
    Outcome o;
    try {
      o = checks[i].run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("unexpected exception: ") + e.what();
    }
    const char* verdict = o.skip ? "SKIP" : o.pass ? "PASS" : "FAIL";
    if (!o.skip && !o.pass) ++failed;
    std::printf("[%zu/9] %s — %s: %s\n", i + 1, verdict, checks[i].name, o.detail.c_str());
    std::fflush(stdout);
  }
  if (failed > 0) std::printf("%d of 9 checks failed\n", failed);
  return failed == 0 ? 0 : 1;
}
