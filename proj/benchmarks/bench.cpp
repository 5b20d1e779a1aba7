#include <benchmark/benchmark.h>

#include <cmath>
#include <complex>
#include <vector>

#include "rulkit/denoiser.hpp"
#include "rulkit/features.hpp"
#include "rulkit/fft.hpp"
#include "rulkit/model.hpp"
#include "rulkit/rng.hpp"

using namespace rulkit;

namespace {

std::vector<double> random_signal(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (double& v : x) v = rng.normal();
  return x;
}

void bm_fft(benchmark::State& state) {
  std::size_t n = static_cast<std::size_t>(state.range(0));
  std::vector<cdouble> x(n);
  Rng rng(1);
  for (auto& c : x) c = {rng.normal(), rng.normal()};
  for (auto _ : state) benchmark::DoNotOptimize(fft(x));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(bm_fft)->Arg(1024)->Arg(2560)->Arg(32768);

void bm_features(benchmark::State& state) {
  std::vector<double> x = random_signal(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(feat::time_features(x));
    benchmark::DoNotOptimize(feat::freq_features(x));
  }
}
BENCHMARK(bm_features)->Arg(2560)->Arg(32768);

void bm_scalogram(benchmark::State& state) {
  std::size_t n = static_cast<std::size_t>(state.range(0));
  std::vector<double> x = random_signal(n, 3);
  feat::CwtConfig cfg;
  double u_max = std::sqrt(2.0 * std::log(1e12)) / cfg.omega0;
  cfg.max_scale =
      std::min(cfg.max_scale, std::floor((static_cast<double>(n) / 2.0 - 1.0) / u_max));
  for (auto _ : state) benchmark::DoNotOptimize(feat::cwt_scalogram(x, cfg));
}
BENCHMARK(bm_scalogram)->Arg(1024)->Arg(2560)->Unit(benchmark::kMillisecond);

void bm_conv1d_forward(benchmark::State& state) {
  Rng rng(4);
  nn::Conv1d conv(2, 32, 15, 4, 7, rng);
  nn::Tensor x = nn::Tensor::zeros({8, 2, 1024});
  for (double& v : x.values()) v = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(conv.forward(x));
}
BENCHMARK(bm_conv1d_forward);

void bm_conv2d_forward(benchmark::State& state) {
  Rng rng(5);
  nn::Conv2d conv(2, 32, 7, 2, 3, rng);
  nn::Tensor x = nn::Tensor::zeros({8, 2, 64, 64});
  for (double& v : x.values()) v = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(conv.forward(x));
}
BENCHMARK(bm_conv2d_forward);

void bm_lstm_scan(benchmark::State& state) {
  Rng rng(6);
  std::size_t hidden = 128, in = 64, steps = 16;
  nn::LstmParams cell(in, hidden, rng);
  nn::Tensor x = nn::Tensor::zeros({8, steps, in});
  for (double& v : x.values()) v = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(nn::lstm_scan(x, cell, false));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(steps));
}
BENCHMARK(bm_lstm_scan)->Unit(benchmark::kMillisecond);

void bm_autoencoder_denoise(benchmark::State& state) {
  dn::AutoencoderConfig cfg;
  cfg.window_len = 128;
  cfg.enc1_units = 128;
  cfg.latent_units = 32;
  dn::Autoencoder ae(cfg, 7);
  data::SampleBlock block;
  block.horizontal = random_signal(1024, 8);
  block.vertical = random_signal(1024, 9);
  for (auto _ : state) benchmark::DoNotOptimize(ae.denoise(block));
}
BENCHMARK(bm_autoencoder_denoise)->Unit(benchmark::kMillisecond);

void bm_model_forward(benchmark::State& state) {
  net::ModelConfig cfg = net::ModelConfig::desk(1024);
  net::MultiBranchNet model(cfg, 10);
  Rng rng(11);
  std::vector<feat::FeatureSet> sets(4);
  std::vector<const feat::FeatureSet*> ptrs;
  for (auto& s : sets) {
    s.condition_id = 1;
    for (double& v : s.features) v = rng.normal();
    s.wave_h = random_signal(1024, rng.next_u64());
    s.wave_v = random_signal(1024, rng.next_u64());
    s.scal_h.rows = s.scal_v.rows = 64;
    s.scal_h.cols = s.scal_v.cols = 64;
    s.scal_h.values = random_signal(64 * 64, rng.next_u64());
    s.scal_v.values = random_signal(64 * 64, rng.next_u64());
    ptrs.push_back(&s);
  }
  net::BatchInputs in = net::make_batch(ptrs, cfg);
  nn::Mode eval;
  for (auto _ : state) {
    net::NetOutput out = model.forward(in, eval);
    benchmark::DoNotOptimize(out.rul.values().data());
  }
  state.SetItemsProcessed(state.iterations() * 4);
}
BENCHMARK(bm_model_forward)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
