#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <vector>

#include "rulkit/errors.hpp"
#include "rulkit/loss.hpp"
#include "rulkit/metrics.hpp"
#include "rulkit/model.hpp"
#include "rulkit/ops.hpp"
#include "rulkit/rng.hpp"

using namespace rulkit;
using nn::Tensor;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::uint64_t tick = static_cast<std::uint64_t>(
        std::chrono::high_resolution_clock::now().time_since_epoch().count());
    path = fs::temp_directory_path() /
           ("rulkit_model_test_" + std::to_string(Rng(tick).next_u64() % 1000000000));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

// Small enough to train in milliseconds, same layout as the real presets.
net::ModelConfig tiny_config() {
  net::ModelConfig c;
  c.feat_widths = {6, 8};
  c.cbb_counts = {1, 1};
  c.cbb_channels = {8, 16};
  c.stem2d_kernel = 3;
  c.stem2d_stride = 2;
  c.stem1d_kernel = 7;
  c.stem1d_stride = 4;
  c.wave_pool_window = 4;
  c.dropout = 0.0;
  c.d_model = 16;
  c.attn_heads = 2;
  c.bilstm_hidden = 8;
  c.oc_classes = 3;
  c.feat_count = 14;
  c.scal_rows = 16;
  c.scal_cols = 16;
  c.wave_len = 256;
  return c;
}

// Deterministic pseudo-random snapshot whose statistics shift with (class,
// position) so the tiny net has something to learn.
feat::FeatureSet synth_item(const net::ModelConfig& cfg, int oc_class, double pos,
                            std::uint64_t seed) {
  feat::FeatureSet fs;
  fs.bearing_id = "B" + std::to_string(oc_class);
  fs.snapshot = static_cast<std::size_t>(pos * 100);
  fs.condition_id = oc_class + 1;
  Rng rng(seed);
  double cls = static_cast<double>(oc_class);
  for (std::size_t i = 0; i < fs.features.size(); ++i)
    fs.features[i] = cls + pos + 0.1 * rng.uniform(-1.0, 1.0);
  fs.wave_h.resize(cfg.wave_len);
  fs.wave_v.resize(cfg.wave_len);
  for (std::size_t i = 0; i < cfg.wave_len; ++i) {
    double t = static_cast<double>(i);
    fs.wave_h[i] = std::sin(0.05 * (cls + 1.0) * t) * (0.5 + pos) + 0.05 * rng.normal();
    fs.wave_v[i] = std::cos(0.07 * (cls + 1.0) * t) * (0.5 + pos) + 0.05 * rng.normal();
  }
  auto fill_scal = [&](feat::Scalogram& s) {
    s.rows = cfg.scal_rows;
    s.cols = cfg.scal_cols;
    s.values.resize(s.rows * s.cols);
    for (std::size_t r = 0; r < s.rows; ++r)
      for (std::size_t c = 0; c < s.cols; ++c)
        s.values[r * s.cols + c] =
            std::exp(-0.1 * std::abs(static_cast<double>(r) - 4.0 * (cls + 1.0))) *
                (0.5 + pos) +
            0.02 * rng.uniform(-1.0, 1.0);
  };
  fill_scal(fs.scal_h);
  fill_scal(fs.scal_v);
  return fs;
}

std::vector<feat::FeatureSet> item_pool;

std::vector<net::LabeledItem> make_items(const net::ModelConfig& cfg, std::size_t per_class,
                                         bool all_labeled = true) {
  item_pool.clear();
  item_pool.reserve(3 * per_class);
  std::vector<net::LabeledItem> items;
  for (int cls = 0; cls < 3; ++cls)
    for (std::size_t i = 0; i < per_class; ++i) {
      double pos = per_class == 1 ? 0.5
                                  : static_cast<double>(i) / (per_class - 1);
      item_pool.push_back(synth_item(cfg, cls, pos, 900 + cls * 100 + i));
    }
  for (std::size_t i = 0; i < item_pool.size(); ++i) {
    net::LabeledItem it;
    it.features = &item_pool[i];
    it.oc_class = static_cast<int>(i / per_class);
    double pos = per_class == 1 ? 0.5
                                : static_cast<double>(i % per_class) / (per_class - 1);
    it.has_rul = all_labeled || (i % per_class) > 0;
    it.rul = 1.0 - pos;
    items.push_back(it);
  }
  return items;
}

const Tensor& find_param(nn::NamedParams& params, const std::string& name) {
  for (auto& [n, t] : params)
    if (n == name) return t;
  throw std::runtime_error("param not found: " + name);
}

}  // namespace

TEST_CASE("paper preset: feature branch maps 2x14 to 2x56") {
  net::ModelConfig cfg = net::ModelConfig::paper(1024);
  net::MultiBranchNet model(cfg, 3);
  nn::Mode eval;
  Tensor x = Tensor::zeros({1, 2, 14});
  Tensor seq = model.branch_feat(x, eval);
  CHECK(seq.shape() == nn::Shape{1, 2, 56});

  net::ModelConfig desk = net::ModelConfig::desk(1024);
  net::MultiBranchNet small(desk, 3);
  CHECK(small.branch_feat(x, eval).shape() == nn::Shape{1, 2, 28});
}

TEST_CASE("paper preset: the 13 scalogram blocks consume a 64x64 image") {
  net::ModelConfig cfg = net::ModelConfig::paper(1024);
  net::MultiBranchNet model(cfg, 3);
  nn::Mode eval;
  // 64 -> stem/2 -> 32 -> pool/2 -> 16 -> group strides 2,2,2,2 -> 1
  Tensor seq = model.branch_scal(Tensor::full({1, 2, 64, 64}, 0.1), eval);
  CHECK(seq.shape() == nn::Shape{1, 1, 512});
}

TEST_CASE("desk preset: waveform branch geometry for a 1024-sample block") {
  net::ModelConfig cfg = net::ModelConfig::desk(1024);
  net::MultiBranchNet model(cfg, 3);
  nn::Mode eval;
  Tensor seq = model.branch_wave(Tensor::full({2, 2, 1024}, 0.2), eval);
  CHECK(seq.shape() == nn::Shape{2, 3, 256});
}

TEST_CASE("branch inputs are shape-checked") {
  net::MultiBranchNet model(tiny_config(), 1);
  nn::Mode eval;
  CHECK_THROWS_AS(model.branch_feat(Tensor::zeros({1, 2, 13}), eval), ShapeError);
  CHECK_THROWS_AS(model.branch_scal(Tensor::zeros({1, 2, 16, 15}), eval), ShapeError);
  CHECK_THROWS_AS(model.branch_wave(Tensor::zeros({1, 3, 256}), eval), ShapeError);
}

TEST_CASE("model config validation") {
  net::ModelConfig cfg = tiny_config();
  cfg.cbb_counts = {1};
  CHECK_THROWS_AS(net::MultiBranchNet(cfg, 1), ConfigError);
  cfg = tiny_config();
  cfg.oc_classes = 1;
  CHECK_THROWS_AS(net::MultiBranchNet(cfg, 1), ConfigError);
}

TEST_CASE("forward: rul is sigmoid-bounded, oc rows sum to one") {
  net::ModelConfig cfg = tiny_config();
  net::MultiBranchNet model(cfg, 5);
  auto items = make_items(cfg, 2);
  std::vector<const feat::FeatureSet*> fsets;
  for (const auto& it : items) fsets.push_back(it.features);
  net::BatchInputs in = net::make_batch(fsets, cfg);
  nn::Mode eval;
  net::NetOutput out = model.forward(in, eval);
  REQUIRE(out.rul.shape() == nn::Shape{fsets.size(), 1});
  REQUIRE(out.oc.shape() == nn::Shape{fsets.size(), 3});
  for (double v : out.rul.values()) {
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
  for (std::size_t r = 0; r < fsets.size(); ++r) {
    double s = 0;
    for (std::size_t c = 0; c < 3; ++c) s += out.oc.values()[r * 3 + c];
    CHECK(s == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("eval predictions are independent of batch composition") {
  net::ModelConfig cfg = tiny_config();
  net::MultiBranchNet model(cfg, 8);
  auto items = make_items(cfg, 2);
  auto rows_all = net::predict(model, items, 6);
  auto rows_single = net::predict(model, items, 1);
  REQUIRE(rows_all.size() == rows_single.size());
  for (std::size_t i = 0; i < rows_all.size(); ++i) {
    CHECK(rows_all[i].pred_rul == doctest::Approx(rows_single[i].pred_rul).epsilon(1e-12));
    CHECK(rows_all[i].pred_oc == rows_single[i].pred_oc);
  }
}

TEST_CASE("prediction rows carry 1-based condition ids") {
  net::ModelConfig cfg = tiny_config();
  net::MultiBranchNet model(cfg, 8);
  auto items = make_items(cfg, 2);
  auto rows = net::predict(model, items);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].true_oc == items[i].oc_class + 1);
    CHECK(rows[i].pred_oc >= 1);
    CHECK(rows[i].pred_oc <= 3);
  }
}

TEST_CASE("make_batch validates item geometry") {
  net::ModelConfig cfg = tiny_config();
  auto items = make_items(cfg, 1);
  feat::FeatureSet bad = *items[0].features;
  bad.wave_h.resize(100);
  std::vector<const feat::FeatureSet*> fsets = {&bad};
  CHECK_THROWS_AS(net::make_batch(fsets, cfg), ShapeError);
  CHECK_THROWS_AS(net::make_batch({}, cfg), ShapeError);
}

TEST_CASE("lambda=1 sends no gradient into the RUL path") {
  net::ModelConfig cfg = tiny_config();
  net::MultiBranchNet model(cfg, 21);
  auto items = make_items(cfg, 2);
  std::vector<const feat::FeatureSet*> fsets;
  std::vector<double> one_hot(items.size() * 3, 0.0), ruls(items.size()), mask(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    fsets.push_back(items[i].features);
    one_hot[i * 3 + items[i].oc_class] = 1.0;
    ruls[i] = items[i].rul;
    mask[i] = 1.0;
  }
  net::BatchInputs in = net::make_batch(fsets, cfg);
  nn::Mode train{true, 1, 1};
  net::NetOutput out = model.forward(in, train);
  Tensor l_oc = nn::cross_entropy(out.oc, Tensor::from_data(one_hot, {items.size(), 3}));
  Tensor l_rul = nn::msle_masked(out.rul, Tensor::from_data(ruls, {items.size(), 1}),
                                 Tensor::from_data(mask, {items.size(), 1}));
  Tensor total = nn::total_loss(l_oc, l_rul, 1.0);
  total.backward();

  nn::NamedParams params = model.named_params();
  auto max_abs_grad = [](const Tensor& t) {
    double m = 0;
    for (double g : t.grad()) m = std::max(m, std::abs(g));
    return m;
  };
  CHECK(max_abs_grad(find_param(params, "rul_out.w")) == 0.0);
  CHECK(max_abs_grad(find_param(params, "head_feat.l1.w")) == 0.0);
  CHECK(max_abs_grad(find_param(params, "oc_out.w")) > 0.0);
  CHECK(max_abs_grad(find_param(params, "b_feat.s0.conv.w")) > 0.0);
}

TEST_CASE("training fits a tiny separable problem") {
  net::ModelConfig cfg = tiny_config();
  cfg.dropout = 0.1;
  net::MultiBranchNet model(cfg, 33);
  auto items = make_items(cfg, 2);
  net::TrainOptions opt;
  opt.epochs = 60;
  opt.batch = 6;
  opt.lr = 1e-3;
  opt.seed = 4;
  net::TrainHistory hist = net::train(model, items, opt);
  REQUIRE(hist.epochs.size() == 60);
  CHECK(hist.epochs.back().loss_total < hist.epochs.front().loss_total);
  auto metrics = net::evaluate(model, items);
  for (const auto& m : metrics) CHECK(std::isfinite(m.rmse));
}

TEST_CASE("training is deterministic for a fixed seed") {
  net::ModelConfig cfg = tiny_config();
  cfg.dropout = 0.1;
  auto items = make_items(cfg, 2);
  net::TrainOptions opt;
  opt.epochs = 5;
  opt.batch = 4;
  opt.seed = 11;
  net::MultiBranchNet a(cfg, 7), b(cfg, 7);
  net::TrainHistory ha = net::train(a, items, opt);
  net::TrainHistory hb = net::train(b, items, opt);
  REQUIRE(ha.epochs.size() == hb.epochs.size());
  for (std::size_t e = 0; e < ha.epochs.size(); ++e) {
    CHECK(ha.epochs[e].loss_total == hb.epochs[e].loss_total);
    CHECK(ha.epochs[e].loss_rul == hb.epochs[e].loss_rul);
    CHECK(ha.epochs[e].loss_oc == hb.epochs[e].loss_oc);
    CHECK(ha.epochs[e].oc_accuracy == hb.epochs[e].oc_accuracy);
  }
  auto pa = net::predict(a, items);
  auto pb = net::predict(b, items);
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i].pred_rul == pb[i].pred_rul);
    CHECK(pa[i].pred_oc == pb[i].pred_oc);
  }
}

TEST_CASE("zero learning rate plus patience stops early") {
  net::ModelConfig cfg = tiny_config();
  // Two bit-identical items: shuffling cannot change the batch bytes, so the
  // epoch loss is exactly constant and the patience counter never resets.
  feat::FeatureSet fs = synth_item(cfg, 1, 0.5, 321);
  net::LabeledItem it;
  it.features = &fs;
  it.oc_class = 1;
  it.has_rul = true;
  it.rul = 0.5;
  std::vector<net::LabeledItem> items{it, it};
  net::TrainOptions opt;
  opt.epochs = 50;
  opt.batch = 2;
  opt.lr = 0.0;
  opt.early_stop_patience = 3;
  net::MultiBranchNet model(cfg, 2);
  net::TrainHistory hist = net::train(model, items, opt);
  CHECK(hist.epochs.size() == 4);  // epoch 0 sets the best, then 3 stale epochs
}

TEST_CASE("train rejects degenerate setups") {
  net::ModelConfig cfg = tiny_config();
  net::MultiBranchNet model(cfg, 1);
  auto items = make_items(cfg, 1);
  net::TrainOptions opt;
  opt.batch = 1;
  CHECK_THROWS_AS(net::train(model, items, opt), ConfigError);
  opt.batch = 4;
  opt.lambda = 1.2;
  CHECK_THROWS_AS(net::train(model, items, opt), ConfigError);
  opt.lambda = 0.5;
  std::vector<net::LabeledItem> one(items.begin(), items.begin() + 1);
  CHECK_THROWS_AS(net::train(model, one, opt), ConfigError);
  opt.optimizer = "sgd-with-typo";
  CHECK_THROWS_AS(net::train(model, items, opt), ConfigError);
}

TEST_CASE("non-finite feature values are rejected at batching") {
  net::ModelConfig cfg = tiny_config();
  auto items = make_items(cfg, 2);
  item_pool[0].features[0] = std::nan("");
  std::vector<const feat::FeatureSet*> fsets;
  for (const auto& it : items) fsets.push_back(it.features);
  CHECK_THROWS_WITH_AS(net::make_batch(fsets, cfg), doctest::Contains("non-finite"),
                       NumericError);

  net::MultiBranchNet model(cfg, 13);
  CHECK_THROWS_AS(net::train(model, items, net::TrainOptions{}), NumericError);
}

TEST_CASE("an exploding run aborts training and restores parameters") {
  TempDir tmp;
  net::ModelConfig cfg = tiny_config();
  net::MultiBranchNet model(cfg, 13);
  auto items = make_items(cfg, 2);

  std::vector<std::vector<double>> before;
  for (auto& [name, t] : model.named_params()) before.push_back(t.values());

  net::TrainOptions opt;
  opt.epochs = 3;
  opt.batch = 3;   // two batches per epoch: the first step blows up, the
  opt.lr = 1e300;  // second forward trips the finite checks
  opt.checkpoint_dir = tmp.path / "ckpts";
  CHECK_THROWS_WITH_AS(net::train(model, items, opt),
                       doctest::Contains("training diverged"), NumericError);
  CHECK(fs::exists(tmp.path / "ckpts" / "last_good.ckpt"));

  std::size_t i = 0;
  for (auto& [name, t] : model.named_params()) {
    CHECK(t.values() == before[i]);
    ++i;
  }
}

TEST_CASE("periodic checkpoints are written") {
  TempDir tmp;
  net::ModelConfig cfg = tiny_config();
  net::MultiBranchNet model(cfg, 3);
  auto items = make_items(cfg, 1);
  net::TrainOptions opt;
  opt.epochs = 4;
  opt.batch = 3;
  opt.checkpoint_every = 2;
  opt.checkpoint_dir = tmp.path / "ckpts";
  net::train(model, items, opt);
  CHECK(fs::exists(opt.checkpoint_dir / "epoch_2.ckpt"));
  CHECK(fs::exists(opt.checkpoint_dir / "epoch_4.ckpt"));
  CHECK(!fs::exists(opt.checkpoint_dir / "epoch_3.ckpt"));
}

TEST_CASE("model checkpoints restore parameters and predictions bit-exactly") {
  TempDir tmp;
  net::ModelConfig cfg = tiny_config();
  net::MultiBranchNet model(cfg, 17);
  auto items = make_items(cfg, 2);
  net::TrainOptions topt;
  topt.epochs = 2;
  topt.batch = 6;
  net::train(model, items, topt);

  fs::path path = tmp.path / "model.ckpt";
  model.save(path);
  net::MultiBranchNet loaded = net::MultiBranchNet::load_file(path);
  CHECK(loaded.config().d_model == cfg.d_model);
  CHECK(loaded.config().feat_widths == cfg.feat_widths);

  auto pa = net::predict(model, items);
  auto pb = net::predict(loaded, items);
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i].pred_rul == pb[i].pred_rul);
    CHECK(pa[i].pred_oc == pb[i].pred_oc);
  }
}

TEST_CASE("optimizer state rides along in the checkpoint") {
  TempDir tmp;
  net::ModelConfig cfg = tiny_config();
  net::MultiBranchNet model(cfg, 17);
  nn::RmsProp opt(1e-3);
  nn::NamedParams params = model.named_params();
  // one step to populate accumulators
  std::vector<const feat::FeatureSet*> fsets;
  auto items = make_items(cfg, 1);
  for (const auto& it : items) fsets.push_back(it.features);
  net::BatchInputs in = net::make_batch(fsets, cfg);
  nn::Mode train{true, 1, 1};
  net::NetOutput out = model.forward(in, train);
  nn::sum_all(out.rul).backward();
  opt.step(params);

  fs::path path = tmp.path / "with_opt.ckpt";
  model.save(path, &opt);
  nn::RmsProp restored(1e-3);
  net::MultiBranchNet loaded = net::MultiBranchNet::load_file(path, &restored);
  nn::NamedParams sa = opt.state(), sb = restored.state();
  REQUIRE(sa.size() == sb.size());
  for (std::size_t i = 0; i < sa.size(); ++i) {
    CHECK(sa[i].first == sb[i].first);
    CHECK(sa[i].second.values() == sb[i].second.values());
  }
}

TEST_CASE("loading a checkpoint into a differently-sized net names the misfits") {
  TempDir tmp;
  net::ModelConfig small = tiny_config();
  net::ModelConfig big = tiny_config();
  big.feat_widths = {6, 12};
  big.d_model = 24;
  net::MultiBranchNet a(small, 1);
  fs::path path = tmp.path / "small.ckpt";
  a.save(path);

  ckpt::Container c = ckpt::load(path);
  net::MultiBranchNet b(big, 1);
  nn::NamedParams params = b.named_params();
  CHECK_THROWS_WITH_AS(ckpt::assign_params(c, params),
                       doctest::Contains("head_feat.l1.w"), IoError);
}

TEST_CASE("metrics: a perfect predictor scores zero error, full accuracy") {
  std::vector<metrics::PredictionRow> rows;
  for (std::size_t t = 0; t <= 4; ++t) {
    metrics::PredictionRow r;
    r.bearing_id = "B1";
    r.snapshot = t;
    r.has_rul = true;
    r.true_rul = 1.0 - 0.25 * t;
    r.pred_rul = r.true_rul;
    r.true_oc = 2;
    r.pred_oc = 2;
    rows.push_back(r);
  }
  auto ms = metrics::compute_metrics(rows);
  REQUIRE(ms.size() == 1);
  CHECK(ms[0].rmse == 0.0);
  CHECK(ms[0].mae == 0.0);
  CHECK(ms[0].acc == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ms[0].rul_points == 5);
}

TEST_CASE("metrics: constant 0.5 against the linear ramp, closed form") {
  std::vector<metrics::PredictionRow> rows;
  for (std::size_t t = 0; t <= 4; ++t) {
    metrics::PredictionRow r;
    r.bearing_id = "B1";
    r.snapshot = t;
    r.has_rul = true;
    r.true_rul = 1.0 - 0.25 * t;
    r.pred_rul = 0.5;
    r.true_oc = 1;
    r.pred_oc = t < 3 ? 1 : 2;  // 3 of 5 right
    rows.push_back(r);
  }
  auto ms = metrics::compute_metrics(rows);
  REQUIRE(ms.size() == 1);
  // divisor is t_N - FPT = 4
  double sse = 0.25 + 0.0625 + 0.0 + 0.0625 + 0.25;
  CHECK(ms[0].rmse == doctest::Approx(std::sqrt(sse / 4.0)).epsilon(1e-12));
  CHECK(ms[0].mae == doctest::Approx(1.5 / 4.0).epsilon(1e-12));
  CHECK(ms[0].acc == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("metrics: fewer than two labeled snapshots cannot be scored") {
  std::vector<metrics::PredictionRow> rows(3);
  for (std::size_t t = 0; t < 3; ++t) {
    rows[t].bearing_id = "B1";
    rows[t].snapshot = t;
    rows[t].has_rul = t == 2;
    rows[t].true_rul = 1.0;
    rows[t].true_oc = 1;
    rows[t].pred_oc = 1;
  }
  CHECK_THROWS_AS(metrics::compute_metrics(rows), NumericError);
}

TEST_CASE("prediction csv round trip is bit exact and the metrics recompute") {
  TempDir tmp;
  Rng rng(64);
  std::vector<metrics::PredictionRow> rows;
  for (std::size_t t = 0; t < 12; ++t) {
    metrics::PredictionRow r;
    r.bearing_id = t < 7 ? "B1" : "B2";
    r.snapshot = t < 7 ? t : t - 7;
    r.has_rul = (t % 7) > 1;
    r.true_rul = r.has_rul ? rng.uniform() : 0.0;
    r.pred_rul = rng.uniform();
    r.true_oc = 1 + static_cast<int>(t % 3);
    r.pred_oc = 1 + static_cast<int>((t + 1) % 3);
    rows.push_back(r);
  }
  fs::path path = tmp.path / "predictions.csv";
  metrics::write_predictions_csv(path, rows);
  auto back = metrics::read_predictions_csv(path);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].bearing_id == rows[i].bearing_id);
    CHECK(back[i].snapshot == rows[i].snapshot);
    CHECK(back[i].has_rul == rows[i].has_rul);
    if (rows[i].has_rul) CHECK(back[i].true_rul == rows[i].true_rul);
    CHECK(back[i].pred_rul == rows[i].pred_rul);
    CHECK(back[i].true_oc == rows[i].true_oc);
    CHECK(back[i].pred_oc == rows[i].pred_oc);
  }

  // metrics recomputed from the file agree with an independent accumulation
  auto ms = metrics::compute_metrics(back);
  for (const auto& m : ms) {
    double sse = 0, sae = 0;
    std::size_t labeled = 0, right = 0, total = 0;
    for (const auto& r : back) {
      if (r.bearing_id != m.bearing_id) continue;
      ++total;
      if (r.pred_oc == r.true_oc) ++right;
      if (!r.has_rul) continue;
      ++labeled;
      sse += (r.true_rul - r.pred_rul) * (r.true_rul - r.pred_rul);
      sae += std::abs(r.true_rul - r.pred_rul);
    }
    double div = static_cast<double>(labeled - 1);
    CHECK(m.rmse == doctest::Approx(std::sqrt(sse / div)).epsilon(1e-12));
    CHECK(m.mae == doctest::Approx(sae / div).epsilon(1e-12));
    CHECK(m.acc == doctest::Approx(100.0 * right / total).epsilon(1e-12));
    CHECK(m.rul_points == labeled);
    CHECK(m.oc_points == total);
  }
}
