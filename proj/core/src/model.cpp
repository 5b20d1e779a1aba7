#include "rulkit/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rulkit/errors.hpp"
#include "rulkit/loss.hpp"
#include "rulkit/ops.hpp"

namespace rulkit::net {

using nn::Tensor;
using nn::shape_str;

ModelConfig ModelConfig::paper(std::size_t wave_len) {
  ModelConfig c;
  c.wave_len = wave_len;
  return c;
}

ModelConfig ModelConfig::desk(std::size_t wave_len) {
  ModelConfig c;
  c.feat_widths = {14, 28, 28};
  c.cbb_counts = {1, 1, 1, 1};
  c.cbb_channels = {32, 64, 128, 256};
  c.d_model = 256;
  c.bilstm_hidden = 64;
  c.wave_len = wave_len;
  return c;
}

// ---------------------------------------------------------------------------
// Blocks

Tensor Cbb1d::forward(const Tensor& x, const nn::Mode& mode) {
  return drop.forward(nn::relu(bn.forward(conv.forward(x), mode)), mode);
}

void Cbb1d::collect(const std::string& prefix, nn::NamedParams& params,
                    nn::NamedParams& state) const {
  conv.collect(prefix + ".conv", params);
  bn.collect(prefix + ".bn", params);
  bn.collect_state(prefix + ".bn", state);
}

Tensor Cbb2d::forward(const Tensor& x, const nn::Mode& mode) {
  return drop.forward(nn::relu(bn.forward(conv.forward(x), mode)), mode);
}

void Cbb2d::collect(const std::string& prefix, nn::NamedParams& params,
                    nn::NamedParams& state) const {
  conv.collect(prefix + ".conv", params);
  bn.collect(prefix + ".bn", params);
  bn.collect_state(prefix + ".bn", state);
}

AbLstmHead::AbLstmHead(std::size_t in_features, std::size_t d_model_, std::size_t heads,
                       std::size_t bilstm_hidden, double dropout, std::uint64_t id_base,
                       Rng& rng)
    : l1(in_features, d_model_, rng),
      l2(d_model_, d_model_, rng),
      attn(d_model_, heads, rng),
      bilstm(d_model_, bilstm_hidden, bilstm_hidden, rng),
      d1(dropout, id_base),
      d2(dropout, id_base + 1),
      d3(dropout, id_base + 2),
      d4(dropout, id_base + 3),
      d_model(d_model_),
      out_dim(bilstm_hidden) {}

Tensor AbLstmHead::forward(const Tensor& seq, const nn::Mode& mode) const {
  if (seq.rank() != 3)
    throw ShapeError("ab_lstm head: expected (N,T,F), got " + shape_str(seq.shape()));
  std::size_t n = seq.dim(0), t = seq.dim(1), f = seq.dim(2);
  Tensor flat = nn::reshape(seq, {n * t, f});
  Tensor h = nn::relu(d1.forward(l1.forward(flat), mode));
  h = nn::relu(d2.forward(l2.forward(h), mode));
  Tensor proj = nn::reshape(h, {n, t, d_model});
  Tensor attended = d3.forward(attn.forward(proj), mode);
  Tensor y = bilstm.forward(attended);           // (N, T, out_dim)
  Tensor last = nn::select_step(y, t - 1);       // final state
  return nn::relu(d4.forward(last, mode));
}

void AbLstmHead::collect(const std::string& prefix, nn::NamedParams& out) const {
  l1.collect(prefix + ".l1", out);
  l2.collect(prefix + ".l2", out);
  attn.collect(prefix + ".attn", out);
  bilstm.collect(prefix + ".bilstm", out);
}

// ---------------------------------------------------------------------------
// Network assembly

MultiBranchNet::MultiBranchNet(const ModelConfig& config, std::uint64_t seed)
    : config_(config) {
  if (config.cbb_counts.size() != config.cbb_channels.size())
    throw ConfigError("model: cbb_counts and cbb_channels must have equal length");
  if (config.feat_widths.empty() || config.cbb_counts.empty())
    throw ConfigError("model: branch stage lists must be non-empty");
  if (config.oc_classes < 2) throw ConfigError("model: need at least 2 OC classes");
  Rng rng(seed);

  // 1D feature branch: rows become independent items, spatial length 1.
  std::size_t in_ch = config.feat_count;
  for (std::size_t i = 0; i < config.feat_widths.size(); ++i) {
    Cbb1d stage;
    stage.conv = nn::Conv1d(in_ch, config.feat_widths[i], 3, 1, 1, rng);
    stage.bn = nn::BatchNorm(config.feat_widths[i]);
    stage.drop = nn::Dropout(config.dropout, 10 + i);
    in_ch = config.feat_widths[i];
    feat_stages_.push_back(std::move(stage));
  }

  // 2D scalogram branch.
  stem2d_.conv = nn::Conv2d(2, config.cbb_channels[0], config.stem2d_kernel,
                            config.stem2d_stride, config.stem2d_kernel / 2, rng);
  stem2d_.bn = nn::BatchNorm(config.cbb_channels[0]);
  stem2d_.drop = nn::Dropout(0.0, 19);
  stem2d_pool_ = {2, 2};
  std::size_t ch = config.cbb_channels[0];
  for (std::size_t g = 0; g < config.cbb_counts.size(); ++g) {
    for (std::size_t k = 0; k < config.cbb_counts[g]; ++k) {
      Cbb2d block;
      std::size_t stride = k == 0 ? 2 : 1;
      block.conv = nn::Conv2d(ch, config.cbb_channels[g], 3, stride, 1, rng);
      block.bn = nn::BatchNorm(config.cbb_channels[g]);
      block.drop = nn::Dropout(config.dropout, 20 + blocks2d_.size());
      ch = config.cbb_channels[g];
      blocks2d_.push_back(std::move(block));
    }
  }
  std::size_t ch2d_out = ch;

  // Waveform branch mirrors the 2D branch with 1D convolutions.
  stem1d_.conv = nn::Conv1d(2, config.cbb_channels[0], config.stem1d_kernel,
                            config.stem1d_stride, config.stem1d_kernel / 2, rng);
  stem1d_.bn = nn::BatchNorm(config.cbb_channels[0]);
  stem1d_.drop = nn::Dropout(0.0, 39);
  stem1d_pool_ = {2, 2};
  wave_pool_ = {config.wave_pool_window, 1};
  ch = config.cbb_channels[0];
  for (std::size_t g = 0; g < config.cbb_counts.size(); ++g) {
    for (std::size_t k = 0; k < config.cbb_counts[g]; ++k) {
      Cbb1d block;
      std::size_t stride = k == 0 ? 2 : 1;
      block.conv = nn::Conv1d(ch, config.cbb_channels[g], 3, stride, 1, rng);
      block.bn = nn::BatchNorm(config.cbb_channels[g]);
      block.drop = nn::Dropout(config.dropout, 40 + blocks1d_.size());
      ch = config.cbb_channels[g];
      blocks1d_.push_back(std::move(block));
    }
  }
  std::size_t ch1d_out = ch;

  head_feat_ = AbLstmHead(config.feat_widths.back(), config.d_model, config.attn_heads,
                          config.bilstm_hidden, config.dropout, 60, rng);
  head_scal_ = AbLstmHead(ch2d_out, config.d_model, config.attn_heads,
                          config.bilstm_hidden, config.dropout, 70, rng);
  head_wave_ = AbLstmHead(ch1d_out, config.d_model, config.attn_heads,
                          config.bilstm_hidden, config.dropout, 80, rng);

  rul_out_ = nn::Linear(3 * config.bilstm_hidden, 1, rng);
  std::size_t gap_total = config.feat_widths.back() + ch2d_out + ch1d_out;
  oc_out_ = nn::Linear(gap_total, config.oc_classes, rng);
}

Tensor MultiBranchNet::branch_feat(const Tensor& x, const nn::Mode& mode) {
  if (x.rank() != 3 || x.dim(1) != 2 || x.dim(2) != config_.feat_count)
    throw ShapeError("feature branch: expected (N, 2, " +
                     std::to_string(config_.feat_count) + "), got " + shape_str(x.shape()));
  std::size_t n = x.dim(0);
  // Each axis row runs the conv stack independently: features are channels
  // over a length-1 spatial extent.
  Tensor h = nn::reshape(x, {n * 2, config_.feat_count, 1});
  for (auto& stage : feat_stages_) h = stage.forward(h, mode);
  Tensor seq = nn::reshape(h, {n, 2, config_.feat_widths.back()});
  nn::check_finite(seq, "feature branch output");
  return seq;
}

Tensor MultiBranchNet::branch_scal(const Tensor& x, const nn::Mode& mode) {
  if (x.rank() != 4 || x.dim(1) != 2 || x.dim(2) != config_.scal_rows ||
      x.dim(3) != config_.scal_cols)
    throw ShapeError("scalogram branch: expected (N, 2, " +
                     std::to_string(config_.scal_rows) + ", " +
                     std::to_string(config_.scal_cols) + "), got " + shape_str(x.shape()));
  Tensor h = stem2d_pool_.forward(stem2d_.forward(x, mode));
  for (auto& block : blocks2d_) h = block.forward(h, mode);
  std::size_t n = h.dim(0), c = h.dim(1), hw = h.dim(2) * h.dim(3);
  Tensor seq = nn::permute_nc_l(nn::reshape(h, {n, c, hw}));  // (N, T=hw, F=c)
  nn::check_finite(seq, "scalogram branch output");
  return seq;
}

Tensor MultiBranchNet::branch_wave(const Tensor& x, const nn::Mode& mode) {
  if (x.rank() != 3 || x.dim(1) != 2 || x.dim(2) != config_.wave_len)
    throw ShapeError("waveform branch: expected (N, 2, " +
                     std::to_string(config_.wave_len) + "), got " + shape_str(x.shape()));
  Tensor h = stem1d_pool_.forward(stem1d_.forward(x, mode));
  for (auto& block : blocks1d_) h = wave_pool_.forward(block.forward(h, mode));
  std::size_t n = h.dim(0), c = h.dim(1), l = h.dim(2);
  Tensor seq = nn::permute_nc_l(nn::reshape(h, {n, c, l}));  // (N, T=l, F=c)
  nn::check_finite(seq, "waveform branch output");
  return seq;
}

namespace {

// (N, T, F) -> (N, F): average every feature map over the sequence axis.
Tensor gap_sequence(const Tensor& seq) {
  return nn::global_avg_pool(nn::permute_nc_l(seq));
}

}  // namespace

NetOutput MultiBranchNet::forward(const BatchInputs& in, const nn::Mode& mode) {
  Tensor seq_f = branch_feat(in.feats, mode);
  Tensor seq_s = branch_scal(in.scal, mode);
  Tensor seq_w = branch_wave(in.wave, mode);

  Tensor h_f = head_feat_.forward(seq_f, mode);
  Tensor h_s = head_scal_.forward(seq_s, mode);
  Tensor h_w = head_wave_.forward(seq_w, mode);
  nn::check_finite(h_f, "feature-branch AB-LSTM head");
  nn::check_finite(h_s, "scalogram-branch AB-LSTM head");
  nn::check_finite(h_w, "waveform-branch AB-LSTM head");

  NetOutput out;
  out.rul = nn::sigmoid(rul_out_.forward(nn::concat_cols({h_f, h_s, h_w})));
  Tensor gaps = nn::concat_cols({gap_sequence(seq_f), gap_sequence(seq_s),
                                 gap_sequence(seq_w)});
  out.oc = nn::softmax_rows(oc_out_.forward(gaps));
  nn::check_finite(out.rul, "RUL output head");
  nn::check_finite(out.oc, "OC output head");
  return out;
}

void MultiBranchNet::collect_all(nn::NamedParams& params, nn::NamedParams& state) const {
  for (std::size_t i = 0; i < feat_stages_.size(); ++i)
    feat_stages_[i].collect("b_feat.s" + std::to_string(i), params, state);
  stem2d_.collect("b_scal.stem", params, state);
  for (std::size_t i = 0; i < blocks2d_.size(); ++i)
    blocks2d_[i].collect("b_scal.c" + std::to_string(i), params, state);
  stem1d_.collect("b_wave.stem", params, state);
  for (std::size_t i = 0; i < blocks1d_.size(); ++i)
    blocks1d_[i].collect("b_wave.c" + std::to_string(i), params, state);
  head_feat_.collect("head_feat", params);
  head_scal_.collect("head_scal", params);
  head_wave_.collect("head_wave", params);
  rul_out_.collect("rul_out", params);
  oc_out_.collect("oc_out", params);
}

nn::NamedParams MultiBranchNet::named_params() {
  nn::NamedParams params, state;
  collect_all(params, state);
  return params;
}

nn::NamedParams MultiBranchNet::named_state() {
  nn::NamedParams params, state;
  collect_all(params, state);
  return state;
}

// ---------------------------------------------------------------------------
// Batching

BatchInputs make_batch(const std::vector<const feat::FeatureSet*>& items,
                       const ModelConfig& config) {
  if (items.empty()) throw ShapeError("make_batch: empty batch");
  std::size_t n = items.size();
  std::vector<double> feats, scal, wave;
  feats.reserve(n * 2 * config.feat_count);
  scal.reserve(n * 2 * config.scal_rows * config.scal_cols);
  wave.reserve(n * 2 * config.wave_len);
  for (const feat::FeatureSet* fs : items) {
    if (fs->wave_h.size() != config.wave_len || fs->wave_v.size() != config.wave_len)
      throw ShapeError("make_batch: waveform lengths " + std::to_string(fs->wave_h.size()) +
                       "/" + std::to_string(fs->wave_v.size()) +
                       " do not match model wave_len " + std::to_string(config.wave_len));
    if (fs->scal_h.rows != config.scal_rows || fs->scal_h.cols != config.scal_cols ||
        fs->scal_v.rows != config.scal_rows || fs->scal_v.cols != config.scal_cols)
      throw ShapeError("make_batch: scalogram is " + std::to_string(fs->scal_h.rows) + "x" +
                       std::to_string(fs->scal_h.cols) + ", model expects " +
                       std::to_string(config.scal_rows) + "x" +
                       std::to_string(config.scal_cols));
    feats.insert(feats.end(), fs->features.begin(), fs->features.end());
    scal.insert(scal.end(), fs->scal_h.values.begin(), fs->scal_h.values.end());
    scal.insert(scal.end(), fs->scal_v.values.begin(), fs->scal_v.values.end());
    wave.insert(wave.end(), fs->wave_h.begin(), fs->wave_h.end());
    wave.insert(wave.end(), fs->wave_v.begin(), fs->wave_v.end());
  }
  // A NaN here would be zeroed by the first ReLU after batch norm and corrupt
  // the whole batch silently, so reject bad inputs up front.
  auto reject_nonfinite = [&](const std::vector<double>& v, const char* what) {
    for (double x : v)
      if (!std::isfinite(x))
        throw NumericError(std::string("make_batch: non-finite value in ") + what);
  };
  reject_nonfinite(feats, "1D features");
  reject_nonfinite(scal, "scalograms");
  reject_nonfinite(wave, "waveforms");
  BatchInputs b;
  b.feats = Tensor::from_data(std::move(feats), {n, 2, config.feat_count});
  b.scal = Tensor::from_data(std::move(scal), {n, 2, config.scal_rows, config.scal_cols});
  b.wave = Tensor::from_data(std::move(wave), {n, 2, config.wave_len});
  return b;
}

// ---------------------------------------------------------------------------
// Training

namespace {

struct BatchTargets {
  Tensor rul, mask, one_hot;
  std::size_t labeled = 0;
};

BatchTargets make_targets(const std::vector<const LabeledItem*>& batch,
                          std::size_t classes) {
  std::size_t n = batch.size();
  std::vector<double> rul(n, 0.0), mask(n, 0.0), one_hot(n * classes, 0.0);
  BatchTargets t;
  for (std::size_t i = 0; i < n; ++i) {
    const LabeledItem* item = batch[i];
    if (item->has_rul) {
      rul[i] = item->rul;
      mask[i] = 1.0;
      ++t.labeled;
    }
    if (item->oc_class < 0 || static_cast<std::size_t>(item->oc_class) >= classes)
      throw ShapeError("train: OC class " + std::to_string(item->oc_class) +
                       " outside [0, " + std::to_string(classes) + ")");
    one_hot[i * classes + static_cast<std::size_t>(item->oc_class)] = 1.0;
  }
  t.rul = Tensor::from_data(std::move(rul), {n, 1});
  t.mask = Tensor::from_data(std::move(mask), {n, 1});
  t.one_hot = Tensor::from_data(std::move(one_hot), {n, classes});
  return t;
}

std::size_t argmax_row(const std::vector<double>& v, std::size_t row, std::size_t cols) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < cols; ++c)
    if (v[row * cols + c] > v[row * cols + best]) best = c;
  return best;
}

struct Snapshot {
  std::vector<std::vector<double>> values;

  static Snapshot capture(const nn::NamedParams& params, const nn::NamedParams& state) {
    Snapshot s;
    s.values.reserve(params.size() + state.size());
    for (const auto& [name, t] : params) s.values.push_back(t.values());
    for (const auto& [name, t] : state) s.values.push_back(t.values());
    return s;
  }
  void restore(nn::NamedParams& params, nn::NamedParams& state) const {
    std::size_t i = 0;
    for (auto& [name, t] : params) t.values() = values[i++];
    for (auto& [name, t] : state) t.values() = values[i++];
  }
};

}  // namespace

TrainHistory train(MultiBranchNet& model, const std::vector<LabeledItem>& items,
                   const TrainOptions& options) {
  if (items.size() < 2) throw ConfigError("train: need at least 2 items");
  if (options.batch < 2)
    throw ConfigError("train: batch size must be at least 2 (batch norm needs it)");
  if (!(options.lambda >= 0.0 && options.lambda <= 1.0))
    throw ConfigError("train: lambda must lie in [0, 1]");

  nn::NamedParams params = model.named_params();
  nn::NamedParams state = model.named_state();
  auto opt = nn::make_optimizer(options.optimizer, options.lr);

  Rng shuffle_rng(mix64(options.seed) ^ 0x8f1bbcdcbfa53e0bULL);
  std::vector<std::size_t> order(items.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  nn::Mode mode;
  mode.train = true;
  mode.seed = options.seed;

  // Batch spans over the (shuffled) order. A trailing batch of one row would
  // break batch-norm statistics, so it borrows a row from its predecessor.
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  for (std::size_t start = 0; start < items.size(); start += options.batch)
    spans.emplace_back(start, std::min(options.batch, items.size() - start));
  if (spans.size() > 1 && spans.back().second == 1) {
    spans[spans.size() - 2].second -= 1;
    spans.back() = {items.size() - 2, 2};
  }

  Snapshot last_good = Snapshot::capture(params, state);
  TrainHistory history;
  double best_loss = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    EpochStats stats;
    double weight = 0.0;
    std::size_t correct = 0;

    for (std::size_t batch_no = 0; batch_no < spans.size(); ++batch_no) {
      auto [start, count] = spans[batch_no];
      std::vector<const LabeledItem*> batch(count);
      std::vector<const feat::FeatureSet*> fsets(count);
      for (std::size_t i = 0; i < count; ++i) {
        batch[i] = &items[order[start + i]];
        fsets[i] = batch[i]->features;
      }
      BatchInputs inputs = make_batch(fsets, model.config());
      BatchTargets targets = make_targets(batch, model.config().oc_classes);

      ++mode.step;
      // Exploding weights surface either as a non-finite loss value or as a
      // NumericError thrown inside the forward pass; both roll back to the
      // last completed epoch.
      try {
        NetOutput out = model.forward(inputs, mode);
        Tensor l_oc = nn::cross_entropy(out.oc, targets.one_hot);
        Tensor l_rul = targets.labeled > 0
                           ? nn::msle_masked(out.rul, targets.rul, targets.mask)
                           : Tensor::scalar(0.0);
        Tensor total = nn::total_loss(l_oc, l_rul, options.lambda);

        double total_val = total.item();
        if (!std::isfinite(total_val)) throw NumericError("non-finite loss");
        total.backward();
        opt->step(params);

        double w = static_cast<double>(count);
        stats.loss_total += total_val * w;
        stats.loss_oc += l_oc.item() * w;
        stats.loss_rul += (targets.labeled > 0 ? l_rul.item() : 0.0) * w;
        weight += w;
        const std::vector<double>& probs = out.oc.values();
        for (std::size_t i = 0; i < count; ++i) {
          std::size_t pred = argmax_row(probs, i, model.config().oc_classes);
          if (pred == static_cast<std::size_t>(batch[i]->oc_class)) ++correct;
        }
      } catch (const NumericError&) {
        last_good.restore(params, state);
        std::string where = "epoch " + std::to_string(epoch) + ", batch " +
                            std::to_string(batch_no);
        if (!options.checkpoint_dir.empty()) {
          std::filesystem::create_directories(options.checkpoint_dir);
          model.save(options.checkpoint_dir / "last_good.ckpt", opt.get());
          throw NumericError("training diverged (non-finite loss) at " + where +
                             "; parameters restored to the last completed epoch and "
                             "written to last_good.ckpt");
        }
        throw NumericError("training diverged (non-finite loss) at " + where +
                           "; parameters restored to the last completed epoch");
      }
    }

    stats.loss_total /= weight;
    stats.loss_oc /= weight;
    stats.loss_rul /= weight;
    stats.oc_accuracy = static_cast<double>(correct) / static_cast<double>(items.size());
    history.epochs.push_back(stats);
    last_good = Snapshot::capture(params, state);

    if (!options.checkpoint_dir.empty() && options.checkpoint_every > 0 &&
        (epoch + 1) % options.checkpoint_every == 0) {
      std::filesystem::create_directories(options.checkpoint_dir);
      model.save(options.checkpoint_dir / ("epoch_" + std::to_string(epoch + 1) + ".ckpt"),
                 opt.get());
    }

    if (stats.loss_total < best_loss) {
      best_loss = stats.loss_total;
      since_best = 0;
    } else if (options.early_stop_patience > 0 &&
               ++since_best >= options.early_stop_patience) {
      break;
    }
  }
  return history;
}

std::vector<metrics::PredictionRow> predict(MultiBranchNet& model,
                                            const std::vector<LabeledItem>& items,
                                            std::size_t batch) {
  if (items.empty()) throw ConfigError("predict: no items");
  if (batch == 0) throw ConfigError("predict: batch size must be positive");
  nn::Mode eval;
  std::vector<metrics::PredictionRow> rows;
  rows.reserve(items.size());
  for (std::size_t start = 0; start < items.size(); start += batch) {
    std::size_t count = std::min(batch, items.size() - start);
    std::vector<const feat::FeatureSet*> fsets(count);
    for (std::size_t i = 0; i < count; ++i) fsets[i] = items[start + i].features;
    BatchInputs inputs = make_batch(fsets, model.config());
    NetOutput out = model.forward(inputs, eval);
    const std::vector<double>& rul = out.rul.values();
    const std::vector<double>& probs = out.oc.values();
    for (std::size_t i = 0; i < count; ++i) {
      const LabeledItem& item = items[start + i];
      metrics::PredictionRow r;
      r.bearing_id = item.features->bearing_id;
      r.snapshot = item.features->snapshot;
      r.has_rul = item.has_rul;
      r.true_rul = item.rul;
      r.pred_rul = rul[i];
      // OC columns carry 1-based condition ids.
      r.true_oc = item.oc_class + 1;
      r.pred_oc = static_cast<int>(argmax_row(probs, i, model.config().oc_classes)) + 1;
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

std::vector<metrics::BearingMetrics> evaluate(MultiBranchNet& model,
                                              const std::vector<LabeledItem>& items,
                                              std::size_t batch) {
  return metrics::compute_metrics(predict(model, items, batch));
}

// ---------------------------------------------------------------------------
// Persistence

void MultiBranchNet::save(const std::filesystem::path& path,
                          const nn::Optimizer* opt) const {
  ckpt::Container c;
  auto put_list = [&c](const std::string& name, const std::vector<std::size_t>& v) {
    std::vector<double> d(v.begin(), v.end());
    std::size_t len = d.size();
    c.put(name, {len}, std::move(d));
  };
  put_list("cfg.feat_widths", config_.feat_widths);
  put_list("cfg.cbb_counts", config_.cbb_counts);
  put_list("cfg.cbb_channels", config_.cbb_channels);
  c.put_scalar("cfg.stem2d_kernel", static_cast<double>(config_.stem2d_kernel));
  c.put_scalar("cfg.stem2d_stride", static_cast<double>(config_.stem2d_stride));
  c.put_scalar("cfg.stem1d_kernel", static_cast<double>(config_.stem1d_kernel));
  c.put_scalar("cfg.stem1d_stride", static_cast<double>(config_.stem1d_stride));
  c.put_scalar("cfg.wave_pool_window", static_cast<double>(config_.wave_pool_window));
  c.put_scalar("cfg.dropout", config_.dropout);
  c.put_scalar("cfg.d_model", static_cast<double>(config_.d_model));
  c.put_scalar("cfg.attn_heads", static_cast<double>(config_.attn_heads));
  c.put_scalar("cfg.bilstm_hidden", static_cast<double>(config_.bilstm_hidden));
  c.put_scalar("cfg.oc_classes", static_cast<double>(config_.oc_classes));
  c.put_scalar("cfg.feat_count", static_cast<double>(config_.feat_count));
  c.put_scalar("cfg.scal_rows", static_cast<double>(config_.scal_rows));
  c.put_scalar("cfg.scal_cols", static_cast<double>(config_.scal_cols));
  c.put_scalar("cfg.wave_len", static_cast<double>(config_.wave_len));

  nn::NamedParams params, state;
  collect_all(params, state);
  ckpt::append_params(c, params);
  ckpt::append_params(c, state);
  if (opt) {
    nn::NamedParams opt_state = opt->state();
    ckpt::append_params(c, opt_state);
  }
  ckpt::save(c, path);
}

MultiBranchNet MultiBranchNet::load_file(const std::filesystem::path& path,
                                         nn::Optimizer* opt) {
  ckpt::Container c = ckpt::load(path);
  ModelConfig cfg;
  auto get_list = [&c](const std::string& name) {
    const ckpt::Entry& e = c.at(name);
    std::vector<std::size_t> v(e.values.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<std::size_t>(e.values[i]);
    return v;
  };
  auto get_scalar = [&c](const std::string& name) { return c.at(name).values[0]; };
  cfg.feat_widths = get_list("cfg.feat_widths");
  cfg.cbb_counts = get_list("cfg.cbb_counts");
  cfg.cbb_channels = get_list("cfg.cbb_channels");
  cfg.stem2d_kernel = static_cast<std::size_t>(get_scalar("cfg.stem2d_kernel"));
  cfg.stem2d_stride = static_cast<std::size_t>(get_scalar("cfg.stem2d_stride"));
  cfg.stem1d_kernel = static_cast<std::size_t>(get_scalar("cfg.stem1d_kernel"));
  cfg.stem1d_stride = static_cast<std::size_t>(get_scalar("cfg.stem1d_stride"));
  cfg.wave_pool_window = static_cast<std::size_t>(get_scalar("cfg.wave_pool_window"));
  cfg.dropout = get_scalar("cfg.dropout");
  cfg.d_model = static_cast<std::size_t>(get_scalar("cfg.d_model"));
  cfg.attn_heads = static_cast<std::size_t>(get_scalar("cfg.attn_heads"));
  cfg.bilstm_hidden = static_cast<std::size_t>(get_scalar("cfg.bilstm_hidden"));
  cfg.oc_classes = static_cast<std::size_t>(get_scalar("cfg.oc_classes"));
  cfg.feat_count = static_cast<std::size_t>(get_scalar("cfg.feat_count"));
  cfg.scal_rows = static_cast<std::size_t>(get_scalar("cfg.scal_rows"));
  cfg.scal_cols = static_cast<std::size_t>(get_scalar("cfg.scal_cols"));
  cfg.wave_len = static_cast<std::size_t>(get_scalar("cfg.wave_len"));

  MultiBranchNet model(cfg, /*seed=*/0);
  nn::NamedParams params, state;
  model.collect_all(params, state);
  ckpt::assign_params(c, params);
  ckpt::assign_params(c, state);
  if (opt) opt->load_state(ckpt::extract_prefixed(c, "opt."));
  return model;
}

}  // namespace rulkit::net
