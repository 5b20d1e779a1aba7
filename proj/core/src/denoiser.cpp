#include "rulkit/denoiser.hpp"

#include <algorithm>
#include <cmath>

#include "rulkit/errors.hpp"
#include "rulkit/loss.hpp"
#include "rulkit/ops.hpp"
#include "rulkit/optim.hpp"

namespace rulkit::dn {

using nn::Tensor;
using nn::shape_str;

Autoencoder::Autoencoder(const AutoencoderConfig& config, std::uint64_t seed)
    : config_(config) {
  if (config.window_len == 0 || config.enc1_units == 0 || config.latent_units == 0)
    throw ConfigError("autoencoder: all layer widths must be positive");
  Rng rng(seed);
  enc1_ = nn::LstmParams(config.window_len, config.enc1_units, rng);
  enc2_ = nn::LstmParams(config.enc1_units, config.latent_units, rng);
  dec1_ = nn::LstmParams(config.latent_units, config.latent_units, rng);
  dec2_ = nn::LstmParams(config.latent_units, config.enc1_units, rng);
  out_ = nn::Linear(config.enc1_units, config.window_len, rng);
  drop_enc1_ = nn::Dropout(config.dropout_rate, 101);
  drop_latent_ = nn::Dropout(config.dropout_rate, 102);
  drop_dec1_ = nn::Dropout(config.dropout_rate, 103);
  drop_dec2_ = nn::Dropout(config.dropout_rate, 104);
}

nn::Tensor Autoencoder::encode(const Tensor& x, const nn::Mode& mode) const {
  if (x.rank() != 3 || x.dim(2) != config_.window_len)
    throw ShapeError("autoencoder: expected (N, steps, " +
                     std::to_string(config_.window_len) + "), got " + shape_str(x.shape()));
  Tensor h1 = drop_enc1_.forward(nn::lstm_scan(x, enc1_), mode);
  Tensor h2 = nn::lstm_scan(h1, enc2_);
  Tensor latent = nn::select_step(h2, x.dim(1) - 1);  // (N, latent)
  return drop_latent_.forward(latent, mode);
}

nn::Tensor Autoencoder::forward(const Tensor& x, const nn::Mode& mode) const {
  std::size_t steps = x.dim(1);
  Tensor latent = encode(x, mode);
  // RepeatVector: the latent seeds every decoder step.
  std::vector<Tensor> repeated(steps, latent);
  Tensor dec_in = nn::stack_steps(repeated);  // (N, steps, latent)
  Tensor d1 = drop_dec1_.forward(nn::lstm_scan(dec_in, dec1_), mode);
  Tensor d2 = drop_dec2_.forward(nn::lstm_scan(d1, dec2_), mode);
  // Time-distributed linear back to window_len features per step.
  std::size_t n = x.dim(0);
  Tensor flat = nn::reshape(d2, {n * steps, config_.enc1_units});
  Tensor y = out_.forward(flat);
  return nn::reshape(y, {n, steps, config_.window_len});
}

FramedChannel frame_channel(const std::vector<double>& channel, std::size_t window_len) {
  if (window_len == 0 || channel.empty() || channel.size() % window_len != 0)
    throw ShapeError("autoencoder: block length " + std::to_string(channel.size()) +
                     " is not a multiple of window_len " + std::to_string(window_len));
  FramedChannel f;
  double mean = 0.0;
  for (double v : channel) mean += v;
  mean /= static_cast<double>(channel.size());
  double var = 0.0;
  for (double v : channel) {
    double d = v - mean;
    var += d * d;
  }
  var /= static_cast<double>(channel.size());
  f.mean = mean;
  f.scale = var > 1e-24 ? std::sqrt(var) : 1.0;
  std::vector<double> std_vals(channel.size());
  for (std::size_t i = 0; i < channel.size(); ++i)
    std_vals[i] = (channel[i] - mean) / f.scale;
  std::size_t steps = channel.size() / window_len;
  f.x = Tensor::from_data(std::move(std_vals), {1, steps, window_len});
  return f;
}

DenoisedBlock Autoencoder::denoise(const data::SampleBlock& block) const {
  if (block.horizontal.size() != block.vertical.size())
    throw ShapeError("autoencoder: channel lengths disagree");
  nn::Mode eval;
  DenoisedBlock out;
  out.index = block.index;
  double err_sum = 0.0;
  for (std::size_t ch = 0; ch < 2; ++ch) {
    const std::vector<double>& src = ch == 0 ? block.horizontal : block.vertical;
    std::vector<double>& dst = ch == 0 ? out.horizontal : out.vertical;
    FramedChannel f = frame_channel(src, config_.window_len);
    Tensor y = forward(f.x, eval);
    const std::vector<double>& rec = y.values();
    dst.resize(src.size());
    for (std::size_t i = 0; i < src.size(); ++i) {
      dst[i] = rec[i] * f.scale + f.mean;
      double d = dst[i] - src[i];
      err_sum += d * d;
    }
  }
  out.reconstruction_error = err_sum / static_cast<double>(2 * block.horizontal.size());
  return out;
}

nn::NamedParams Autoencoder::named_params() const {
  nn::NamedParams p;
  enc1_.collect("ae.enc1", p);
  enc2_.collect("ae.enc2", p);
  dec1_.collect("ae.dec1", p);
  dec2_.collect("ae.dec2", p);
  out_.collect("ae.out", p);
  return p;
}

void Autoencoder::save(const std::filesystem::path& path) const {
  ckpt::Container c;
  c.put_scalar("ae.config.window_len", static_cast<double>(config_.window_len));
  c.put_scalar("ae.config.enc1_units", static_cast<double>(config_.enc1_units));
  c.put_scalar("ae.config.latent_units", static_cast<double>(config_.latent_units));
  c.put_scalar("ae.config.dropout_rate", config_.dropout_rate);
  nn::NamedParams p = named_params();
  ckpt::append_params(c, p);
  ckpt::save(c, path);
}

Autoencoder Autoencoder::load_file(const std::filesystem::path& path) {
  ckpt::Container c = ckpt::load(path);
  AutoencoderConfig config;
  config.window_len = static_cast<std::size_t>(c.at("ae.config.window_len").values[0]);
  config.enc1_units = static_cast<std::size_t>(c.at("ae.config.enc1_units").values[0]);
  config.latent_units = static_cast<std::size_t>(c.at("ae.config.latent_units").values[0]);
  config.dropout_rate = c.at("ae.config.dropout_rate").values[0];
  Autoencoder model(config, /*seed=*/0);
  nn::NamedParams p = model.named_params();
  ckpt::assign_params(c, p);
  return model;
}

Autoencoder train_autoencoder(const std::vector<data::SampleBlock>& blocks,
                              const AutoencoderConfig& config, const AeTrainParams& params,
                              AeHistory* history) {
  if (blocks.empty()) throw ConfigError("autoencoder: no training blocks");
  if (params.batch == 0) throw ConfigError("autoencoder: batch size must be positive");

  Autoencoder model(config, params.seed);
  nn::NamedParams learnable = model.named_params();
  std::unique_ptr<nn::Optimizer> opt = nn::make_optimizer(params.optimizer, params.lr);

  // Every channel block is one training sequence.
  std::vector<FramedChannel> samples;
  samples.reserve(2 * blocks.size());
  for (const auto& b : blocks) {
    samples.push_back(frame_channel(b.horizontal, config.window_len));
    samples.push_back(frame_channel(b.vertical, config.window_len));
  }
  std::size_t steps = samples.front().x.dim(1);

  Rng shuffle_rng(params.seed ^ 0x5eedull);
  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  nn::Mode mode;
  mode.train = true;
  mode.seed = params.seed;

  if (history) history->epoch_loss.clear();
  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t item_count = 0;
    for (std::size_t start = 0, batch_no = 0; start < order.size();
         start += params.batch, ++batch_no) {
      std::size_t count = std::min(params.batch, order.size() - start);
      std::vector<double> vals;
      vals.reserve(count * steps * config.window_len);
      for (std::size_t i = 0; i < count; ++i) {
        const auto& v = samples[order[start + i]].x.values();
        vals.insert(vals.end(), v.begin(), v.end());
      }
      Tensor x = Tensor::from_data(std::move(vals), {count, steps, config.window_len});
      ++mode.step;
      Tensor recon = model.forward(x, mode);
      Tensor loss = nn::mse(recon, x);
      double loss_val = loss.item();
      if (!std::isfinite(loss_val)) {
        double grad_norm = 0.0;
        for (auto& [name, t] : learnable)
          for (double g : t.grad()) grad_norm += g * g;
        throw NumericError("autoencoder training diverged: non-finite loss at epoch " +
                           std::to_string(epoch) + ", batch " + std::to_string(batch_no) +
                           " (last grad norm " + std::to_string(std::sqrt(grad_norm)) + ")");
      }
      loss.backward();
      opt->step(learnable);
      loss_sum += loss_val * static_cast<double>(count);
      item_count += count;
    }
    if (history) history->epoch_loss.push_back(loss_sum / static_cast<double>(item_count));
  }
  return model;
}

}  // namespace rulkit::dn
