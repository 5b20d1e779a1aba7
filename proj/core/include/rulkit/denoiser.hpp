#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rulkit/checkpoint.hpp"
#include "rulkit/data.hpp"
#include "rulkit/lstm.hpp"

namespace rulkit::dn {

// LSTM-Autoencoder sizing. Each channel block is framed into
// (block_len / window_len) steps of window_len features; the encoder stack
// compresses to latent_units, a repeat-vector feeds the mirrored decoder,
// and a time-distributed linear restores window_len per step.
struct AutoencoderConfig {
  std::size_t window_len = 512;
  std::size_t enc1_units = 512;
  std::size_t latent_units = 64;
  double dropout_rate = 0.2;
};

struct AeTrainParams {
  std::string optimizer = "rmsprop";
  double lr = 1e-3;
  std::size_t batch = 16;
  std::size_t epochs = 300;
  std::uint64_t seed = 7;
};

struct DenoisedBlock {
  std::vector<double> horizontal;
  std::vector<double> vertical;
  double reconstruction_error = 0.0;  // per-sample MSE vs the input block
  std::size_t index = 0;
};

class Autoencoder {
 public:
  Autoencoder() = default;
  Autoencoder(const AutoencoderConfig& config, std::uint64_t seed);

  // (N, steps, window_len) -> same shape reconstruction.
  nn::Tensor forward(const nn::Tensor& x, const nn::Mode& mode) const;

  // Standardizes per channel block, reconstructs, de-standardizes. Both
  // channels share the model. Dropout is off (eval mode).
  DenoisedBlock denoise(const data::SampleBlock& block) const;

  // Latent sequence summary (N, latent_units) for a framed input.
  nn::Tensor encode(const nn::Tensor& x, const nn::Mode& mode) const;

  const AutoencoderConfig& config() const { return config_; }
  nn::NamedParams named_params() const;
  void save(const std::filesystem::path& path) const;
  static Autoencoder load_file(const std::filesystem::path& path);

 private:
  AutoencoderConfig config_;
  nn::LstmParams enc1_, enc2_, dec1_, dec2_;
  nn::Linear out_;
  nn::Dropout drop_enc1_, drop_latent_, drop_dec1_, drop_dec2_;
};

struct AeHistory {
  std::vector<double> epoch_loss;  // mean per-element squared error
};

// Trains on every channel of every block (channels are independent samples).
// Throws NumericError with epoch/batch/grad-norm diagnostics when the loss
// leaves the finite range.
Autoencoder train_autoencoder(const std::vector<data::SampleBlock>& blocks,
                              const AutoencoderConfig& config, const AeTrainParams& params,
                              AeHistory* history = nullptr);

// Frames one channel into (1, steps, window_len) after standardization;
// returns the scale used so the output can be mapped back.
struct FramedChannel {
  nn::Tensor x;
  double mean = 0.0;
  double scale = 1.0;
};
FramedChannel frame_channel(const std::vector<double>& channel, std::size_t window_len);

}  // namespace rulkit::dn
