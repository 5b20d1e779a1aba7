#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "rulkit/attention.hpp"
#include "rulkit/checkpoint.hpp"
#include "rulkit/features.hpp"
#include "rulkit/layers.hpp"
#include "rulkit/lstm.hpp"
#include "rulkit/metrics.hpp"
#include "rulkit/optim.hpp"

namespace rulkit::net {

// Network sizing. paper() matches the published architecture; desk() shrinks
// every width so the full pipeline trains in minutes on a CPU.
struct ModelConfig {
  // 1D feature branch: conv widths over the 14-feature rows.
  std::vector<std::size_t> feat_widths = {28, 56, 56};
  // 2D scalogram / waveform branches.
  std::vector<std::size_t> cbb_counts = {3, 3, 5, 2};
  std::vector<std::size_t> cbb_channels = {64, 128, 256, 512};
  std::size_t stem2d_kernel = 7, stem2d_stride = 2;
  std::size_t stem1d_kernel = 15, stem1d_stride = 4;
  std::size_t wave_pool_window = 4;
  double dropout = 0.2;
  // AB-LSTM heads.
  std::size_t d_model = 512;
  std::size_t attn_heads = 16;
  std::size_t bilstm_hidden = 128;
  // Outputs.
  std::size_t oc_classes = 3;
  // Input geometry.
  std::size_t feat_count = 14;
  std::size_t scal_rows = 64, scal_cols = 64;
  std::size_t wave_len = 32768;

  static ModelConfig paper(std::size_t wave_len);
  static ModelConfig desk(std::size_t wave_len);
};

// conv -> batch norm -> ReLU -> dropout, the paper's residual-block stand-in.
struct Cbb1d {
  nn::Conv1d conv;
  nn::BatchNorm bn;
  nn::Dropout drop;
  nn::Tensor forward(const nn::Tensor& x, const nn::Mode& mode);
  void collect(const std::string& prefix, nn::NamedParams& params,
               nn::NamedParams& state) const;
};

struct Cbb2d {
  nn::Conv2d conv;
  nn::BatchNorm bn;
  nn::Dropout drop;
  nn::Tensor forward(const nn::Tensor& x, const nn::Mode& mode);
  void collect(const std::string& prefix, nn::NamedParams& params,
               nn::NamedParams& state) const;
};

// Two linear+dropout+ReLU stages into d_model, self-attention + dropout,
// Bi-LSTM + dropout + ReLU; the last step of the Bi-LSTM output is the head
// representation.
struct AbLstmHead {
  nn::Linear l1, l2;
  nn::MultiHeadAttention attn;
  nn::BiLstm bilstm;
  nn::Dropout d1, d2, d3, d4;
  std::size_t d_model = 0, out_dim = 0;

  AbLstmHead() = default;
  AbLstmHead(std::size_t in_features, std::size_t d_model, std::size_t heads,
             std::size_t bilstm_hidden, double dropout, std::uint64_t id_base, Rng& rng);
  nn::Tensor forward(const nn::Tensor& seq, const nn::Mode& mode) const;  // (N,T,F)->(N,out)
  void collect(const std::string& prefix, nn::NamedParams& out) const;
};

// Batched network inputs, built from FeatureSets.
struct BatchInputs {
  nn::Tensor feats;  // (N, 2, feat_count)
  nn::Tensor scal;   // (N, 2, scal_rows, scal_cols)
  nn::Tensor wave;   // (N, 2, wave_len)
};

BatchInputs make_batch(const std::vector<const feat::FeatureSet*>& items,
                       const ModelConfig& config);

struct NetOutput {
  nn::Tensor rul;  // (N, 1), sigmoid range
  nn::Tensor oc;   // (N, classes), softmax rows
};

class MultiBranchNet {
 public:
  MultiBranchNet() = default;
  MultiBranchNet(const ModelConfig& config, std::uint64_t seed);

  NetOutput forward(const BatchInputs& in, const nn::Mode& mode);
  // Branch sequence forms (N, T, F); exposed for shape tests.
  nn::Tensor branch_feat(const nn::Tensor& x, const nn::Mode& mode);
  nn::Tensor branch_scal(const nn::Tensor& x, const nn::Mode& mode);
  nn::Tensor branch_wave(const nn::Tensor& x, const nn::Mode& mode);

  const ModelConfig& config() const { return config_; }
  nn::NamedParams named_params();
  nn::NamedParams named_state();

  void save(const std::filesystem::path& path, const nn::Optimizer* opt = nullptr) const;
  static MultiBranchNet load_file(const std::filesystem::path& path,
                                  nn::Optimizer* opt = nullptr);

 private:
  ModelConfig config_;
  std::vector<Cbb1d> feat_stages_;
  Cbb2d stem2d_;
  nn::AvgPool2d stem2d_pool_;
  std::vector<Cbb2d> blocks2d_;
  Cbb1d stem1d_;
  nn::AvgPool1d stem1d_pool_;
  std::vector<Cbb1d> blocks1d_;
  nn::AvgPool1d wave_pool_;
  AbLstmHead head_feat_, head_scal_, head_wave_;
  nn::Linear rul_out_, oc_out_;

  void collect_all(nn::NamedParams& params, nn::NamedParams& state) const;
};

// One labeled training/eval item.
struct LabeledItem {
  const feat::FeatureSet* features = nullptr;
  bool has_rul = false;
  double rul = 0.0;
  int oc_class = 0;  // zero-based class index
};

struct TrainOptions {
  std::string optimizer = "rmsprop";
  double lr = 1e-3;
  std::size_t batch = 16;
  std::size_t epochs = 1000;
  double lambda = 0.6;
  std::uint64_t seed = 7;
  std::size_t checkpoint_every = 0;           // 0 = only final
  std::size_t early_stop_patience = 0;        // 0 = disabled
  std::filesystem::path checkpoint_dir;       // empty = no disk checkpoints
};

struct EpochStats {
  double loss_total = 0.0;
  double loss_rul = 0.0;
  double loss_oc = 0.0;
  double oc_accuracy = 0.0;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
};

// Mini-batch training over labeled items. Diverging (non-finite) loss
// restores the last epoch's parameters, writes last_good.ckpt when a
// checkpoint directory is set, and throws NumericError.
TrainHistory train(MultiBranchNet& model, const std::vector<LabeledItem>& items,
                   const TrainOptions& options);

// Eval-mode predictions for every item of every bearing.
std::vector<metrics::PredictionRow> predict(MultiBranchNet& model,
                                            const std::vector<LabeledItem>& items,
                                            std::size_t batch = 16);

// predict + compute_metrics.
std::vector<metrics::BearingMetrics> evaluate(MultiBranchNet& model,
                                              const std::vector<LabeledItem>& items,
                                              std::size_t batch = 16);

}  // namespace rulkit::net
