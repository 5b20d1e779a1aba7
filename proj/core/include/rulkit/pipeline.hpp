#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rulkit/data.hpp"
#include "rulkit/features.hpp"

namespace rulkit::pipe {

inline constexpr const char* kToolVersion = "0.1.0";

// Flat key=value config. '#' starts a comment, blank lines are skipped,
// later assignments win. Command-line overrides call set().
class KvConfig {
 public:
  static KvConfig from_file(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;
  const std::string& get(const std::string& key) const;  // throws ConfigError
  std::string get_or(const std::string& key, const std::string& fallback) const;
  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

enum class Dataset { SYNTH, XJTU, PRONOSTIA };
enum class Preset { DESK, FULL };

// Everything a run needs. from_kv() validates key names and types, fills
// defaults, and reads RULKIT_DATA_ROOT when data_root is absent.
struct RunConfig {
  Dataset dataset = Dataset::SYNTH;
  std::filesystem::path data_root;
  std::filesystem::path workspace = "work";
  Preset preset = Preset::DESK;
  std::uint64_t seed = 0;

  data::SplitRule split = data::SplitRule::OC_INDEPENDENT;
  std::string held_out;
  std::string hi_method = "fpt";  // "fpt" | "pca"
  std::size_t fpt_window = 0;     // 0 = first 10% of snapshots

  double lambda = 0.6;
  std::string optimizer = "rmsprop";
  double lr = 1e-3;
  std::size_t batch = 16;
  std::size_t epochs = 1000;
  std::size_t checkpoint_every = 0;
  std::size_t early_stop_patience = 0;

  bool denoise = true;
  std::size_t ae_window = 0;  // 0 = min(512, block_len / 4)
  std::size_t ae_epochs = 30;
  double ae_lr = 1e-3;
  std::size_t ae_batch = 16;
  std::size_t ae_max_blocks = 64;  // training-block cap, evenly subsampled

  std::size_t synth_bearings = 2;  // per condition, 3 conditions
  std::size_t synth_snapshots = 60;
  std::size_t synth_block = 1024;
  double synth_noise = 0.2;
  std::size_t synth_onset = 30;
  double synth_growth = 0.4;

  static RunConfig from_kv(const KvConfig& kv);

  std::size_t block_len() const;  // snapshot length for the active dataset
  double snapshot_period_s() const;

  std::filesystem::path raw_dir() const { return workspace / "raw"; }
  std::filesystem::path manifest_dir() const { return workspace / "manifests"; }
  std::filesystem::path inventory_path() const { return workspace / "inventory.json"; }
  std::filesystem::path denoiser_path() const { return workspace / "denoiser.ckpt"; }
  std::filesystem::path features_dir() const { return workspace / "features"; }
  std::filesystem::path labels_dir() const { return workspace / "labels"; }
  std::filesystem::path model_path() const { return workspace / "model.ckpt"; }

  // Canonical key=value view of every field, for manifest hashing.
  std::map<std::string, std::string> canonical() const;
};

// Per-stage provenance. A stage whose config hash, input hashes, and output
// files all match the stored manifest is a no-op on re-run.
struct Manifest {
  std::string stage;
  std::string tool_version = kToolVersion;
  std::string config_hash;
  std::map<std::string, std::string> input_hashes;  // path -> fnv1a hex
  std::vector<std::string> outputs;
};

void write_manifest(const Manifest& m, const std::filesystem::path& path);
Manifest read_manifest(const std::filesystem::path& path);

struct StageResult {
  bool ran = false;  // false = manifest matched, nothing to do
  std::string message;
};

StageResult stage_ingest(const RunConfig& cfg);
StageResult stage_denoise_train(const RunConfig& cfg);
StageResult stage_extract(const RunConfig& cfg);
StageResult stage_label(const RunConfig& cfg);
StageResult stage_train(const RunConfig& cfg);
StageResult stage_evaluate(const RunConfig& cfg);
StageResult stage_predict(const RunConfig& cfg);
StageResult stage_sweep(const RunConfig& cfg);

// Feature container round-trip (same binary format as checkpoints).
void save_feature_sets(const std::vector<feat::FeatureSet>& sets,
                       const std::filesystem::path& path);
std::vector<feat::FeatureSet> load_feature_sets(const std::filesystem::path& path);

// Atomic text write: temp file in the same directory, then rename.
void write_text_atomic(const std::filesystem::path& path, const std::string& body);

}  // namespace rulkit::pipe
