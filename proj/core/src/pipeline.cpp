#include "rulkit/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "rulkit/checkpoint.hpp"
#include "rulkit/denoiser.hpp"
#include "rulkit/errors.hpp"
#include "rulkit/hash.hpp"
#include "rulkit/labeling.hpp"
#include "rulkit/metrics.hpp"
#include "rulkit/model.hpp"

namespace rulkit::pipe {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Manifest plumbing

struct StagePlan {
  std::string stage;
  std::string cfg_hash;
  std::map<std::string, std::string> inputs;
  std::vector<fs::path> outputs;
};

std::string config_hash(const RunConfig& cfg, const std::vector<std::string>& keys) {
  std::map<std::string, std::string> all = cfg.canonical();
  std::string text = std::string("tool=") + kToolVersion + "\n";
  for (const std::string& k : keys) text += k + "=" + all.at(k) + "\n";
  return hex64(fnv1a64(text));
}

std::string file_hash(const fs::path& p) { return hex64(hash_file(p.string())); }

fs::path manifest_path(const RunConfig& cfg, const std::string& stage) {
  return cfg.manifest_dir() / (stage + ".json");
}

bool plan_matches(const RunConfig& cfg, const StagePlan& plan) {
  fs::path mp = manifest_path(cfg, plan.stage);
  if (!fs::exists(mp)) return false;
  Manifest m;
  try {
    m = read_manifest(mp);
  } catch (const std::exception&) {
    return false;
  }
  if (m.stage != plan.stage || m.config_hash != plan.cfg_hash) return false;
  if (m.input_hashes != plan.inputs) return false;
  for (const fs::path& out : plan.outputs)
    if (!fs::exists(out)) return false;
  return true;
}

void commit_plan(const RunConfig& cfg, const StagePlan& plan) {
  Manifest m;
  m.stage = plan.stage;
  m.config_hash = plan.cfg_hash;
  m.input_hashes = plan.inputs;
  for (const fs::path& out : plan.outputs) m.outputs.push_back(out.string());
  fs::create_directories(cfg.manifest_dir());
  write_manifest(m, manifest_path(cfg, plan.stage));
}

void require_artifact(const fs::path& p, const std::string& producer) {
  if (!fs::exists(p))
    throw IoError(p.string() + " not found; run " + producer + " first");
}

// ---------------------------------------------------------------------------
// Inventory

struct InvBearing {
  std::string id;
  int condition = 0;
  std::size_t snapshots = 0;
  fs::path dir;
  std::string digest;
  long long true_onset = -1;  // synthetic ground truth, -1 otherwise
};

std::string dir_digest(const fs::path& dir) {
  std::vector<std::pair<std::string, std::uintmax_t>> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file())
      files.emplace_back(entry.path().filename().string(), entry.file_size());
  std::sort(files.begin(), files.end());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& [name, size] : files) {
    std::string line = name + ":" + std::to_string(size) + "\n";
    h = fnv1a64(line.data(), line.size(), h);
  }
  return hex64(h);
}

void write_inventory(const RunConfig& cfg, const std::vector<InvBearing>& bearings) {
  json doc;
  doc["dataset"] = cfg.canonical().at("dataset");
  doc["bearings"] = json::array();
  for (const InvBearing& b : bearings) {
    json e;
    e["id"] = b.id;
    e["condition"] = b.condition;
    e["snapshots"] = b.snapshots;
    e["dir"] = b.dir.string();
    e["digest"] = b.digest;
    if (b.true_onset >= 0) e["true_onset"] = b.true_onset;
    doc["bearings"].push_back(e);
  }
  write_text_atomic(cfg.inventory_path(), doc.dump(2) + "\n");
}

std::vector<InvBearing> read_inventory(const RunConfig& cfg) {
  require_artifact(cfg.inventory_path(), "ingest");
  std::ifstream in(cfg.inventory_path());
  json doc;
  try {
    in >> doc;
  } catch (const std::exception& e) {
    throw IoError("cannot parse " + cfg.inventory_path().string() + ": " + e.what());
  }
  std::vector<InvBearing> out;
  for (const json& e : doc.at("bearings")) {
    InvBearing b;
    b.id = e.at("id").get<std::string>();
    b.condition = e.at("condition").get<int>();
    b.snapshots = e.at("snapshots").get<std::size_t>();
    b.dir = e.at("dir").get<std::string>();
    b.digest = e.at("digest").get<std::string>();
    if (e.contains("true_onset")) b.true_onset = e.at("true_onset").get<long long>();
    out.push_back(std::move(b));
  }
  return out;
}

data::VibrationRecord parse_bearing(const RunConfig& cfg, const fs::path& dir) {
  if (cfg.dataset == Dataset::PRONOSTIA) return data::parse_pronostia(dir);
  return data::parse_xjtu(dir, cfg.block_len());
}

std::vector<fs::path> find_bearing_dirs(const fs::path& root) {
  if (!fs::exists(root)) throw IoError("data root " + root.string() + " does not exist");
  std::vector<fs::path> out;
  for (auto it = fs::recursive_directory_iterator(root);
       it != fs::recursive_directory_iterator(); ++it) {
    if (it->is_directory() &&
        it->path().filename().string().rfind("Bearing", 0) == 0)
      out.push_back(it->path());
  }
  std::sort(out.begin(), out.end());
  if (out.empty())
    throw IoError("no Bearing* directories under " + root.string());
  return out;
}

// ---------------------------------------------------------------------------
// Derived module configs

feat::CwtConfig cwt_config(std::size_t block_len) {
  feat::CwtConfig c;
  // Largest scale whose Gaussian support still fits inside one block.
  double u_max = std::sqrt(2.0 * std::log(1e12)) / c.omega0;
  double cap = std::floor((static_cast<double>(block_len) / 2.0 - 1.0) / u_max);
  c.max_scale = std::min(c.max_scale, cap);
  return c;
}

dn::AutoencoderConfig ae_config(const RunConfig& cfg) {
  dn::AutoencoderConfig c;
  c.window_len = cfg.ae_window != 0
                     ? cfg.ae_window
                     : std::min<std::size_t>(512, cfg.block_len() / 4);
  if (cfg.preset == Preset::DESK) {
    c.enc1_units = 128;
    c.latent_units = 32;
  }
  return c;
}

net::ModelConfig model_config(const RunConfig& cfg) {
  return cfg.preset == Preset::DESK ? net::ModelConfig::desk(cfg.block_len())
                                    : net::ModelConfig::paper(cfg.block_len());
}

// ---------------------------------------------------------------------------
// Workspace data access

struct BearingData {
  std::string id;
  int condition = 0;
  std::vector<feat::FeatureSet> sets;
  label::RulLabel label;
  bool has_label = false;
};

std::vector<fs::path> list_feature_files(const RunConfig& cfg) {
  std::vector<fs::path> files;
  if (fs::exists(cfg.features_dir()))
    for (const auto& entry : fs::directory_iterator(cfg.features_dir()))
      if (entry.path().extension() == ".feat") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty())
    throw IoError("no feature files in " + cfg.features_dir().string() +
                  "; run extract first");
  return files;
}

std::vector<BearingData> load_bearing_features(const RunConfig& cfg) {
  std::vector<BearingData> out;
  for (const fs::path& f : list_feature_files(cfg)) {
    BearingData b;
    b.sets = load_feature_sets(f);
    if (b.sets.empty()) throw IoError("feature file " + f.string() + " is empty");
    b.id = b.sets.front().bearing_id;
    b.condition = b.sets.front().condition_id;
    out.push_back(std::move(b));
  }
  return out;
}

void write_label_csv(const fs::path& path, const label::RulLabel& lab,
                     std::size_t n_snapshots) {
  std::string body = "snapshot,rul,fpt,method\n";
  for (std::size_t t = 0; t < n_snapshots; ++t) {
    body += std::to_string(t) + ",";
    if (lab.covers(t)) body += fmt17(lab.at(t));
    body += "," + std::to_string(lab.fpt_index) + "," + lab.method + "\n";
  }
  write_text_atomic(path, body);
}

label::RulLabel read_label_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open label file " + path.string());
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(path.string(), 1, "empty label file");
  ++line_no;
  label::RulLabel lab;
  bool first_labeled = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string snapshot, rul, fpt, method;
    if (!std::getline(ss, snapshot, ',') || !std::getline(ss, rul, ',') ||
        !std::getline(ss, fpt, ',') || !std::getline(ss, method))
      throw ParseError(path.string(), line_no, "expected snapshot,rul,fpt,method");
    lab.method = method;
    if (rul.empty()) continue;
    if (first_labeled) {
      lab.fpt_index = std::stoull(fpt);
      first_labeled = false;
    }
    lab.values.push_back(std::stod(rul));
  }
  if (lab.values.empty())
    throw ParseError(path.string(), line_no, "label file has no labeled snapshots");
  return lab;
}

void attach_labels(const RunConfig& cfg, std::vector<BearingData>& bearings) {
  for (BearingData& b : bearings) {
    fs::path p = cfg.labels_dir() / (b.id + ".csv");
    require_artifact(p, "label");
    b.label = read_label_csv(p);
    b.has_label = true;
  }
}

std::vector<data::VibrationRecord> split_stubs(const std::vector<BearingData>& bearings) {
  std::vector<data::VibrationRecord> stubs;
  for (const BearingData& b : bearings) {
    data::VibrationRecord r;
    r.bearing_id = b.id;
    r.condition_id = b.condition;
    stubs.push_back(std::move(r));
  }
  return stubs;
}

const BearingData& bearing_by_id(const std::vector<BearingData>& bearings,
                                 const std::string& id) {
  for (const BearingData& b : bearings)
    if (b.id == id) return b;
  throw IoError("bearing '" + id + "' has no extracted features; run extract first");
}

std::vector<net::LabeledItem> items_for(const std::vector<BearingData>& bearings,
                                        const std::vector<std::string>& ids) {
  std::vector<net::LabeledItem> items;
  for (const std::string& id : ids) {
    const BearingData& b = bearing_by_id(bearings, id);
    for (std::size_t t = 0; t < b.sets.size(); ++t) {
      net::LabeledItem item;
      item.features = &b.sets[t];
      item.oc_class = b.condition - 1;
      if (b.has_label && b.label.covers(t)) {
        item.has_rul = true;
        item.rul = b.label.at(t);
      }
      items.push_back(item);
    }
  }
  return items;
}

void write_history_csv(const fs::path& path, const net::TrainHistory& history) {
  std::string body = "epoch,loss_total,loss_rul,loss_oc,oc_accuracy\n";
  for (std::size_t i = 0; i < history.epochs.size(); ++i) {
    const net::EpochStats& e = history.epochs[i];
    body += std::to_string(i) + "," + fmt17(e.loss_total) + "," + fmt17(e.loss_rul) +
            "," + fmt17(e.loss_oc) + "," + fmt17(e.oc_accuracy) + "\n";
  }
  write_text_atomic(path, body);
}

// Shared by train/sweep: fit on the plan's training bearings, save artifacts.
void train_into(const RunConfig& cfg, const std::vector<BearingData>& bearings,
                const data::SplitPlan& plan, const fs::path& model_out,
                const fs::path& history_out) {
  std::vector<net::LabeledItem> items = items_for(bearings, plan.train_bearings);
  net::MultiBranchNet model(model_config(cfg), cfg.seed);
  net::TrainOptions opt;
  opt.optimizer = cfg.optimizer;
  opt.lr = cfg.lr;
  opt.batch = cfg.batch;
  opt.epochs = cfg.epochs;
  opt.lambda = cfg.lambda;
  opt.seed = cfg.seed;
  opt.checkpoint_every = cfg.checkpoint_every;
  opt.early_stop_patience = cfg.early_stop_patience;
  opt.checkpoint_dir = model_out.parent_path() / "checkpoints";
  net::TrainHistory history = net::train(model, items, opt);
  fs::create_directories(model_out.parent_path());
  model.save(model_out);
  write_history_csv(history_out, history);
}

std::vector<metrics::BearingMetrics> evaluate_into(
    const RunConfig& cfg, const std::vector<BearingData>& bearings,
    const std::vector<std::string>& test_ids, const fs::path& model_file,
    const fs::path& pred_out, const fs::path& metrics_out) {
  net::MultiBranchNet model = net::MultiBranchNet::load_file(model_file);
  std::vector<net::LabeledItem> items = items_for(bearings, test_ids);
  std::vector<metrics::PredictionRow> rows = net::predict(model, items, cfg.batch);
  std::vector<metrics::BearingMetrics> ms = metrics::compute_metrics(rows);
  fs::create_directories(pred_out.parent_path());
  metrics::write_predictions_csv(pred_out, rows);
  metrics::write_metrics_csv(metrics_out, ms);
  return ms;
}

const std::vector<std::string> kSynthKeys = {
    "dataset",       "data_root",   "seed",        "synth_bearings",
    "synth_snapshots", "synth_block", "synth_noise", "synth_onset",
    "synth_growth"};

}  // namespace

// ---------------------------------------------------------------------------
// Public manifest IO

void write_text_atomic(const fs::path& path, const std::string& body) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << body;
    if (!out) throw IoError("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_manifest(const Manifest& m, const fs::path& path) {
  json doc;
  doc["stage"] = m.stage;
  doc["tool_version"] = m.tool_version;
  doc["config_hash"] = m.config_hash;
  doc["inputs"] = m.input_hashes;
  doc["outputs"] = m.outputs;
  write_text_atomic(path, doc.dump(2) + "\n");
}

Manifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const std::exception& e) {
    throw IoError("cannot parse manifest " + path.string() + ": " + e.what());
  }
  Manifest m;
  m.stage = doc.at("stage").get<std::string>();
  m.tool_version = doc.at("tool_version").get<std::string>();
  m.config_hash = doc.at("config_hash").get<std::string>();
  for (const auto& [k, v] : doc.at("inputs").items())
    m.input_hashes[k] = v.get<std::string>();
  for (const json& o : doc.at("outputs")) m.outputs.push_back(o.get<std::string>());
  return m;
}

// ---------------------------------------------------------------------------
// Feature container

void save_feature_sets(const std::vector<feat::FeatureSet>& sets, const fs::path& path) {
  if (sets.empty()) throw IoError("save_feature_sets: nothing to write");
  ckpt::Container c;
  const feat::FeatureSet& first = sets.front();
  c.put_scalar("meta.count", static_cast<double>(sets.size()));
  c.put_scalar("meta.condition", static_cast<double>(first.condition_id));
  c.put_scalar("meta.omega0", first.scal_h.omega0);
  std::vector<double> id_chars(first.bearing_id.begin(), first.bearing_id.end());
  std::size_t id_len = id_chars.size();
  c.put("meta.bearing", {id_len}, std::move(id_chars));
  c.put("meta.scales", {first.scal_h.scales.size()},
        std::vector<double>(first.scal_h.scales));
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const feat::FeatureSet& fs_i = sets[i];
    std::string p = "s" + std::to_string(i) + ".";
    c.put_scalar(p + "idx", static_cast<double>(fs_i.snapshot));
    c.put(p + "features", {2, feat::kFeaturesPerChannel},
          std::vector<double>(fs_i.features.begin(), fs_i.features.end()));
    std::vector<double> wave;
    wave.reserve(2 * fs_i.wave_h.size());
    wave.insert(wave.end(), fs_i.wave_h.begin(), fs_i.wave_h.end());
    wave.insert(wave.end(), fs_i.wave_v.begin(), fs_i.wave_v.end());
    c.put(p + "wave", {2, fs_i.wave_h.size()}, std::move(wave));
    std::vector<double> scal;
    scal.reserve(2 * fs_i.scal_h.values.size());
    scal.insert(scal.end(), fs_i.scal_h.values.begin(), fs_i.scal_h.values.end());
    scal.insert(scal.end(), fs_i.scal_v.values.begin(), fs_i.scal_v.values.end());
    c.put(p + "scal", {2, fs_i.scal_h.rows, fs_i.scal_h.cols}, std::move(scal));
  }
  ckpt::save(c, path);
}

std::vector<feat::FeatureSet> load_feature_sets(const fs::path& path) {
  ckpt::Container c = ckpt::load(path);
  std::size_t count = static_cast<std::size_t>(c.at("meta.count").values[0]);
  int condition = static_cast<int>(c.at("meta.condition").values[0]);
  double omega0 = c.at("meta.omega0").values[0];
  const ckpt::Entry& id_entry = c.at("meta.bearing");
  std::string bearing_id;
  for (double d : id_entry.values) bearing_id.push_back(static_cast<char>(d));
  std::vector<double> scales = c.at("meta.scales").values;

  std::vector<feat::FeatureSet> sets(count);
  for (std::size_t i = 0; i < count; ++i) {
    feat::FeatureSet& fs_i = sets[i];
    std::string p = "s" + std::to_string(i) + ".";
    fs_i.bearing_id = bearing_id;
    fs_i.condition_id = condition;
    fs_i.snapshot = static_cast<std::size_t>(c.at(p + "idx").values[0]);
    const ckpt::Entry& fe = c.at(p + "features");
    if (fe.values.size() != 2 * feat::kFeaturesPerChannel)
      throw IoError("feature file " + path.string() + ": bad feature vector length");
    std::copy(fe.values.begin(), fe.values.end(), fs_i.features.begin());
    const ckpt::Entry& we = c.at(p + "wave");
    std::size_t wl = we.dims.at(1);
    fs_i.wave_h.assign(we.values.begin(), we.values.begin() + wl);
    fs_i.wave_v.assign(we.values.begin() + wl, we.values.end());
    const ckpt::Entry& se = c.at(p + "scal");
    std::size_t rows = se.dims.at(1), cols = se.dims.at(2);
    fs_i.scal_h.rows = fs_i.scal_v.rows = rows;
    fs_i.scal_h.cols = fs_i.scal_v.cols = cols;
    fs_i.scal_h.omega0 = fs_i.scal_v.omega0 = omega0;
    fs_i.scal_h.scales = fs_i.scal_v.scales = scales;
    fs_i.scal_h.values.assign(se.values.begin(), se.values.begin() + rows * cols);
    fs_i.scal_v.values.assign(se.values.begin() + rows * cols, se.values.end());
  }
  return sets;
}

// ---------------------------------------------------------------------------
// Stages

StageResult stage_ingest(const RunConfig& cfg) {
  fs::create_directories(cfg.workspace);
  StagePlan plan;
  plan.stage = "ingest";
  plan.cfg_hash = config_hash(cfg, kSynthKeys);
  plan.outputs = {cfg.inventory_path()};

  if (cfg.dataset == Dataset::SYNTH) {
    for (int cond = 1; cond <= 3; ++cond)
      for (std::size_t b = 1; b <= cfg.synth_bearings; ++b)
        plan.outputs.push_back(cfg.raw_dir() /
                               ("Synth" + std::to_string(cond) + "_" + std::to_string(b)));
    if (plan_matches(cfg, plan)) return {false, "ingest: up to date"};

    std::vector<InvBearing> inv;
    for (int cond = 1; cond <= 3; ++cond) {
      for (std::size_t b = 1; b <= cfg.synth_bearings; ++b) {
        data::SynthConfig sc;
        sc.n_snapshots = cfg.synth_snapshots;
        sc.block_len = cfg.synth_block;
        sc.noise_std = cfg.synth_noise;
        sc.fault_onset = cfg.synth_onset;
        sc.growth_rate = cfg.synth_growth;
        sc.condition_id = cond;
        sc.bearing_id = "Synth" + std::to_string(cond) + "_" + std::to_string(b);
        data::SynthResult sr =
            data::synthesize_degradation(sc, mix64(cfg.seed) ^ fnv1a64(sc.bearing_id));
        fs::path dir = cfg.raw_dir() / sc.bearing_id;
        data::write_xjtu(sr.record, dir);
        InvBearing ib;
        ib.id = sc.bearing_id;
        ib.condition = cond;
        ib.snapshots = cfg.synth_snapshots;
        ib.dir = dir;
        ib.digest = dir_digest(dir);
        ib.true_onset = static_cast<long long>(sr.true_onset);
        inv.push_back(std::move(ib));
      }
    }
    write_inventory(cfg, inv);
    commit_plan(cfg, plan);
    return {true, "ingest: wrote " + std::to_string(inv.size()) + " synthetic bearings"};
  }

  // Real datasets: inventory only, data stays in place.
  std::vector<fs::path> dirs = find_bearing_dirs(cfg.data_root);
  for (const fs::path& d : dirs) plan.inputs["raw:" + d.string()] = dir_digest(d);
  if (plan_matches(cfg, plan)) return {false, "ingest: up to date"};

  std::vector<InvBearing> inv;
  for (const fs::path& d : dirs) {
    data::VibrationRecord rec = parse_bearing(cfg, d);
    InvBearing ib;
    ib.id = rec.bearing_id;
    ib.condition = rec.condition_id;
    ib.snapshots = rec.snapshots.size();
    ib.dir = d;
    ib.digest = dir_digest(d);
    inv.push_back(std::move(ib));
  }
  write_inventory(cfg, inv);
  commit_plan(cfg, plan);
  return {true, "ingest: indexed " + std::to_string(inv.size()) + " bearings"};
}

StageResult stage_denoise_train(const RunConfig& cfg) {
  std::vector<InvBearing> inv = read_inventory(cfg);
  StagePlan plan;
  plan.stage = "denoise-train";
  plan.cfg_hash = config_hash(cfg, {"dataset", "preset", "seed", "split", "held_out",
                                    "ae_window", "ae_epochs", "ae_lr", "ae_batch",
                                    "ae_max_blocks", "optimizer"});
  plan.inputs["inventory"] = file_hash(cfg.inventory_path());
  fs::path history_path = cfg.workspace / "ae_history.csv";
  plan.outputs = {cfg.denoiser_path(), history_path};
  if (plan_matches(cfg, plan)) return {false, "denoise-train: up to date"};

  // Fit on training-split bearings only so held-out data stays unseen.
  std::vector<data::VibrationRecord> stubs;
  for (const InvBearing& b : inv) {
    data::VibrationRecord r;
    r.bearing_id = b.id;
    r.condition_id = b.condition;
    stubs.push_back(std::move(r));
  }
  data::SplitPlan split = data::make_split(stubs, cfg.split, cfg.held_out);

  std::vector<data::SampleBlock> blocks;
  for (const InvBearing& b : inv) {
    if (std::find(split.train_bearings.begin(), split.train_bearings.end(), b.id) ==
        split.train_bearings.end())
      continue;
    data::VibrationRecord rec = parse_bearing(cfg, b.dir);
    for (data::SampleBlock& blk : rec.snapshots) blocks.push_back(std::move(blk));
  }
  if (blocks.size() > cfg.ae_max_blocks && cfg.ae_max_blocks > 0) {
    std::vector<data::SampleBlock> kept;
    kept.reserve(cfg.ae_max_blocks);
    for (std::size_t i = 0; i < cfg.ae_max_blocks; ++i)
      kept.push_back(std::move(blocks[i * blocks.size() / cfg.ae_max_blocks]));
    blocks = std::move(kept);
  }

  dn::AeTrainParams params;
  params.optimizer = cfg.optimizer;
  params.lr = cfg.ae_lr;
  params.batch = cfg.ae_batch;
  params.epochs = cfg.ae_epochs;
  params.seed = cfg.seed;
  dn::AeHistory history;
  dn::Autoencoder ae = dn::train_autoencoder(blocks, ae_config(cfg), params, &history);
  ae.save(cfg.denoiser_path());

  std::string body = "epoch,loss\n";
  for (std::size_t i = 0; i < history.epoch_loss.size(); ++i)
    body += std::to_string(i) + "," + fmt17(history.epoch_loss[i]) + "\n";
  write_text_atomic(history_path, body);
  commit_plan(cfg, plan);
  return {true, "denoise-train: trained on " + std::to_string(blocks.size()) + " blocks"};
}

StageResult stage_extract(const RunConfig& cfg) {
  std::vector<InvBearing> inv = read_inventory(cfg);
  StagePlan plan;
  plan.stage = "extract";
  plan.cfg_hash = config_hash(cfg, {"dataset", "denoise", "synth_block"});
  plan.inputs["inventory"] = file_hash(cfg.inventory_path());
  if (cfg.denoise) {
    require_artifact(cfg.denoiser_path(), "denoise-train");
    plan.inputs["denoiser"] = file_hash(cfg.denoiser_path());
  }
  for (const InvBearing& b : inv)
    plan.outputs.push_back(cfg.features_dir() / (b.id + ".feat"));
  if (plan_matches(cfg, plan)) return {false, "extract: up to date"};

  dn::Autoencoder ae;
  if (cfg.denoise) ae = dn::Autoencoder::load_file(cfg.denoiser_path());
  feat::CwtConfig cwt = cwt_config(cfg.block_len());
  fs::create_directories(cfg.features_dir());

  for (const InvBearing& b : inv) {
    data::VibrationRecord rec = parse_bearing(cfg, b.dir);
    std::vector<feat::FeatureSet> sets;
    sets.reserve(rec.snapshots.size());
    std::string csv =
        "bearing,snapshot,axis,rms,variance,peak,crest,kurtosis,clearance,shape,"
        "line_integral,peak_to_peak,skewness,impulse,fft_peak,fft_energy,fft_psd\n";
    for (const data::SampleBlock& blk : rec.snapshots) {
      data::SampleBlock input = blk;
      if (cfg.denoise) {
        dn::DenoisedBlock d = ae.denoise(blk);
        input.horizontal = std::move(d.horizontal);
        input.vertical = std::move(d.vertical);
      }
      feat::FeatureSet fs_i = feat::extract_all(input, cwt);
      fs_i.bearing_id = rec.bearing_id;
      fs_i.condition_id = rec.condition_id;
      for (std::size_t ch = 0; ch < 2; ++ch) {
        csv += rec.bearing_id + "," + std::to_string(fs_i.snapshot) + "," +
               (ch == 0 ? "h" : "v");
        for (std::size_t k = 0; k < feat::kFeaturesPerChannel; ++k)
          csv += "," + fmt17(fs_i.features[ch * feat::kFeaturesPerChannel + k]);
        csv += "\n";
      }
      sets.push_back(std::move(fs_i));
    }
    save_feature_sets(sets, cfg.features_dir() / (b.id + ".feat"));
    write_text_atomic(cfg.features_dir() / (b.id + ".csv"), csv);
  }
  commit_plan(cfg, plan);
  return {true, "extract: wrote features for " + std::to_string(inv.size()) + " bearings"};
}

StageResult stage_label(const RunConfig& cfg) {
  std::vector<fs::path> files = list_feature_files(cfg);
  StagePlan plan;
  plan.stage = "label";
  plan.cfg_hash = config_hash(cfg, {"hi_method", "fpt_window"});
  for (const fs::path& f : files)
    plan.inputs[f.filename().string()] = file_hash(f);
  for (const fs::path& f : files)
    plan.outputs.push_back(cfg.labels_dir() / (f.stem().string() + ".csv"));
  if (plan_matches(cfg, plan)) return {false, "label: up to date"};

  fs::create_directories(cfg.labels_dir());
  for (const fs::path& f : files) {
    std::vector<feat::FeatureSet> sets = load_feature_sets(f);
    std::size_t n = sets.size();
    label::RulLabel lab;
    if (cfg.hi_method == "fpt") {
      std::vector<double> indicator(n);
      for (std::size_t t = 0; t < n; ++t) indicator[t] = sets[t].features[0];  // rms, h
      label::FptResult fpt = cfg.fpt_window != 0
                                 ? label::detect_fpt(indicator, 0, cfg.fpt_window)
                                 : label::detect_fpt(indicator);
      lab = label::label_hi_fpt(fpt.fpt_index, n - 1);
    } else {
      std::vector<double> matrix;
      matrix.reserve(n * 2 * feat::kFeaturesPerChannel);
      for (const feat::FeatureSet& s : sets)
        matrix.insert(matrix.end(), s.features.begin(), s.features.end());
      lab = label::label_hi_pca(matrix, n, 2 * feat::kFeaturesPerChannel);
    }
    write_label_csv(cfg.labels_dir() / (f.stem().string() + ".csv"), lab, n);
  }
  commit_plan(cfg, plan);
  return {true, "label: wrote " + std::to_string(files.size()) + " label files (" +
                    cfg.hi_method + ")"};
}

namespace {

// Hash every feature and label file into a plan (train/evaluate/sweep inputs).
void add_feature_label_inputs(const RunConfig& cfg, StagePlan& plan) {
  for (const fs::path& f : list_feature_files(cfg)) {
    plan.inputs[f.filename().string()] = file_hash(f);
    fs::path lab = cfg.labels_dir() / (f.stem().string() + ".csv");
    require_artifact(lab, "label");
    plan.inputs[lab.filename().string() + ":label"] = file_hash(lab);
  }
}

const std::vector<std::string> kTrainKeys = {
    "dataset", "preset", "seed",   "split",   "held_out",
    "lambda",  "optimizer", "lr",  "batch",   "epochs",
    "checkpoint_every", "early_stop_patience", "synth_block"};

}  // namespace

StageResult stage_train(const RunConfig& cfg) {
  StagePlan plan;
  plan.stage = "train";
  plan.cfg_hash = config_hash(cfg, kTrainKeys);
  add_feature_label_inputs(cfg, plan);
  fs::path history_path = cfg.workspace / "history.csv";
  plan.outputs = {cfg.model_path(), history_path};
  if (plan_matches(cfg, plan)) return {false, "train: up to date"};

  std::vector<BearingData> bearings = load_bearing_features(cfg);
  attach_labels(cfg, bearings);
  data::SplitPlan split = data::make_split(split_stubs(bearings), cfg.split, cfg.held_out);
  train_into(cfg, bearings, split, cfg.model_path(), history_path);
  commit_plan(cfg, plan);
  return {true, "train: fitted on " + std::to_string(split.train_bearings.size()) +
                    " bearings, model at " + cfg.model_path().string()};
}

StageResult stage_evaluate(const RunConfig& cfg) {
  require_artifact(cfg.model_path(), "train");
  StagePlan plan;
  plan.stage = "evaluate";
  plan.cfg_hash = config_hash(cfg, {"dataset", "preset", "split", "held_out", "batch"});
  add_feature_label_inputs(cfg, plan);
  plan.inputs["model"] = file_hash(cfg.model_path());
  fs::path pred_path = cfg.workspace / "predictions.csv";
  fs::path metrics_path = cfg.workspace / "metrics.csv";
  plan.outputs = {pred_path, metrics_path};
  if (plan_matches(cfg, plan)) return {false, "evaluate: up to date"};

  std::vector<BearingData> bearings = load_bearing_features(cfg);
  attach_labels(cfg, bearings);
  data::SplitPlan split = data::make_split(split_stubs(bearings), cfg.split, cfg.held_out);
  std::vector<metrics::BearingMetrics> ms = evaluate_into(
      cfg, bearings, split.test_bearings, cfg.model_path(), pred_path, metrics_path);
  std::string msg = "evaluate:";
  for (const metrics::BearingMetrics& m : ms)
    msg += " " + m.bearing_id + " rmse=" + fmt17(m.rmse) + " mae=" + fmt17(m.mae) +
           " acc=" + fmt17(m.acc);
  commit_plan(cfg, plan);
  return {true, msg};
}

StageResult stage_predict(const RunConfig& cfg) {
  require_artifact(cfg.model_path(), "train");
  StagePlan plan;
  plan.stage = "predict";
  plan.cfg_hash = config_hash(cfg, {"dataset", "preset", "split", "held_out", "batch"});
  add_feature_label_inputs(cfg, plan);
  plan.inputs["model"] = file_hash(cfg.model_path());

  std::vector<BearingData> bearings = load_bearing_features(cfg);
  attach_labels(cfg, bearings);
  data::SplitPlan split = data::make_split(split_stubs(bearings), cfg.split, cfg.held_out);
  for (const std::string& id : split.test_bearings)
    plan.outputs.push_back(cfg.workspace / ("rul_curve_" + id + ".csv"));
  if (plan_matches(cfg, plan)) return {false, "predict: up to date"};

  net::MultiBranchNet model = net::MultiBranchNet::load_file(cfg.model_path());
  double period = cfg.snapshot_period_s();
  for (const std::string& id : split.test_bearings) {
    std::vector<net::LabeledItem> items = items_for(bearings, {id});
    std::vector<metrics::PredictionRow> rows = net::predict(model, items, cfg.batch);
    std::string body = "snapshot,seconds,true_rul,pred_rul\n";
    for (const metrics::PredictionRow& r : rows) {
      body += std::to_string(r.snapshot) + "," +
              fmt17(static_cast<double>(r.snapshot) * period) + ",";
      if (r.has_rul) body += fmt17(r.true_rul);
      body += "," + fmt17(r.pred_rul) + "\n";
    }
    write_text_atomic(cfg.workspace / ("rul_curve_" + id + ".csv"), body);
  }
  commit_plan(cfg, plan);
  return {true, "predict: wrote RUL curves for " +
                    std::to_string(split.test_bearings.size()) + " bearings"};
}

StageResult stage_sweep(const RunConfig& cfg) {
  StagePlan plan;
  plan.stage = "sweep";
  plan.cfg_hash = config_hash(cfg, kTrainKeys);
  add_feature_label_inputs(cfg, plan);
  fs::path summary_path = cfg.workspace / "sweep_metrics.csv";
  plan.outputs = {summary_path};
  if (plan_matches(cfg, plan)) return {false, "sweep: up to date"};

  std::vector<BearingData> bearings = load_bearing_features(cfg);
  attach_labels(cfg, bearings);
  std::vector<data::VibrationRecord> stubs = split_stubs(bearings);

  std::vector<metrics::BearingMetrics> all;
  for (const BearingData& held : bearings) {
    data::SplitPlan split =
        data::make_split(stubs, data::SplitRule::OC_INDEPENDENT, held.id);
    fs::path dir = cfg.workspace / "sweep" / held.id;
    fs::create_directories(dir);
    train_into(cfg, bearings, split, dir / "model.ckpt", dir / "history.csv");
    std::vector<metrics::BearingMetrics> ms =
        evaluate_into(cfg, bearings, split.test_bearings, dir / "model.ckpt",
                      dir / "predictions.csv", dir / "metrics.csv");
    all.insert(all.end(), ms.begin(), ms.end());
  }
  metrics::write_metrics_csv(summary_path, all);
  commit_plan(cfg, plan);
  return {true, "sweep: " + std::to_string(bearings.size()) + " leave-one-out runs"};
}

}  // namespace rulkit::pipe
