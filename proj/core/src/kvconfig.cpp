#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "rulkit/errors.hpp"
#include "rulkit/pipeline.hpp"

namespace rulkit::pipe {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects a number, got '" + v + "'");
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    // stoull would wrap "-3" around instead of failing
    if (v.find('-') != std::string::npos) throw std::invalid_argument(v);
    std::size_t pos = 0;
    unsigned long long u = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return u;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects a non-negative integer, got '" + v + "'");
  }
}

std::size_t to_size(const std::string& key, const std::string& v) {
  return static_cast<std::size_t>(to_u64(key, v));
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: " + key + " expects on/off, got '" + v + "'");
}

}  // namespace

KvConfig KvConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  KvConfig kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ParseError(path.string(), line_no, "expected key=value");
    std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw ParseError(path.string(), line_no, "empty key");
    kv.set(key, trim(t.substr(eq + 1)));
  }
  return kv;
}

void KvConfig::set(const std::string& key, const std::string& value) {
  entries_.insert_or_assign(key, value);
}

bool KvConfig::has(const std::string& key) const { return entries_.count(key) != 0; }

const std::string& KvConfig::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("config: missing required key '" + key + "'");
  return it->second;
}

std::string KvConfig::get_or(const std::string& key, const std::string& fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

RunConfig RunConfig::from_kv(const KvConfig& kv) {
  static const char* known[] = {
      "dataset",      "data_root",        "workspace",       "preset",
      "seed",         "split",            "held_out",        "hi_method",
      "fpt_window",   "lambda",           "optimizer",       "lr",
      "batch",        "epochs",           "checkpoint_every", "early_stop_patience",
      "denoise",      "ae_window",        "ae_epochs",       "ae_lr",
      "ae_batch",     "ae_max_blocks",    "synth_bearings",  "synth_snapshots",
      "synth_block",  "synth_noise",      "synth_onset",     "synth_growth",
  };
  for (const auto& [key, value] : kv.entries()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError("config: unknown key '" + key + "'");
  }

  RunConfig cfg;
  std::string ds = kv.get_or("dataset", "synth");
  if (ds == "synth") cfg.dataset = Dataset::SYNTH;
  else if (ds == "xjtu") cfg.dataset = Dataset::XJTU;
  else if (ds == "pronostia") cfg.dataset = Dataset::PRONOSTIA;
  else throw ConfigError("config: dataset must be synth|xjtu|pronostia, got '" + ds + "'");

  if (kv.has("data_root")) {
    cfg.data_root = kv.get("data_root");
  } else if (const char* env = std::getenv("RULKIT_DATA_ROOT")) {
    cfg.data_root = env;
  }
  cfg.workspace = kv.get_or("workspace", "work");

  std::string preset = kv.get_or("preset", "desk");
  if (preset == "desk") cfg.preset = Preset::DESK;
  else if (preset == "full") cfg.preset = Preset::FULL;
  else throw ConfigError("config: preset must be desk|full, got '" + preset + "'");

  cfg.seed = to_u64("seed", kv.get("seed"));  // mandatory

  cfg.split = data::parse_split_rule(kv.get_or("split", "oc_independent"));
  cfg.held_out = kv.get_or("held_out", "");
  cfg.hi_method = kv.get_or("hi_method", "fpt");
  if (cfg.hi_method != "fpt" && cfg.hi_method != "pca")
    throw ConfigError("config: hi_method must be fpt|pca, got '" + cfg.hi_method + "'");
  if (kv.has("fpt_window")) cfg.fpt_window = to_size("fpt_window", kv.get("fpt_window"));

  if (kv.has("lambda")) cfg.lambda = to_double("lambda", kv.get("lambda"));
  if (!(cfg.lambda >= 0.0 && cfg.lambda <= 1.0))
    throw ConfigError("config: lambda must lie in [0, 1]");
  cfg.optimizer = kv.get_or("optimizer", "rmsprop");
  if (kv.has("lr")) cfg.lr = to_double("lr", kv.get("lr"));
  if (kv.has("batch")) cfg.batch = to_size("batch", kv.get("batch"));
  if (kv.has("epochs")) cfg.epochs = to_size("epochs", kv.get("epochs"));
  if (kv.has("checkpoint_every"))
    cfg.checkpoint_every = to_size("checkpoint_every", kv.get("checkpoint_every"));
  if (kv.has("early_stop_patience"))
    cfg.early_stop_patience = to_size("early_stop_patience", kv.get("early_stop_patience"));

  if (kv.has("denoise")) cfg.denoise = to_bool("denoise", kv.get("denoise"));
  if (kv.has("ae_window")) cfg.ae_window = to_size("ae_window", kv.get("ae_window"));
  if (kv.has("ae_epochs")) cfg.ae_epochs = to_size("ae_epochs", kv.get("ae_epochs"));
  if (kv.has("ae_lr")) cfg.ae_lr = to_double("ae_lr", kv.get("ae_lr"));
  if (kv.has("ae_batch")) cfg.ae_batch = to_size("ae_batch", kv.get("ae_batch"));
  if (kv.has("ae_max_blocks"))
    cfg.ae_max_blocks = to_size("ae_max_blocks", kv.get("ae_max_blocks"));

  if (kv.has("synth_bearings"))
    cfg.synth_bearings = to_size("synth_bearings", kv.get("synth_bearings"));
  if (kv.has("synth_snapshots"))
    cfg.synth_snapshots = to_size("synth_snapshots", kv.get("synth_snapshots"));
  if (kv.has("synth_block")) cfg.synth_block = to_size("synth_block", kv.get("synth_block"));
  if (kv.has("synth_noise")) cfg.synth_noise = to_double("synth_noise", kv.get("synth_noise"));
  if (kv.has("synth_onset")) cfg.synth_onset = to_size("synth_onset", kv.get("synth_onset"));
  if (kv.has("synth_growth"))
    cfg.synth_growth = to_double("synth_growth", kv.get("synth_growth"));

  if (cfg.dataset != Dataset::SYNTH) {
    if (cfg.data_root.empty())
      throw ConfigError("config: data_root (or RULKIT_DATA_ROOT) is required for dataset " + ds);
  } else {
    if (cfg.synth_bearings == 0 || cfg.synth_snapshots < 4 || cfg.synth_block < 16)
      throw ConfigError("config: synthetic sizes too small");
    if (cfg.synth_onset + 2 >= cfg.synth_snapshots)
      throw ConfigError("config: synth_onset must leave at least 2 post-onset snapshots");
  }
  return cfg;
}

std::size_t RunConfig::block_len() const {
  switch (dataset) {
    case Dataset::SYNTH: return synth_block;
    case Dataset::XJTU: return 32768;
    case Dataset::PRONOSTIA: return 2560;
  }
  return synth_block;
}

double RunConfig::snapshot_period_s() const {
  switch (dataset) {
    case Dataset::SYNTH: return 10.0;
    case Dataset::XJTU: return 60.0;
    case Dataset::PRONOSTIA: return 10.0;
  }
  return 10.0;
}

std::map<std::string, std::string> RunConfig::canonical() const {
  std::map<std::string, std::string> m;
  m["dataset"] = dataset == Dataset::SYNTH ? "synth"
                 : dataset == Dataset::XJTU ? "xjtu" : "pronostia";
  m["data_root"] = data_root.string();
  m["workspace"] = workspace.string();
  m["preset"] = preset == Preset::DESK ? "desk" : "full";
  m["seed"] = std::to_string(seed);
  m["split"] = split == data::SplitRule::OC_INDEPENDENT ? "oc_independent" : "oc_dependent";
  m["held_out"] = held_out;
  m["hi_method"] = hi_method;
  m["fpt_window"] = std::to_string(fpt_window);
  m["lambda"] = fmt_double(lambda);
  m["optimizer"] = optimizer;
  m["lr"] = fmt_double(lr);
  m["batch"] = std::to_string(batch);
  m["epochs"] = std::to_string(epochs);
  m["checkpoint_every"] = std::to_string(checkpoint_every);
  m["early_stop_patience"] = std::to_string(early_stop_patience);
  m["denoise"] = denoise ? "on" : "off";
  m["ae_window"] = std::to_string(ae_window);
  m["ae_epochs"] = std::to_string(ae_epochs);
  m["ae_lr"] = fmt_double(ae_lr);
  m["ae_batch"] = std::to_string(ae_batch);
  m["ae_max_blocks"] = std::to_string(ae_max_blocks);
  m["synth_bearings"] = std::to_string(synth_bearings);
  m["synth_snapshots"] = std::to_string(synth_snapshots);
  m["synth_block"] = std::to_string(synth_block);
  m["synth_noise"] = fmt_double(synth_noise);
  m["synth_onset"] = std::to_string(synth_onset);
  m["synth_growth"] = fmt_double(synth_growth);
  return m;
}

}  // namespace rulkit::pipe
