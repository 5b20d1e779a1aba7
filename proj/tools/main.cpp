#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rulkit/errors.hpp"
#include "rulkit/pipeline.hpp"

namespace {

rulkit::pipe::StageResult dispatch(const std::string& stage,
                                   const rulkit::pipe::RunConfig& cfg) {
  using namespace rulkit::pipe;
  if (stage == "ingest") return stage_ingest(cfg);
  if (stage == "denoise-train") return stage_denoise_train(cfg);
  if (stage == "extract") return stage_extract(cfg);
  if (stage == "label") return stage_label(cfg);
  if (stage == "train") return stage_train(cfg);
  if (stage == "evaluate") return stage_evaluate(cfg);
  if (stage == "predict") return stage_predict(cfg);
  return stage_sweep(cfg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bearing remaining-useful-life and operating-condition pipeline"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_file;
  std::vector<std::string> overrides;
  app.add_option("-c,--config", config_file, "flat key=value config file");
  app.add_option("-s,--set", overrides,
                 "key=value override, wins over the config file (repeatable)");

  app.add_subcommand("ingest", "generate or index the raw dataset");
  app.add_subcommand("denoise-train", "fit the LSTM autoencoder on training bearings");
  app.add_subcommand("extract", "denoise and extract features per bearing");
  app.add_subcommand("label", "detect FPT and write RUL labels");
  app.add_subcommand("train", "fit the multi-branch network");
  app.add_subcommand("evaluate", "score the test split, write predictions + metrics");
  app.add_subcommand("predict", "write RUL-vs-time curves for test bearings");
  app.add_subcommand("sweep", "leave-one-bearing-out train/evaluate loop");

  CLI11_PARSE(app, argc, argv);

  try {
    rulkit::pipe::KvConfig kv;
    if (!config_file.empty()) kv = rulkit::pipe::KvConfig::from_file(config_file);
    for (const std::string& pair : overrides) {
      std::size_t eq = pair.find('=');
      if (eq == std::string::npos || eq == 0)
        throw rulkit::ConfigError("--set expects key=value, got '" + pair + "'");
      kv.set(pair.substr(0, eq), pair.substr(eq + 1));
    }
    rulkit::pipe::RunConfig cfg = rulkit::pipe::RunConfig::from_kv(kv);
    rulkit::pipe::StageResult res =
        dispatch(app.get_subcommands().front()->get_name(), cfg);
    std::printf("%s\n", res.message.c_str());
    return 0;
  } catch (const rulkit::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const rulkit::ShapeError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const rulkit::IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 3;
  } catch (const rulkit::NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
