#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "recpipe/config.hpp"
#include "recpipe/errors.hpp"
#include "recpipe/experiment.hpp"
#include "recpipe/logging.hpp"
#include "recpipe/metrics.hpp"
#include "recpipe/recommender.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitRuntimeError = 2;


int run_command(const std::string& config_path, const std::string& out_dir,
                std::optional<std::uint64_t> seed, unsigned workers,
                const std::string& dump_splits, bool validate_only) {
  recpipe::ParsedExperiment parsed;
  try {
    parsed = recpipe::load_config_file(config_path);
  } catch (const recpipe::ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfigError;
  }
  for (const auto& w : parsed.warnings) recpipe::warn(w);

  if (validate_only) {
    try {
      recpipe::validate_paths(parsed.config);
    } catch (const recpipe::ConfigError& e) {
      std::fprintf(stderr, "configuration error: %s\n", e.what());
      return kExitConfigError;
    }
    std::fputs("configuration valid; resolved plan:\n", stdout);
    std::fputs(recpipe::render_config(parsed.config).c_str(), stdout);
    return kExitOk;
  }

  recpipe::RunOptions options;
  options.workers = workers;
  options.seed_override = seed;
  if (!dump_splits.empty()) options.dump_splits = dump_splits;

  try {
    const recpipe::ExperimentResult result = recpipe::run_experiment(parsed.config, options);
    recpipe::write_reports(result, out_dir);
    std::size_t failures = 0;
    for (const auto& m : result.models) {
      if (m.failed) ++failures;
    }
    recpipe::log_line(recpipe::Stage::Info,
                      "experiment finished in " + std::to_string(result.wall_seconds) + " s (" +
                          std::to_string(result.models.size() - failures) + "/" +
                          std::to_string(result.models.size()) + " models succeeded)");
    return kExitOk;
  } catch (const recpipe::ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "runtime error: %s\n", e.what());
    return kExitRuntimeError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"recpipe: configuration-driven recommender experiment pipeline"};
  app.require_subcommand(0, 1);

  bool list_models = false;
  bool list_metrics = false;
  app.add_flag("--list-models", list_models, "print the registered recommender names and exit");
  app.add_flag("--list-metrics", list_metrics, "print the registered metric names and exit");

  std::string config_path;
  std::string out_dir = "results";
  std::string dump_splits;
  std::optional<std::uint64_t> seed;
  unsigned workers = 0;
  bool validate_only = false;

  CLI::App* run = app.add_subcommand("run", "run the experiment described by a configuration file");
  run->add_option("config", config_path, "experiment configuration file")->required();
  run->add_option("--out", out_dir, "output directory (default: results)");
  run->add_option("--seed", seed, "override experiment.random_seed");
  run->add_option("--workers", workers, "worker threads (default: hardware concurrency)");
  run->add_option("--dump-splits", dump_splits, "write each fold as train_<f>.tsv / test_<f>.tsv");
  run->add_flag("--validate-only", validate_only, "parse and check the configuration, then exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfigError;
  }

  if (list_models) {
    for (const auto& name : recpipe::registered_model_names()) {
      std::fprintf(stdout, "%s\n", name.c_str());
    }
    return kExitOk;
  }
  if (list_metrics) {
    for (const auto& info : recpipe::metric_registry()) {
      std::fprintf(stdout, "%s\n", info.name.c_str());
    }
    return kExitOk;
  }
  if (!run->parsed()) {
    std::fputs(app.help().c_str(), stderr);
    return kExitConfigError;
  }
  return run_command(config_path, out_dir, seed, workers, dump_splits, validate_only);
}
