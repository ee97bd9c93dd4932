#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <string>
#include <vector>

#include "cab/experiment.hpp"

// Exit codes: 0 success, 1 configuration error, 2 anything else.
int main(int argc, char** argv) {
  CLI::App app{"Clustering-of-bandits experiment runner"};
  std::string config_path;
  std::string mode, policy, out_dir;
  double alpha = 0.0, gamma = 0.0;
  int jobs = 1;
  std::int64_t stride = 1;
  std::vector<std::uint64_t> seeds;

  app.add_option("--config", config_path, "JSON config file");
  auto* mode_opt =
      app.add_option("--mode", mode, "simulate|replay|tune|diagnose|synth-log");
  auto* policy_opt = app.add_option(
      "--policy", policy,
      "cab|spcab|linucb-single|linucb-multiple|club|dynucb|ran");
  auto* alpha_opt =
      app.add_option("--alpha", alpha, "exploration multiplier override");
  auto* gamma_opt =
      app.add_option("--gamma", gamma, "cluster gap parameter override");
  auto* seeds_opt =
      app.add_option("--seeds", seeds, "run seeds, comma separated")
          ->delimiter(',');
  auto* jobs_opt = app.add_option("--jobs", jobs, "worker pool size");
  auto* out_opt = app.add_option("--out", out_dir, "output directory");
  auto* stride_opt =
      app.add_option("--stride", stride, "curve downsampling stride");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    cab::ExperimentConfig cfg;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in)
        throw cab::ConfigError("cannot open config file: " + config_path);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(in);
      } catch (const nlohmann::json::parse_error& e) {
        throw cab::ConfigError(config_path + ": " + e.what());
      }
      cfg = cab::ExperimentConfig::from_json(j);
    }
    if (mode_opt->count()) cfg.mode = mode;
    if (policy_opt->count()) cfg.policy = policy;
    if (alpha_opt->count()) cfg.policy_cfg.alpha = alpha;
    if (gamma_opt->count()) cfg.policy_cfg.gamma = gamma;
    if (seeds_opt->count()) cfg.seeds = seeds;
    if (jobs_opt->count()) cfg.jobs = jobs;
    if (out_opt->count()) cfg.out_dir = out_dir;
    if (stride_opt->count()) cfg.stride = stride;

    cab::run_experiment(cfg);
    return 0;
  } catch (const cab::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
