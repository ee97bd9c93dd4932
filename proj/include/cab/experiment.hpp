#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "cab/baselines.hpp"
#include "cab/env.hpp"
#include "cab/model.hpp"
#include "cab/replay.hpp"
#include "cab/sparse.hpp"

namespace cab {

struct TuneGridConfig {
  std::vector<double> alpha_grid;         // default 0, 0.01, ..., 0.2
  std::vector<double> club_alpha2_grid;   // default 0.1, ..., 0.5
  std::vector<int> dynucb_cluster_grid;   // empty = powers of two up to n
  double split = 0.2;
};

struct DiagnoseConfig {
  std::int64_t samples = 10000;  // contexts for empirical statistics
  double eta = -1.0;             // <0 = derive from the gamma/4 update gate
  int hd_rounds = 10;            // prefix length fed to the hardness probes
};

struct ExperimentConfig {
  std::string mode = "simulate";  // simulate|replay|tune|diagnose|synth-log
  std::string policy = "cab";     // cab|spcab|linucb-single|linucb-multiple|
                                  // club|dynucb|ran
  PolicyConfig policy_cfg;
  ClubConfig club;
  DynUcbConfig dynucb;
  SparseConfig sparse;
  EnvConfig env;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::string out_dir = "out";
  std::int64_t stride = 100;
  int jobs = 1;
  std::vector<std::string> metrics;  // empty = mode default
  std::string log_events;            // replay-format CSV (replay/tune)
  std::string log_catalog;           // optional feature catalog CSV
  std::string log_raw;               // raw-format CSV (synth-log)
  TuneGridConfig tune;
  SynthOptions synth;
  DiagnoseConfig diagnose;

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;  // fully materialized, round-trips
  void validate() const;
  std::vector<std::string> effective_metrics() const;
};

// Deterministic composition of a base seed and a run/stream tag.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t tag);

std::unique_ptr<Policy> make_policy(const ExperimentConfig& cfg, int n_users,
                                    int dim, std::uint64_t run_seed,
                                    ExecMode mode);

// One simulated run: shared round stream, policy choices, and ground truth.
struct SimulationResult {
  std::uint64_t seed = 0;
  std::vector<double> inst_regret;
  std::vector<double> payoffs;
  std::vector<double> ran_inst_regret;  // filled when ratio_baseline
};

SimulationResult simulate_run(const ExperimentConfig& cfg, std::uint64_t run_seed,
                              bool ratio_baseline, ExecMode mode);

// Executes the configured mode, writing curves.csv / summary.json /
// resolved_config.json (and synth_log.csv for synth-log) under out_dir.
void run_experiment(const ExperimentConfig& cfg);

}  // namespace cab
