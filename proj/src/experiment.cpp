#include "cab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <thread>

#include "cab/cab_policy.hpp"
#include "cab/metrics.hpp"
#include "cab/spcab_policy.hpp"

namespace cab {

namespace {

using nlohmann::json;

// ------------------------------------------------------------- json utils --

void check_keys(const json& j, const std::vector<std::string>& allowed,
                const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw ConfigError("unknown config key '" + it.key() + "' in " + where);
}

template <typename T>
void get_to(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    j.at(key).get_to(out);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for config key '") + key +
                      "': " + e.what());
  }
}

std::string schedule_name(AlphaSchedule s) {
  return s == AlphaSchedule::experimental ? "experimental" : "theoretical";
}
AlphaSchedule schedule_from(const std::string& s) {
  if (s == "experimental") return AlphaSchedule::experimental;
  if (s == "theoretical") return AlphaSchedule::theoretical;
  throw ConfigError("policy_cfg.alpha_schedule must be 'experimental' or 'theoretical'");
}

std::string structure_name(EnvStructure s) {
  return s == EnvStructure::global ? "global" : "block";
}
EnvStructure structure_from(const std::string& s) {
  if (s == "global") return EnvStructure::global;
  if (s == "block") return EnvStructure::block;
  throw ConfigError("env.structure must be 'global' or 'block'");
}

std::string noise_name(NoiseKind k) {
  return k == NoiseKind::truncated_gaussian ? "truncated_gaussian"
                                            : "uniform_bounded";
}
NoiseKind noise_from(const std::string& s) {
  if (s == "truncated_gaussian") return NoiseKind::truncated_gaussian;
  if (s == "uniform_bounded") return NoiseKind::uniform_bounded;
  throw ConfigError("env.noise_kind must be 'truncated_gaussian' or 'uniform_bounded'");
}

std::string sampler_name(ContextSampler s) {
  return s == ContextSampler::unit_ball_uniform ? "unit_ball_uniform" : "one_hot";
}
ContextSampler sampler_from(const std::string& s) {
  if (s == "unit_ball_uniform") return ContextSampler::unit_ball_uniform;
  if (s == "one_hot") return ContextSampler::one_hot;
  throw ConfigError("env.context_sampler must be 'unit_ball_uniform' or 'one_hot'");
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ------------------------------------------------------------ worker pool --

void run_indexed(int n_tasks, int jobs, const std::function<void(int)>& fn) {
  if (jobs <= 1 || n_tasks <= 1) {
    for (int i = 0; i < n_tasks; ++i) fn(i);
    return;
  }
  const int workers = std::min(jobs, n_tasks);
  std::vector<std::exception_ptr> errors(n_tasks);
  std::atomic<int> next{0};
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (int w = 0; w < workers; ++w)
    threads.emplace_back([&] {
      int i;
      while ((i = next.fetch_add(1)) < n_tasks) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& th : threads) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// -------------------------------------------------------------- csv output --

struct CurveRow {
  std::string policy;
  std::uint64_t seed;
  std::int64_t index;
  std::string metric;
  double value;
};

void write_curves(const std::filesystem::path& path,
                  const std::vector<CurveRow>& rows) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file: " + path.string());
  out << "policy,seed,index,metric,value\n";
  for (const auto& r : rows)
    out << r.policy << ',' << r.seed << ',' << r.index << ',' << r.metric
        << ',' << fmt_double(r.value) << '\n';
  if (!out) throw ConfigError("failed writing output file: " + path.string());
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file: " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw ConfigError("failed writing output file: " + path.string());
}

json stats_of(std::vector<double> values) {
  json out;
  if (values.empty()) return out;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var = values.size() > 1 ? var / static_cast<double>(values.size() - 1) : 0.0;
  out["mean"] = mean;
  out["stddev"] = std::sqrt(var);
  return out;
}

}  // namespace

// --------------------------------------------------------------- config ----

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t tag) {
  // splitmix64 over the combined words; cheap and well dispersed
  std::uint64_t z = base + 0x9e3779b97f4a7c15ull * (tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  check_keys(j,
             {"mode", "policy", "policy_cfg", "club", "dynucb", "sparse", "env",
              "seeds", "out_dir", "stride", "jobs", "metrics", "log", "tune",
              "synth", "diagnose"},
             "config root");
  ExperimentConfig cfg;
  get_to(j, "mode", cfg.mode);
  get_to(j, "policy", cfg.policy);
  get_to(j, "seeds", cfg.seeds);
  get_to(j, "out_dir", cfg.out_dir);
  get_to(j, "stride", cfg.stride);
  get_to(j, "jobs", cfg.jobs);
  get_to(j, "metrics", cfg.metrics);

  if (j.contains("policy_cfg")) {
    const json& p = j.at("policy_cfg");
    check_keys(p,
               {"alpha", "alpha0", "alpha_schedule", "gamma", "delta",
                "warm_user_filter", "tie_break", "horizon_T", "sigma"},
               "policy_cfg");
    get_to(p, "alpha", cfg.policy_cfg.alpha);
    get_to(p, "alpha0", cfg.policy_cfg.alpha0);
    if (p.contains("alpha_schedule"))
      cfg.policy_cfg.alpha_schedule =
          schedule_from(p.at("alpha_schedule").get<std::string>());
    get_to(p, "gamma", cfg.policy_cfg.gamma);
    get_to(p, "delta", cfg.policy_cfg.delta);
    get_to(p, "warm_user_filter", cfg.policy_cfg.warm_user_filter);
    if (p.contains("tie_break") &&
        p.at("tie_break").get<std::string>() != "lowest_index")
      throw ConfigError("policy_cfg.tie_break must be 'lowest_index'");
    get_to(p, "horizon_T", cfg.policy_cfg.horizon_T);
    get_to(p, "sigma", cfg.policy_cfg.sigma);
  }
  if (j.contains("club")) {
    const json& p = j.at("club");
    check_keys(p, {"alpha2"}, "club");
    get_to(p, "alpha2", cfg.club.alpha2);
  }
  if (j.contains("dynucb")) {
    const json& p = j.at("dynucb");
    check_keys(p, {"clusters"}, "dynucb");
    get_to(p, "clusters", cfg.dynucb.clusters);
  }
  if (j.contains("sparse")) {
    const json& p = j.at("sparse");
    check_keys(p,
               {"s", "ell", "s_star", "pi_min", "ridge", "max_iters",
                "convergence_tol"},
               "sparse");
    get_to(p, "s", cfg.sparse.s);
    get_to(p, "ell", cfg.sparse.ell);
    get_to(p, "s_star", cfg.sparse.s_star);
    get_to(p, "pi_min", cfg.sparse.pi_min);
    get_to(p, "ridge", cfg.sparse.ridge);
    get_to(p, "max_iters", cfg.sparse.max_iters);
    get_to(p, "convergence_tol", cfg.sparse.convergence_tol);
  }
  if (j.contains("env")) {
    const json& p = j.at("env");
    check_keys(p,
               {"n", "d", "m_prototypes", "structure", "gamma", "sigma",
                "noise_kind", "c", "context_sampler", "seed", "max_rejections"},
               "env");
    get_to(p, "n", cfg.env.n);
    get_to(p, "d", cfg.env.d);
    get_to(p, "m_prototypes", cfg.env.m_prototypes);
    if (p.contains("structure"))
      cfg.env.structure = structure_from(p.at("structure").get<std::string>());
    get_to(p, "gamma", cfg.env.gamma);
    get_to(p, "sigma", cfg.env.sigma);
    if (p.contains("noise_kind"))
      cfg.env.noise_kind = noise_from(p.at("noise_kind").get<std::string>());
    get_to(p, "c", cfg.env.c);
    if (p.contains("context_sampler"))
      cfg.env.context_sampler =
          sampler_from(p.at("context_sampler").get<std::string>());
    get_to(p, "seed", cfg.env.seed);
    get_to(p, "max_rejections", cfg.env.max_rejections);
  }
  if (j.contains("log")) {
    const json& p = j.at("log");
    check_keys(p, {"events", "catalog", "raw"}, "log");
    get_to(p, "events", cfg.log_events);
    get_to(p, "catalog", cfg.log_catalog);
    get_to(p, "raw", cfg.log_raw);
  }
  if (j.contains("tune")) {
    const json& p = j.at("tune");
    check_keys(p, {"alpha_grid", "club_alpha2_grid", "dynucb_cluster_grid", "split"},
               "tune");
    get_to(p, "alpha_grid", cfg.tune.alpha_grid);
    get_to(p, "club_alpha2_grid", cfg.tune.club_alpha2_grid);
    get_to(p, "dynucb_cluster_grid", cfg.tune.dynucb_cluster_grid);
    get_to(p, "split", cfg.tune.split);
  }
  if (j.contains("synth")) {
    const json& p = j.at("synth");
    check_keys(p, {"c", "strict", "force_positive"}, "synth");
    get_to(p, "c", cfg.synth.c);
    get_to(p, "strict", cfg.synth.strict);
    get_to(p, "force_positive", cfg.synth.force_positive);
  }
  if (j.contains("diagnose")) {
    const json& p = j.at("diagnose");
    check_keys(p, {"samples", "eta", "hd_rounds"}, "diagnose");
    get_to(p, "samples", cfg.diagnose.samples);
    get_to(p, "eta", cfg.diagnose.eta);
    get_to(p, "hd_rounds", cfg.diagnose.hd_rounds);
  }
  return cfg;
}

json ExperimentConfig::to_json() const {
  json j;
  j["mode"] = mode;
  j["policy"] = policy;
  j["policy_cfg"] = {{"alpha", policy_cfg.alpha},
                     {"alpha0", policy_cfg.alpha0},
                     {"alpha_schedule", schedule_name(policy_cfg.alpha_schedule)},
                     {"gamma", policy_cfg.gamma},
                     {"delta", policy_cfg.delta},
                     {"warm_user_filter", policy_cfg.warm_user_filter},
                     {"tie_break", "lowest_index"},
                     {"horizon_T", policy_cfg.horizon_T},
                     {"sigma", policy_cfg.sigma}};
  j["club"] = {{"alpha2", club.alpha2}};
  j["dynucb"] = {{"clusters", dynucb.clusters}};
  j["sparse"] = {{"s", sparse.s},
                 {"ell", sparse.ell},
                 {"s_star", sparse.s_star},
                 {"pi_min", sparse.pi_min},
                 {"ridge", sparse.ridge},
                 {"max_iters", sparse.max_iters},
                 {"convergence_tol", sparse.convergence_tol}};
  j["env"] = {{"n", env.n},
              {"d", env.d},
              {"m_prototypes", env.m_prototypes},
              {"structure", structure_name(env.structure)},
              {"gamma", env.gamma},
              {"sigma", env.sigma},
              {"noise_kind", noise_name(env.noise_kind)},
              {"c", env.c},
              {"context_sampler", sampler_name(env.context_sampler)},
              {"seed", env.seed},
              {"max_rejections", env.max_rejections}};
  j["seeds"] = seeds;
  j["out_dir"] = out_dir;
  j["stride"] = stride;
  j["jobs"] = jobs;
  j["metrics"] = effective_metrics();
  j["log"] = {{"events", log_events}, {"catalog", log_catalog}, {"raw", log_raw}};
  j["tune"] = {{"alpha_grid", tune.alpha_grid},
               {"club_alpha2_grid", tune.club_alpha2_grid},
               {"dynucb_cluster_grid", tune.dynucb_cluster_grid},
               {"split", tune.split}};
  j["synth"] = {{"c", synth.c},
                {"strict", synth.strict},
                {"force_positive", synth.force_positive}};
  j["diagnose"] = {{"samples", diagnose.samples},
                   {"eta", diagnose.eta},
                   {"hd_rounds", diagnose.hd_rounds}};
  return j;
}

std::vector<std::string> ExperimentConfig::effective_metrics() const {
  if (!metrics.empty()) return metrics;
  if (mode == "simulate") return {"cum_regret"};
  if (mode == "replay" || mode == "tune") return {"ctr"};
  return {};
}

void ExperimentConfig::validate() const {
  const std::vector<std::string> modes{"simulate", "replay", "tune", "diagnose",
                                       "synth-log"};
  if (std::find(modes.begin(), modes.end(), mode) == modes.end())
    throw ConfigError("unknown mode '" + mode + "'");
  const std::vector<std::string> policies{
      "cab", "spcab", "linucb-single", "linucb-multiple", "club", "dynucb", "ran"};
  if (std::find(policies.begin(), policies.end(), policy) == policies.end())
    throw ConfigError("unknown policy '" + policy + "'");
  policy_cfg.validate();
  club.validate();
  sparse.validate();
  if (mode == "simulate" || mode == "diagnose") {
    env.validate();
    dynucb.validate(env.n);
  }
  if (seeds.empty()) throw ConfigError("seeds must be nonempty");
  if (stride < 1) throw ConfigError("stride must be >= 1");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  if ((mode == "replay" || mode == "tune") && log_events.empty())
    throw ConfigError("mode '" + mode + "' needs log.events");
  if (mode == "synth-log" && log_raw.empty())
    throw ConfigError("mode 'synth-log' needs log.raw");
  if (!(tune.split > 0.0 && tune.split < 1.0))
    throw ConfigError("tune.split must lie in (0, 1)");
  if (synth.c < 1) throw ConfigError("synth.c must be >= 1");
  if (diagnose.samples < 1) throw ConfigError("diagnose.samples must be >= 1");
  if (diagnose.hd_rounds < 1) throw ConfigError("diagnose.hd_rounds must be >= 1");

  const std::vector<std::string> known_metrics{"ctr", "cum_regret", "regret_ratio"};
  for (const auto& m : effective_metrics()) {
    if (std::find(known_metrics.begin(), known_metrics.end(), m) ==
        known_metrics.end())
      throw ConfigError("unknown metric '" + m + "'");
    if (mode == "simulate" && m == "ctr")
      throw ConfigError("metric 'ctr' needs binary logged payoffs; use replay mode");
    if ((mode == "replay" || mode == "tune") && m != "ctr")
      throw ConfigError("metric '" + m +
                        "' needs ground truth; only 'ctr' works on logs");
  }
}

// --------------------------------------------------------------- policies --

std::unique_ptr<Policy> make_policy(const ExperimentConfig& cfg, int n_users,
                                    int dim, std::uint64_t run_seed,
                                    ExecMode mode) {
  if (cfg.policy == "cab")
    return std::make_unique<CabPolicy>(n_users, dim, cfg.policy_cfg, mode);
  if (cfg.policy == "spcab")
    return std::make_unique<SpCabPolicy>(n_users, dim, cfg.policy_cfg,
                                         cfg.sparse, mode);
  if (cfg.policy == "linucb-single")
    return std::make_unique<LinUcbSinglePolicy>(n_users, dim, cfg.policy_cfg);
  if (cfg.policy == "linucb-multiple")
    return std::make_unique<LinUcbMultiplePolicy>(n_users, dim, cfg.policy_cfg);
  if (cfg.policy == "club") {
    ClubConfig club = cfg.club;
    club.graph_seed = mix_seed(run_seed, 0x6772617068ull);
    return std::make_unique<ClubPolicy>(n_users, dim, cfg.policy_cfg, club);
  }
  if (cfg.policy == "dynucb")
    return std::make_unique<DynUcbPolicy>(n_users, dim, cfg.policy_cfg,
                                          cfg.dynucb);
  if (cfg.policy == "ran")
    return std::make_unique<RanPolicy>(n_users, dim,
                                       mix_seed(run_seed, 0x72616eull));
  throw ConfigError("unknown policy '" + cfg.policy + "'");
}

// --------------------------------------------------------------- simulate --

SimulationResult simulate_run(const ExperimentConfig& cfg,
                              std::uint64_t run_seed, bool ratio_baseline,
                              ExecMode mode) {
  EnvConfig ec = cfg.env;
  ec.seed = mix_seed(cfg.env.seed, run_seed);
  const SyntheticEnv env = SyntheticEnv::generate(ec);
  auto rounds_rng = make_rng(run_seed, 0x524e44ull);
  auto payoff_rng = make_rng(run_seed, 0x504159ull);
  auto policy = make_policy(cfg, ec.n, ec.d, run_seed, mode);
  std::unique_ptr<RanPolicy> ran;
  if (ratio_baseline)
    ran = std::make_unique<RanPolicy>(ec.n, ec.d,
                                      mix_seed(run_seed, 0xBA5Eull));

  SimulationResult res;
  res.seed = run_seed;
  const std::int64_t horizon = cfg.policy_cfg.horizon_T;
  res.inst_regret.reserve(horizon);
  res.payoffs.reserve(horizon);
  for (std::int64_t t = 1; t <= horizon; ++t) {
    const RoundInput input = env.sample_round(t, rounds_rng);
    const int k = policy->select(input);
    const double y =
        env.payoff(input.user, input.candidates[k].features, payoff_rng);
    policy->observe(input, {k, y});
    res.inst_regret.push_back(regret_step(env, input, k));
    res.payoffs.push_back(y);
    if (ran) {
      const int kr = ran->select(input);
      res.ran_inst_regret.push_back(regret_step(env, input, kr));
    }
  }
  return res;
}

namespace {

void run_simulate(const ExperimentConfig& cfg,
                  const std::filesystem::path& out) {
  const auto metrics = cfg.effective_metrics();
  const bool want_ratio =
      std::find(metrics.begin(), metrics.end(), "regret_ratio") != metrics.end();
  const ExecMode mode = cfg.jobs <= 1 ? ExecMode::parallel : ExecMode::serial;

  std::vector<SimulationResult> results(cfg.seeds.size());
  run_indexed(static_cast<int>(cfg.seeds.size()), cfg.jobs, [&](int i) {
    results[i] = simulate_run(cfg, cfg.seeds[i], want_ratio, mode);
  });

  std::vector<CurveRow> rows;
  json per_seed = json::array();
  std::vector<double> finals_regret, finals_ratio, finals_payoff;
  for (const auto& res : results) {
    const auto cum = cumulative(res.inst_regret);
    std::vector<double> ran_cum;
    if (want_ratio) ran_cum = cumulative(res.ran_inst_regret);
    for (const auto& metric : metrics) {
      if (metric == "cum_regret") {
        for (const auto& [idx, v] : downsample(cum, cfg.stride))
          rows.push_back({cfg.policy, res.seed, idx, metric, v});
      } else if (metric == "regret_ratio") {
        for (const auto& [idx, v] : downsample(cum, cfg.stride)) {
          const double ran_v = ran_cum[static_cast<std::size_t>(idx) - 1];
          if (ran_v == 0.0) continue;  // ratio undefined here
          rows.push_back({cfg.policy, res.seed, idx, metric, v / ran_v});
        }
      }
    }
    json entry;
    entry["seed"] = res.seed;
    entry["final_cum_regret"] = cum.back();
    finals_regret.push_back(cum.back());
    double mean_payoff = 0.0;
    for (double p : res.payoffs) mean_payoff += p;
    mean_payoff /= static_cast<double>(res.payoffs.size());
    entry["mean_payoff"] = mean_payoff;
    finals_payoff.push_back(mean_payoff);
    if (want_ratio) {
      if (ran_cum.back() != 0.0) {
        entry["final_regret_ratio"] = cum.back() / ran_cum.back();
        finals_ratio.push_back(cum.back() / ran_cum.back());
      } else {
        entry["final_regret_ratio"] = nullptr;
      }
    }
    per_seed.push_back(entry);
  }

  json summary;
  summary["mode"] = cfg.mode;
  summary["policy"] = cfg.policy;
  summary["rounds"] = cfg.policy_cfg.horizon_T;
  summary["per_seed"] = per_seed;
  summary["aggregate"]["final_cum_regret"] = stats_of(finals_regret);
  summary["aggregate"]["mean_payoff"] = stats_of(finals_payoff);
  if (want_ratio && !finals_ratio.empty())
    summary["aggregate"]["final_regret_ratio"] = stats_of(finals_ratio);
  write_curves(out / "curves.csv", rows);
  write_json(out / "summary.json", summary);
}

ReplayLog load_replay_log(const ExperimentConfig& cfg) {
  ReplayLog log;
  if (!cfg.log_catalog.empty()) {
    const ItemCatalog catalog = ingest_catalog(cfg.log_catalog);
    log = ingest_replay(cfg.log_events, &catalog);
  } else {
    log = ingest_replay(cfg.log_events, nullptr);
  }
  if (log.events.empty())
    throw ConfigError(cfg.log_events + ": log holds no events");
  return log;
}

void run_replay(const ExperimentConfig& cfg, const std::filesystem::path& out) {
  const ReplayLog log = load_replay_log(cfg);
  const ExecMode mode = cfg.jobs <= 1 ? ExecMode::parallel : ExecMode::serial;

  std::vector<std::vector<RetainedEvent>> retained(cfg.seeds.size());
  run_indexed(static_cast<int>(cfg.seeds.size()), cfg.jobs, [&](int i) {
    auto policy =
        make_policy(cfg, log.n_users(), log.catalog.dim(), cfg.seeds[i], mode);
    retained[i] = replay(*policy, log);
  });

  std::vector<CurveRow> rows;
  json per_seed = json::array();
  std::vector<double> finals_ctr, retention;
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
    const auto ctr = ctr_curve(retained[i]);
    for (const auto& [idx, v] : downsample(ctr, cfg.stride))
      rows.push_back({cfg.policy, cfg.seeds[i], idx, "ctr", v});
    json entry;
    entry["seed"] = cfg.seeds[i];
    entry["retained"] = retained[i].size();
    entry["retention_rate"] = log.events.empty()
                                  ? 0.0
                                  : static_cast<double>(retained[i].size()) /
                                        static_cast<double>(log.events.size());
    retention.push_back(entry["retention_rate"].get<double>());
    if (!ctr.empty()) {
      entry["final_ctr"] = ctr.back();
      finals_ctr.push_back(ctr.back());
    } else {
      entry["final_ctr"] = nullptr;
    }
    per_seed.push_back(entry);
  }

  json summary;
  summary["mode"] = cfg.mode;
  summary["policy"] = cfg.policy;
  summary["events"] = log.events.size();
  summary["per_seed"] = per_seed;
  summary["aggregate"]["final_ctr"] = stats_of(finals_ctr);
  summary["aggregate"]["retention_rate"] = stats_of(retention);
  write_curves(out / "curves.csv", rows);
  write_json(out / "summary.json", summary);
}

struct GridCell {
  double alpha = 0.1;
  double alpha2 = 0.3;  // club only
  int clusters = 1;     // dynucb only
};

std::vector<GridCell> build_grid(const ExperimentConfig& cfg, int n_users) {
  std::vector<double> alphas = cfg.tune.alpha_grid;
  if (alphas.empty())
    for (int i = 0; i <= 20; ++i) alphas.push_back(0.01 * i);

  std::vector<GridCell> cells;
  if (cfg.policy == "club") {
    std::vector<double> a2s = cfg.tune.club_alpha2_grid;
    if (a2s.empty()) a2s = {0.1, 0.2, 0.3, 0.4, 0.5};
    for (double a : alphas)
      for (double a2 : a2s) cells.push_back({a, a2, cfg.dynucb.clusters});
  } else if (cfg.policy == "dynucb") {
    std::vector<int> ks = cfg.tune.dynucb_cluster_grid;
    if (ks.empty()) {
      for (int k = 1; k < n_users; k *= 2) ks.push_back(k);
      ks.push_back(n_users);
    }
    for (double a : alphas)
      for (int k : ks) cells.push_back({a, cfg.club.alpha2, k});
  } else {
    for (double a : alphas) cells.push_back({a, cfg.club.alpha2, cfg.dynucb.clusters});
  }
  return cells;
}

ExperimentConfig apply_cell(const ExperimentConfig& cfg, const GridCell& cell) {
  ExperimentConfig out = cfg;
  out.policy_cfg.alpha = cell.alpha;
  out.club.alpha2 = cell.alpha2;
  out.dynucb.clusters = cell.clusters;
  return out;
}

void run_tune(const ExperimentConfig& cfg, const std::filesystem::path& out) {
  const ReplayLog log = load_replay_log(cfg);
  const auto cells = build_grid(cfg, log.n_users());
  const int n_seeds = static_cast<int>(cfg.seeds.size());
  const int n_cells = static_cast<int>(cells.size());
  const std::size_t tune_events = static_cast<std::size_t>(std::floor(
      cfg.tune.split * static_cast<double>(log.events.size())));
  const ExecMode mode = cfg.jobs <= 1 ? ExecMode::parallel : ExecMode::serial;

  // Phase 1: score every (seed, cell) pair on the tuning segment.
  std::vector<double> scores(static_cast<std::size_t>(n_seeds) * n_cells);
  run_indexed(n_seeds * n_cells, cfg.jobs, [&](int task) {
    const int si = task / n_cells;
    const int ci = task % n_cells;
    const ExperimentConfig cell_cfg = apply_cell(cfg, cells[ci]);
    auto policy = make_policy(cell_cfg, log.n_users(), log.catalog.dim(),
                              cfg.seeds[si], mode);
    const auto retained = replay(*policy, log, 0, tune_events);
    double score = -std::numeric_limits<double>::infinity();
    if (!retained.empty()) {
      double sum = 0.0;
      for (const auto& r : retained) sum += r.payoff;
      score = sum / static_cast<double>(retained.size());
    }
    scores[static_cast<std::size_t>(task)] = score;
  });

  // Phase 2: fresh run of each seed's winning cell on the held-out segment.
  std::vector<int> best_cell(n_seeds, 0);
  for (int si = 0; si < n_seeds; ++si) {
    double best = -std::numeric_limits<double>::infinity();
    for (int ci = 0; ci < n_cells; ++ci) {
      const double s = scores[static_cast<std::size_t>(si) * n_cells + ci];
      if (s > best) {
        best = s;
        best_cell[si] = ci;
      }
    }
  }
  std::vector<std::vector<RetainedEvent>> test_retained(n_seeds);
  run_indexed(n_seeds, cfg.jobs, [&](int si) {
    const ExperimentConfig cell_cfg = apply_cell(cfg, cells[best_cell[si]]);
    auto policy = make_policy(cell_cfg, log.n_users(), log.catalog.dim(),
                              cfg.seeds[si], mode);
    test_retained[si] = replay(*policy, log, tune_events, log.events.size());
  });

  std::vector<CurveRow> rows;
  json per_seed = json::array();
  std::vector<double> finals_ctr;
  for (int si = 0; si < n_seeds; ++si) {
    const auto ctr = ctr_curve(test_retained[si]);
    for (const auto& [idx, v] : downsample(ctr, cfg.stride))
      rows.push_back({cfg.policy, cfg.seeds[si], idx, "ctr", v});
    json entry;
    entry["seed"] = cfg.seeds[si];
    entry["best_cell"] = best_cell[si];
    entry["best_params"]["alpha"] = cells[best_cell[si]].alpha;
    if (cfg.policy == "club")
      entry["best_params"]["alpha2"] = cells[best_cell[si]].alpha2;
    if (cfg.policy == "dynucb")
      entry["best_params"]["clusters"] = cells[best_cell[si]].clusters;
    json cell_scores = json::array();
    for (int ci = 0; ci < n_cells; ++ci) {
      const double s = scores[static_cast<std::size_t>(si) * n_cells + ci];
      cell_scores.push_back(std::isfinite(s) ? json(s) : json(nullptr));
    }
    entry["cell_scores"] = cell_scores;
    entry["test_retained"] = test_retained[si].size();
    if (!ctr.empty()) {
      entry["final_ctr"] = ctr.back();
      finals_ctr.push_back(ctr.back());
    } else {
      entry["final_ctr"] = nullptr;
    }
    per_seed.push_back(entry);
  }

  json summary;
  summary["mode"] = cfg.mode;
  summary["policy"] = cfg.policy;
  summary["events"] = log.events.size();
  summary["tune_events"] = tune_events;
  summary["cells"] = n_cells;
  summary["per_seed"] = per_seed;
  summary["aggregate"]["final_ctr"] = stats_of(finals_ctr);
  write_curves(out / "curves.csv", rows);
  write_json(out / "summary.json", summary);
}

void run_synth(const ExperimentConfig& cfg, const std::filesystem::path& out) {
  const RawEventLog raw = ingest_raw(cfg.log_raw);
  auto rng = make_rng(mix_seed(cfg.seeds[0], 0x53594eull), 0);
  const ReplayLog log = synthesize_random_log(raw, cfg.synth, rng);
  const auto log_path = out / "synth_log.csv";
  write_replay_csv(log, log_path.string());

  json summary;
  summary["mode"] = cfg.mode;
  summary["events"] = log.events.size();
  summary["users"] = log.user_ids.size();
  summary["items"] = log.catalog.size();
  summary["c"] = cfg.synth.c;
  summary["log_file"] = log_path.string();
  write_curves(out / "curves.csv", {});
  write_json(out / "summary.json", summary);
}

void run_diagnose(const ExperimentConfig& cfg, const std::filesystem::path& out) {
  EnvConfig ec = cfg.env;
  ec.seed = mix_seed(cfg.env.seed, cfg.seeds[0]);
  const SyntheticEnv env = SyntheticEnv::generate(ec);

  // Context-level statistics over sampled rounds.
  auto ctx_rng = make_rng(cfg.seeds[0], 0x435458ull);
  std::int64_t n_ctx = 0;
  double m_sum = 0.0;
  std::int64_t gap_violations = 0;
  std::int64_t partition_violations = 0;
  Eigen::MatrixXd second_moment = Eigen::MatrixXd::Zero(ec.d, ec.d);
  std::int64_t t = 1;
  while (n_ctx < cfg.diagnose.samples) {
    const RoundInput input = env.sample_round(t++, ctx_rng);
    for (const auto& cand : input.candidates) {
      if (n_ctx >= cfg.diagnose.samples) break;
      ++n_ctx;
      const Eigen::VectorXd& x = cand.features;
      second_moment.noalias() += x * x.transpose();
      const int m_here = env.m_of(x);
      m_sum += static_cast<double>(m_here);
      // Gap audit: every prototype pair either ties or separates by gamma.
      // Users carry prototypes round-robin, so users 0..m-1 cover them all.
      bool violated = false;
      for (int a = 0; a < ec.m_prototypes && !violated; ++a)
        for (int b = a + 1; b < ec.m_prototypes && !violated; ++b) {
          const double diff =
              std::abs(env.true_vector(a).dot(x) - env.true_vector(b).dot(x));
          if (diff > kProjectionTol && diff < ec.gamma) violated = true;
        }
      if (violated) ++gap_violations;
      double inv_sum = 0.0;
      for (int u = 0; u < ec.n; ++u)
        inv_sum += 1.0 / static_cast<double>(env.true_neighborhood(u, x).size());
      if (std::abs(inv_sum - static_cast<double>(m_here)) > 1e-9)
        ++partition_violations;
    }
  }
  second_moment /= static_cast<double>(n_ctx);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(second_moment);
  const double lambda_min = eig.eigenvalues().minCoeff();

  // Neighborhood-size inequality along an actual policy trajectory.
  const std::int64_t horizon = cfg.policy_cfg.horizon_T;
  ExperimentConfig cab_cfg = cfg;
  cab_cfg.policy = "cab";
  auto rounds_rng = make_rng(cfg.seeds[0], 0x524e44ull);
  auto payoff_rng = make_rng(cfg.seeds[0], 0x504159ull);
  auto policy = make_policy(cab_cfg, ec.n, ec.d, cfg.seeds[0],
                            cfg.jobs <= 1 ? ExecMode::parallel : ExecMode::serial);
  double lhs = 0.0;
  for (std::int64_t tt = 1; tt <= horizon; ++tt) {
    const RoundInput input = env.sample_round(tt, rounds_rng);
    const int k = policy->select(input);
    const double y =
        env.payoff(input.user, input.candidates[k].features, payoff_rng);
    policy->observe(input, {k, y});
    lhs += 1.0 / static_cast<double>(
                     env.true_neighborhood(input.user,
                                           input.candidates[k].features)
                         .size());
  }
  const double rhs =
      2.0 * static_cast<double>(horizon) * static_cast<double>(ec.c) *
          env.expected_m() / static_cast<double>(ec.n) +
      12.0 * std::log(std::log(static_cast<double>(horizon)) /
                      cfg.policy_cfg.delta);

  // Hardness probes on a short fresh prefix.
  auto hd_rng = make_rng(cfg.seeds[0], 0x4844ull);
  std::vector<RoundInput> hd_rounds;
  for (int i = 1; i <= cfg.diagnose.hd_rounds; ++i)
    hd_rounds.push_back(env.sample_round(i, hd_rng));
  const double width_at_unit =
      width_from_quad(cfg.policy_cfg, 1.0, horizon, ec.d, ec.n);
  const double eta = cfg.diagnose.eta >= 0.0
                         ? cfg.diagnose.eta
                         : 16.0 * width_at_unit * width_at_unit /
                               (cfg.policy_cfg.gamma * cfg.policy_cfg.gamma);
  const int hd_greedy = hardness_greedy(hd_rounds, ec.n, eta);
  json hd_exhaustive = nullptr;
  if (cfg.diagnose.hd_rounds <= 12 && ec.c <= 3)
    hd_exhaustive = hardness_exhaustive(hd_rounds, ec.n, eta);

  json summary;
  summary["mode"] = cfg.mode;
  summary["env"]["n"] = ec.n;
  summary["env"]["d"] = ec.d;
  summary["env"]["m_prototypes"] = ec.m_prototypes;
  summary["expected_m_exact"] = env.expected_m();
  summary["expected_m_empirical"] = m_sum / static_cast<double>(n_ctx);
  summary["lambda_min_empirical"] = lambda_min;
  summary["contexts_sampled"] = n_ctx;
  summary["gap_violations"] = gap_violations;
  summary["partition_identity_violations"] = partition_violations;
  summary["neighborhood_sum"]["lhs"] = lhs;
  summary["neighborhood_sum"]["rhs"] = rhs;
  summary["neighborhood_sum"]["holds"] = lhs <= rhs;
  summary["neighborhood_sum"]["rounds"] = horizon;
  summary["hardness"]["eta"] = eta;
  summary["hardness"]["rounds"] = cfg.diagnose.hd_rounds;
  summary["hardness"]["greedy"] = hd_greedy;
  summary["hardness"]["exhaustive"] = hd_exhaustive;
  write_curves(out / "curves.csv", {});
  write_json(out / "summary.json", summary);
}

}  // namespace

void run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::filesystem::path out(cfg.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec)
    throw ConfigError("cannot create output directory: " + cfg.out_dir);
  write_json(out / "resolved_config.json", cfg.to_json());

  if (cfg.mode == "simulate") {
    run_simulate(cfg, out);
  } else if (cfg.mode == "replay") {
    run_replay(cfg, out);
  } else if (cfg.mode == "tune") {
    run_tune(cfg, out);
  } else if (cfg.mode == "synth-log") {
    run_synth(cfg, out);
  } else if (cfg.mode == "diagnose") {
    run_diagnose(cfg, out);
  } else {
    throw ConfigError("unknown mode '" + cfg.mode + "'");
  }
}

}  // namespace cab
