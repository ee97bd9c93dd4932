#include "cab/env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cab {

void EnvConfig::validate() const {
  if (n < 1) throw ConfigError("env.n must be >= 1");
  if (d < 1) throw ConfigError("env.d must be >= 1");
  if (m_prototypes < 1 || m_prototypes > n)
    throw ConfigError("env.m_prototypes must lie in [1, n]");
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw ConfigError("env.gamma must be finite and > 0");
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    throw ConfigError("env.sigma must be finite and >= 0");
  if (c < 1) throw ConfigError("env.c must be >= 1");
  if (max_rejections < 1) throw ConfigError("env.max_rejections must be >= 1");
  if (structure == EnvStructure::block) {
    if (m_prototypes < 2)
      throw ConfigError("env.structure=block needs m_prototypes >= 2");
    if (d < 2) throw ConfigError("env.structure=block needs d >= 2");
  }
}

namespace {

Eigen::VectorXd gaussian_unit(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(d);
  double norm = 0.0;
  do {
    for (int i = 0; i < d; ++i) v[i] = normal(rng);
    norm = v.norm();
  } while (norm < 1e-12);
  return v / norm;
}

Eigen::VectorXd ball_uniform(int d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::VectorXd v = gaussian_unit(d, rng);
  const double r = std::pow(unif(rng), 1.0 / static_cast<double>(d));
  return v * r;
}

Eigen::VectorXd sign_pattern(int d, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  const double mag = 1.0 / std::sqrt(static_cast<double>(d));
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v[i] = coin(rng) ? mag : -mag;
  return v;
}

}  // namespace

SyntheticEnv SyntheticEnv::generate(const EnvConfig& cfg) {
  cfg.validate();
  SyntheticEnv env;
  env.cfg_ = cfg;
  env.block_split_ = cfg.structure == EnvStructure::block ? cfg.d / 2 : 0;
  if (cfg.structure == EnvStructure::block && env.block_split_ < 1)
    env.block_split_ = 1;

  auto rng = make_rng(cfg.seed, 0x505254u);  // prototype stream
  const int m = cfg.m_prototypes;
  auto distinct_from_existing = [&](const Eigen::VectorXd& v,
                                    const std::vector<Eigen::VectorXd>& vs) {
    for (const auto& u : vs)
      if ((u - v).norm() < 1e-6) return false;
    return true;
  };

  const int retry_cap = 1000 * std::max(1, m);
  if (cfg.context_sampler == ContextSampler::one_hot) {
    for (int a = 0; a < m; ++a) {
      int tries = 0;
      while (true) {
        Eigen::VectorXd v = sign_pattern(cfg.d, rng);
        if (cfg.structure == EnvStructure::block && a == 1) {
          v.head(env.block_split_) = env.prototypes_[0].head(env.block_split_);
          if (v.tail(cfg.d - env.block_split_) ==
              env.prototypes_[0].tail(cfg.d - env.block_split_)) {
            if (++tries > retry_cap)
              throw std::runtime_error("SyntheticEnv: cannot split prototypes 0/1");
            continue;
          }
        }
        if (distinct_from_existing(v, env.prototypes_)) {
          env.prototypes_.push_back(v);
          break;
        }
        if (++tries > retry_cap)
          throw std::runtime_error(
              "SyntheticEnv: cannot draw distinct one-hot prototypes");
      }
    }
  } else {
    // A nearly parallel prototype pair strangles the acceptance rate of the
    // projection-gap filter, so each prototype after the first takes the
    // best of a batch of draws, scored by minimum distance to those already
    // placed. Infeasible gap settings still surface at sample time.
    constexpr int kPlacementBatch = 32;
    for (int a = 0; a < m; ++a) {
      const int batch = env.prototypes_.empty() ? 1 : kPlacementBatch;
      Eigen::VectorXd best;
      double best_sep = -1.0;
      int tries = 0;
      while (true) {
        for (int k = 0; k < batch; ++k) {
          Eigen::VectorXd v;
          if (cfg.structure == EnvStructure::block && a < 2) {
            // Prototypes 0 and 1 share the first block bitwise and split
            // their mass evenly, so both have unit norm by construction.
            const int ds = env.block_split_;
            const int dr = cfg.d - ds;
            v.resize(cfg.d);
            if (a == 0) {
              v.head(ds) = gaussian_unit(ds, rng) / std::sqrt(2.0);
              v.tail(dr) = gaussian_unit(dr, rng) / std::sqrt(2.0);
            } else {
              v.head(ds) = env.prototypes_[0].head(ds);
              v.tail(dr) = gaussian_unit(dr, rng) / std::sqrt(2.0);
            }
          } else {
            v = gaussian_unit(cfg.d, rng);
          }
          double sep = std::numeric_limits<double>::infinity();
          for (const auto& u : env.prototypes_)
            sep = std::min(sep, (u - v).norm());
          if (sep > best_sep) {
            best_sep = sep;
            best = std::move(v);
          }
        }
        if (best_sep > 1e-6) break;
        tries += batch;
        if (tries > retry_cap)
          throw std::runtime_error(
              "SyntheticEnv: cannot draw distinct prototypes");
      }
      env.prototypes_.push_back(std::move(best));
    }
  }

  env.prototype_of_.resize(cfg.n);
  for (int i = 0; i < cfg.n; ++i) env.prototype_of_[i] = i % m;
  return env;
}

const Eigen::VectorXd& SyntheticEnv::true_vector(int user) const {
  if (user < 0 || user >= cfg_.n)
    throw std::invalid_argument("SyntheticEnv: user index out of range");
  return prototypes_[prototype_of_[user]];
}

int SyntheticEnv::prototype_of(int user) const {
  if (user < 0 || user >= cfg_.n)
    throw std::invalid_argument("SyntheticEnv: user index out of range");
  return prototype_of_[user];
}

Eigen::VectorXd SyntheticEnv::sample_context_in_branch(
    bool block_supported, std::mt19937_64& rng) const {
  if (cfg_.context_sampler == ContextSampler::one_hot) {
    std::uniform_int_distribution<int> pick(0, cfg_.d - 1);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(cfg_.d);
    x[pick(rng)] = 1.0;
    return x;
  }
  if (block_supported) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(cfg_.d);
    x.head(block_split_) = ball_uniform(block_split_, rng);
    return x;
  }
  return ball_uniform(cfg_.d, rng);
}

Eigen::VectorXd SyntheticEnv::sample_context(std::mt19937_64& rng) const {
  bool block_supported = false;
  if (cfg_.structure == EnvStructure::block &&
      cfg_.context_sampler == ContextSampler::unit_ball_uniform) {
    std::bernoulli_distribution coin(0.5);
    block_supported = coin(rng);
  }
  // Rejection stays inside the chosen branch so branch probabilities are
  // exact regardless of per-branch acceptance rates.
  for (std::int64_t r = 0; r < cfg_.max_rejections; ++r) {
    Eigen::VectorXd x = sample_context_in_branch(block_supported, rng);
    if (gap_ok(x)) return x;
  }
  throw std::runtime_error(
      "SyntheticEnv: gap constraint unsatisfiable within max_rejections");
}

bool SyntheticEnv::gap_ok(const Eigen::VectorXd& x) const {
  const int m = cfg_.m_prototypes;
  for (int a = 0; a < m; ++a) {
    const double pa = prototypes_[a].dot(x);
    for (int b = a + 1; b < m; ++b) {
      const double diff = std::abs(pa - prototypes_[b].dot(x));
      if (diff > kProjectionTol && diff < cfg_.gamma) return false;
    }
  }
  return true;
}

RoundInput SyntheticEnv::sample_round(std::int64_t t, std::mt19937_64& rng) const {
  if (t < 1) throw std::invalid_argument("SyntheticEnv: round index must be >= 1");
  RoundInput input;
  input.t = t;
  std::uniform_int_distribution<int> pick_user(0, cfg_.n - 1);
  input.user = pick_user(rng);
  input.candidates.reserve(cfg_.c);
  for (int k = 0; k < cfg_.c; ++k) {
    Eigen::VectorXd x = sample_context(rng);
    std::int64_t item_id = -1;
    if (cfg_.context_sampler == ContextSampler::one_hot) {
      int idx = 0;
      x.maxCoeff(&idx);
      item_id = idx;
    }
    input.candidates.push_back({item_id, std::move(x)});
  }
  return input;
}

double SyntheticEnv::mean_payoff(int user, const Eigen::VectorXd& x) const {
  if (x.size() != cfg_.d)
    throw std::invalid_argument("SyntheticEnv: context dimension mismatch");
  return true_vector(user).dot(x);
}

double SyntheticEnv::payoff(int user, const Eigen::VectorXd& x,
                            std::mt19937_64& rng) const {
  const double mean = mean_payoff(user, x);
  if (cfg_.sigma == 0.0) return mean;
  if (cfg_.noise_kind == NoiseKind::truncated_gaussian) {
    std::normal_distribution<double> normal(0.0, cfg_.sigma);
    for (int tries = 0; tries < 1000000; ++tries) {
      const double y = mean + normal(rng);
      if (y >= -1.0 && y <= 1.0) return y;
    }
    throw std::runtime_error("SyntheticEnv: payoff truncation failed");
  }
  const double a =
      std::min(cfg_.sigma * std::sqrt(3.0), 1.0 - std::abs(mean));
  if (a <= 0.0) return mean;
  std::uniform_real_distribution<double> unif(-a, a);
  return mean + unif(rng);
}

std::vector<int> SyntheticEnv::projection_group_of_prototypes(
    const Eigen::VectorXd& x) const {
  const int m = cfg_.m_prototypes;
  std::vector<double> proj(m);
  for (int a = 0; a < m; ++a) proj[a] = prototypes_[a].dot(x);
  std::vector<int> group(m, -1);
  int next = 0;
  for (int a = 0; a < m; ++a) {
    if (group[a] != -1) continue;
    group[a] = next;
    for (int b = a + 1; b < m; ++b)
      if (group[b] == -1 && std::abs(proj[a] - proj[b]) <= kProjectionTol)
        group[b] = next;
    ++next;
  }
  return group;
}

std::vector<int> SyntheticEnv::true_neighborhood(int user,
                                                 const Eigen::VectorXd& x) const {
  if (x.size() != cfg_.d)
    throw std::invalid_argument("SyntheticEnv: context dimension mismatch");
  const std::vector<int> group = projection_group_of_prototypes(x);
  const int g = group[prototype_of(user)];
  std::vector<int> members;
  for (int j = 0; j < cfg_.n; ++j)
    if (group[prototype_of_[j]] == g) members.push_back(j);
  return members;
}

int SyntheticEnv::m_of(const Eigen::VectorXd& x) const {
  if (x.size() != cfg_.d)
    throw std::invalid_argument("SyntheticEnv: context dimension mismatch");
  const std::vector<int> group = projection_group_of_prototypes(x);
  int groups = 0;
  for (int g : group) groups = std::max(groups, g + 1);
  return groups;
}

double SyntheticEnv::expected_m() const {
  const int m = cfg_.m_prototypes;
  if (cfg_.context_sampler == ContextSampler::one_hot) {
    // Finite context set: enumerate the basis.
    double total = 0.0;
    for (int j = 0; j < cfg_.d; ++j) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(cfg_.d);
      e[j] = 1.0;
      total += static_cast<double>(m_of(e));
    }
    return total / static_cast<double>(cfg_.d);
  }
  if (cfg_.structure == EnvStructure::block) {
    // Half of all contexts live on the shared block, where prototypes 0 and 1
    // project identically; all other prototype pairs separate almost surely.
    return static_cast<double>(m) - 0.5;
  }
  return static_cast<double>(m);
}

}  // namespace cab
