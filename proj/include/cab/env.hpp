#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <vector>

#include "cab/model.hpp"

namespace cab {

enum class EnvStructure { global, block };
enum class NoiseKind { truncated_gaussian, uniform_bounded };
enum class ContextSampler { unit_ball_uniform, one_hot };

struct EnvConfig {
  int n = 30;            // users
  int d = 10;            // feature dimension
  int m_prototypes = 3;  // distinct true vectors
  EnvStructure structure = EnvStructure::global;
  double gamma = 0.5;    // enforced projection gap between non-tied prototypes
  double sigma = 0.1;    // payoff noise scale
  NoiseKind noise_kind = NoiseKind::truncated_gaussian;
  int c = 10;            // candidates per round
  ContextSampler context_sampler = ContextSampler::unit_ball_uniform;
  std::uint64_t seed = 1;
  std::int64_t max_rejections = 100000;

  void validate() const;
};

// Projections within this tolerance count as tied, both for the gap check at
// sampling time and for ground-truth neighborhoods.
inline constexpr double kProjectionTol = 1e-9;

// Synthetic population with a gap assumption: every sampled context makes the
// prototype projections either tied or at least gamma apart, so ground-truth
// neighborhoods are unambiguous. Block structure forces prototypes 0 and 1 to
// share their first-half coordinates, and half of all contexts are supported
// on that half, merging the two prototypes on those rounds.
class SyntheticEnv {
 public:
  static SyntheticEnv generate(const EnvConfig& cfg);

  // Uniform user plus c gap-respecting candidate contexts. Throws when a
  // candidate exhausts max_rejections without satisfying the gap.
  RoundInput sample_round(std::int64_t t, std::mt19937_64& rng) const;

  double mean_payoff(int user, const Eigen::VectorXd& x) const;
  // mean_payoff plus zero-mean noise, conditioned to keep payoffs in [-1,1].
  double payoff(int user, const Eigen::VectorXd& x, std::mt19937_64& rng) const;

  // Users whose true vectors project like `user`'s at x (tolerance above).
  std::vector<int> true_neighborhood(int user, const Eigen::VectorXd& x) const;
  // Number of distinct projection groups at x.
  int m_of(const Eigen::VectorXd& x) const;
  // Exact expectation of m_of under the context sampler.
  double expected_m() const;

  const EnvConfig& config() const { return cfg_; }
  const Eigen::VectorXd& true_vector(int user) const;
  int prototype_of(int user) const;
  int n_users() const { return cfg_.n; }

 private:
  Eigen::VectorXd sample_context(std::mt19937_64& rng) const;
  Eigen::VectorXd sample_context_in_branch(bool block_supported,
                                           std::mt19937_64& rng) const;
  bool gap_ok(const Eigen::VectorXd& x) const;
  std::vector<int> projection_group_of_prototypes(const Eigen::VectorXd& x) const;

  EnvConfig cfg_;
  std::vector<Eigen::VectorXd> prototypes_;
  std::vector<int> prototype_of_;  // user -> prototype, round-robin
  int block_split_ = 0;            // block structure: shared coords [0, split)
};

// Longest prefix length t such that some user's correlation matrix can be
// held at minimum eigenvalue <= eta by adversarial candidate choices within
// the logged rounds. Exhaustive search over all choice combinations; rejects
// instances with more than 12 rounds or more than 3 candidates anywhere.
int hardness_exhaustive(const std::vector<RoundInput>& rounds, int n_users,
                        double eta);

// Lower bound on the same quantity: at each round the adversary greedily
// picks the candidate minimizing the resulting minimum eigenvalue.
int hardness_greedy(const std::vector<RoundInput>& rounds, int n_users,
                    double eta);

}  // namespace cab
