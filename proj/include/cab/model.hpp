#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace cab {

// Raised for invalid run configuration (bad flag values, missing files,
// malformed config). The CLI maps it to exit code 1; everything else that
// escapes maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ContextVector {
  std::int64_t item_id = -1;  // opaque; -1 when the item has no identity
  Eigen::VectorXd features;
};

struct RoundInput {
  std::int64_t t = 1;  // 1-based round index
  int user = 0;
  std::vector<ContextVector> candidates;
};

struct RoundOutcome {
  int chosen_index = 0;
  double payoff = 0.0;  // in [-1, 1]
};

enum class AlphaSchedule {
  experimental,  // alpha * sqrt(quad * log(1 + t))
  theoretical,   // alpha0 * sqrt(d * log(T * n / delta)) * sqrt(quad)
};

enum class TieBreak { lowest_index };

struct PolicyConfig {
  double alpha = 0.1;   // exploration scale for the experimental schedule
  double alpha0 = 1.0;  // scale for the theoretical schedule
  AlphaSchedule alpha_schedule = AlphaSchedule::experimental;
  double gamma = 0.2;   // separation parameter; update gate fires at gamma/4
  double delta = 0.05;  // confidence level for the theoretical schedule
  bool warm_user_filter = true;  // restrict neighborhoods to updated users
  TieBreak tie_break = TieBreak::lowest_index;
  std::int64_t horizon_T = 10000;
  double sigma = 0.1;

  void validate() const;
};

// Sequential decision policy. select() sees contexts only; observe() folds in
// the payoff of the served candidate and must not alter the decision already
// returned. Implementations are deterministic given construction seed and the
// exact call sequence.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual int select(const RoundInput& input) = 0;
  virtual void observe(const RoundInput& input, const RoundOutcome& outcome) = 0;
  virtual int dim() const = 0;
  virtual std::string name() const = 0;
};

// Validates the common RoundInput/RoundOutcome contract shared by policies.
void check_round_input(const RoundInput& input, int dim, int n_users);
void check_round_outcome(const RoundInput& input, const RoundOutcome& outcome);

// Index of the strictly largest value; ties keep the lowest index.
int argmax_lowest_index(const std::vector<double>& values);

// Deterministic RNG derived from a base seed and a stream tag, so distinct
// consumers of one run seed never share a stream.
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream);

}  // namespace cab
