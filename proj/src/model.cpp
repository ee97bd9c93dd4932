#include "cab/model.hpp"

#include <cmath>
#include <stdexcept>

namespace cab {

void PolicyConfig::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha))
    throw ConfigError("policy.alpha must be finite and >= 0");
  if (!(alpha0 > 0.0) || !std::isfinite(alpha0))
    throw ConfigError("policy.alpha0 must be finite and > 0");
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw ConfigError("policy.gamma must be finite and > 0");
  if (!(delta > 0.0 && delta < 1.0))
    throw ConfigError("policy.delta must lie in (0, 1)");
  if (horizon_T < 1) throw ConfigError("policy.horizon_T must be >= 1");
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    throw ConfigError("policy.sigma must be finite and >= 0");
}

void check_round_input(const RoundInput& input, int dim, int n_users) {
  if (input.t < 1) throw std::invalid_argument("round index must be >= 1");
  if (input.user < 0 || input.user >= n_users)
    throw std::invalid_argument("user index out of range");
  if (input.candidates.empty())
    throw std::invalid_argument("candidate list must be nonempty");
  for (const auto& cv : input.candidates) {
    if (cv.features.size() != dim)
      throw std::invalid_argument("candidate feature dimension mismatch");
    if (!cv.features.allFinite())
      throw std::invalid_argument("candidate features must be finite");
  }
}

void check_round_outcome(const RoundInput& input, const RoundOutcome& outcome) {
  if (outcome.chosen_index < 0 ||
      outcome.chosen_index >= static_cast<int>(input.candidates.size()))
    throw std::invalid_argument("chosen_index out of range");
  if (!std::isfinite(outcome.payoff) || outcome.payoff < -1.0 || outcome.payoff > 1.0)
    throw std::domain_error("payoff must lie in [-1, 1]");
}

int argmax_lowest_index(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("argmax over empty list");
  int best = 0;
  for (int k = 1; k < static_cast<int>(values.size()); ++k)
    if (values[k] > values[best]) best = k;
  return best;
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream & 0xffffffffu),
                    static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace cab
