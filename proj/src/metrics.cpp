#include "cab/metrics.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace cab {

double regret_step(const SyntheticEnv& env, const RoundInput& input, int chosen) {
  if (chosen < 0 || chosen >= static_cast<int>(input.candidates.size()))
    throw std::invalid_argument("regret_step: chosen index out of range");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& cand : input.candidates)
    best = std::max(best, env.mean_payoff(input.user, cand.features));
  return best - env.mean_payoff(input.user, input.candidates[chosen].features);
}

std::vector<double> cumulative(const std::vector<double>& values) {
  std::vector<double> out(values.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum += values[i];
    out[i] = sum;
  }
  return out;
}

std::vector<double> ctr_curve(const std::vector<RetainedEvent>& retained) {
  std::vector<double> out(retained.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < retained.size(); ++i) {
    const double p = retained[i].payoff;
    if (p != 0.0 && p != 1.0)
      throw std::domain_error("ctr_curve: payoffs must be binary");
    sum += p;
    out[i] = sum / static_cast<double>(i + 1);
  }
  return out;
}

std::vector<std::pair<std::int64_t, double>> regret_ratio_vs_ran(
    const std::vector<double>& cum, const std::vector<double>& ran_cum) {
  if (cum.size() != ran_cum.size())
    throw std::invalid_argument("regret_ratio_vs_ran: length mismatch");
  std::vector<std::pair<std::int64_t, double>> out;
  out.reserve(cum.size());
  for (std::size_t i = 0; i < cum.size(); ++i) {
    if (ran_cum[i] == 0.0) continue;  // ratio undefined here
    out.emplace_back(static_cast<std::int64_t>(i + 1), cum[i] / ran_cum[i]);
  }
  return out;
}

std::vector<double> mean_curve(const std::vector<std::vector<double>>& curves) {
  if (curves.empty()) throw std::invalid_argument("mean_curve: no curves");
  const std::size_t len = curves[0].size();
  for (const auto& c : curves)
    if (c.size() != len)
      throw std::invalid_argument("mean_curve: curve length mismatch");
  std::vector<double> out(len, 0.0);
  for (const auto& c : curves)
    for (std::size_t i = 0; i < len; ++i) out[i] += c[i];
  for (double& v : out) v /= static_cast<double>(curves.size());
  return out;
}

std::vector<std::pair<std::int64_t, double>> downsample(
    const std::vector<double>& values, std::int64_t stride) {
  if (stride < 1) throw std::invalid_argument("downsample: stride must be >= 1");
  std::vector<std::pair<std::int64_t, double>> out;
  const std::int64_t n = static_cast<std::int64_t>(values.size());
  for (std::int64_t idx = stride; idx <= n; idx += stride)
    out.emplace_back(idx, values[idx - 1]);
  if (n > 0 && n % stride != 0) out.emplace_back(n, values[n - 1]);
  return out;
}

}  // namespace cab
