#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "cab/env.hpp"
#include "cab/model.hpp"
#include "cab/replay.hpp"

namespace cab {

struct RegretTrace {
  std::uint64_t seed = 0;
  std::vector<double> inst;  // per-round instantaneous regret
};

// Ground-truth instantaneous regret of choosing candidate `chosen`: best
// noiseless payoff over the list minus the chosen one's.
double regret_step(const SyntheticEnv& env, const RoundInput& input, int chosen);

// Prefix sums.
std::vector<double> cumulative(const std::vector<double>& values);

// Running click-through rate over retained replay events. Payoffs must be
// exactly 0 or 1.
std::vector<double> ctr_curve(const std::vector<RetainedEvent>& retained);

// Elementwise cum / ran_cum as (1-based index, ratio); indices where the
// uniform baseline's cumulative regret is zero are omitted.
std::vector<std::pair<std::int64_t, double>> regret_ratio_vs_ran(
    const std::vector<double>& cum, const std::vector<double>& ran_cum);

// Pointwise arithmetic mean of equal-length curves.
std::vector<double> mean_curve(const std::vector<std::vector<double>>& curves);

// (1-based index, value) at indices stride, 2*stride, ... plus the final
// index when it is not a multiple.
std::vector<std::pair<std::int64_t, double>> downsample(
    const std::vector<double>& values, std::int64_t stride);

}  // namespace cab
