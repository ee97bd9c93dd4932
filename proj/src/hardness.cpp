#include <Eigen/Eigenvalues>
#include <algorithm>
#include <limits>
#include <stdexcept>
#include <vector>

#include "cab/env.hpp"

namespace cab {

namespace {

constexpr int kMaxRounds = 12;
constexpr int kMaxCandidates = 3;

double min_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("hardness: eigensolver failed");
  return solver.eigenvalues().minCoeff();
}

struct PerUserRounds {
  // Indices into `rounds` of the rounds serving this user, in order.
  std::vector<int> serving;
};

std::vector<PerUserRounds> split_by_user(const std::vector<RoundInput>& rounds,
                                         int n_users) {
  if (n_users < 1) throw std::invalid_argument("hardness: n_users must be >= 1");
  std::vector<PerUserRounds> per(n_users);
  for (int t = 0; t < static_cast<int>(rounds.size()); ++t) {
    const RoundInput& r = rounds[t];
    if (r.user < 0 || r.user >= n_users)
      throw std::invalid_argument("hardness: user index out of range");
    if (r.candidates.empty())
      throw std::invalid_argument("hardness: empty candidate list");
    per[r.user].serving.push_back(t);
  }
  return per;
}

void dfs_min_profile(const std::vector<RoundInput>& rounds,
                     const PerUserRounds& per, int depth,
                     const Eigen::MatrixXd& m, std::vector<double>& best) {
  best[depth] = std::min(best[depth], min_eigenvalue(m));
  if (depth == static_cast<int>(per.serving.size())) return;
  const RoundInput& r = rounds[per.serving[depth]];
  for (const auto& cand : r.candidates) {
    const Eigen::MatrixXd next =
        m + cand.features * cand.features.transpose();
    dfs_min_profile(rounds, per, depth + 1, next, best);
  }
}

// best[q] = minimum achievable min-eigenvalue of I + sum of q chosen outer
// products over all candidate combinations at this user's first q rounds.
std::vector<double> exhaustive_min_profile(const std::vector<RoundInput>& rounds,
                                           const PerUserRounds& per, int d) {
  const int q_max = static_cast<int>(per.serving.size());
  std::vector<double> best(q_max + 1,
                           std::numeric_limits<double>::infinity());
  dfs_min_profile(rounds, per, 0, Eigen::MatrixXd::Identity(d, d), best);
  return best;
}

std::vector<double> greedy_min_profile(const std::vector<RoundInput>& rounds,
                                       const PerUserRounds& per, int d) {
  const int q_max = static_cast<int>(per.serving.size());
  std::vector<double> prof(q_max + 1);
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(d, d);
  prof[0] = min_eigenvalue(m);
  for (int q = 0; q < q_max; ++q) {
    const RoundInput& r = rounds[per.serving[q]];
    double best_val = std::numeric_limits<double>::infinity();
    int best_k = 0;
    for (int k = 0; k < static_cast<int>(r.candidates.size()); ++k) {
      const Eigen::VectorXd& x = r.candidates[k].features;
      const double val = min_eigenvalue(m + x * x.transpose());
      if (val < best_val) {
        best_val = val;
        best_k = k;
      }
    }
    m += r.candidates[best_k].features * r.candidates[best_k].features.transpose();
    prof[q + 1] = best_val;
  }
  return prof;
}

int profile_to_hd(const std::vector<RoundInput>& rounds,
                  const std::vector<PerUserRounds>& per,
                  const std::vector<std::vector<double>>& profiles, double eta) {
  const int t_max = static_cast<int>(rounds.size());
  const int n_users = static_cast<int>(per.size());
  // served_count[j][t] = how many of user j's rounds happened by time t.
  for (int t = t_max; t >= 1; --t) {
    for (int j = 0; j < n_users; ++j) {
      int q = 0;
      for (int idx : per[j].serving)
        if (idx < t) ++q;
      if (profiles[j][q] <= eta) return t;
    }
  }
  return 0;
}

int dim_of(const std::vector<RoundInput>& rounds) {
  if (rounds.empty()) throw std::invalid_argument("hardness: empty round log");
  const int d = static_cast<int>(rounds[0].candidates[0].features.size());
  for (const auto& r : rounds)
    for (const auto& cand : r.candidates)
      if (static_cast<int>(cand.features.size()) != d)
        throw std::invalid_argument("hardness: mixed candidate dimensions");
  return d;
}

}  // namespace

int hardness_exhaustive(const std::vector<RoundInput>& rounds, int n_users,
                        double eta) {
  if (static_cast<int>(rounds.size()) > kMaxRounds)
    throw std::invalid_argument(
        "hardness_exhaustive: instance too large (rounds)");
  for (const auto& r : rounds)
    if (static_cast<int>(r.candidates.size()) > kMaxCandidates)
      throw std::invalid_argument(
          "hardness_exhaustive: instance too large (candidates)");
  const auto per = split_by_user(rounds, n_users);
  const int d = dim_of(rounds);
  std::vector<std::vector<double>> profiles;
  profiles.reserve(n_users);
  for (int j = 0; j < n_users; ++j)
    profiles.push_back(exhaustive_min_profile(rounds, per[j], d));
  return profile_to_hd(rounds, per, profiles, eta);
}

int hardness_greedy(const std::vector<RoundInput>& rounds, int n_users,
                    double eta) {
  const auto per = split_by_user(rounds, n_users);
  const int d = dim_of(rounds);
  std::vector<std::vector<double>> profiles;
  profiles.reserve(n_users);
  for (int j = 0; j < n_users; ++j)
    profiles.push_back(greedy_min_profile(rounds, per[j], d));
  return profile_to_hd(rounds, per, profiles, eta);
}

}  // namespace cab
