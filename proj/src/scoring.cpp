#include "cab/scoring.hpp"

#include <cmath>
#include <stdexcept>

namespace cab {

double width_from_quad(const PolicyConfig& cfg, double quad, std::int64_t t,
                       int dim, int n_users) {
  if (quad < 0.0) quad = 0.0;
  switch (cfg.alpha_schedule) {
    case AlphaSchedule::experimental:
      return cfg.alpha *
             std::sqrt(quad * std::log(1.0 + static_cast<double>(t)));
    case AlphaSchedule::theoretical:
      return cfg.alpha0 *
             std::sqrt(static_cast<double>(dim) *
                       std::log(static_cast<double>(cfg.horizon_T) *
                                static_cast<double>(n_users) / cfg.delta)) *
             std::sqrt(quad);
  }
  throw std::logic_error("unknown alpha schedule");
}

namespace {

// One user's row of the table. Shared verbatim by both execution paths.
inline void score_one_user(const CorrelationState& st,
                           const Eigen::MatrixXd& proxies,
                           const std::vector<ContextVector>& candidates,
                           std::int64_t t, const PolicyConfig& cfg, int dim,
                           int n_users, int j, ScoreTable& out) {
  for (int k = 0; k < static_cast<int>(candidates.size()); ++k) {
    const Eigen::VectorXd& x = candidates[k].features;
    out.proj(j, k) = proxies.row(j).dot(x);
    out.width(j, k) = width_from_quad(cfg, st.quad_form(x), t, dim, n_users);
  }
}

}  // namespace

NeighborhoodEstimate neighborhood_from_scores(
    int served, int col, const ScoreTable& table,
    const std::vector<std::uint8_t>& eligible) {
  const int n = static_cast<int>(table.proj.rows());
  if (served < 0 || served >= n || static_cast<int>(eligible.size()) != n ||
      col < 0 || col >= table.proj.cols())
    throw std::invalid_argument("neighborhood_from_scores: bad arguments");

  NeighborhoodEstimate est;
  const double served_proj = table.proj(served, col);
  const double served_width = table.width(served, col);
  double proj_sum = 0.0;
  double width_sum = 0.0;
  for (int j = 0; j < n; ++j) {
    if (j != served) {
      if (!eligible[j]) continue;
      if (std::abs(served_proj - table.proj(j, col)) >
          served_width + table.width(j, col))
        continue;
    }
    est.members.push_back(j);
    proj_sum += table.proj(j, col);
    width_sum += table.width(j, col);
  }
  const double size = static_cast<double>(est.members.size());
  est.proj = proj_sum / size;
  est.width = width_sum / size;
  return est;
}

void score_all_users(const std::vector<CorrelationState>& states,
                     const Eigen::MatrixXd& proxies,
                     const std::vector<ContextVector>& candidates,
                     std::int64_t t, const PolicyConfig& cfg, int n_users,
                     const std::vector<std::uint8_t>& active, ExecMode mode,
                     ScoreTable& out) {
  if (static_cast<int>(states.size()) != n_users ||
      proxies.rows() != n_users ||
      static_cast<int>(active.size()) != n_users)
    throw std::invalid_argument("score_all_users: user table size mismatch");
  const int dim = n_users > 0 ? states[0].dim() : 0;
  out.resize(n_users, static_cast<int>(candidates.size()));

  if (mode == ExecMode::parallel) {
#pragma omp parallel for schedule(static)
    for (int j = 0; j < n_users; ++j) {
      if (!active[j]) continue;
      score_one_user(states[j], proxies, candidates, t, cfg, dim, n_users, j, out);
    }
  } else {
    for (int j = 0; j < n_users; ++j) {
      if (!active[j]) continue;
      score_one_user(states[j], proxies, candidates, t, cfg, dim, n_users, j, out);
    }
  }
}

}  // namespace cab
