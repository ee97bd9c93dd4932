#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "cab/linalg.hpp"
#include "cab/model.hpp"

namespace cab {

enum class ExecMode { serial, parallel };

// Per-user, per-candidate projections and confidence widths for one round:
//   proj(j, k)  = proxies.row(j) . x_k
//   width(j, k) = width(cfg, quad_form_j(x_k), t)
// Rows of inactive users are left untouched.
struct ScoreTable {
  Eigen::MatrixXd proj;
  Eigen::MatrixXd width;

  void resize(int n_users, int n_candidates) {
    proj.resize(n_users, n_candidates);
    width.resize(n_users, n_candidates);
  }
};

// Confidence width from a precomputed quadratic form x^T gram_inv x.
double width_from_quad(const PolicyConfig& cfg, double quad, std::int64_t t,
                       int dim, int n_users);

// Estimated neighborhood of the served user at one candidate context:
// member indices plus the flat-average projection and confidence width used
// for scoring that candidate.
struct NeighborhoodEstimate {
  std::vector<int> members;
  double proj = 0.0;   // mean over members of w_j . x
  double width = 0.0;  // mean over members of per-user width at x
};

// Members are the eligible users whose projection at column `col` lies within
// the summed confidence widths of the served user. The served user is always
// a member regardless of eligibility.
NeighborhoodEstimate neighborhood_from_scores(
    int served, int col, const ScoreTable& table,
    const std::vector<std::uint8_t>& eligible);

// Fills `out` for every active user. The parallel path distributes users
// across OpenMP threads; per-user work is identical to the serial path, so
// both produce bitwise-identical tables.
void score_all_users(const std::vector<CorrelationState>& states,
                     const Eigen::MatrixXd& proxies,
                     const std::vector<ContextVector>& candidates,
                     std::int64_t t, const PolicyConfig& cfg, int n_users,
                     const std::vector<std::uint8_t>& active, ExecMode mode,
                     ScoreTable& out);

}  // namespace cab
