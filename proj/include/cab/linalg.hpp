#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace cab {

// Ridge-regression sufficient statistics for one linear model:
//   gram = I + sum_t x_t x_t^T,  xty = sum_t y_t x_t.
// gram_inv is maintained incrementally (rank-one downdate per update, O(d^2))
// and re-derived from a dense Cholesky factorization every refresh_interval
// updates to cap floating-point drift.
class CorrelationState {
 public:
  static constexpr std::int64_t kRefreshInterval = 4096;
  static constexpr double kDenominatorGuard = 1e-12;

  CorrelationState() = default;

  // Fresh state at dimension d: gram = gram_inv = I, xty = 0.
  static CorrelationState new_identity(int d);

  // Folds one observation (x, y) into the statistics. x must be finite with
  // norm <= 1 + 1e-9; y must be finite.
  void rank_one_update(const Eigen::VectorXd& x, double y);

  // Ridge proxy estimate gram_inv * xty.
  Eigen::VectorXd proxy() const;

  // x^T gram_inv x, clamped to be nonnegative.
  double quad_form(const Eigen::VectorXd& x) const;

  // Recomputes gram_inv from gram via dense Cholesky. Normally invoked by
  // the refresh schedule; public so callers can force a resync.
  void refresh_inverse();

  int dim() const { return static_cast<int>(gram.rows()); }

  Eigen::MatrixXd gram;
  Eigen::MatrixXd gram_inv;
  Eigen::VectorXd xty;
  std::int64_t n_updates = 0;

 private:
  void check_vector(const Eigen::VectorXd& x) const;
};

}  // namespace cab
