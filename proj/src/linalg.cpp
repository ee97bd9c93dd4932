#include "cab/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace cab {

CorrelationState CorrelationState::new_identity(int d) {
  if (d < 1) throw std::invalid_argument("CorrelationState: dimension must be >= 1");
  CorrelationState st;
  st.gram = Eigen::MatrixXd::Identity(d, d);
  st.gram_inv = Eigen::MatrixXd::Identity(d, d);
  st.xty = Eigen::VectorXd::Zero(d);
  st.n_updates = 0;
  return st;
}

void CorrelationState::check_vector(const Eigen::VectorXd& x) const {
  if (x.size() != gram.rows())
    throw std::invalid_argument("CorrelationState: vector dimension mismatch");
  if (!x.allFinite())
    throw std::invalid_argument("CorrelationState: non-finite vector entry");
}

void CorrelationState::rank_one_update(const Eigen::VectorXd& x, double y) {
  check_vector(x);
  if (!std::isfinite(y))
    throw std::invalid_argument("CorrelationState: non-finite payoff");
  if (x.norm() > 1.0 + 1e-9)
    throw std::invalid_argument("CorrelationState: context norm exceeds 1");

  gram.noalias() += x * x.transpose();
  xty.noalias() += y * x;

  // Sherman-Morrison downdate of the inverse.
  Eigen::VectorXd v = gram_inv * x;
  const double denom = 1.0 + x.dot(v);
  if (denom < kDenominatorGuard)
    throw std::runtime_error("CorrelationState: update denominator below guard");
  gram_inv.noalias() -= (v * v.transpose()) / denom;

  ++n_updates;
  if (n_updates % kRefreshInterval == 0) refresh_inverse();
}

void CorrelationState::refresh_inverse() {
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("CorrelationState: gram factorization failed");
  gram_inv = llt.solve(Eigen::MatrixXd::Identity(gram.rows(), gram.cols()));
  // Keep the maintained inverse exactly symmetric.
  gram_inv = ((gram_inv + gram_inv.transpose()) * 0.5).eval();
}

Eigen::VectorXd CorrelationState::proxy() const { return gram_inv * xty; }

double CorrelationState::quad_form(const Eigen::VectorXd& x) const {
  check_vector(x);
  const double q = x.dot(gram_inv * x);
  return q < 0.0 ? 0.0 : q;
}

}  // namespace cab
