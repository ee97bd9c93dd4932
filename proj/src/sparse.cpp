#include "cab/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cab/model.hpp"

namespace cab {

void SparseConfig::validate() const {
  if (s < 1) throw ConfigError("sparse.s must be >= 1");
  if (ell < 1) throw ConfigError("sparse.ell must be >= 1");
  if (s_star < 1) throw ConfigError("sparse.s_star must be >= 1");
  if (!(pi_min > 0.0)) throw ConfigError("sparse.pi_min must be > 0");
  if (!(ridge > 0.0)) throw ConfigError("sparse.ridge must be > 0");
  if (max_iters < 1) throw ConfigError("sparse.max_iters must be >= 1");
  if (!(convergence_tol > 0.0))
    throw ConfigError("sparse.convergence_tol must be > 0");
}

SparseDesign::SparseDesign(int dim) {
  if (dim < 1) throw std::invalid_argument("SparseDesign: dimension must be >= 1");
  gram_x = Eigen::MatrixXd::Zero(dim, dim);
  xty = Eigen::VectorXd::Zero(dim);
}

void SparseDesign::add(const Eigen::VectorXd& x, double y) {
  if (x.size() != gram_x.rows())
    throw std::invalid_argument("SparseDesign: dimension mismatch");
  if (!x.allFinite() || !std::isfinite(y))
    throw std::invalid_argument("SparseDesign: non-finite observation");
  gram_x.noalias() += x * x.transpose();
  xty.noalias() += y * x;
  yty += y * y;
  ++count;
  ++version_;
}

double SparseDesign::objective(const Eigen::VectorXd& w, double ridge) const {
  return w.dot(gram_x * w) - 2.0 * w.dot(xty) + yty + ridge * w.squaredNorm();
}

Eigen::VectorXd SparseDesign::gradient(const Eigen::VectorXd& w,
                                       double ridge) const {
  return 2.0 * (gram_x * w - xty + ridge * w);
}

namespace {

void check_support(const std::vector<int>& support, int dim) {
  int prev = -1;
  for (int i : support) {
    if (i <= prev || i >= dim)
      throw std::invalid_argument("support must be strictly increasing and in range");
    prev = i;
  }
}

}  // namespace

std::vector<int> top_k_by_magnitude(const Eigen::VectorXd& values, int k) {
  const int d = static_cast<int>(values.size());
  k = std::min(k, d);
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(values[a]) > std::abs(values[b]);
  });
  order.resize(k);
  std::sort(order.begin(), order.end());
  return order;
}

Eigen::VectorXd restricted_ls(const SparseDesign& design,
                              const std::vector<int>& support, double ridge) {
  if (design.size() == 0)
    throw std::runtime_error("restricted_ls: design holds no observations");
  const int d = design.dim();
  check_support(support, d);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  if (support.empty()) return w;

  const int k = static_cast<int>(support.size());
  Eigen::MatrixXd a(k, k);
  Eigen::VectorXd rhs(k);
  for (int r = 0; r < k; ++r) {
    rhs[r] = design.xty[support[r]];
    for (int c = 0; c < k; ++c)
      a(r, c) = design.gram_x(support[r], support[c]);
    a(r, r) += ridge;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("restricted_ls: factorization failed");
  Eigen::VectorXd beta = llt.solve(rhs);
  for (int r = 0; r < k; ++r) w[support[r]] = beta[r];
  return w;
}

HtResult two_stage_ht(const SparseDesign& design, const SparseConfig& cfg) {
  cfg.validate();
  if (design.size() == 0)
    throw std::runtime_error("two_stage_ht: design holds no observations");
  const int d = design.dim();

  HtResult res;
  res.weights = Eigen::VectorXd::Zero(d);
  double f_prev = design.objective(res.weights, cfg.ridge);
  res.objective_trace.push_back(f_prev);

  for (int it = 0; it < cfg.max_iters; ++it) {
    // Stage 1: admit the largest off-support gradient coordinates.
    std::vector<int> supp;
    for (int i = 0; i < d; ++i)
      if (res.weights[i] != 0.0) supp.push_back(i);
    std::vector<std::uint8_t> in_supp(d, 0);
    for (int i : supp) in_supp[i] = 1;

    Eigen::VectorXd grad = design.gradient(res.weights, cfg.ridge);
    Eigen::VectorXd grad_off = grad;
    for (int i = 0; i < d; ++i)
      if (in_supp[i]) grad_off[i] = 0.0;
    std::vector<int> admitted = top_k_by_magnitude(grad_off, cfg.ell);

    std::vector<int> z = supp;
    z.insert(z.end(), admitted.begin(), admitted.end());
    std::sort(z.begin(), z.end());
    z.erase(std::unique(z.begin(), z.end()), z.end());

    Eigen::VectorXd w_mid = restricted_ls(design, z, cfg.ridge);

    // Stage 2: project to the s largest magnitudes, then re-solve there.
    std::vector<int> kept = top_k_by_magnitude(w_mid, cfg.s);
    Eigen::VectorXd w_next = restricted_ls(design, kept, cfg.ridge);

    const double f_next = design.objective(w_next, cfg.ridge);
    if (f_next > f_prev) {  // stalled; keep the better earlier iterate
      res.converged = true;
      break;
    }
    res.weights = std::move(w_next);
    res.objective_trace.push_back(f_next);
    res.iterations = it + 1;
    const bool small_change =
        std::abs(f_prev - f_next) <= cfg.convergence_tol * std::max(1.0, std::abs(f_prev));
    f_prev = f_next;
    if (small_change) {
      res.converged = true;
      break;
    }
  }

  std::vector<int> final_supp;
  for (int i = 0; i < d; ++i)
    if (res.weights[i] != 0.0) final_supp.push_back(i);
  res.support = std::move(final_supp);
  return res;
}

double sparse_quad_form(const SparseDesign& design,
                        const std::vector<int>& support,
                        const Eigen::VectorXd& x) {
  const int d = design.dim();
  if (x.size() != d)
    throw std::invalid_argument("sparse_quad_form: dimension mismatch");
  check_support(support, d);

  std::vector<std::uint8_t> in_supp(d, 0);
  for (int i : support) in_supp[i] = 1;
  double off = 0.0;
  for (int i = 0; i < d; ++i)
    if (!in_supp[i]) off += x[i] * x[i];

  if (support.empty()) return off;
  const int k = static_cast<int>(support.size());
  Eigen::MatrixXd a(k, k);
  Eigen::VectorXd xs(k);
  for (int r = 0; r < k; ++r) {
    xs[r] = x[support[r]];
    for (int c = 0; c < k; ++c)
      a(r, c) = design.gram_x(support[r], support[c]);
    a(r, r) += 1.0;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("sparse_quad_form: factorization failed");
  double quad = xs.dot(llt.solve(xs)) + off;
  return quad < 0.0 ? 0.0 : quad;
}

}  // namespace cab
