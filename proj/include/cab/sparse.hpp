#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace cab {

struct SparseConfig {
  int s = 10;        // sparsity level kept by the projection step
  int ell = 10;      // extra gradient coordinates admitted per iteration
  int s_star = 5;    // generative sparsity the instance is assumed to have
  double pi_min = 0.5;  // generative floor on nonzero signal magnitudes
  double ridge = 1.0;
  int max_iters = 100;
  double convergence_tol = 1e-8;  // relative objective change

  void validate() const;
};

// Sufficient statistics of one user's regression design:
//   gram_x = sum_r x_r x_r^T,  xty = sum_r y_r x_r,  yty = sum_r y_r^2.
// Enough to evaluate the ridge objective, its gradient, and any
// support-restricted solve exactly.
class SparseDesign {
 public:
  explicit SparseDesign(int dim);

  void add(const Eigen::VectorXd& x, double y);
  int dim() const { return static_cast<int>(gram_x.rows()); }
  std::int64_t size() const { return count; }
  std::uint64_t version() const { return version_; }

  // Ridge objective sum_r (w.x_r - y_r)^2 + ridge * |w|^2.
  double objective(const Eigen::VectorXd& w, double ridge) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& w, double ridge) const;

  Eigen::MatrixXd gram_x;
  Eigen::VectorXd xty;
  double yty = 0.0;
  std::int64_t count = 0;

 private:
  std::uint64_t version_ = 0;
};

// Exact ridge solve restricted to `support` (strictly increasing indices);
// coordinates outside the support are zero. Empty design raises an
// insufficient-data error.
Eigen::VectorXd restricted_ls(const SparseDesign& design,
                              const std::vector<int>& support, double ridge);

struct HtResult {
  Eigen::VectorXd weights;
  std::vector<int> support;            // strictly increasing
  std::vector<double> objective_trace; // f(0) then f after each iteration
  int iterations = 0;
  bool converged = false;
};

// Two-stage hard thresholding for the sparse ridge objective: expand the
// support with the ell largest off-support gradient coordinates, solve
// restricted, project to the s largest magnitudes, solve restricted again.
// Stops on relative objective change below convergence_tol, at max_iters, or
// when an iteration fails to improve (previous iterate is kept, so the
// recorded trace is nonincreasing). With s >= dim the projection is the
// identity and the result is the plain ridge solution.
HtResult two_stage_ht(const SparseDesign& design, const SparseConfig& cfg);

// x^T inv(I + gram_x restricted to S) x, where coordinates off S contribute
// x_i^2 through the identity block.
double sparse_quad_form(const SparseDesign& design,
                        const std::vector<int>& support,
                        const Eigen::VectorXd& x);

// Indices of the k largest |values|; ties prefer the lower index. Result is
// strictly increasing.
std::vector<int> top_k_by_magnitude(const Eigen::VectorXd& values, int k);

}  // namespace cab
