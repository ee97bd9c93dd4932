#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "cab/model.hpp"
#include "cab/scoring.hpp"
#include "cab/sparse.hpp"

namespace cab {

// Width over the support-restricted correlation matrix. The experimental
// schedule matches the dense policy's formula; the theoretical schedule
// scales with min(s, dim) instead of dim.
double sparse_confidence_width(const PolicyConfig& cfg,
                               const SparseConfig& sparse,
                               const SparseDesign& design,
                               const std::vector<int>& support,
                               const Eigen::VectorXd& x, std::int64_t t,
                               int n_users);

// Sparse variant of the clustering bandit: each user's proxy comes from
// two-stage hard thresholding over that user's own observations, and widths
// use the support-restricted correlation. Neighborhood formation, scoring,
// and the gamma/4 update gate are identical to CabPolicy.
class SpCabPolicy : public Policy {
 public:
  SpCabPolicy(int n_users, int dim, PolicyConfig cfg, SparseConfig sparse,
              ExecMode mode = ExecMode::parallel);

  int select(const RoundInput& input) override;
  void observe(const RoundInput& input, const RoundOutcome& outcome) override;
  int dim() const override { return dim_; }
  std::string name() const override { return "spcab"; }

  std::pair<int, std::vector<NeighborhoodEstimate>> select_with_estimates(
      const RoundInput& input);

  // Accessors refresh the user's cached solve if the design changed.
  double confidence_width(int user, const Eigen::VectorXd& x, std::int64_t t);
  const SparseDesign& user_design(int user) const;
  const Eigen::VectorXd& user_weights(int user);
  const std::vector<int>& user_support(int user);
  int n_users() const { return static_cast<int>(users_.size()); }

 private:
  struct UserRecord {
    SparseDesign design;
    Eigen::VectorXd weights;
    std::vector<int> support;
    std::uint64_t solved_version = 0;  // design version the cache reflects
    bool solver_ran = false;

    explicit UserRecord(int dim)
        : design(dim), weights(Eigen::VectorXd::Zero(dim)) {}
  };

  struct RoundCache {
    bool valid = false;
    std::int64_t t = 0;
    int user = -1;
    int chosen = -1;
    ScoreTable table;
    std::vector<NeighborhoodEstimate> estimates;
  };

  void check_user(int user) const;
  void refresh_solution(int user);
  void refresh_all_dirty(const std::vector<std::uint8_t>& eligible);
  std::vector<std::uint8_t> eligibility_mask(int served) const;

  int dim_;
  PolicyConfig cfg_;
  SparseConfig sparse_;
  ExecMode mode_;
  std::vector<UserRecord> users_;
  Eigen::MatrixXd proxies_;  // row j mirrors users_[j].weights
  RoundCache cache_;
};

}  // namespace cab
