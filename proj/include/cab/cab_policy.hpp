#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "cab/linalg.hpp"
#include "cab/model.hpp"
#include "cab/scoring.hpp"

namespace cab {

// Context-aware clustering bandit. Each user holds independent ridge
// statistics; at selection time users whose projections at the candidate
// context lie within the summed confidence widths of the served user form an
// estimated neighborhood, scored by its flat averages. Updates are gated at
// gamma/4: an uncertain served user updates alone, otherwise every confident
// neighborhood member absorbs the same observation.
class CabPolicy : public Policy {
 public:
  CabPolicy(int n_users, int dim, PolicyConfig cfg,
            ExecMode mode = ExecMode::parallel);

  int select(const RoundInput& input) override;
  void observe(const RoundInput& input, const RoundOutcome& outcome) override;
  int dim() const override { return dim_; }
  std::string name() const override { return "cab"; }

  // Selection plus the per-candidate estimates it was based on. observe()
  // consumes the estimates cached by the most recent select() on this input;
  // estimates from any earlier round are stale and rejected.
  std::pair<int, std::vector<NeighborhoodEstimate>> select_with_estimates(
      const RoundInput& input);

  double confidence_width(int user, const Eigen::VectorXd& x,
                          std::int64_t t) const;
  NeighborhoodEstimate estimate_neighborhood(int served,
                                             const Eigen::VectorXd& x,
                                             std::int64_t t) const;

  // Flat-average proxy vector over a member set (inspection helper; scoring
  // itself averages scalar projections, which agrees mathematically).
  Eigen::VectorXd neighborhood_proxy(const std::vector<int>& members) const;

  int add_user();
  void remove_user(int user);
  int n_users() const { return static_cast<int>(states_.size()); }
  bool is_active(int user) const;
  bool ever_updated(int user) const;

  const CorrelationState& user_state(int user) const;
  // Replaces a user's statistics wholesale (checkpoint restore, test setup).
  // Marks the user warm iff the state carries updates.
  void set_user_state(int user, CorrelationState st);

  const PolicyConfig& config() const { return cfg_; }

 private:
  struct RoundCache {
    bool valid = false;
    std::int64_t t = 0;
    int user = -1;
    int chosen = -1;
    ScoreTable table;
    std::vector<NeighborhoodEstimate> estimates;
  };

  void check_user(int user) const;
  std::vector<std::uint8_t> eligibility_mask(int served) const;
  void apply_update(int user, const Eigen::VectorXd& x, double y);

  int dim_;
  PolicyConfig cfg_;
  ExecMode mode_;
  std::vector<CorrelationState> states_;
  Eigen::MatrixXd proxies_;  // n x d, row j mirrors states_[j].proxy()
  std::vector<std::uint8_t> alive_;
  std::vector<std::uint8_t> ever_updated_;
  RoundCache cache_;
};

}  // namespace cab
