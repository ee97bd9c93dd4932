#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "cab/linalg.hpp"
#include "cab/model.hpp"
#include "cab/scoring.hpp"

namespace cab {

// One ridge model shared by every user.
class LinUcbSinglePolicy : public Policy {
 public:
  LinUcbSinglePolicy(int n_users, int dim, PolicyConfig cfg);
  int select(const RoundInput& input) override;
  void observe(const RoundInput& input, const RoundOutcome& outcome) override;
  int dim() const override { return dim_; }
  std::string name() const override { return "linucb-single"; }
  const CorrelationState& state() const { return states_[0]; }

 private:
  int n_users_;
  int dim_;
  PolicyConfig cfg_;
  std::vector<CorrelationState> states_;  // exactly one entry
  Eigen::MatrixXd proxies_;
  ScoreTable table_;
};

// Independent ridge model per user; no sharing across users.
class LinUcbMultiplePolicy : public Policy {
 public:
  LinUcbMultiplePolicy(int n_users, int dim, PolicyConfig cfg);
  int select(const RoundInput& input) override;
  void observe(const RoundInput& input, const RoundOutcome& outcome) override;
  int dim() const override { return dim_; }
  std::string name() const override { return "linucb-multiple"; }
  const CorrelationState& user_state(int user) const;

 private:
  int dim_;
  PolicyConfig cfg_;
  std::vector<CorrelationState> states_;
  Eigen::MatrixXd proxies_;
  std::vector<std::uint8_t> active_;
  ScoreTable table_;
};

// Uniform-random candidate choice; ignores payoffs.
class RanPolicy : public Policy {
 public:
  RanPolicy(int n_users, int dim, std::uint64_t seed);
  int select(const RoundInput& input) override;
  void observe(const RoundInput& input, const RoundOutcome& outcome) override;
  int dim() const override { return dim_; }
  std::string name() const override { return "ran"; }

 private:
  int n_users_;
  int dim_;
  std::mt19937_64 rng_;
};

struct ClubConfig {
  double alpha2 = 0.3;         // edge-deletion coefficient
  std::uint64_t graph_seed = 0;
  void validate() const;
};

// Graph-clustering bandit: users start connected by a sparse random graph,
// edges are deleted as proxy estimates separate, and each connected component
// is scored by its pooled ridge statistics.
class ClubPolicy : public Policy {
 public:
  ClubPolicy(int n_users, int dim, PolicyConfig cfg, ClubConfig club);
  int select(const RoundInput& input) override;
  void observe(const RoundInput& input, const RoundOutcome& outcome) override;
  int dim() const override { return dim_; }
  std::string name() const override { return "club"; }

  int component_of(int user) const;
  std::vector<int> component_members(int user) const;
  int n_components() const { return static_cast<int>(comps_.size()); }
  std::size_t n_edges() const;
  const CorrelationState& user_state(int user) const;

 private:
  struct Component {
    std::vector<int> members;
    Eigen::MatrixXd m_agg;   // I + sum_j (gram_j - I)
    Eigen::VectorXd b_agg;   // sum_j xty_j
    Eigen::MatrixXd m_inv;
    Eigen::VectorXd w;
    bool factor_dirty = true;
  };

  void check_user(int user) const;
  void build_component_from(const std::vector<int>& members, int comp_id);
  Component& ensure_factor(int comp_id);
  double deletion_cb(int user) const;

  int n_users_;
  int dim_;
  PolicyConfig cfg_;
  ClubConfig club_;
  std::vector<CorrelationState> states_;
  Eigen::MatrixXd proxies_;
  std::vector<std::int64_t> serve_counts_;
  std::vector<std::set<int>> adj_;
  std::vector<int> comp_id_;
  std::map<int, Component> comps_;
  int next_comp_id_ = 0;
};

struct DynUcbConfig {
  int clusters = 1;
  void validate(int n_users) const;
};

// Fixed number of clusters; the served user migrates to the cluster whose
// centroid (mean member proxy) is nearest after each update.
class DynUcbPolicy : public Policy {
 public:
  DynUcbPolicy(int n_users, int dim, PolicyConfig cfg, DynUcbConfig dyn);
  int select(const RoundInput& input) override;
  void observe(const RoundInput& input, const RoundOutcome& outcome) override;
  int dim() const override { return dim_; }
  std::string name() const override { return "dynucb"; }

  int cluster_of(int user) const;
  int n_clusters() const { return static_cast<int>(clusters_.size()); }
  std::vector<int> cluster_members(int cluster) const;
  const CorrelationState& user_state(int user) const;
  // From-scratch recomputation of one cluster's pooled statistics; the
  // incrementally maintained aggregates must track this.
  std::pair<Eigen::MatrixXd, Eigen::VectorXd> recompute_cluster(int cluster) const;
  std::pair<const Eigen::MatrixXd&, const Eigen::VectorXd&> cluster_aggregates(
      int cluster) const;

 private:
  struct Cluster {
    Eigen::MatrixXd m_agg;
    Eigen::VectorXd b_agg;
    Eigen::VectorXd centroid_sum;  // sum of member proxies
    int count = 0;
    Eigen::MatrixXd m_inv;
    Eigen::VectorXd w;
    bool factor_dirty = true;
  };

  void check_user(int user) const;
  Cluster& ensure_factor(int cluster);

  int n_users_;
  int dim_;
  PolicyConfig cfg_;
  std::vector<CorrelationState> states_;
  Eigen::MatrixXd proxies_;
  std::vector<int> assign_;
  std::vector<Cluster> clusters_;
};

}  // namespace cab
