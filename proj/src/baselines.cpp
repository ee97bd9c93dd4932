#include "cab/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace cab {

// ---------------------------------------------------------------- LinUCB ---

LinUcbSinglePolicy::LinUcbSinglePolicy(int n_users, int dim, PolicyConfig cfg)
    : n_users_(n_users), dim_(dim), cfg_(cfg) {
  if (n_users < 1 || dim < 1)
    throw std::invalid_argument("LinUcbSinglePolicy: bad sizes");
  cfg_.validate();
  states_.push_back(CorrelationState::new_identity(dim));
  proxies_ = Eigen::MatrixXd::Zero(1, dim);
}

int LinUcbSinglePolicy::select(const RoundInput& input) {
  check_round_input(input, dim_, n_users_);
  score_all_users(states_, proxies_, input.candidates, input.t, cfg_, 1, {1},
                  ExecMode::serial, table_);
  std::vector<double> scores(input.candidates.size());
  for (std::size_t k = 0; k < scores.size(); ++k)
    scores[k] = table_.proj(0, k) + table_.width(0, k);
  return argmax_lowest_index(scores);
}

void LinUcbSinglePolicy::observe(const RoundInput& input,
                                 const RoundOutcome& outcome) {
  check_round_input(input, dim_, n_users_);
  check_round_outcome(input, outcome);
  states_[0].rank_one_update(input.candidates[outcome.chosen_index].features,
                             outcome.payoff);
  proxies_.row(0) = states_[0].proxy().transpose();
}

LinUcbMultiplePolicy::LinUcbMultiplePolicy(int n_users, int dim, PolicyConfig cfg)
    : dim_(dim), cfg_(cfg) {
  if (n_users < 1 || dim < 1)
    throw std::invalid_argument("LinUcbMultiplePolicy: bad sizes");
  cfg_.validate();
  states_.reserve(n_users);
  for (int j = 0; j < n_users; ++j)
    states_.push_back(CorrelationState::new_identity(dim));
  proxies_ = Eigen::MatrixXd::Zero(n_users, dim);
  active_.assign(n_users, 0);
}

const CorrelationState& LinUcbMultiplePolicy::user_state(int user) const {
  if (user < 0 || user >= static_cast<int>(states_.size()))
    throw std::invalid_argument("user index out of range");
  return states_[user];
}

int LinUcbMultiplePolicy::select(const RoundInput& input) {
  const int n = static_cast<int>(states_.size());
  check_round_input(input, dim_, n);
  // Score only the served user's row; the table is shared scratch.
  std::fill(active_.begin(), active_.end(), 0);
  active_[input.user] = 1;
  score_all_users(states_, proxies_, input.candidates, input.t, cfg_, n,
                  active_, ExecMode::serial, table_);
  std::vector<double> scores(input.candidates.size());
  for (std::size_t k = 0; k < scores.size(); ++k)
    scores[k] = table_.proj(input.user, k) + table_.width(input.user, k);
  return argmax_lowest_index(scores);
}

void LinUcbMultiplePolicy::observe(const RoundInput& input,
                                   const RoundOutcome& outcome) {
  check_round_input(input, dim_, static_cast<int>(states_.size()));
  check_round_outcome(input, outcome);
  states_[input.user].rank_one_update(
      input.candidates[outcome.chosen_index].features, outcome.payoff);
  proxies_.row(input.user) = states_[input.user].proxy().transpose();
}

// ------------------------------------------------------------------- RAN ---

RanPolicy::RanPolicy(int n_users, int dim, std::uint64_t seed)
    : n_users_(n_users), dim_(dim), rng_(make_rng(seed, 0x52414eull)) {
  if (n_users < 1 || dim < 1) throw std::invalid_argument("RanPolicy: bad sizes");
}

int RanPolicy::select(const RoundInput& input) {
  check_round_input(input, dim_, n_users_);
  std::uniform_int_distribution<int> pick(
      0, static_cast<int>(input.candidates.size()) - 1);
  return pick(rng_);
}

void RanPolicy::observe(const RoundInput& input, const RoundOutcome& outcome) {
  check_round_input(input, dim_, n_users_);
  check_round_outcome(input, outcome);
}

// ------------------------------------------------------------------ CLUB ---

void ClubConfig::validate() const {
  if (!(alpha2 >= 0.0) || !std::isfinite(alpha2))
    throw ConfigError("club.alpha2 must be finite and >= 0");
}

ClubPolicy::ClubPolicy(int n_users, int dim, PolicyConfig cfg, ClubConfig club)
    : n_users_(n_users), dim_(dim), cfg_(cfg), club_(club) {
  if (n_users < 1 || dim < 1) throw std::invalid_argument("ClubPolicy: bad sizes");
  cfg_.validate();
  club_.validate();
  states_.reserve(n_users);
  for (int j = 0; j < n_users; ++j)
    states_.push_back(CorrelationState::new_identity(dim));
  proxies_ = Eigen::MatrixXd::Zero(n_users, dim);
  serve_counts_.assign(n_users, 0);

  // Sparse Erdos-Renyi start: p = 3 ln(n) / n keeps the graph connected with
  // high probability while staying far from complete.
  adj_.assign(n_users, {});
  if (n_users > 1) {
    const double p = std::min(1.0, 3.0 * std::log(static_cast<double>(n_users)) /
                                       static_cast<double>(n_users));
    auto rng = make_rng(club_.graph_seed, 0xC1B);
    std::bernoulli_distribution edge(p);
    for (int i = 0; i < n_users; ++i)
      for (int j = i + 1; j < n_users; ++j)
        if (edge(rng)) {
          adj_[i].insert(j);
          adj_[j].insert(i);
        }
  }

  comp_id_.assign(n_users, -1);
  std::vector<std::uint8_t> seen(n_users, 0);
  for (int s = 0; s < n_users; ++s) {
    if (seen[s]) continue;
    std::vector<int> members;
    std::deque<int> queue{s};
    seen[s] = 1;
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      members.push_back(u);
      for (int v : adj_[u])
        if (!seen[v]) {
          seen[v] = 1;
          queue.push_back(v);
        }
    }
    std::sort(members.begin(), members.end());
    build_component_from(members, next_comp_id_++);
  }
}

void ClubPolicy::check_user(int user) const {
  if (user < 0 || user >= n_users_)
    throw std::invalid_argument("ClubPolicy: user index out of range");
}

const CorrelationState& ClubPolicy::user_state(int user) const {
  check_user(user);
  return states_[user];
}

int ClubPolicy::component_of(int user) const {
  check_user(user);
  return comp_id_[user];
}

std::vector<int> ClubPolicy::component_members(int user) const {
  check_user(user);
  return comps_.at(comp_id_[user]).members;
}

std::size_t ClubPolicy::n_edges() const {
  std::size_t twice = 0;
  for (const auto& nbrs : adj_) twice += nbrs.size();
  return twice / 2;
}

void ClubPolicy::build_component_from(const std::vector<int>& members,
                                      int comp_id) {
  Component comp;
  comp.members = members;
  comp.m_agg = Eigen::MatrixXd::Identity(dim_, dim_);
  comp.b_agg = Eigen::VectorXd::Zero(dim_);
  for (int j : members) {
    comp.m_agg += states_[j].gram - Eigen::MatrixXd::Identity(dim_, dim_);
    comp.b_agg += states_[j].xty;
    comp_id_[j] = comp_id;
  }
  comp.factor_dirty = true;
  comps_[comp_id] = std::move(comp);
}

ClubPolicy::Component& ClubPolicy::ensure_factor(int comp_id) {
  Component& comp = comps_.at(comp_id);
  if (comp.factor_dirty) {
    Eigen::LLT<Eigen::MatrixXd> llt(comp.m_agg);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("ClubPolicy: component factorization failed");
    comp.m_inv = llt.solve(Eigen::MatrixXd::Identity(dim_, dim_));
    comp.m_inv = ((comp.m_inv + comp.m_inv.transpose()) * 0.5).eval();
    comp.w = comp.m_inv * comp.b_agg;
    comp.factor_dirty = false;
  }
  return comp;
}

int ClubPolicy::select(const RoundInput& input) {
  check_round_input(input, dim_, n_users_);
  Component& comp = ensure_factor(comp_id_[input.user]);
  std::vector<double> scores(input.candidates.size());
  for (std::size_t k = 0; k < scores.size(); ++k) {
    const Eigen::VectorXd& x = input.candidates[k].features;
    double quad = x.dot(comp.m_inv * x);
    scores[k] = comp.w.dot(x) +
                width_from_quad(cfg_, quad, input.t, dim_, n_users_);
  }
  return argmax_lowest_index(scores);
}

double ClubPolicy::deletion_cb(int user) const {
  const double tj = static_cast<double>(serve_counts_[user]);
  return std::sqrt((1.0 + std::log(1.0 + tj)) / (1.0 + tj));
}

void ClubPolicy::observe(const RoundInput& input, const RoundOutcome& outcome) {
  check_round_input(input, dim_, n_users_);
  check_round_outcome(input, outcome);
  const int i = input.user;
  const Eigen::VectorXd& x = input.candidates[outcome.chosen_index].features;

  states_[i].rank_one_update(x, outcome.payoff);
  proxies_.row(i) = states_[i].proxy().transpose();
  serve_counts_[i] += 1;

  Component& comp = comps_.at(comp_id_[i]);
  comp.m_agg.noalias() += x * x.transpose();
  comp.b_agg.noalias() += outcome.payoff * x;
  comp.factor_dirty = true;

  // Edge deletion: drop neighbors whose proxies have provably separated.
  bool deleted = false;
  std::vector<int> nbrs(adj_[i].begin(), adj_[i].end());
  for (int j : nbrs) {
    const double gap = (proxies_.row(i) - proxies_.row(j)).norm();
    if (gap > club_.alpha2 * (deletion_cb(i) + deletion_cb(j))) {
      adj_[i].erase(j);
      adj_[j].erase(i);
      deleted = true;
    }
  }
  if (!deleted) return;

  // The served user's component may have split; rebuild it from a BFS over
  // the surviving edges restricted to the old member set.
  const int old_id = comp_id_[i];
  std::vector<int> old_members = comps_.at(old_id).members;
  comps_.erase(old_id);
  std::vector<std::uint8_t> seen(n_users_, 0);
  for (int s : old_members) {
    if (seen[s]) continue;
    std::vector<int> members;
    std::deque<int> queue{s};
    seen[s] = 1;
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      members.push_back(u);
      for (int v : adj_[u])
        if (!seen[v]) {
          seen[v] = 1;
          queue.push_back(v);
        }
    }
    std::sort(members.begin(), members.end());
    build_component_from(members, next_comp_id_++);
  }
}

// ---------------------------------------------------------------- DynUCB ---

void DynUcbConfig::validate(int n_users) const {
  if (clusters < 1 || clusters > n_users)
    throw ConfigError("dynucb.clusters must lie in [1, n_users]");
}

DynUcbPolicy::DynUcbPolicy(int n_users, int dim, PolicyConfig cfg,
                           DynUcbConfig dyn)
    : n_users_(n_users), dim_(dim), cfg_(cfg) {
  if (n_users < 1 || dim < 1) throw std::invalid_argument("DynUcbPolicy: bad sizes");
  cfg_.validate();
  dyn.validate(n_users);
  states_.reserve(n_users);
  for (int j = 0; j < n_users; ++j)
    states_.push_back(CorrelationState::new_identity(dim));
  proxies_ = Eigen::MatrixXd::Zero(n_users, dim);

  clusters_.resize(dyn.clusters);
  for (auto& cl : clusters_) {
    cl.m_agg = Eigen::MatrixXd::Identity(dim_, dim_);
    cl.b_agg = Eigen::VectorXd::Zero(dim_);
    cl.centroid_sum = Eigen::VectorXd::Zero(dim_);
    cl.count = 0;
  }
  assign_.resize(n_users);
  for (int j = 0; j < n_users; ++j) {
    assign_[j] = j % dyn.clusters;  // round-robin start
    clusters_[assign_[j]].count += 1;
  }
}

void DynUcbPolicy::check_user(int user) const {
  if (user < 0 || user >= n_users_)
    throw std::invalid_argument("DynUcbPolicy: user index out of range");
}

int DynUcbPolicy::cluster_of(int user) const {
  check_user(user);
  return assign_[user];
}

std::vector<int> DynUcbPolicy::cluster_members(int cluster) const {
  if (cluster < 0 || cluster >= n_clusters())
    throw std::invalid_argument("cluster index out of range");
  std::vector<int> members;
  for (int j = 0; j < n_users_; ++j)
    if (assign_[j] == cluster) members.push_back(j);
  return members;
}

const CorrelationState& DynUcbPolicy::user_state(int user) const {
  check_user(user);
  return states_[user];
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> DynUcbPolicy::recompute_cluster(
    int cluster) const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(dim_, dim_);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(dim_);
  for (int j : cluster_members(cluster)) {
    m += states_[j].gram - Eigen::MatrixXd::Identity(dim_, dim_);
    b += states_[j].xty;
  }
  return {m, b};
}

std::pair<const Eigen::MatrixXd&, const Eigen::VectorXd&>
DynUcbPolicy::cluster_aggregates(int cluster) const {
  if (cluster < 0 || cluster >= n_clusters())
    throw std::invalid_argument("cluster index out of range");
  return {clusters_[cluster].m_agg, clusters_[cluster].b_agg};
}

DynUcbPolicy::Cluster& DynUcbPolicy::ensure_factor(int cluster) {
  Cluster& cl = clusters_[cluster];
  if (cl.factor_dirty) {
    Eigen::LLT<Eigen::MatrixXd> llt(cl.m_agg);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("DynUcbPolicy: cluster factorization failed");
    cl.m_inv = llt.solve(Eigen::MatrixXd::Identity(dim_, dim_));
    cl.m_inv = ((cl.m_inv + cl.m_inv.transpose()) * 0.5).eval();
    cl.w = cl.m_inv * cl.b_agg;
    cl.factor_dirty = false;
  }
  return cl;
}

int DynUcbPolicy::select(const RoundInput& input) {
  check_round_input(input, dim_, n_users_);
  Cluster& cl = ensure_factor(assign_[input.user]);
  std::vector<double> scores(input.candidates.size());
  for (std::size_t k = 0; k < scores.size(); ++k) {
    const Eigen::VectorXd& x = input.candidates[k].features;
    double quad = x.dot(cl.m_inv * x);
    scores[k] =
        cl.w.dot(x) + width_from_quad(cfg_, quad, input.t, dim_, n_users_);
  }
  return argmax_lowest_index(scores);
}

void DynUcbPolicy::observe(const RoundInput& input, const RoundOutcome& outcome) {
  check_round_input(input, dim_, n_users_);
  check_round_outcome(input, outcome);
  const int i = input.user;
  const Eigen::VectorXd& x = input.candidates[outcome.chosen_index].features;

  const Eigen::VectorXd old_proxy = proxies_.row(i).transpose();
  states_[i].rank_one_update(x, outcome.payoff);
  proxies_.row(i) = states_[i].proxy().transpose();
  const Eigen::VectorXd new_proxy = proxies_.row(i).transpose();

  Cluster& cl = clusters_[assign_[i]];
  cl.m_agg.noalias() += x * x.transpose();
  cl.b_agg.noalias() += outcome.payoff * x;
  cl.centroid_sum += new_proxy - old_proxy;
  cl.factor_dirty = true;

  // Migrate to the nearest centroid (mean member proxy, zero when empty).
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n_clusters(); ++k) {
    const Cluster& ck = clusters_[k];
    Eigen::VectorXd centroid =
        ck.count > 0 ? Eigen::VectorXd(ck.centroid_sum / ck.count)
                     : Eigen::VectorXd(Eigen::VectorXd::Zero(dim_));
    const double dist = (new_proxy - centroid).norm();
    if (dist < best_dist) {
      best_dist = dist;
      best = k;
    }
  }
  if (best != assign_[i]) {
    Cluster& from = clusters_[assign_[i]];
    Cluster& to = clusters_[best];
    const Eigen::MatrixXd delta_m =
        states_[i].gram - Eigen::MatrixXd::Identity(dim_, dim_);
    from.m_agg -= delta_m;
    from.b_agg -= states_[i].xty;
    from.centroid_sum -= new_proxy;
    from.count -= 1;
    from.factor_dirty = true;
    to.m_agg += delta_m;
    to.b_agg += states_[i].xty;
    to.centroid_sum += new_proxy;
    to.count += 1;
    to.factor_dirty = true;
    assign_[i] = best;
  }
}

}  // namespace cab
