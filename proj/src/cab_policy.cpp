#include "cab/cab_policy.hpp"

#include <cmath>
#include <stdexcept>

namespace cab {

CabPolicy::CabPolicy(int n_users, int dim, PolicyConfig cfg, ExecMode mode)
    : dim_(dim), cfg_(cfg), mode_(mode) {
  if (n_users < 1) throw std::invalid_argument("CabPolicy: need >= 1 user");
  if (dim < 1) throw std::invalid_argument("CabPolicy: dimension must be >= 1");
  cfg_.validate();
  states_.reserve(n_users);
  for (int j = 0; j < n_users; ++j) states_.push_back(CorrelationState::new_identity(dim));
  proxies_ = Eigen::MatrixXd::Zero(n_users, dim);
  alive_.assign(n_users, 1);
  ever_updated_.assign(n_users, 0);
}

void CabPolicy::check_user(int user) const {
  if (user < 0 || user >= n_users() || !alive_[user])
    throw std::invalid_argument("CabPolicy: user index not active");
}

bool CabPolicy::is_active(int user) const {
  return user >= 0 && user < n_users() && alive_[user];
}

bool CabPolicy::ever_updated(int user) const {
  check_user(user);
  return ever_updated_[user] != 0;
}

const CorrelationState& CabPolicy::user_state(int user) const {
  check_user(user);
  return states_[user];
}

void CabPolicy::set_user_state(int user, CorrelationState st) {
  check_user(user);
  if (st.dim() != dim_)
    throw std::invalid_argument("CabPolicy: state dimension mismatch");
  states_[user] = std::move(st);
  proxies_.row(user) = states_[user].proxy().transpose();
  ever_updated_[user] = states_[user].n_updates > 0 ? 1 : 0;
  cache_.valid = false;
}

int CabPolicy::add_user() {
  states_.push_back(CorrelationState::new_identity(dim_));
  proxies_.conservativeResize(proxies_.rows() + 1, Eigen::NoChange);
  proxies_.row(proxies_.rows() - 1).setZero();
  alive_.push_back(1);
  ever_updated_.push_back(0);
  cache_.valid = false;
  return n_users() - 1;
}

void CabPolicy::remove_user(int user) {
  check_user(user);
  alive_[user] = 0;
  cache_.valid = false;
}

std::vector<std::uint8_t> CabPolicy::eligibility_mask(int served) const {
  std::vector<std::uint8_t> eligible(alive_);
  if (cfg_.warm_user_filter)
    for (int j = 0; j < n_users(); ++j)
      if (j != served && !ever_updated_[j]) eligible[j] = 0;
  eligible[served] = 1;
  return eligible;
}

std::pair<int, std::vector<NeighborhoodEstimate>> CabPolicy::select_with_estimates(
    const RoundInput& input) {
  check_round_input(input, dim_, n_users());
  check_user(input.user);

  // Widths are needed only for users eligible for membership.
  const std::vector<std::uint8_t> eligible = eligibility_mask(input.user);

  cache_.valid = false;
  score_all_users(states_, proxies_, input.candidates, input.t, cfg_,
                  n_users(), eligible, mode_, cache_.table);

  const int c = static_cast<int>(input.candidates.size());
  std::vector<NeighborhoodEstimate> estimates;
  estimates.reserve(c);
  std::vector<double> scores(c);
  for (int k = 0; k < c; ++k) {
    estimates.push_back(
        neighborhood_from_scores(input.user, k, cache_.table, eligible));
    scores[k] = estimates[k].proj + estimates[k].width;
  }
  const int chosen = argmax_lowest_index(scores);

  cache_.valid = true;
  cache_.t = input.t;
  cache_.user = input.user;
  cache_.chosen = chosen;
  cache_.estimates = estimates;
  return {chosen, std::move(estimates)};
}

int CabPolicy::select(const RoundInput& input) {
  return select_with_estimates(input).first;
}

void CabPolicy::apply_update(int user, const Eigen::VectorXd& x, double y) {
  states_[user].rank_one_update(x, y);
  proxies_.row(user) = states_[user].proxy().transpose();
  ever_updated_[user] = 1;
}

void CabPolicy::observe(const RoundInput& input, const RoundOutcome& outcome) {
  check_round_outcome(input, outcome);
  if (!cache_.valid || cache_.t != input.t || cache_.user != input.user ||
      cache_.chosen != outcome.chosen_index)
    throw std::logic_error(
        "CabPolicy::observe: no matching selection cached for this round");

  const int k = outcome.chosen_index;
  const Eigen::VectorXd& x = input.candidates[k].features;
  const double gate = cfg_.gamma / 4.0;

  if (cache_.table.width(input.user, k) >= gate) {
    apply_update(input.user, x, outcome.payoff);
  } else {
    for (int j : cache_.estimates[k].members)
      if (cache_.table.width(j, k) < gate) apply_update(j, x, outcome.payoff);
  }
  cache_.valid = false;
}

double CabPolicy::confidence_width(int user, const Eigen::VectorXd& x,
                                   std::int64_t t) const {
  check_user(user);
  return width_from_quad(cfg_, states_[user].quad_form(x), t, dim_, n_users());
}

NeighborhoodEstimate CabPolicy::estimate_neighborhood(int served,
                                                      const Eigen::VectorXd& x,
                                                      std::int64_t t) const {
  check_user(served);
  if (x.size() != dim_) throw std::invalid_argument("context dimension mismatch");

  const std::vector<std::uint8_t> eligible = eligibility_mask(served);
  std::vector<ContextVector> one{{-1, x}};
  ScoreTable table;
  score_all_users(states_, proxies_, one, t, cfg_, n_users(), eligible, mode_,
                  table);
  return neighborhood_from_scores(served, 0, table, eligible);
}

Eigen::VectorXd CabPolicy::neighborhood_proxy(const std::vector<int>& members) const {
  if (members.empty()) throw std::invalid_argument("empty member set");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim_);
  for (int j : members) {
    check_user(j);
    sum += proxies_.row(j).transpose();
  }
  return sum / static_cast<double>(members.size());
}

}  // namespace cab
