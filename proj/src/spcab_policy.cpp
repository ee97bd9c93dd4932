#include "cab/spcab_policy.hpp"

#include <cmath>
#include <stdexcept>

namespace cab {

namespace {

double sparse_width_from_quad(const PolicyConfig& cfg, const SparseConfig& sp,
                              double quad, std::int64_t t, int dim,
                              int n_users) {
  if (quad < 0.0) quad = 0.0;
  switch (cfg.alpha_schedule) {
    case AlphaSchedule::experimental:
      return cfg.alpha *
             std::sqrt(quad * std::log(1.0 + static_cast<double>(t)));
    case AlphaSchedule::theoretical: {
      const int s_eff = std::min(sp.s, dim);
      return cfg.alpha0 *
             std::sqrt(static_cast<double>(s_eff) *
                       std::log((1.0 + static_cast<double>(t)) *
                                static_cast<double>(n_users) / cfg.delta)) *
             std::sqrt(quad);
    }
  }
  throw std::logic_error("unknown alpha schedule");
}

}  // namespace

double sparse_confidence_width(const PolicyConfig& cfg,
                               const SparseConfig& sparse,
                               const SparseDesign& design,
                               const std::vector<int>& support,
                               const Eigen::VectorXd& x, std::int64_t t,
                               int n_users) {
  const double quad = sparse_quad_form(design, support, x);
  return sparse_width_from_quad(cfg, sparse, quad, t, design.dim(), n_users);
}

SpCabPolicy::SpCabPolicy(int n_users, int dim, PolicyConfig cfg,
                         SparseConfig sparse, ExecMode mode)
    : dim_(dim), cfg_(cfg), sparse_(sparse), mode_(mode) {
  if (n_users < 1) throw std::invalid_argument("SpCabPolicy: need >= 1 user");
  if (dim < 1) throw std::invalid_argument("SpCabPolicy: dimension must be >= 1");
  cfg_.validate();
  sparse_.validate();
  users_.reserve(n_users);
  for (int j = 0; j < n_users; ++j) users_.emplace_back(dim);
  proxies_ = Eigen::MatrixXd::Zero(n_users, dim);
}

void SpCabPolicy::check_user(int user) const {
  if (user < 0 || user >= n_users())
    throw std::invalid_argument("SpCabPolicy: user index out of range");
}

void SpCabPolicy::refresh_solution(int user) {
  UserRecord& rec = users_[user];
  if (rec.solver_ran && rec.solved_version == rec.design.version()) return;
  if (rec.design.size() == 0) {
    rec.weights.setZero();
    rec.support.clear();
  } else {
    HtResult ht = two_stage_ht(rec.design, sparse_);
    rec.weights = std::move(ht.weights);
    rec.support = std::move(ht.support);
  }
  proxies_.row(user) = rec.weights.transpose();
  rec.solved_version = rec.design.version();
  rec.solver_ran = true;
}

void SpCabPolicy::refresh_all_dirty(const std::vector<std::uint8_t>& eligible) {
  const int n = n_users();
  if (mode_ == ExecMode::parallel) {
#pragma omp parallel for schedule(static)
    for (int j = 0; j < n; ++j)
      if (eligible[j]) refresh_solution(j);
  } else {
    for (int j = 0; j < n; ++j)
      if (eligible[j]) refresh_solution(j);
  }
}

std::vector<std::uint8_t> SpCabPolicy::eligibility_mask(int served) const {
  std::vector<std::uint8_t> eligible(n_users(), 1);
  if (cfg_.warm_user_filter)
    for (int j = 0; j < n_users(); ++j)
      if (j != served && users_[j].design.size() == 0) eligible[j] = 0;
  return eligible;
}

std::pair<int, std::vector<NeighborhoodEstimate>>
SpCabPolicy::select_with_estimates(const RoundInput& input) {
  check_round_input(input, dim_, n_users());
  const std::vector<std::uint8_t> eligible = eligibility_mask(input.user);

  cache_.valid = false;
  refresh_all_dirty(eligible);

  const int n = n_users();
  const int c = static_cast<int>(input.candidates.size());
  cache_.table.resize(n, c);
  auto score_row = [&](int j) {
    const UserRecord& rec = users_[j];
    for (int k = 0; k < c; ++k) {
      const Eigen::VectorXd& x = input.candidates[k].features;
      cache_.table.proj(j, k) = proxies_.row(j).dot(x);
      const double quad = sparse_quad_form(rec.design, rec.support, x);
      cache_.table.width(j, k) =
          sparse_width_from_quad(cfg_, sparse_, quad, input.t, dim_, n);
    }
  };
  if (mode_ == ExecMode::parallel) {
#pragma omp parallel for schedule(static)
    for (int j = 0; j < n; ++j)
      if (eligible[j]) score_row(j);
  } else {
    for (int j = 0; j < n; ++j)
      if (eligible[j]) score_row(j);
  }

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

int SpCabPolicy::select(const RoundInput& input) {
  return select_with_estimates(input).first;
}

void SpCabPolicy::observe(const RoundInput& input, const RoundOutcome& outcome) {
  check_round_outcome(input, outcome);
  if (!cache_.valid || cache_.t != input.t || cache_.user != input.user ||
      cache_.chosen != outcome.chosen_index)
    throw std::logic_error(
        "SpCabPolicy::observe: no matching selection cached for this round");

  const int k = outcome.chosen_index;
  const Eigen::VectorXd& x = input.candidates[k].features;
  const double gate = cfg_.gamma / 4.0;

  if (cache_.table.width(input.user, k) >= gate) {
    users_[input.user].design.add(x, outcome.payoff);
  } else {
    for (int j : cache_.estimates[k].members)
      if (cache_.table.width(j, k) < gate) users_[j].design.add(x, outcome.payoff);
  }
  cache_.valid = false;
}

double SpCabPolicy::confidence_width(int user, const Eigen::VectorXd& x,
                                     std::int64_t t) {
  check_user(user);
  refresh_solution(user);
  const UserRecord& rec = users_[user];
  const double quad = sparse_quad_form(rec.design, rec.support, x);
  return sparse_width_from_quad(cfg_, sparse_, quad, t, dim_, n_users());
}

const SparseDesign& SpCabPolicy::user_design(int user) const {
  check_user(user);
  return users_[user].design;
}

const Eigen::VectorXd& SpCabPolicy::user_weights(int user) {
  check_user(user);
  refresh_solution(user);
  return users_[user].weights;
}

const std::vector<int>& SpCabPolicy::user_support(int user) {
  check_user(user);
  refresh_solution(user);
  return users_[user].support;
}

}  // namespace cab
