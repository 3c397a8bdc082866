#include "cql/types.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cql {

namespace {

constexpr double kRowSumTol = 1e-12;

void check_distribution_row(const Eigen::Ref<const Eigen::RowVectorXd>& row,
                            const std::string& what) {
  double sum = 0.0;
  for (int i = 0; i < row.size(); ++i) {
    double p = row(i);
    if (!std::isfinite(p) || p < 0.0)
      throw std::invalid_argument(what + ": entry " + std::to_string(i) +
                                  " is negative or non-finite");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kRowSumTol)
    throw std::invalid_argument(what + ": row sums to " + std::to_string(sum) +
                                ", expected 1 within 1e-12");
}

}  // namespace

TabularMdp::TabularMdp(int states, int actions, Matrix t, Matrix r, double g,
                       Vector rho0, double rmax, std::string mdp_id)
    : n_states(states),
      n_actions(actions),
      transition(std::move(t)),
      reward(std::move(r)),
      gamma(g),
      initial_dist(std::move(rho0)),
      r_max(rmax),
      id(std::move(mdp_id)) {
  validate();
}

void TabularMdp::validate() const {
  if (n_states <= 0 || n_actions <= 0)
    throw std::invalid_argument("TabularMdp: need n_states > 0 and n_actions > 0");
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("TabularMdp: gamma must lie in (0, 1)");
  if (!(r_max > 0.0) || !std::isfinite(r_max))
    throw std::invalid_argument("TabularMdp: r_max must be positive and finite");
  const int sa = n_states * n_actions;
  if (transition.rows() != sa || transition.cols() != n_states)
    throw std::invalid_argument("TabularMdp: transition must be (S*A) x S");
  if (reward.rows() != n_states || reward.cols() != n_actions)
    throw std::invalid_argument("TabularMdp: reward must be S x A");
  if (initial_dist.size() != n_states)
    throw std::invalid_argument("TabularMdp: initial_dist must have length S");
  for (int i = 0; i < sa; ++i)
    check_distribution_row(transition.row(i),
                           "TabularMdp transition row " + std::to_string(i));
  check_distribution_row(initial_dist.transpose(), "TabularMdp initial_dist");
  for (int s = 0; s < n_states; ++s)
    for (int a = 0; a < n_actions; ++a) {
      double r = reward(s, a);
      if (!std::isfinite(r) || std::abs(r) > r_max + 1e-12)
        throw std::invalid_argument(
            "TabularMdp: reward(" + std::to_string(s) + "," + std::to_string(a) +
            ") = " + std::to_string(r) + " outside [-r_max, r_max]");
    }
}

Policy::Policy(Matrix p) : probs(std::move(p)) { validate(); }

void Policy::validate() const {
  if (probs.rows() <= 0 || probs.cols() <= 0)
    throw std::invalid_argument("Policy: empty probability table");
  for (int s = 0; s < probs.rows(); ++s)
    check_distribution_row(probs.row(s), "Policy row " + std::to_string(s));
}

Policy uniform_policy(int n_states, int n_actions) {
  return Policy(Matrix::Constant(n_states, n_actions, 1.0 / n_actions));
}

QTable clamp_q(const QTable& q, double r_max, double gamma) {
  double lim = value_clamp_limit(r_max, gamma);
  QTable out = q;
  out.q = out.q.cwiseMax(-lim).cwiseMin(lim);
  return out;
}

}  // namespace cql
