#include "cql/cql_learn.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace cql {

namespace {

void check_input(const LearnInput& input) {
  bool empirical = input.model != nullptr;
  bool exact = input.mdp != nullptr && input.behavior != nullptr;
  if (empirical == exact)
    throw std::invalid_argument(
        "cql_learn: provide either an empirical model or an MDP with behavior");
}

int states_of(const LearnInput& input) {
  return input.model ? input.model->shape.n_states : input.mdp->n_states;
}

int actions_of(const LearnInput& input) {
  return input.model ? input.model->shape.n_actions : input.mdp->n_actions;
}

const Matrix& behavior_probs(const LearnInput& input) {
  return input.model ? input.model->pi_beta_hat.probs : input.behavior->probs;
}

double logsumexp_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  double m = row.maxCoeff();
  return m + std::log((row.array() - m).exp().sum());
}

double weighted_logsumexp_row(const Eigen::Ref<const Eigen::RowVectorXd>& row,
                              const Eigen::Ref<const Eigen::RowVectorXd>& weights) {
  double m = row.maxCoeff();
  double acc = (weights.array() * (row.array() - m).exp()).sum();
  if (acc <= 0.0)
    throw std::invalid_argument("cql_objective_value: prior row has no mass");
  return m + std::log(acc);
}

// State weights for the objective: empirical visit frequency, or the
// behavior's discounted marginal when learning against the true MDP.
Vector state_weights(const LearnInput& input) {
  if (input.model) {
    double total = input.model->state_counts.sum();
    if (total <= 0.0)
      throw std::invalid_argument("cql_objective_value: empty model");
    return input.model->state_counts / total;
  }
  return discounted_state_marginal(*input.mdp, *input.behavior);
}

Matrix rho_prior_probs(const CqlLearnConfig& config, const LearnInput& input,
                       const Policy* prev_policy, int S, int A) {
  switch (config.rho_prior) {
    case RhoPrior::Uniform:
      return Matrix::Constant(S, A, 1.0 / A);
    case RhoPrior::PreviousPolicy:
      if (!prev_policy)
        throw std::invalid_argument("cql_learn: Rho prior needs the previous policy");
      return prev_policy->probs;
    case RhoPrior::Behavior:
      return behavior_probs(input);
  }
  throw std::invalid_argument("cql_learn: unknown rho prior");
}

Matrix var_weight_probs(const CqlLearnConfig& config, const LearnInput& input,
                        int S, int A) {
  if (config.var_weight == VarWeight::Uniform)
    return Matrix::Constant(S, A, 1.0 / A);
  if (!input.model)
    throw std::invalid_argument(
        "cql_learn: inverse-count weights need an empirical model");
  Matrix w = Matrix::Zero(S, A);
  for (int s = 0; s < S; ++s) {
    double mass = 0.0;
    for (int a = 0; a < A; ++a)
      if (input.model->visited(s, a)) {
        w(s, a) = 1.0 / input.model->counts(s, a);
        mass += w(s, a);
      }
    if (mass > 0.0)
      w.row(s) /= mass;
    else
      w.row(s).setConstant(1.0 / A);
  }
  return w;
}

}  // namespace

LearnState initial_learn_state(const CqlLearnConfig& config, const LearnInput& input) {
  check_input(input);
  LearnState st;
  st.q = QTable(states_of(input), actions_of(input));
  st.policy = uniform_policy(states_of(input), actions_of(input));
  st.alpha = config.alpha;
  return st;
}

Policy mu_from_regularizer(const CqlLearnConfig& config, const QTable& q,
                           const Policy& prev_policy, const LearnInput& input) {
  check_input(input);
  const int S = states_of(input), A = actions_of(input);
  if (q.q.rows() != S || q.q.cols() != A)
    throw std::invalid_argument("mu_from_regularizer: q shape mismatch");
  switch (config.regularizer) {
    case Regularizer::H:
      return soft_policy_from_q(q, 1.0);
    case Regularizer::Rho: {
      Matrix prior = rho_prior_probs(config, input, &prev_policy, S, A);
      Matrix probs(S, A);
      for (int s = 0; s < S; ++s) {
        double m = q.q.row(s).maxCoeff();
        Eigen::RowVectorXd e =
            prior.row(s).array() * (q.q.row(s).array() - m).exp();
        double sum = e.sum();
        if (sum <= 0.0)
          throw std::invalid_argument("mu_from_regularizer: prior row has no mass");
        probs.row(s) = e / sum;
      }
      return Policy(std::move(probs));
    }
    case Regularizer::Var:
      return Policy(var_weight_probs(config, input, S, A));
  }
  throw std::invalid_argument("mu_from_regularizer: unknown regularizer");
}

QTable cql_learn_critic(const CqlLearnConfig& config, const LearnInput& input,
                        const LearnState& state, const Policy& mu) {
  check_input(input);
  const int S = states_of(input), A = actions_of(input);
  QTable backup =
      input.model
          ? (config.backup == LearnBackup::PolicyEval
                 ? empirical_bellman_policy_op(*input.model, state.policy, state.q)
                 : empirical_bellman_optimality_op(*input.model, state.q))
          : (config.backup == LearnBackup::PolicyEval
                 ? bellman_policy_op(*input.mdp, state.policy, state.q)
                 : bellman_optimality_op(*input.mdp, state.q));
  const Matrix& beta = behavior_probs(input);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      if (input.model && !input.model->visited(s, a)) continue;  // floor stands
      double b = beta(s, a);
      if (b <= 0.0) {
        if (mu.probs(s, a) > 0.0)
          throw std::invalid_argument("cql_learn_critic: support violation at (" +
                                      std::to_string(s) + "," + std::to_string(a) +
                                      ")");
        continue;
      }
      backup.q(s, a) -= state.alpha * (mu.probs(s, a) - b) / b;
    }
  return backup;
}

LearnState cql_learn_step(const CqlLearnConfig& config, const LearnInput& input,
                          const LearnState& state) {
  Policy mu = mu_from_regularizer(config, state.q, state.policy, input);
  LearnState next;
  next.q = cql_learn_critic(config, input, state, mu);
  Policy actor_target = config.actor == ActorKind::SoftGreedy
                            ? soft_policy_from_q(next.q, config.temperature)
                            : greedy_policy_from_q(next.q);
  next.policy = Policy((1.0 - config.policy_step) * state.policy.probs +
                       config.policy_step * actor_target.probs);
  next.alpha = state.alpha;
  if (config.alpha_mode == AlphaMode::Lagrange) {
    double gap = cql_objective_value(config, next.q, input, &state.policy);
    next.alpha = lagrange_alpha_update(state.alpha, gap, config.tau, config.dual_step);
  }
  return next;
}

double cql_objective_value(const CqlLearnConfig& config, const QTable& q,
                           const LearnInput& input, const Policy* prev_policy) {
  check_input(input);
  const int S = states_of(input), A = actions_of(input);
  if (q.q.rows() != S || q.q.cols() != A)
    throw std::invalid_argument("cql_objective_value: q shape mismatch");
  Vector w = state_weights(input);
  const Matrix& beta = behavior_probs(input);
  Matrix aux;  // prior rows (Rho) or spread weights (Var)
  if (config.regularizer == Regularizer::Rho)
    aux = rho_prior_probs(config, input, prev_policy, S, A);
  else if (config.regularizer == Regularizer::Var)
    aux = var_weight_probs(config, input, S, A);
  double total = 0.0;
  for (int s = 0; s < S; ++s) {
    if (w(s) <= 0.0) continue;
    double behaved = beta.row(s).dot(q.q.row(s));
    double maximized = 0.0;
    switch (config.regularizer) {
      case Regularizer::H:
        maximized = logsumexp_row(q.q.row(s));
        break;
      case Regularizer::Rho:
        maximized = weighted_logsumexp_row(q.q.row(s), aux.row(s));
        break;
      case Regularizer::Var: {
        double mean = aux.row(s).dot(q.q.row(s));
        double var = (aux.row(s).array() * (q.q.row(s).array() - mean).square()).sum();
        double n = input.model ? std::max(input.model->state_counts(s), 1.0) : 1.0;
        maximized = mean + std::sqrt(2.0 * config.robust_delta * var / n);
        break;
      }
    }
    total += w(s) * (maximized - behaved);
  }
  return total;
}

double lagrange_alpha_update(double alpha, double gap, double tau, double dual_step) {
  return std::max(0.0, alpha + dual_step * (gap - tau));
}

LearnResult run_cql(const CqlLearnConfig& config, const LearnInput& input,
                    const LearnObserver& observer) {
  check_input(input);
  if (config.iters <= 0)
    throw std::invalid_argument("run_cql: iters must be positive");
  if (!(config.policy_step > 0.0 && config.policy_step <= 1.0))
    throw std::invalid_argument("run_cql: policy_step must lie in (0, 1]");
  LearnState state = initial_learn_state(config, input);

  const TabularMdp* reference = input.reference_mdp;
  TabularMdp model_mdp;
  const TabularMdp* hat = nullptr;
  if (input.model) {
    if (reference) {
      model_mdp = empirical_mdp(*input.model, reference->initial_dist);
      hat = &model_mdp;
    }
  } else {
    hat = input.mdp;
  }

  LearnResult result;
  result.trace.rows.reserve(config.iters);
  for (int k = 1; k <= config.iters; ++k) {
    Policy mu = mu_from_regularizer(config, state.q, state.policy, input);
    LearnState next = cql_learn_step(config, input, state);
    LearnTraceRow row;
    row.k = k;
    row.q_mean = next.q.q.mean();
    row.q_min = next.q.q.minCoeff();
    row.q_max = next.q.q.maxCoeff();
    row.alpha = state.alpha;
    row.gap = cql_objective_value(config, next.q, input, &state.policy);
    row.dtv = total_variation(next.policy, state.policy).maxCoeff();
    double nan = std::numeric_limits<double>::quiet_NaN();
    row.j_hat_m = hat ? return_j(*hat, next.policy) : nan;
    row.j_m = reference ? return_j(*reference, next.policy) : nan;
    result.trace.rows.push_back(row);
    if (observer) observer(state, mu, next, k);
    state = std::move(next);
  }
  result.policy = state.policy;
  result.q = state.q;
  return result;
}

}  // namespace cql
